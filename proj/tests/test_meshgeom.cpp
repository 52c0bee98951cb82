#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "hmvem/errors.hpp"
#include "hmvem/generators.hpp"
#include "hmvem/mesh.hpp"
#include "hmvem/mesh_io.hpp"
#include "hmvem/quadrature.hpp"

using namespace hmvem;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

PolytopalMesh polygon(const std::vector<std::pair<double, double>>& pts) {
  std::vector<Eigen::VectorXd> v;
  std::vector<int> loop;
  for (const auto& [x, y] : pts) {
    loop.push_back(static_cast<int>(v.size()));
    v.push_back(vec({x, y}));
  }
  return PolytopalMesh(polygons_to_raw(v, {loop}));
}

// Integral of x^a y^b over a polygon through the divergence theorem:
// (1/(a+1)) sum over edges of int x^{a+1} y^b n_x ds, Gauss on each edge.
double polygon_moment(const std::vector<Eigen::VectorXd>& loop, int a, int b) {
  const auto& gl = gauss_legendre(20);
  double s = 0.0;
  for (std::size_t i = 0; i < loop.size(); ++i) {
    const Eigen::VectorXd& p = loop[i];
    const Eigen::VectorXd& q = loop[(i + 1) % loop.size()];
    const double nx_ds = q[1] - p[1];  // counterclockwise: n ds = (dy, -dx)
    for (std::size_t g = 0; g < gl.nodes.size(); ++g) {
      const Eigen::VectorXd x = p + gl.nodes[g] * (q - p);
      s += gl.weights[g] * std::pow(x[0], a + 1) * std::pow(x[1], b) * nx_ds;
    }
  }
  return s / (a + 1);
}

// Unscaled integral of x^beta from a scaled moment table.
double unscaled(const MomentTable& t, const MultiIndex& beta) {
  const auto& c = t.coords();
  const int n = beta.dim();
  // expand prod (c_i + h xi_i)^beta_i
  double s = 0.0;
  for (const auto& a : multi_indices_up_to(n, beta.order())) {
    if (!beta.dominates(a)) continue;
    double w = std::pow(c.scale, a.order());
    for (int i = 0; i < n; ++i) w *= static_cast<double>(binomial(beta[i], a[i])) * std::pow(c.center[i], beta[i] - a[i]);
    s += w * t(a);
  }
  return s;
}

std::string temp_path(const std::string& name) { return "/tmp/hmvem_test_" + name; }

}  // namespace

TEST_CASE("lattice of a unit square") {
  const PolytopalMesh m = square_grid(1);
  CHECK(m.count(0) == 1);
  CHECK(m.count(1) == 4);
  CHECK(m.count(2) == 4);
  CHECK(m.entity(0, 0).measure == doctest::Approx(1.0));
  CHECK(m.entity(0, 0).cycle.size() == 4);
}

TEST_CASE("shared edges of a 2x1 quad mesh") {
  const std::vector<Eigen::VectorXd> v{vec({0, 0}), vec({1, 0}), vec({2, 0}), vec({0, 1}), vec({1, 1}), vec({2, 1})};
  const PolytopalMesh m(polygons_to_raw(v, {{0, 1, 4, 3}, {1, 2, 5, 4}}));
  CHECK(m.count(1) == 7);
  int shared = 0;
  for (int e = 0; e < m.count(1); ++e) {
    const auto& ent = m.entity(1, e);
    if (ent.elements.size() == 2) {
      ++shared;
      CHECK(ent.vertices == std::vector<int>{1, 4});
    }
  }
  CHECK(shared == 1);
}

TEST_CASE("lattice of a unit cube") {
  const PolytopalMesh m = cube_grid(1);
  CHECK(m.count(0) == 1);
  CHECK(m.count(1) == 6);
  CHECK(m.count(2) == 12);
  CHECK(m.count(3) == 8);
  for (int e = 0; e < m.count(2); ++e) {
    CHECK(m.entity(2, e).frame.normals.size() == 2);
    CHECK(m.entity(2, e).frame.tangents.size() == 1);
    CHECK_NOTHROW(m.entity(2, e).frame.validate());
  }
  CHECK(m.entity(0, 0).measure == doctest::Approx(1.0));
  // outward normals point away from the center
  const auto& cell = m.entity(0, 0);
  for (std::size_t f = 0; f < cell.boundary.size(); ++f)
    CHECK(cell.outward[f].dot(m.entity(1, cell.boundary[f]).barycenter - cell.barycenter) > 0.0);
}

TEST_CASE("monomial moments") {
  const PolytopalMesh sq = square_grid(1);
  CHECK(sq.quadrature(0, 0, 2).integrate([](const Eigen::VectorXd& x) { return x[0] * x[1]; }) ==
        doctest::Approx(0.25));
  CHECK(unscaled(*sq.moments(0, 0, 2), MultiIndex({1, 1})) == doctest::Approx(0.25));

  const PolytopalMesh tri = polygon({{0, 0}, {1, 0}, {0, 1}});
  CHECK(unscaled(*tri.moments(0, 0, 1), MultiIndex({1, 0})) == doctest::Approx(1.0 / 6));

  const PolytopalMesh cube = cube_grid(1);
  CHECK(unscaled(*cube.moments(0, 0, 2), MultiIndex({2, 0, 0})) == doctest::Approx(1.0 / 3));
  CHECK(unscaled(*cube.moments(0, 0, 4), MultiIndex({2, 1, 1})) == doctest::Approx(1.0 / 12));
  CHECK(cube.quadrature(0, 0, 4).integrate([](const Eigen::VectorXd& x) { return x[0] * x[0] * x[1] * x[2]; }) ==
        doctest::Approx(1.0 / 12));
}

TEST_CASE("moments of random star-shaped polygons") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 20; ++trial) {
    const int nv = 5 + trial % 6;
    std::vector<double> angles;
    for (int i = 0; i < nv; ++i) angles.push_back(2 * M_PI * (i + 0.8 * u(rng)) / nv);
    std::vector<std::pair<double, double>> pts;
    std::vector<Eigen::VectorXd> loop;
    for (double a : angles) {
      const double r = 0.4 + 0.6 * u(rng);
      pts.emplace_back(0.3 + r * std::cos(a), -0.1 + r * std::sin(a));
      loop.push_back(vec({pts.back().first, pts.back().second}));
    }
    const PolytopalMesh m = polygon(pts);
    const auto table = m.moments(0, 0, 5);
    for (const auto& beta : multi_indices_up_to(2, 5)) {
      const double oracle = polygon_moment(loop, beta[0], beta[1]);
      CHECK(unscaled(*table, beta) == doctest::Approx(oracle).epsilon(1e-9).scale(1e-3));
    }
    CHECK(m.entity(0, 0).kernel_radius > 0.0);
  }
}

TEST_CASE("moment cache returns the same table") {
  const PolytopalMesh m = hex_dominant(2);
  const auto a = m.moments(0, 1, 4);
  const auto b = m.moments(0, 1, 4);
  CHECK(a == b);
  const auto c = m.moments(0, 1, 6);
  for (const auto& beta : multi_indices_up_to(2, 4)) CHECK(std::abs((*a)(beta) - (*c)(beta)) <= 1e-12 * a->measure());
}

TEST_CASE("simplex quadrature exactness") {
  // int over the unit triangle of x^a y^b = a! b! / (a + b + 2)!
  for (int deg = 0; deg <= 12; ++deg) {
    const QuadratureRule t = triangle_rule(vec({0, 0}), vec({1, 0}), vec({0, 1}), deg);
    const QuadratureRule d = tetrahedron_rule(vec({0, 0, 0}), vec({1, 0, 0}), vec({0, 1, 0}), vec({0, 0, 1}), deg);
    for (const auto& a : multi_indices(2, deg))
      CHECK(t.integrate([&](const Eigen::VectorXd& x) { return std::pow(x[0], a[0]) * std::pow(x[1], a[1]); }) ==
            doctest::Approx(factorial(a[0]) * factorial(a[1]) / factorial(deg + 2)).epsilon(1e-12));
    for (const auto& a : multi_indices(3, deg))
      CHECK(d.integrate([&](const Eigen::VectorXd& x) {
        return std::pow(x[0], a[0]) * std::pow(x[1], a[1]) * std::pow(x[2], a[2]);
      }) == doctest::Approx(factorial(a[0]) * factorial(a[1]) * factorial(a[2]) / factorial(deg + 3)).epsilon(1e-12));
  }
  const QuadratureRule s = segment_rule(vec({1, 1}), vec({4, 5}), 7);
  CHECK(s.integrate([](const Eigen::VectorXd&) { return 1.0; }) == doctest::Approx(5.0));
}

TEST_CASE("shape diagnostics") {
  const MeshDiagnostics sq = check_mesh(square_grid(1));
  CHECK(sq.elements[0].chunkiness == doctest::Approx(2 * std::sqrt(2.0)));
  CHECK(sq.elements[0].kernel_radius == doctest::Approx(0.5));
  CHECK(sq.max_eta == doctest::Approx(std::sqrt(2.0)));
  CHECK(sq.flagged.empty());

  const MeshDiagnostics hex = check_mesh(polygon({{1, 0}, {0.5, 0.8}, {-0.5, 0.8}, {-1, 0}, {-0.5, -0.8}, {0.5, -0.8}}));
  CHECK(hex.elements[0].star_shaped);

  const MeshDiagnostics sliver = check_mesh(polygon({{0, 0}, {1, 0}, {1, 0.01}, {0, 0.01}}));
  CHECK(sliver.elements[0].chunkiness > 100.0);
  CHECK(sliver.flagged == std::vector<int>{0});

  const PolytopalMesh notched = polygon(
      {{0, 0}, {3, 0}, {3, 1}, {1, 1}, {1, 1.2}, {3, 1.2}, {3, 3}, {0, 3}, {0, 2}, {2, 2}, {2, 1.8}, {0, 1.8}});
  const MeshDiagnostics nd = check_mesh(notched);
  CHECK_FALSE(nd.elements[0].star_shaped);
  CHECK(nd.flagged == std::vector<int>{0});
  CHECK_THROWS_AS(notched.quadrature(0, 0, 2), GeometryError);

  for (const std::string& kind : {"square_grid", "distorted_quads", "hex_dominant", "cube_grid"}) {
    const MeshDiagnostics d = check_mesh(generate_mesh(kind, 3, 5));
    CHECK(d.flagged.empty());
    CHECK(d.faces_star_shaped);
  }
}

TEST_CASE("generators") {
  const PolytopalMesh iv = interval_mesh(2);
  REQUIRE(iv.count(0) == 2);
  std::vector<std::pair<double, double>> cells;
  for (int e = 0; e < 2; ++e) {
    const auto& vs = iv.entity(0, e).vertices;
    const double a = iv.vertex(vs[0])[0], b = iv.vertex(vs[1])[0];
    cells.emplace_back(std::min(a, b), std::max(a, b));
  }
  std::sort(cells.begin(), cells.end());
  CHECK(cells[0].first == doctest::Approx(0.0));
  CHECK(cells[0].second == doctest::Approx(0.5));
  CHECK(cells[1].second == doctest::Approx(1.0));

  const PolytopalMesh sq = square_grid(2);
  CHECK(sq.count(0) == 4);
  CHECK(sq.count(1) == 12);
  CHECK(sq.count(2) == 9);

  const RawMesh a = distorted_quads(2, 7).raw(), b = distorted_quads(2, 7).raw(), c = distorted_quads(4, 8).raw();
  CHECK(a.entities == b.entities);
  for (std::size_t i = 0; i < a.vertices.size(); ++i) CHECK((a.vertices[i] - b.vertices[i]).norm() == 0.0);
  CHECK(mesh_to_json(distorted_quads(4, 7)) != mesh_to_json(distorted_quads(4, 8)));
  (void)c;

  for (const std::string& kind : generator_kinds())
    for (int n : {1, 2, 5}) {
      const PolytopalMesh m = generate_mesh(kind, n, 3);
      CHECK(m.dim() == generator_dimension(kind));
      double total = 0.0;
      for (int e = 0; e < m.count(0); ++e) total += m.entity(0, e).measure;
      CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
      CHECK(m.total_measure() == doctest::Approx(1.0).epsilon(1e-10));
      // interior faces have two elements, boundary faces one
      for (int f = 0; f < m.count(1); ++f) {
        const Entity& face = m.entity(1, f);
        bool on_boundary = true;
        for (int i = 0; i < m.dim(); ++i) {
          bool all0 = true, all1 = true;
          for (int v : face.vertices) {
            all0 = all0 && std::abs(m.vertex(v)[i]) < 1e-12;
            all1 = all1 && std::abs(m.vertex(v)[i] - 1.0) < 1e-12;
          }
          if (all0 || all1) {
            on_boundary = true;
            break;
          }
          on_boundary = false;
        }
        CHECK(face.elements.size() == (on_boundary ? 1u : 2u));
      }
    }
  CHECK_THROWS_AS(generate_mesh("voronoi", 3), Error);
}

TEST_CASE("face frames are shared and consistent") {
  for (const std::string& kind : {"hex_dominant", "cube_grid", "distorted_quads"}) {
    const PolytopalMesh m = generate_mesh(kind, 3, 2);
    for (int f = 0; f < m.count(1); ++f) {
      const Entity& face = m.entity(1, f);
      CHECK_NOTHROW(face.frame.validate());
      const Eigen::VectorXd& nu = face.frame.normals[0];
      for (int v : face.vertices) CHECK(std::abs(nu.dot(m.vertex(v) - face.barycenter)) < 1e-12);
      if (face.elements.size() == 2) {
        std::vector<double> signs;
        for (int e : face.elements) {
          const Entity& cell = m.entity(0, e);
          for (std::size_t i = 0; i < cell.boundary.size(); ++i)
            if (cell.boundary[i] == f) signs.push_back(cell.outward[i].dot(nu));
        }
        REQUIRE(signs.size() == 2);
        CHECK(std::abs(signs[0]) == doctest::Approx(1.0));
        CHECK(signs[0] * signs[1] == doctest::Approx(-1.0));
      }
    }
  }
}

TEST_CASE("mesh files") {
  const PolytopalMesh sq = square_grid(3);
  const std::string path = temp_path("sq3.json");
  write_mesh(sq, path);
  const PolytopalMesh back = read_mesh(path);
  CHECK(mesh_to_json(back) == mesh_to_json(sq));
  CHECK(back.raw().entities == sq.raw().entities);

  const auto tri = mesh_from_json(nlohmann::json::parse(
      R"({"dimension": 2, "vertices": [[0,0],[1,0],[0,1]], "entities": [[[0,1,2]], [[0,1],[1,2],[2,0]]]})"));
  CHECK(tri.count(0) == 1);
  CHECK(tri.count(1) == 3);
  CHECK(tri.count(2) == 3);

  try {
    mesh_from_json(nlohmann::json::parse(
        R"({"dimension": 2, "vertices": [[0,0],[1,0],[0,1]], "entities": [[[0,1,2]], [[0,1],[1,2],[2,5]]]})"));
    FAIL("expected a schema error");
  } catch (const SchemaError& e) {
    const std::string what = e.what();
    CHECK(what.find("[2]") != std::string::npos);
    CHECK(what.find("missing") != std::string::npos);
  }

  CHECK_THROWS_AS(mesh_from_json(nlohmann::json::parse(R"({"dimension": 2, "vertices": []})")), SchemaError);
  CHECK_THROWS_AS(mesh_from_json(nlohmann::json::parse(R"([1, 2])")), SchemaError);

  const std::string empty = temp_path("empty.json");
  std::ofstream(empty).close();
  CHECK_THROWS_AS(read_mesh(empty), SchemaError);
  const std::string bad = temp_path("bad.json");
  std::ofstream(bad) << "{not json";
  CHECK_THROWS_AS(read_mesh(bad), SchemaError);
  CHECK_THROWS_AS(read_mesh(temp_path("does_not_exist.json")), SchemaError);
  std::remove(path.c_str());
  std::remove(empty.c_str());
  std::remove(bad.c_str());
}

TEST_CASE("geometry errors") {
  // zero-area polygon
  CHECK_THROWS_AS(polygon({{0, 0}, {1, 0}, {2, 0}}), GeometryError);
  // face shared by three elements
  const std::vector<Eigen::VectorXd> v{vec({0, 0}), vec({1, 0}), vec({0.5, 1}), vec({0.5, -1}), vec({0.5, 2})};
  CHECK_THROWS(PolytopalMesh(polygons_to_raw(v, {{0, 1, 2}, {1, 0, 3}, {0, 1, 4}})));
}

TEST_CASE("chebyshev center of a box") {
  Eigen::MatrixXd a(4, 2);
  a << 1, 0, -1, 0, 0, 1, 0, -1;
  const ChebyshevBall ball = chebyshev_center(a, vec({2, 0, 1, 0}));
  CHECK(ball.radius == doctest::Approx(0.5));
  CHECK(ball.center[1] == doctest::Approx(0.5));
}
