#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <random>
#include <set>
#include <cstring>

#include "hmvem/errors.hpp"
#include "hmvem/femsolve.hpp"
#include "hmvem/generators.hpp"

using namespace hmvem;

namespace {

Eigen::VectorXd point(double x, double y) {
  Eigen::VectorXd p(2);
  p << x, y;
  return p;
}

// g(t) = (t(1-t))^2 and its second derivative
double g(double t) { return std::pow(t * (1 - t), 2); }
double g2(double t) { return 2 - 12 * t + 12 * t * t; }

// Scaled-monomial coefficients of a global function known to lie in the
// element's polynomial space, by least squares at random points.
Eigen::VectorXd fit(const std::function<double(const Eigen::VectorXd&)>& f, const MonomialBasis& b,
                    std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1, 1);
  const int n = b.coords().ambient_dim();
  std::vector<Eigen::VectorXd> pts;
  Eigen::VectorXd rhs(3 * b.size());
  for (int i = 0; i < rhs.size(); ++i) {
    pts.push_back(b.coords().center + b.coords().scale * Eigen::VectorXd::NullaryExpr(n, [&] { return u(rng); }));
    rhs[i] = f(pts.back());
  }
  return b.value_matrix(pts).colPivHouseholderQr().solve(rhs);
}

}  // namespace

TEST_CASE("thread count resolution") {
  CHECK(resolve_threads(3) == 3);
  setenv("HMVEM_THREADS", "2", 1);
  CHECK(resolve_threads(0) == 2);
  CHECK(resolve_threads(5) == 5);
  setenv("HMVEM_THREADS", "two", 1);
  CHECK_THROWS_AS(resolve_threads(0), Error);
  unsetenv("HMVEM_THREADS");
  CHECK(resolve_threads(0) >= 1);
}

TEST_CASE("parallel_for visits each index once") {
  std::vector<std::atomic<int>> hits(100);
  parallel_for(100, 4, [&](int i) { ++hits[static_cast<std::size_t>(i)]; });
  for (const auto& h : hits) CHECK(h.load() == 1);
  CHECK_THROWS_AS(parallel_for(10, 3,
                               [](int i) {
                                 if (i == 7) throw GeometryError("boom");
                               }),
                  GeometryError);
  parallel_for(0, 2, [](int) { FAIL("no work expected"); });
}

TEST_CASE("manufactured cases") {
  const auto bump = make_case("bump", 2, 1);
  for (const auto& x : {point(0.3, 0.6), point(0.9, 0.15)}) {
    const double u = g(x[0]) * g(x[1]);
    CHECK(bump.u(x) == doctest::Approx(u));
    CHECK(bump.f(x) == doctest::Approx(-(g2(x[0]) * g(x[1]) + g(x[0]) * g2(x[1])) + u));
  }
  CHECK(bump.degree == 8);
  // vanishing normal derivative on the boundary
  CHECK(bump.du(point(0.0, 0.4), MultiIndex({1, 0})) == 0.0);

  const auto trig = make_case("trig", 2, 1);
  const Eigen::VectorXd x = point(0.2, 0.7);
  const double u = std::cos(M_PI * 0.2) * std::cos(M_PI * 0.7);
  CHECK(trig.u(x) == doctest::Approx(u));
  CHECK(trig.f(x) == doctest::Approx((2 * M_PI * M_PI + 1) * u));
  CHECK(trig.du(x, MultiIndex({1, 0})) == doctest::Approx(-M_PI * std::sin(M_PI * 0.2) * std::cos(M_PI * 0.7)));
  CHECK(trig.degree == -1);

  const auto poly = make_case("poly:3", 2, 1);
  CHECK(poly.degree == 3);
  CHECK_FALSE(poly.natural);

  CHECK_THROWS_AS(make_case("trig", 2, 2), UnsupportedConfig);
  CHECK_THROWS_AS(make_case("wave", 2, 1), Error);
  CHECK_THROWS_AS(make_case("poly:", 2, 1), Error);
  CHECK_THROWS_AS(make_case("poly:2x", 2, 1), Error);
  CHECK_THROWS_AS(make_case("poly:-1", 2, 1), Error);
}

TEST_CASE("quadrature degrees") {
  CHECK(load_degree(make_case("bump", 2, 1), 2) == 10);
  CHECK(load_degree(make_case("trig", 2, 1), 2) == 8);
  CHECK(error_degree(make_case("bump", 2, 1), 2) == 16);
  CHECK(error_degree(make_case("trig", 2, 1), 2) == 16);
}

TEST_CASE("global dof map") {
  const PolytopalMesh mesh = square_grid(2);
  CHECK(build_dof_map(mesh, {2, 1, 1}).size == 9);
  CHECK(build_dof_map(mesh, {2, 2, 2}).size == 27);
  CHECK(build_dof_map(mesh, {2, 1, 2}).size == 9 + 12 + 4);
  CHECK(build_dof_map(interval_mesh(4), {1, 2, 3}).size == 10);
  const Discretization disc(mesh, {2, 2, 3}, 1);
  const GlobalDofMap& map = disc.dofs();
  // every global dof is used by some cell, and each cell's dofs are distinct
  std::vector<int> used(static_cast<std::size_t>(map.size), 0);
  for (const auto& cell : map.element_dofs) {
    std::set<int> distinct(cell.begin(), cell.end());
    CHECK(distinct.size() == cell.size());
    for (int d : cell) used[static_cast<std::size_t>(d)] = 1;
  }
  CHECK(std::count(used.begin(), used.end(), 1) == map.size);
  CHECK_THROWS_AS(Discretization(mesh, {3, 1, 1}), UnsupportedConfig);
}

TEST_CASE("dofs of a global polynomial agree across shared entities") {
  std::mt19937_64 rng(11);
  for (const char* kind : {"hex_dominant", "cube_grid"}) {
    const PolytopalMesh mesh = generate_mesh(kind, 2);
    const int n = mesh.dim();
    const Discretization disc(mesh, {n, 2, 3}, 1);
    auto p = [](const Eigen::VectorXd& x) {
      double v = 0.4 + x[0] * x[0] * x[1] - 0.7 * x[1] * x[1] * x[1] + x[0];
      if (x.size() == 3) v += x[2] * x[0] * x[1] - x[2] * x[2];
      return v;
    };
    Eigen::VectorXd global = Eigen::VectorXd::Constant(disc.size(), std::nan(""));
    double worst = 0.0;
    for (int e = 0; e < disc.elements(); ++e) {
      const auto& el = disc.element(e);
      const Eigen::VectorXd local = el.dof_map({el.basis(), fit(p, *el.basis(), rng)});
      const auto& ids = disc.dofs().element_dofs[static_cast<std::size_t>(e)];
      for (std::size_t i = 0; i < ids.size(); ++i) {
        double& slot = global[ids[i]];
        if (std::isnan(slot))
          slot = local[static_cast<Eigen::Index>(i)];
        else
          worst = std::max(worst, std::abs(slot - local[static_cast<Eigen::Index>(i)]));
      }
    }
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("assembly is identical across thread counts") {
  const PolytopalMesh mesh = hex_dominant(4);
  const auto c = make_case("bump", 2, 2);
  const Discretization d1(mesh, {2, 2, 3}, 1), d3(mesh, {2, 2, 3}, 3);
  const LinearSystem s1 = assemble(d1, c.f, 12), s3 = assemble(d3, c.f, 12);
  REQUIRE(s1.a.nonZeros() == s3.a.nonZeros());
  CHECK(std::memcmp(s1.a.valuePtr(), s3.a.valuePtr(), sizeof(double) * static_cast<std::size_t>(s1.a.nonZeros())) == 0);
  CHECK(std::memcmp(s1.b.data(), s3.b.data(), sizeof(double) * static_cast<std::size_t>(s1.b.size())) == 0);
  CHECK((Eigen::MatrixXd(s1.a) - Eigen::MatrixXd(s1.a).transpose()).norm() <= 1e-12 * s1.a.norm());
}

TEST_CASE("linear solvers") {
  Eigen::MatrixXd m(3, 3);
  m << 4, 1, 0, 1, 3, 1, 0, 1, 2;
  LinearSystem s{m.sparseView(), Eigen::Vector3d(1, 2, 3)};
  const Eigen::Vector3d want = m.ldlt().solve(s.b);
  for (auto kind : {SolverKind::Automatic, SolverKind::Dense, SolverKind::SparseCholesky, SolverKind::ConjugateGradient}) {
    SolveOptions o;
    o.kind = kind;
    const SolveResult r = solve(s, o);
    CHECK((r.x - want).norm() < 1e-10);
    CHECK(r.relative_residual <= 1e-10);
  }
  Eigen::MatrixXd bad(2, 2);
  bad << 1, 2, 2, 1;  // eigenvalues 3 and -1
  LinearSystem ind{bad.sparseView(), Eigen::Vector2d(1, 0)};
  for (auto kind : {SolverKind::Dense, SolverKind::SparseCholesky, SolverKind::ConjugateGradient}) {
    SolveOptions o;
    o.kind = kind;
    CHECK_THROWS_AS(solve(ind, o), SolverError);
  }
  LinearSystem wrong{m.sparseView(), Eigen::Vector2d(1, 0)};
  CHECK_THROWS_AS(solve(wrong), SolverError);
}

TEST_CASE("interpolation of polynomials is exact") {
  for (const auto& [kind, m, k] :
       std::vector<std::tuple<std::string, int, int>>{{"interval", 2, 3}, {"distorted_quads", 1, 2}, {"hex_dominant", 2, 3},
                                                       {"square_grid", 3, 4}, {"cube_grid", 1, 2}}) {
    const PolytopalMesh mesh = generate_mesh(kind, 3, 5);
    const auto c = make_case("poly:" + std::to_string(k), mesh.dim(), m);
    const RunResult r = interpolate_case(mesh, {mesh.dim(), m, k}, c, 1);
    CHECK(r.report.e_l2 <= 1e-9);
    CHECK(r.report.e_hm <= 1e-9);
    for (double s : r.report.seminorms) CHECK(s <= 1e-9);
  }
}

TEST_CASE("single-element interpolation uses the cell projection") {
  // Q_1 of g(x) g(y) on the unit square is the constant (1/30)^2 by symmetry
  const PolytopalMesh mesh = square_grid(1);
  const Discretization disc(mesh, {2, 1, 1}, 1);
  const auto c = make_case("bump", 2, 1);
  const Eigen::VectorXd x = interpolate(disc, c, 16);
  for (int i = 0; i < x.size(); ++i) CHECK(x[i] == doctest::Approx(1.0 / 900.0));
  CHECK(interpolate(disc, c, 16, true).norm() == 0.0);
}

TEST_CASE("oscillation vanishes for low-degree loads") {
  const PolytopalMesh mesh = distorted_quads(3, 2);
  const Discretization disc(mesh, {2, 1, 2}, 1);
  CHECK(oscillation(disc, make_case("poly:2", 2, 1).f, 8) < 1e-12);
  CHECK(oscillation(disc, make_case("bump", 2, 1).f, 12) > 1e-3);
}

TEST_CASE("error norms are converged in the quadrature degree") {
  const PolytopalMesh mesh = hex_dominant(3);
  for (const char* name : {"bump", "trig"}) {
    const auto c = make_case(name, 2, 1);
    const Discretization disc(mesh, {2, 1, 2}, 1);
    const RunResult r = solve_case(disc, c);
    const int q = error_degree(c, 2);
    const ErrorReport fine = error_norms(disc, c, r.uh, 3 * q);
    CHECK(std::abs(r.report.e_l2 - fine.e_l2) <= 1e-8 * fine.e_l2);
    CHECK(std::abs(r.report.e_hm - fine.e_hm) <= 1e-8 * fine.e_hm);
  }
}

TEST_CASE("solve smoke contract") {
  const PolytopalMesh mesh = square_grid(16);
  const RunResult r = solve_case(mesh, {2, 1, 1}, make_case("bump", 2, 1), 2);
  CHECK(r.report.e_l2 > 0.0);
  CHECK(r.report.e_hm > 0.0);
  CHECK(r.report.residual <= 1e-10);
  CHECK(r.report.ndofs == 17 * 17);
  CHECK(r.report.h == doctest::Approx(std::sqrt(2.0) / 16));
  REQUIRE(r.report.seminorms.size() == 2);
  CHECK(r.report.seminorms[0] == r.report.e_l2);
  CHECK(r.report.seminorms[1] == r.report.e_hm);
  SolveOptions cg;
  cg.kind = SolverKind::ConjugateGradient;
  const RunResult r2 = solve_case(mesh, {2, 1, 1}, make_case("bump", 2, 1), 1, cg);
  CHECK(r2.report.e_hm == doctest::Approx(r.report.e_hm).epsilon(1e-6));
}

TEST_CASE("rates and csv") {
  ErrorReport a, b;
  a.h = 0.5;
  a.ndofs = 9;
  a.e_l2 = 1.0;
  a.e_hm = 2.0;
  b = a;
  b.h = 0.25;
  b.ndofs = 25;
  b.e_l2 = 0.25;
  b.e_hm = 1.0;
  const auto rows = with_rates({a, b});
  CHECK_FALSE(rows[0].has_rate);
  CHECK(rows[1].rate_l2 == doctest::Approx(2.0));
  CHECK(rows[1].rate_hm == doctest::Approx(1.0));
  const std::string csv = convergence_csv(rows);
  CHECK(csv ==
        "h,N_h,e_L2,rate_L2,e_Hm,rate_Hm,osc\n"
        "5.000000000000e-01,9,1.000000000000e+00,,2.000000000000e+00,,0.000000000000e+00\n"
        "2.500000000000e-01,25,2.500000000000e-01,2.000000,1.000000000000e+00,1.000000,0.000000000000e+00\n");
  const std::string single = convergence_csv(with_rates({a}));
  CHECK(single.find(",,") != std::string::npos);
  CHECK(convergence_csv({}) == "h,N_h,e_L2,rate_L2,e_Hm,rate_Hm,osc\n");
}

TEST_CASE("dof norm of x on the unit square") {
  // sum over vertices of h^2 |x(v)|^2 with h = sqrt(2): 2 * 2 = 4
  const PolytopalMesh mesh = square_grid(1);
  const Discretization disc(mesh, {2, 1, 1}, 1);
  const auto& el = disc.element(0);
  Eigen::VectorXd dofs(4);
  for (int i = 0; i < 4; ++i) dofs[i] = mesh.vertex(el.layout().dofs[static_cast<std::size_t>(i)].entity)[0];
  CHECK(dof_norm(el, dofs) == doctest::Approx(4.0));
}

TEST_CASE("diagnostics are reproducible and finite") {
  const PolytopalMesh mesh = square_grid(4);
  const Discretization disc(mesh, {2, 2, 3}, 1);
  const DiagnosticsReport a = sample_diagnostics(disc), b = sample_diagnostics(disc);
  CHECK(a.samples == 16 * 8);
  CHECK(a.inverse_max == b.inverse_max);
  CHECK(a.equivalence_min > 0.0);
  CHECK(a.equivalence_max >= a.equivalence_min);
  CHECK(a.stabilization_min > 0.0);
  CHECK(std::isfinite(a.stabilization_max));
}
