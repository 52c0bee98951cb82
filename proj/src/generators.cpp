#include "hmvem/generators.hpp"

#include <random>
#include <set>

namespace hmvem {

namespace {

void require_positive(int n) {
  if (n < 1) throw Error("mesh resolution must be at least 1");
}

Eigen::VectorXd place(const Box& box, const Eigen::VectorXd& unit) {
  return box.lo + (box.hi - box.lo).cwiseProduct(unit);
}

}  // namespace

RawMesh polygons_to_raw(const std::vector<Eigen::VectorXd>& vertices, const std::vector<std::vector<int>>& loops) {
  RawMesh raw;
  raw.dimension = 2;
  raw.vertices = vertices;
  raw.entities.assign(2, {});
  for (const auto& loop : loops) {
    std::vector<int> bnd;
    for (std::size_t i = 0; i < loop.size(); ++i) {
      bnd.push_back(static_cast<int>(raw.entities[1].size()));
      raw.entities[1].push_back({loop[i], loop[(i + 1) % loop.size()]});
    }
    raw.entities[0].push_back(bnd);
  }
  return raw;
}

RawMesh polyhedra_to_raw(const std::vector<Eigen::VectorXd>& vertices,
                         const std::vector<std::vector<std::vector<int>>>& cells) {
  RawMesh raw;
  raw.dimension = 3;
  raw.vertices = vertices;
  raw.entities.assign(3, {});
  for (const auto& cell : cells) {
    std::vector<int> faces;
    for (const auto& loop : cell) {
      std::vector<int> edges;
      for (std::size_t i = 0; i < loop.size(); ++i) {
        edges.push_back(static_cast<int>(raw.entities[2].size()));
        raw.entities[2].push_back({loop[i], loop[(i + 1) % loop.size()]});
      }
      faces.push_back(static_cast<int>(raw.entities[1].size()));
      raw.entities[1].push_back(edges);
    }
    raw.entities[0].push_back(faces);
  }
  return raw;
}

PolytopalMesh interval_mesh(int n, const Box& box) {
  require_positive(n);
  RawMesh raw;
  raw.dimension = 1;
  raw.entities.assign(1, {});
  for (int i = 0; i <= n; ++i) raw.vertices.push_back(place(box, Eigen::VectorXd::Constant(1, double(i) / n)));
  for (int i = 0; i < n; ++i) raw.entities[0].push_back({i, i + 1});
  return build_lattice(raw);
}

namespace {

std::vector<std::vector<int>> grid_loops(int n) {
  std::vector<std::vector<int>> loops;
  auto id = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) loops.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
  return loops;
}

std::vector<Eigen::VectorXd> grid_vertices(int n) {
  std::vector<Eigen::VectorXd> v;
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) v.push_back(Eigen::Vector2d(double(i) / n, double(j) / n));
  return v;
}

}  // namespace

PolytopalMesh square_grid(int n, const Box& box) {
  require_positive(n);
  auto v = grid_vertices(n);
  for (auto& x : v) x = place(box, x);
  return build_lattice(polygons_to_raw(v, grid_loops(n)));
}

PolytopalMesh distorted_quads(int n, std::uint64_t seed, const Box& box) {
  require_positive(n);
  auto v = grid_vertices(n);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> shift(-0.2 / n, 0.2 / n);
  for (int j = 1; j < n; ++j)
    for (int i = 1; i < n; ++i) {
      auto& x = v[static_cast<std::size_t>(j * (n + 1) + i)];
      x[0] += shift(rng);
      x[1] += shift(rng);
    }
  for (auto& x : v) x = place(box, x);
  return build_lattice(polygons_to_raw(v, grid_loops(n)));
}

PolytopalMesh hex_dominant(int n, const Box& box) {
  require_positive(n);
  const double h = 1.0 / n;
  // walls of row r, in half-cell units
  auto walls = [n](int r) {
    std::vector<int> w;
    if (r % 2 == 0) {
      for (int i = 0; i <= 2 * n; i += 2) w.push_back(i);
    } else {
      w.push_back(0);
      for (int i = 1; i < 2 * n; i += 2) w.push_back(i);
      w.push_back(2 * n);
    }
    return w;
  };
  std::vector<Eigen::VectorXd> vertices;
  std::vector<std::map<int, int>> line(static_cast<std::size_t>(n + 1));
  for (int j = 0; j <= n; ++j) {
    std::set<int> present;
    if (j > 0)
      for (int i : walls(j - 1)) present.insert(i);
    if (j < n)
      for (int i : walls(j)) present.insert(i);
    for (int i : present) {
      double y = j * h;
      if (j > 0 && j < n) y += (i % 2 == 0 ? 0.15 : -0.15) * h;
      line[static_cast<std::size_t>(j)][i] = static_cast<int>(vertices.size());
      vertices.push_back(place(box, Eigen::Vector2d(i * 0.5 * h, y)));
    }
  }
  std::vector<std::vector<int>> loops;
  for (int r = 0; r < n; ++r) {
    const auto w = walls(r);
    for (std::size_t c = 0; c + 1 < w.size(); ++c) {
      const int a = w[c], b = w[c + 1];
      std::vector<int> loop;
      for (const auto& [i, id] : line[static_cast<std::size_t>(r)])
        if (i >= a && i <= b) loop.push_back(id);
      std::vector<int> top;
      for (const auto& [i, id] : line[static_cast<std::size_t>(r + 1)])
        if (i >= a && i <= b) top.push_back(id);
      loop.insert(loop.end(), top.rbegin(), top.rend());
      loops.push_back(loop);
    }
  }
  return build_lattice(polygons_to_raw(vertices, loops));
}

PolytopalMesh cube_grid(int n, const Box& box) {
  require_positive(n);
  std::vector<Eigen::VectorXd> v;
  auto id = [n](int i, int j, int k) { return (k * (n + 1) + j) * (n + 1) + i; };
  for (int k = 0; k <= n; ++k)
    for (int j = 0; j <= n; ++j)
      for (int i = 0; i <= n; ++i) v.push_back(place(box, Eigen::Vector3d(double(i) / n, double(j) / n, double(k) / n)));
  std::vector<std::vector<std::vector<int>>> cells;
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const int c[8] = {id(i, j, k),         id(i + 1, j, k),         id(i + 1, j + 1, k),         id(i, j + 1, k),
                          id(i, j, k + 1),     id(i + 1, j, k + 1),     id(i + 1, j + 1, k + 1),     id(i, j + 1, k + 1)};
        cells.push_back({{c[0], c[3], c[2], c[1]},
                         {c[4], c[5], c[6], c[7]},
                         {c[0], c[1], c[5], c[4]},
                         {c[3], c[7], c[6], c[2]},
                         {c[0], c[4], c[7], c[3]},
                         {c[1], c[2], c[6], c[5]}});
      }
  return build_lattice(polyhedra_to_raw(v, cells));
}

const std::vector<std::string>& generator_kinds() {
  static const std::vector<std::string> kinds{"interval", "square_grid", "distorted_quads", "hex_dominant",
                                              "cube_grid"};
  return kinds;
}

int generator_dimension(const std::string& kind) {
  if (kind == "interval") return 1;
  if (kind == "square_grid" || kind == "distorted_quads" || kind == "hex_dominant") return 2;
  if (kind == "cube_grid") return 3;
  throw Error("unknown mesh kind '" + kind + "'");
}

PolytopalMesh generate_mesh(const std::string& kind, int n, std::uint64_t seed) {
  if (kind == "interval") return interval_mesh(n);
  if (kind == "square_grid") return square_grid(n);
  if (kind == "distorted_quads") return distorted_quads(n, seed);
  if (kind == "hex_dominant") return hex_dominant(n);
  if (kind == "cube_grid") return cube_grid(n);
  throw Error("unknown mesh kind '" + kind + "'");
}

}  // namespace hmvem
