// Mesh families on axis-aligned boxes. Every generator is deterministic; the
// distorted family draws its perturbations from a seeded mt19937_64.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hmvem/mesh.hpp"

namespace hmvem {

struct Box {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  int dim() const { return static_cast<int>(lo.size()); }
  static Box unit(int n) { return Box{Eigen::VectorXd::Zero(n), Eigen::VectorXd::Ones(n)}; }
};

/// Raw incidence for 2D polygons given as vertex loops.
RawMesh polygons_to_raw(const std::vector<Eigen::VectorXd>& vertices, const std::vector<std::vector<int>>& loops);
/// Raw incidence for 3D polyhedra, each given as a list of face vertex loops.
RawMesh polyhedra_to_raw(const std::vector<Eigen::VectorXd>& vertices,
                         const std::vector<std::vector<std::vector<int>>>& cells);

PolytopalMesh interval_mesh(int n, const Box& box = Box::unit(1));
PolytopalMesh square_grid(int n, const Box& box = Box::unit(2));
/// Square grid with interior vertices moved by up to 0.2 h in each coordinate.
PolytopalMesh distorted_quads(int n, std::uint64_t seed, const Box& box = Box::unit(2));
/// Brick pattern whose interior horizontal lines zigzag by 0.15 h: mostly
/// nonconvex hexagons, with quadrilaterals and pentagons along the boundary.
PolytopalMesh hex_dominant(int n, const Box& box = Box::unit(2));
PolytopalMesh cube_grid(int n, const Box& box = Box::unit(3));

/// Kinds: interval, square_grid, distorted_quads, hex_dominant, cube_grid.
PolytopalMesh generate_mesh(const std::string& kind, int n, std::uint64_t seed = 0);
int generator_dimension(const std::string& kind);
const std::vector<std::string>& generator_kinds();

}  // namespace hmvem
