// Polytopal meshes with their full face lattice.
//
// Entities are addressed by (codim, id). Codim 0 holds the elements, codim n
// the vertices. Each entity of dimension d >= 1 lists its boundary entities
// (codim + 1) together with the unit outward normals of those boundary
// entities inside the affine hull of the entity.

#pragma once

#include <Eigen/Dense>

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <tuple>
#include <vector>

#include "hmvem/errors.hpp"
#include "hmvem/polyspace.hpp"
#include "hmvem/tensoralg.hpp"

namespace hmvem {

/// Unprocessed incidence data: entities[r] lists, for every codim-r entity,
/// the ids of its codim-(r+1) boundary entities (vertex ids for r = n-1).
struct RawMesh {
  int dimension = 0;
  std::vector<Eigen::VectorXd> vertices;
  std::vector<std::vector<std::vector<int>>> entities;
};

struct Entity {
  int codim = 0;
  int dim = 0;
  std::vector<int> boundary;
  std::vector<Eigen::VectorXd> outward;  // aligned with boundary
  /// subentities[r] for r >= codim: all codim-r entities in the closure.
  std::vector<std::vector<int>> subentities;
  std::vector<int> vertices;  // sorted
  /// Polygons: boundary vertex loop, counterclockwise w.r.t. the tangents.
  std::vector<int> cycle;
  std::vector<int> elements;  // incident codim-0 entities

  double measure = 0.0;
  double diameter = 0.0;
  Eigen::VectorXd barycenter;
  Frame frame;
  LocalCoordinates coords;

  /// Chebyshev center and radius of the kernel (star-shapedness region).
  /// Radius <= 0 means the kernel is empty.
  Eigen::VectorXd kernel_center;
  double kernel_radius = 0.0;
};

class PolytopalMesh {
 public:
  explicit PolytopalMesh(const RawMesh& raw);

  int dim() const { return dim_; }
  int count(int codim) const { return static_cast<int>(entities_.at(static_cast<std::size_t>(codim)).size()); }
  const Entity& entity(int codim, int id) const {
    return entities_.at(static_cast<std::size_t>(codim)).at(static_cast<std::size_t>(id));
  }
  const Eigen::VectorXd& vertex(int id) const { return entity(dim_, id).barycenter; }
  /// max_K h_K
  double h() const;
  double total_measure() const;

  /// Boundary lists as stored, enough to rebuild the mesh.
  RawMesh raw() const;

  /// Quadrature rule on an entity exact to `degree`.
  QuadratureRule quadrature(int codim, int id, int degree) const;
  /// Integrals of the scaled monomials of the entity's coordinates, memoized.
  std::shared_ptr<const MomentTable> moments(int codim, int id, int degree) const;

 private:
  void build(const RawMesh& raw);
  void compute_geometry(int codim, int id);
  void orient_polygon(Entity& e);
  void orient_polyhedron(Entity& e);

  int dim_ = 0;
  std::vector<std::vector<Entity>> entities_;
  struct MomentCache {
    std::mutex mutex;
    std::map<std::tuple<int, int, int>, std::shared_ptr<const MomentTable>> tables;
  };
  std::unique_ptr<MomentCache> cache_ = std::make_unique<MomentCache>();
};

PolytopalMesh build_lattice(const RawMesh& raw);

std::shared_ptr<const MomentTable> monomial_moments(const PolytopalMesh& mesh, int codim, int id, int degree);

/// Deterministic frame of an entity: tangents by Gram-Schmidt of vertex
/// differences taken over sorted vertex ids, normals completing the basis
/// from the standard axes with a positive first significant component.
Frame entity_frame(const std::vector<Eigen::VectorXd>& sorted_vertex_coords, int entity_dim, int ambient_dim);

/// Maximum r over x with a_i . x + r |a_i| <= b_i. Returns r <= 0 when the
/// region has empty interior.
struct ChebyshevBall {
  Eigen::VectorXd center;
  double radius = 0.0;
};
ChebyshevBall chebyshev_center(const Eigen::MatrixXd& a, const Eigen::VectorXd& b);

struct ElementDiagnostics {
  int element = 0;
  bool star_shaped = false;
  double diameter = 0.0;
  double kernel_radius = 0.0;
  double chunkiness = 0.0;  // h_K / rho_K, infinite when not star-shaped
  double eta = 0.0;         // max h_K / h_F over faces of codim 1..n-1
  bool flagged = false;
};

struct MeshDiagnostics {
  std::vector<ElementDiagnostics> elements;
  double max_chunkiness = 0.0;
  double max_eta = 0.0;
  double h = 0.0;
  bool faces_star_shaped = true;
  std::vector<int> flagged;
};

/// Elements with chunkiness above this are flagged.
inline constexpr double kChunkinessLimit = 50.0;

MeshDiagnostics check_mesh(const PolytopalMesh& mesh, double chunkiness_limit = kChunkinessLimit);

}  // namespace hmvem
