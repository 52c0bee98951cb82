// H^m-conforming virtual elements of degree k on a mesh entity.
//
// An element lives on any mesh entity E of dimension d >= 1: the mesh cells
// (codim 0) and, recursively, their faces and edges, which carry the spaces of
// the normal-derivative traces. Degrees of freedom, all unscaled:
//
//   vertex    d^gamma v(delta), |gamma| <= m-1, along the tangent axes of E
//   moment    (1/|G|) (d^alpha v / d nu_G^alpha, q_i)_G for sub-entities G of
//             relative codim 1 <= r <= d-1, |alpha| <= m-1, q_i orthonormal
//             in P_{k-2m+|alpha|}(G)
//   interior  (1/|E|) (v, q_i)_E, q_i orthonormal in P_{k-2m}(E)
//
// Top-level elements use the global entity frames for nu_G so that shared
// functionals agree. Elements on faces use outward normals within the face.
// On segments the space is P_max(k, 2m-1) and is reconstructed exactly.

#pragma once

#include <Eigen/Dense>

#include <array>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "hmvem/mesh.hpp"
#include "hmvem/polyspace.hpp"
#include "hmvem/tensoralg.hpp"

namespace hmvem {

struct ElementConfig {
  int n = 2;
  int m = 1;
  int k = 1;
};

bool supported(const ElementConfig& config);
/// Throws UnsupportedConfig naming the offending combination.
void validate(const ElementConfig& config);

struct DofDescriptor {
  enum class Kind { Vertex, Moment, Interior };
  Kind kind = Kind::Vertex;
  int codim = 0;      // mesh codim of the carrying entity
  int entity = 0;     // mesh id of the carrying entity
  int rel_codim = 0;  // codim relative to the element
  MultiIndex index;   // gamma (vertex) or alpha (moment)
  int test = 0;       // test polynomial index (moment, interior)
  int local = 0;      // position among the carrying entity's dofs
};

struct DofLayout {
  std::vector<DofDescriptor> dofs;
  int size() const { return static_cast<int>(dofs.size()); }
};

/// Number of dofs carried by one entity of codimension r in an n-dimensional
/// mesh (r = n: vertices, r = 0: cell interiors).
int entity_dof_count(int n, int r, int m, int k);

/// Degree of the polynomial space on segments.
inline int segment_degree(int m, int k) { return std::max(k, 2 * m - 1); }

class ElementCache;

class VirtualElement {
 public:
  VirtualElement(const PolytopalMesh& mesh, int codim, int id, int m, int k, ElementCache& cache);

  const PolytopalMesh& mesh() const { return *mesh_; }
  const Entity& entity() const { return *entity_; }
  int codim() const { return codim_; }
  int id() const { return id_; }
  int dim() const { return dim_; }
  int m() const { return m_; }
  int k() const { return k_; }
  bool top_level() const { return codim_ == 0; }

  const DofLayout& layout() const { return layout_; }
  int ndofs() const { return layout_.size(); }
  int dof_index(int codim, int entity, const MultiIndex& index, int test) const;

  /// P_k on the element, scaled monomials of the entity coordinates.
  const std::shared_ptr<const MonomialBasis>& basis() const { return basis_; }

  /// ndofs x dim P_degree: dof values of each monomial, computed exactly.
  Eigen::MatrixXd dof_matrix(int degree) const;
  Eigen::VectorXd dof_map(const PolyCoeffs& p) const;
  /// dof_matrix(k), kept from construction.
  const Eigen::MatrixXd& dof_matrix_k() const { return dof_matrix_k_; }

  /// dof vector -> coefficients of Pi_k v and Q_k v in basis().
  const Eigen::MatrixXd& pi_star() const { return pi_star_; }
  const Eigen::MatrixXd& q_star() const { return q_star_; }
  PolyCoeffs pi(const Eigen::VectorXd& dofs) const { return {basis_, pi_star_ * dofs}; }
  PolyCoeffs q(const Eigen::VectorXd& dofs) const { return {basis_, q_star_ * dofs}; }
  /// Dofs of Pi_k v as a matrix on dofs.
  Eigen::MatrixXd pi_dofs() const { return dof_matrix_k_ * pi_star_; }

  /// Coefficients of Q_{k-|beta|}(d^beta v) in P_{k-|beta|}, |beta| <= m.
  Eigen::MatrixXd grad_projection(const MultiIndex& beta) const;

  /// Facet traces d^gamma v|_F, |gamma| <= m-1, as coefficients in the facet's
  /// own scaled monomials of degree trace_degree(); exact on segments and
  /// Q^F_{k-|gamma|} projections on polygons. Facets follow entity().boundary.
  const Eigen::MatrixXd& trace(int facet, const MultiIndex& gamma) const;
  int trace_degree() const { return segment_degree(m_, k_); }

  /// Segments: dof vector -> coefficients in P_max(k, 2m-1).
  const Eigen::MatrixXd& reconstruction() const { return reconstruction_; }

  /// (grad^m p, grad^m q) and (p, q) on basis().
  const Eigen::MatrixXd& energy_gram() const { return energy_; }
  const Eigen::MatrixXd& mass() const { return mass_; }

  /// Diagonal of the stabilization (top-level elements).
  const Eigen::VectorXd& stabilization() const { return stab_; }
  /// Local bilinear form on dofs (top-level elements).
  const Eigen::MatrixXd& local_matrix() const { return local_; }
  /// Load vector (f, Q_k v) from the P_k moments (f, m_b).
  Eigen::VectorXd load_from_moments(const Eigen::VectorXd& f_moments) const { return q_star_.transpose() * f_moments; }
  /// (f, m_b) for the basis monomials by quadrature of the given degree.
  Eigen::VectorXd basis_moments(const std::function<double(const Eigen::VectorXd&)>& f, int degree) const;

  /// Normals defining the moment functionals on a sub-entity.
  std::vector<Eigen::VectorXd> sub_normals(int rel_codim, int abs_codim, int entity) const;
  /// Orthonormal test basis rows of degree t on a sub-entity.
  const Eigen::MatrixXd& test_change(int abs_codim, int entity, int degree) const;

 private:
  struct Facet {
    int codim;
    int id;
    Eigen::VectorXd nu;       // normal defining the moments on the facet
    Eigen::VectorXd outward;  // geometric outward normal
    Eigen::MatrixXd cross;    // (m^F_a, m^E_b)_F, dim P_D(F) x dim P_k(E)
    std::map<MultiIndex, Eigen::MatrixXd> traces;
  };

  void build_layout();
  void build_segment();
  void build_q();
  void build_traces();
  void build_projectors();
  void build_local();
  Eigen::MatrixXd transfer(const VirtualElement& child, const Facet& facet, int a) const;
  Eigen::MatrixXd child_derivative(const VirtualElement& child, const MultiIndex& beta, int degree) const;
  Eigen::MatrixXd constraint_rows(int degree, Eigen::MatrixXd& rhs) const;
  Eigen::MatrixXd derivative_combination(const MonomialBasis& basis, const std::vector<Eigen::VectorXd>& forms,
                                         const MultiIndex& powers) const;

  const PolytopalMesh* mesh_;
  const Entity* entity_;
  int codim_, id_, dim_, m_, k_;
  ElementCache* cache_;
  DofLayout layout_;
  std::map<std::tuple<int, int, std::vector<int>, int>, int> dof_lookup_;
  std::shared_ptr<const MonomialBasis> basis_;
  Eigen::MatrixXd tangents_;  // ambient x d
  std::vector<Facet> facets_;
  mutable std::map<std::tuple<int, int, int>, Eigen::MatrixXd> test_cache_;
  mutable std::mutex test_mutex_;

  Eigen::MatrixXd dof_matrix_k_;
  Eigen::MatrixXd energy_, mass_;
  Eigen::MatrixXd pi_star_, q_star_;
  Eigen::MatrixXd reconstruction_;
  std::map<MultiIndex, Eigen::MatrixXd> grad_cache_;
  Eigen::VectorXd stab_;
  Eigen::MatrixXd local_;
};

/// One element per (entity, m, k), built once and shared, so that elements on
/// a face are common to both incident cells.
class ElementCache {
 public:
  explicit ElementCache(const PolytopalMesh& mesh) : mesh_(&mesh) {}
  std::shared_ptr<const VirtualElement> get(int codim, int id, int m, int k);
  const PolytopalMesh& mesh() const { return *mesh_; }

 private:
  struct Slot {
    std::once_flag once;
    std::shared_ptr<const VirtualElement> element;
  };
  const PolytopalMesh* mesh_;
  std::mutex mutex_;
  std::map<std::array<int, 4>, std::shared_ptr<Slot>> slots_;
};

/// Cell element, not memoized.
std::shared_ptr<const VirtualElement> build_element(const PolytopalMesh& mesh, int id, const ElementConfig& config,
                                                    ElementCache& cache);

}  // namespace hmvem
