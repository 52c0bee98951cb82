// Multi-index and symmetric tensor algebra used for derivative bookkeeping.
//
// Conventions
//  - Multi-indices are enumerated in graded colexicographic order: by total
//    order first, then by the last entry, then the one before it, etc.
//  - A symmetric j-tensor over R^n is stored by one component per
//    multi-index of order j; the number of index tuples sharing a component
//    is the multiplicity j!/alpha!.
//  - Directional derivatives compose as products of linear forms: the
//    derivative along d = sum_c d_c e_c is the form sum_c d_c x_c.

#pragma once

#include <Eigen/Dense>

#include <map>
#include <utility>
#include <vector>

#include "hmvem/errors.hpp"

namespace hmvem {

/// n-dimensional multi-index (alpha_1, ..., alpha_n).
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(int dim) : entries_(static_cast<std::size_t>(dim), 0) {}
  MultiIndex(std::initializer_list<int> entries) : entries_(entries) {}
  explicit MultiIndex(std::vector<int> entries) : entries_(std::move(entries)) {}

  static MultiIndex unit(int dim, int axis) {
    MultiIndex e(dim);
    e[axis] = 1;
    return e;
  }

  int dim() const { return static_cast<int>(entries_.size()); }
  int order() const;
  int operator[](int i) const { return entries_[static_cast<std::size_t>(i)]; }
  int& operator[](int i) { return entries_[static_cast<std::size_t>(i)]; }
  const std::vector<int>& entries() const { return entries_; }

  /// alpha! = prod alpha_i!
  double factorial() const;
  /// |alpha|! / alpha!
  double multinomial() const;

  /// True when every nonzero entry sits in the first `j` slots (alpha in A_j).
  bool supported_in_first(int j) const;

  MultiIndex operator+(const MultiIndex& other) const;
  /// Entrywise difference; throws if any entry would become negative.
  MultiIndex operator-(const MultiIndex& other) const;
  bool dominates(const MultiIndex& other) const;

  friend bool operator==(const MultiIndex& a, const MultiIndex& b) { return a.entries_ == b.entries_; }
  friend bool operator!=(const MultiIndex& a, const MultiIndex& b) { return !(a == b); }
  /// Graded colexicographic order.
  friend bool operator<(const MultiIndex& a, const MultiIndex& b);

 private:
  std::vector<int> entries_;
};

double factorial(int n);
long long binomial(int n, int k);

/// All multi-indices of exact order `order` in `dim` variables, colex order.
const std::vector<MultiIndex>& multi_indices(int dim, int order);
/// All multi-indices of order 0..max_order, graded colex order.
/// Empty if max_order < 0 (P_k = {0} for k < 0). Results are cached and
/// the references stay valid for the program lifetime.
const std::vector<MultiIndex>& multi_indices_up_to(int dim, int max_order);

/// Number of multi-indices of order <= k in n variables, i.e. dim P_k(R^n).
/// Zero for k < 0.
int poly_dim(int n, int k);

/// Position of `alpha` in multi_indices_up_to(alpha.dim(), *).
int graded_rank(const MultiIndex& alpha);
/// Position of `alpha` in multi_indices(alpha.dim(), alpha.order()).
int order_rank(const MultiIndex& alpha);

/// Symmetric tensor of a fixed order over R^dim.
class SymTensor {
 public:
  SymTensor(int dim, int order);
  SymTensor(int dim, int order, std::vector<double> components);
  static SymTensor scalar(double value) { return SymTensor(1, 0, {value}); }

  int dim() const { return dim_; }
  int order() const { return order_; }
  std::size_t size() const { return components_.size(); }

  const std::vector<MultiIndex>& indices() const;
  double operator[](std::size_t i) const { return components_[i]; }
  double& operator[](std::size_t i) { return components_[i]; }
  double at(const MultiIndex& alpha) const;
  double& at(const MultiIndex& alpha);
  /// Number of index tuples sharing component i: order!/alpha!.
  double weight(std::size_t i) const;

  /// Full-tensor entry for an index tuple with entries in 0..dim-1.
  double entry(const std::vector<int>& tuple) const;

  const std::vector<double>& components() const { return components_; }

  SymTensor& operator+=(const SymTensor& other);
  SymTensor& operator*=(double s);

 private:
  int dim_;
  int order_;
  std::vector<double> components_;
};

/// One entry of a full (not necessarily symmetric) tensor; tuple entries are
/// 0-based axis indices.
struct TensorEntry {
  std::vector<int> tuple;
  double value;
};

/// Symmetric part of a full tensor given by its nonzero entries.
SymTensor sym(int dim, int order, const std::vector<TensorEntry>& entries);

/// tau : sigma, summed over all index tuples.
double contract(const SymTensor& a, const SymTensor& b);

/// sym(v_1 (x) v_2 (x) ... (x) v_j).
SymTensor sym_outer(const std::vector<Eigen::VectorXd>& vectors);

/// Orthonormal normals and tangents attached to a face.
struct Frame {
  std::vector<Eigen::VectorXd> normals;
  std::vector<Eigen::VectorXd> tangents;

  int ambient_dim() const;
  int codim() const { return static_cast<int>(normals.size()); }
  /// Throws TensorError if the vectors are not orthonormal within `tol`.
  void validate(double tol = 1e-10) const;
};

/// sym(nu^alpha (x) t^beta) with alpha over the frame normals and beta over
/// the frame tangents.
SymTensor normal_tangent_product(const Frame& frame, const MultiIndex& alpha, const MultiIndex& beta);

/// Expansion of prod_l (sum_c forms[l][c] x_c)^{powers[l]} into monomials in
/// the variables x_c. Coefficients are keyed by multi-index over the c's.
/// With forms[l][c] = d_l . e_c this expands the mixed directional derivative
/// prod_l d_l^{powers_l} . grad into partial derivatives.
std::map<MultiIndex, double> expand_linear_forms(const std::vector<Eigen::VectorXd>& forms,
                                                 const MultiIndex& powers);

/// Matrix R with rows indexed by multi_indices(s, order) over `to` and columns
/// by multi_indices(s, order) over `from`: d^beta v / d(to)^beta =
/// sum_beta' R(beta, beta') d^beta' v / d(from)^beta'.
/// Both sets must be orthonormal and span the same subspace.
Eigen::MatrixXd normal_bundle_rotation(const std::vector<Eigen::VectorXd>& from,
                                       const std::vector<Eigen::VectorXd>& to, int order,
                                       double tol = 1e-10);

/// Re-expresses derivative components {d^beta v / d(from)^beta} as
/// {d^beta v / d(to)^beta}. Every order present in `values` must be present
/// completely.
std::map<MultiIndex, double> rotate_normal_bundle(const std::map<MultiIndex, double>& values,
                                                  const std::vector<Eigen::VectorXd>& from,
                                                  const std::vector<Eigen::VectorXd>& to,
                                                  double tol = 1e-10);

}  // namespace hmvem
