// Polynomial spaces P_k on an entity G (element, face, edge) of an ambient
// space R^n, written in scaled monomial coordinates
//
//     xi = T^T (x - x_G) / h_G,      m_beta(x) = xi^beta,
//
// where the columns of T are the orthonormal tangents of G. Derivatives along
// local axis i are derivatives along tangent t_i (not along xi_i), so the
// 1/h_G factors are folded into the derivative matrices.

#pragma once

#include <Eigen/Dense>

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "hmvem/errors.hpp"
#include "hmvem/tensoralg.hpp"

namespace hmvem {

struct QuadratureRule {
  std::vector<Eigen::VectorXd> points;  // ambient coordinates
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }
  double integrate(const std::function<double(const Eigen::VectorXd&)>& f) const;
};

/// Local coordinate system of an entity: center, scale and tangents.
struct LocalCoordinates {
  Eigen::VectorXd center;
  double scale = 1.0;
  Eigen::MatrixXd tangents;  // ambient x dim, orthonormal columns

  int dim() const { return static_cast<int>(tangents.cols()); }
  int ambient_dim() const { return static_cast<int>(tangents.rows()); }
  Eigen::VectorXd local(const Eigen::VectorXd& x) const { return tangents.transpose() * (x - center) / scale; }
  bool same_as(const LocalCoordinates& other, double tol = 1e-13) const;

  /// Identity tangents: the full ambient space.
  static LocalCoordinates full(const Eigen::VectorXd& center, double scale);
};

class MonomialBasis {
 public:
  MonomialBasis(LocalCoordinates coords, int degree);

  int dim() const { return coords_.dim(); }
  int degree() const { return degree_; }
  int size() const { return static_cast<int>(exponents_->size()); }
  const LocalCoordinates& coords() const { return coords_; }
  const std::vector<MultiIndex>& exponents() const { return *exponents_; }
  int index_of(const MultiIndex& beta) const { return graded_rank(beta); }

  /// Same coordinates, different degree.
  MonomialBasis with_degree(int degree) const { return MonomialBasis(coords_, degree); }

  Eigen::VectorXd values(const Eigen::VectorXd& x) const;
  /// d^alpha m_beta(x) along the tangent axes, for every beta.
  Eigen::VectorXd derivative_values(const Eigen::VectorXd& x, const MultiIndex& alpha) const;
  /// values() at every point, one row per point.
  Eigen::MatrixXd value_matrix(const std::vector<Eigen::VectorXd>& points) const;

 private:
  LocalCoordinates coords_;
  int degree_;
  const std::vector<MultiIndex>* exponents_;
};

/// Matrix D with (coefficients of d^alpha p) = D * (coefficients of p), both
/// in `basis`.
Eigen::MatrixXd derivative_matrix(const MonomialBasis& basis, const MultiIndex& alpha);
/// Derivative along an ambient direction lying in the tangent space.
Eigen::MatrixXd directional_derivative_matrix(const MonomialBasis& basis, const Eigen::VectorXd& direction);
/// (-Delta)^m on coefficient vectors.
Eigen::MatrixXd laplacian_power_matrix(const MonomialBasis& basis, int m);
/// Embeds coefficients of `from` into `to` (same coordinates, to.degree >= from.degree).
Eigen::MatrixXd embedding_matrix(const MonomialBasis& from, const MonomialBasis& to);

struct PolyCoeffs {
  std::shared_ptr<const MonomialBasis> basis;
  Eigen::VectorXd coeffs;

  double operator()(const Eigen::VectorXd& x) const;
};

/// Coefficients in the plain monomials x^beta of the ambient space; needs
/// full-dimensional coordinates with identity tangents. Entries below
/// `drop` times the largest magnitude are omitted.
std::map<MultiIndex, double> global_monomials(const PolyCoeffs& p, double drop = 1e-13);
/// "0.75 - 0.5*x - 0.5*y" style rendering in x, y, z.
std::string format_polynomial(const std::map<MultiIndex, double>& terms);

PolyCoeffs differentiate(const PolyCoeffs& p, const MultiIndex& alpha);
PolyCoeffs laplacian_power(const PolyCoeffs& p, int m);

/// Integrals of the scaled monomials xi^beta over an entity, |beta| <= degree.
class MomentTable {
 public:
  MomentTable(LocalCoordinates coords, int degree, std::vector<double> values);
  /// Integrates every monomial with the given rule (which must be exact to
  /// `degree`).
  static MomentTable from_quadrature(const LocalCoordinates& coords, int degree, const QuadratureRule& rule);

  const LocalCoordinates& coords() const { return coords_; }
  int degree() const { return degree_; }
  double operator()(const MultiIndex& beta) const;
  double measure() const { return values_.front(); }

 private:
  LocalCoordinates coords_;
  int degree_;
  std::vector<double> values_;
};

/// (a_i, b_j)_G for the monomials of two bases sharing the moment table's
/// coordinates.
Eigen::MatrixXd gram_matrix(const MonomialBasis& a, const MonomialBasis& b, const MomentTable& moments);

/// Q_k^G f by quadrature. A basis of negative degree gives the zero polynomial.
PolyCoeffs l2_project(const std::function<double(const Eigen::VectorXd&)>& f,
                      const std::shared_ptr<const MonomialBasis>& basis, const QuadratureRule& rule);

/// Basis orthonormal with respect to (1/|G|)(., .)_G. Row i of `change`
/// holds the monomial coefficients of q_i.
struct OrthonormalBasis {
  MonomialBasis monomials;
  Eigen::MatrixXd change;
  double measure;

  int size() const { return monomials.size(); }
};

/// Throws GeometryError when the Gram matrix is not SPD or its condition
/// number exceeds 1e14.
OrthonormalBasis orthonormalize(const MonomialBasis& basis, const MomentTable& moments);

}  // namespace hmvem
