#include "hmvem/polyspace.hpp"

#include <cmath>
#include <cstdio>
#include <string>

namespace hmvem {

double QuadratureRule::integrate(const std::function<double(const Eigen::VectorXd&)>& f) const {
  double s = 0.0;
  for (std::size_t q = 0; q < weights.size(); ++q) s += weights[q] * f(points[q]);
  return s;
}

bool LocalCoordinates::same_as(const LocalCoordinates& other, double tol) const {
  if (tangents.rows() != other.tangents.rows() || tangents.cols() != other.tangents.cols()) return false;
  const double ref = std::max(1.0, center.lpNorm<Eigen::Infinity>());
  return (center - other.center).lpNorm<Eigen::Infinity>() <= tol * ref &&
         std::abs(scale - other.scale) <= tol * scale &&
         (tangents - other.tangents).lpNorm<Eigen::Infinity>() <= tol;
}

LocalCoordinates LocalCoordinates::full(const Eigen::VectorXd& center, double scale) {
  const auto n = center.size();
  return LocalCoordinates{center, scale, Eigen::MatrixXd::Identity(n, n)};
}

MonomialBasis::MonomialBasis(LocalCoordinates coords, int degree)
    : coords_(std::move(coords)), degree_(degree), exponents_(&multi_indices_up_to(coords_.dim(), degree)) {
  if (!(coords_.scale > 0.0)) throw GeometryError("monomial basis needs a positive scale");
}

Eigen::VectorXd MonomialBasis::values(const Eigen::VectorXd& x) const {
  return derivative_values(x, MultiIndex(dim()));
}

Eigen::VectorXd MonomialBasis::derivative_values(const Eigen::VectorXd& x, const MultiIndex& alpha) const {
  const Eigen::VectorXd xi = coords_.local(x);
  const int d = dim();
  // powers[i][p] = xi_i^p
  std::vector<std::vector<double>> powers(static_cast<std::size_t>(d),
                                          std::vector<double>(static_cast<std::size_t>(std::max(degree_, 0) + 1), 1.0));
  for (int i = 0; i < d; ++i)
    for (int p = 1; p <= degree_; ++p) powers[i][p] = powers[i][p - 1] * xi[i];
  const double hscale = std::pow(coords_.scale, -alpha.order());
  Eigen::VectorXd out(size());
  const auto& exps = exponents();
  for (std::size_t b = 0; b < exps.size(); ++b) {
    double v = hscale;
    for (int i = 0; i < d && v != 0.0; ++i) {
      const int e = exps[b][i], a = alpha[i];
      if (e < a) {
        v = 0.0;
        break;
      }
      for (int f = e - a + 1; f <= e; ++f) v *= f;
      v *= powers[i][e - a];
    }
    out[static_cast<Eigen::Index>(b)] = v;
  }
  return out;
}

Eigen::MatrixXd MonomialBasis::value_matrix(const std::vector<Eigen::VectorXd>& points) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(points.size()), size());
  for (std::size_t q = 0; q < points.size(); ++q) out.row(static_cast<Eigen::Index>(q)) = values(points[q]).transpose();
  return out;
}

Eigen::MatrixXd derivative_matrix(const MonomialBasis& basis, const MultiIndex& alpha) {
  if (alpha.dim() != basis.dim()) throw TensorError("derivative multi-index dimension mismatch");
  const int n = basis.size();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  const double hscale = std::pow(basis.coords().scale, -alpha.order());
  const auto& exps = basis.exponents();
  for (int b = 0; b < n; ++b) {
    const auto& beta = exps[static_cast<std::size_t>(b)];
    if (!beta.dominates(alpha)) continue;
    const MultiIndex target = beta - alpha;
    d(basis.index_of(target), b) = hscale * beta.factorial() / target.factorial();
  }
  return d;
}

Eigen::MatrixXd directional_derivative_matrix(const MonomialBasis& basis, const Eigen::VectorXd& direction) {
  const Eigen::VectorXd c = basis.coords().tangents.transpose() * direction;
  if (std::abs(c.squaredNorm() - direction.squaredNorm()) > 1e-10 * std::max(1.0, direction.squaredNorm()))
    throw GeometryError("direction is not tangent to the entity");
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(basis.size(), basis.size());
  for (int i = 0; i < basis.dim(); ++i)
    if (c[i] != 0.0) d += c[i] * derivative_matrix(basis, MultiIndex::unit(basis.dim(), i));
  return d;
}

Eigen::MatrixXd laplacian_power_matrix(const MonomialBasis& basis, int m) {
  if (m < 0) throw TensorError("negative Laplacian power");
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(basis.size(), basis.size());
  for (int i = 0; i < basis.dim(); ++i) {
    MultiIndex two(basis.dim());
    two[i] = 2;
    lap -= derivative_matrix(basis, two);
  }
  Eigen::MatrixXd out = Eigen::MatrixXd::Identity(basis.size(), basis.size());
  for (int p = 0; p < m; ++p) out = lap * out;
  return out;
}

Eigen::MatrixXd embedding_matrix(const MonomialBasis& from, const MonomialBasis& to) {
  if (to.degree() < from.degree() || from.dim() != to.dim())
    throw TensorError("embedding needs a target basis of at least the source degree");
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(to.size(), from.size());
  e.topRows(from.size()).setIdentity();
  return e;
}

double PolyCoeffs::operator()(const Eigen::VectorXd& x) const {
  if (basis->size() == 0) return 0.0;
  return basis->values(x).dot(coeffs);
}

std::map<MultiIndex, double> global_monomials(const PolyCoeffs& p, double drop) {
  const auto& co = p.basis->coords();
  const int n = co.ambient_dim();
  if (co.dim() != n || (co.tangents - Eigen::MatrixXd::Identity(n, n)).lpNorm<Eigen::Infinity>() > 1e-14)
    throw Error("global monomials need full-dimensional coordinates with identity axes");
  std::map<MultiIndex, double> out;
  for (int b = 0; b < p.basis->size(); ++b) {
    const MultiIndex& beta = p.basis->exponents()[static_cast<std::size_t>(b)];
    // expand prod_i ((x_i - c_i) / h)^beta_i
    std::map<MultiIndex, double> terms{{MultiIndex(n), p.coeffs[b] / std::pow(co.scale, beta.order())}};
    for (int i = 0; i < n; ++i) {
      std::map<MultiIndex, double> next;
      for (const auto& [a, v] : terms)
        for (int j = 0; j <= beta[i]; ++j) {
          MultiIndex e = a;
          e[i] = j;
          next[e] += v * static_cast<double>(binomial(beta[i], j)) * std::pow(-co.center[i], beta[i] - j);
        }
      terms = std::move(next);
    }
    for (const auto& [a, v] : terms) out[a] += v;
  }
  double big = 0.0;
  for (const auto& [a, v] : out) big = std::max(big, std::abs(v));
  for (auto it = out.begin(); it != out.end();) it = std::abs(it->second) <= drop * big ? out.erase(it) : std::next(it);
  return out;
}

std::string format_polynomial(const std::map<MultiIndex, double>& terms) {
  static const char* names[] = {"x", "y", "z"};
  std::string s;
  for (const auto& [a, v] : terms) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", std::abs(v));
    std::string mono;
    for (int i = 0; i < a.dim(); ++i)
      for (int j = 0; j < a[i]; ++j) mono += std::string("*") + (i < 3 ? names[i] : "x");
    const bool unit = std::abs(std::abs(v) - 1.0) < 1e-14 && !mono.empty();
    std::string term = unit ? mono.substr(1) : buf + mono;
    if (s.empty())
      s = (v < 0 ? "-" : "") + term;
    else
      s += (v < 0 ? " - " : " + ") + term;
  }
  return s.empty() ? "0" : s;
}

PolyCoeffs differentiate(const PolyCoeffs& p, const MultiIndex& alpha) {
  return PolyCoeffs{p.basis, derivative_matrix(*p.basis, alpha) * p.coeffs};
}

PolyCoeffs laplacian_power(const PolyCoeffs& p, int m) {
  return PolyCoeffs{p.basis, laplacian_power_matrix(*p.basis, m) * p.coeffs};
}

MomentTable::MomentTable(LocalCoordinates coords, int degree, std::vector<double> values)
    : coords_(std::move(coords)), degree_(degree), values_(std::move(values)) {
  if (static_cast<int>(values_.size()) != poly_dim(coords_.dim(), degree_))
    throw TensorError("moment table size does not match its degree");
  if (values_.empty() || !(values_.front() > 0.0)) throw GeometryError("entity has nonpositive measure");
}

MomentTable MomentTable::from_quadrature(const LocalCoordinates& coords, int degree, const QuadratureRule& rule) {
  const MonomialBasis basis(coords, degree);
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(basis.size());
  for (std::size_t q = 0; q < rule.size(); ++q) acc += rule.weights[q] * basis.values(rule.points[q]);
  return MomentTable(coords, degree, std::vector<double>(acc.data(), acc.data() + acc.size()));
}

double MomentTable::operator()(const MultiIndex& beta) const {
  if (beta.order() > degree_) throw TensorError("moment table does not cover degree " + std::to_string(beta.order()));
  return values_[static_cast<std::size_t>(graded_rank(beta))];
}

Eigen::MatrixXd gram_matrix(const MonomialBasis& a, const MonomialBasis& b, const MomentTable& moments) {
  if (!a.coords().same_as(moments.coords()) || !b.coords().same_as(moments.coords()))
    throw TensorError("gram matrix bases must share the moment table coordinates");
  if (a.degree() + b.degree() > moments.degree()) throw TensorError("insufficient moment table");
  Eigen::MatrixXd g(a.size(), b.size());
  for (int i = 0; i < a.size(); ++i)
    for (int j = 0; j < b.size(); ++j)
      g(i, j) = moments(a.exponents()[static_cast<std::size_t>(i)] + b.exponents()[static_cast<std::size_t>(j)]);
  return g;
}

PolyCoeffs l2_project(const std::function<double(const Eigen::VectorXd&)>& f,
                      const std::shared_ptr<const MonomialBasis>& basis, const QuadratureRule& rule) {
  const int n = basis->size();
  if (n == 0) return PolyCoeffs{basis, Eigen::VectorXd()};
  Eigen::MatrixXd mass = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const Eigen::VectorXd v = basis->values(rule.points[q]);
    mass.noalias() += rule.weights[q] * v * v.transpose();
    rhs += rule.weights[q] * f(rule.points[q]) * v;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(mass);
  if (llt.info() != Eigen::Success) throw GeometryError("singular Gram matrix in L2 projection");
  return PolyCoeffs{basis, llt.solve(rhs)};
}

OrthonormalBasis orthonormalize(const MonomialBasis& basis, const MomentTable& moments) {
  const double measure = moments.measure();
  const int n = basis.size();
  if (n == 0) return OrthonormalBasis{basis, Eigen::MatrixXd(0, 0), measure};
  const Eigen::MatrixXd gram = gram_matrix(basis, basis, moments) / measure;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff(), hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > 1e14) throw GeometryError("Gram matrix is not SPD within tolerance (degenerate geometry)");
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) throw GeometryError("Gram matrix is not SPD (degenerate geometry)");
  const Eigen::MatrixXd lower = llt.matrixL();
  Eigen::MatrixXd change = lower.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(n, n));
  // one refinement pass against the Gram matrix restores orthonormality lost
  // to rounding in the triangular solve
  const Eigen::MatrixXd g2 = change * gram * change.transpose();
  Eigen::LLT<Eigen::MatrixXd> llt2(g2);
  const Eigen::MatrixXd lower2 = llt2.matrixL();
  change = lower2.triangularView<Eigen::Lower>().solve(change);
  return OrthonormalBasis{basis, change, measure};
}

}  // namespace hmvem
