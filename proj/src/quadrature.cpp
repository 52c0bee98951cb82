#include "hmvem/quadrature.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>

namespace hmvem {

namespace {

// Legendre P_q(x) and P_q'(x)
std::pair<double, double> legendre(int q, double x) {
  double p0 = 1.0, p1 = x;
  for (int l = 2; l <= q; ++l) {
    const double p2 = ((2.0 * l - 1.0) * x * p1 - (l - 1.0) * p0) / l;
    p0 = p1;
    p1 = p2;
  }
  return {p1, q * (x * p1 - p0) / (x * x - 1.0)};
}

GaussLegendre compute_gauss_legendre(int q) {
  GaussLegendre rule;
  rule.nodes.resize(static_cast<std::size_t>(q));
  rule.weights.resize(static_cast<std::size_t>(q));
  for (int i = 0; i < q; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (q + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = legendre(q, x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double dp = legendre(q, x).second;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // map [-1, 1] to [0, 1], ascending nodes
    rule.nodes[static_cast<std::size_t>(q - 1 - i)] = 0.5 * (x + 1.0);
    rule.weights[static_cast<std::size_t>(q - 1 - i)] = 0.5 * w;
  }
  return rule;
}

double simplex_volume(const std::vector<Eigen::VectorXd>& edges) {
  Eigen::MatrixXd e(edges.front().size(), static_cast<Eigen::Index>(edges.size()));
  for (std::size_t i = 0; i < edges.size(); ++i) e.col(static_cast<Eigen::Index>(i)) = edges[i];
  const double g = (e.transpose() * e).determinant();
  double fact = 1.0;
  for (std::size_t i = 2; i <= edges.size(); ++i) fact *= static_cast<double>(i);
  return std::sqrt(std::max(g, 0.0)) / fact;
}

}  // namespace

const GaussLegendre& gauss_legendre(int q) {
  if (q < 1) throw Error("Gauss-Legendre rule needs at least one point");
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<GaussLegendre>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[q];
  if (!slot) slot = std::make_unique<GaussLegendre>(compute_gauss_legendre(q));
  return *slot;
}

QuadratureRule segment_rule(const Eigen::VectorXd& a, const Eigen::VectorXd& b, int degree) {
  const auto& gl = gauss_legendre(std::max(1, (degree + 2) / 2));
  const double len = (b - a).norm();
  QuadratureRule rule;
  for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
    rule.points.push_back(a + gl.nodes[i] * (b - a));
    rule.weights.push_back(gl.weights[i] * len);
  }
  return rule;
}

QuadratureRule triangle_rule(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& c,
                             int degree) {
  // the collapse adds one degree in the first direction
  const auto& gu = gauss_legendre(std::max(1, (degree + 3) / 2));
  const auto& gv = gauss_legendre(std::max(1, (degree + 2) / 2));
  const double area = simplex_volume({b - a, c - a});
  QuadratureRule rule;
  for (std::size_t i = 0; i < gu.nodes.size(); ++i) {
    const double u = gu.nodes[i];
    for (std::size_t j = 0; j < gv.nodes.size(); ++j) {
      const double v = gv.nodes[j];
      const double s = u, t = (1.0 - u) * v;
      rule.points.push_back(a + s * (b - a) + t * (c - a));
      rule.weights.push_back(2.0 * area * gu.weights[i] * gv.weights[j] * (1.0 - u));
    }
  }
  return rule;
}

QuadratureRule tetrahedron_rule(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& c,
                                const Eigen::VectorXd& d, int degree) {
  const auto& gu = gauss_legendre(std::max(1, (degree + 4) / 2));
  const auto& gv = gauss_legendre(std::max(1, (degree + 3) / 2));
  const auto& gw = gauss_legendre(std::max(1, (degree + 2) / 2));
  const double vol = simplex_volume({b - a, c - a, d - a});
  QuadratureRule rule;
  for (std::size_t i = 0; i < gu.nodes.size(); ++i) {
    const double u = gu.nodes[i];
    for (std::size_t j = 0; j < gv.nodes.size(); ++j) {
      const double v = gv.nodes[j];
      for (std::size_t l = 0; l < gw.nodes.size(); ++l) {
        const double w = gw.nodes[l];
        const double s = u, t = (1.0 - u) * v, r = (1.0 - u) * (1.0 - v) * w;
        rule.points.push_back(a + s * (b - a) + t * (c - a) + r * (d - a));
        rule.weights.push_back(6.0 * vol * gu.weights[i] * gv.weights[j] * gw.weights[l] * (1.0 - u) * (1.0 - u) *
                               (1.0 - v));
      }
    }
  }
  return rule;
}

void append(QuadratureRule& into, const QuadratureRule& other) {
  into.points.insert(into.points.end(), other.points.begin(), other.points.end());
  into.weights.insert(into.weights.end(), other.weights.begin(), other.weights.end());
}

}  // namespace hmvem
