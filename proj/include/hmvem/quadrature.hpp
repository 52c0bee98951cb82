// Gauss rules on simplices, mapped into an ambient space of any dimension.
// Triangles and tetrahedra use collapsed (Duffy) tensor Gauss-Legendre rules.

#pragma once

#include <Eigen/Dense>

#include <vector>

#include "hmvem/polyspace.hpp"

namespace hmvem {

/// q-point Gauss-Legendre nodes and weights on [0, 1].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const GaussLegendre& gauss_legendre(int q);

/// Rules exact for polynomials of total degree <= `degree`.
QuadratureRule segment_rule(const Eigen::VectorXd& a, const Eigen::VectorXd& b, int degree);
QuadratureRule triangle_rule(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& c,
                             int degree);
QuadratureRule tetrahedron_rule(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& c,
                                const Eigen::VectorXd& d, int degree);

void append(QuadratureRule& into, const QuadratureRule& other);

}  // namespace hmvem
