#include "hmvem/export.hpp"

#include <cmath>

namespace hmvem {

namespace {

nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(finite_or_null(v[i]));
  return out;
}

nlohmann::json polynomial_to_json(const PolyCoeffs& p) {
  nlohmann::json terms = nlohmann::json::array();
  const auto global = global_monomials(p);
  for (const auto& [a, v] : global) terms.push_back({{"exponent", a.entries()}, {"coefficient", v}});
  return {{"scaled_coefficients", vector_to_json(p.coeffs)}, {"monomials", terms}, {"text", format_polynomial(global)}};
}

const char* kind_name(DofDescriptor::Kind k) {
  switch (k) {
    case DofDescriptor::Kind::Vertex:
      return "vertex";
    case DofDescriptor::Kind::Moment:
      return "moment";
    default:
      return "interior";
  }
}

}  // namespace

nlohmann::json solution_to_json(const Discretization& disc, const Eigen::VectorXd& x) {
  const auto& cfg = disc.config();
  nlohmann::json entities = nlohmann::json::array();
  const int n = disc.mesh().dim();
  for (int r = n; r >= 0; --r) {
    const int per = entity_dof_count(n, r, cfg.m, cfg.k);
    if (per == 0) continue;
    for (int id = 0; id < disc.mesh().count(r); ++id) {
      const int off = disc.dofs().offsets[static_cast<std::size_t>(r)][static_cast<std::size_t>(id)];
      entities.push_back({{"codim", r}, {"id", id}, {"dofs", vector_to_json(x.segment(off, per))}});
    }
  }
  return {{"n", cfg.n}, {"m", cfg.m}, {"k", cfg.k}, {"ndofs", disc.size()}, {"entities", entities}};
}

nlohmann::json report_to_json(const ErrorReport& r) {
  nlohmann::json semis = nlohmann::json::array();
  for (double s : r.seminorms) semis.push_back(finite_or_null(s));
  return {{"h", r.h},
          {"ndofs", r.ndofs},
          {"e_l2", finite_or_null(r.e_l2)},
          {"e_hm", finite_or_null(r.e_hm)},
          {"seminorms", semis},
          {"osc", finite_or_null(r.osc)},
          {"residual", finite_or_null(r.residual)}};
}

nlohmann::json diagnostics_to_json(const DiagnosticsReport& r) {
  return {{"inverse_max", finite_or_null(r.inverse_max)},
          {"equivalence_min", finite_or_null(r.equivalence_min)},
          {"equivalence_max", finite_or_null(r.equivalence_max)},
          {"stabilization_min", finite_or_null(r.stabilization_min)},
          {"stabilization_max", finite_or_null(r.stabilization_max)},
          {"samples", r.samples}};
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& a) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i) rows.push_back(vector_to_json(a.row(i).transpose()));
  return rows;
}

nlohmann::json layout_to_json(const DofLayout& layout) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& d : layout.dofs)
    out.push_back({{"kind", kind_name(d.kind)},
                   {"codim", d.codim},
                   {"entity", d.entity},
                   {"index", d.index.entries()},
                   {"test", d.test}});
  return out;
}

nlohmann::json projection_to_json(const VirtualElement& el, const Eigen::VectorXd& dofs, bool matrices) {
  if (dofs.size() != el.ndofs())
    throw Error("expected " + std::to_string(el.ndofs()) + " dof values, got " + std::to_string(dofs.size()));
  nlohmann::json out = {{"element", el.id()},
                        {"n", el.dim()},
                        {"m", el.m()},
                        {"k", el.k()},
                        {"ndofs", el.ndofs()},
                        {"center", vector_to_json(el.entity().coords.center)},
                        {"scale", el.entity().coords.scale},
                        {"layout", layout_to_json(el.layout())},
                        {"dofs", vector_to_json(dofs)},
                        {"pi", polynomial_to_json(el.pi(dofs))},
                        {"q", polynomial_to_json(el.q(dofs))}};
  if (matrices) {
    out["pi_star"] = matrix_to_json(el.pi_star());
    out["q_star"] = matrix_to_json(el.q_star());
    out["stabilization"] = vector_to_json(el.stabilization());
    out["local_matrix"] = matrix_to_json(el.local_matrix());
  }
  return out;
}

}  // namespace hmvem
