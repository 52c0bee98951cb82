// JSON views of solutions, reports and single elements.

#pragma once

#include "hmvem/femsolve.hpp"
#include "json.hpp"

namespace hmvem {

/// {"n","m","k","ndofs","entities":[{"codim","id","dofs":[...]}, ...]},
/// listing only entities that carry dofs.
nlohmann::json solution_to_json(const Discretization& disc, const Eigen::VectorXd& x);

nlohmann::json report_to_json(const ErrorReport& report);
nlohmann::json diagnostics_to_json(const DiagnosticsReport& report);

nlohmann::json matrix_to_json(const Eigen::MatrixXd& a);
nlohmann::json layout_to_json(const DofLayout& layout);

/// Pi and Q of one dof vector on a cell element, with the polynomials in
/// global monomials; the operator matrices when `matrices` is set.
nlohmann::json projection_to_json(const VirtualElement& element, const Eigen::VectorXd& dofs, bool matrices);

}  // namespace hmvem
