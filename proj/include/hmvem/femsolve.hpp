// Global assembly and solution of
//
//   a_h(u_h, v_h) = <f, v_h>   for all v_h in V_h,
//
// the discrete form of (grad^m u, grad^m v) + (u, v) = (f, v) on H^m with
// natural boundary conditions (no dof is eliminated).

#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "hmvem/element.hpp"
#include "hmvem/mesh.hpp"

namespace hmvem {

/// Worker count: `requested` if positive, otherwise the HMVEM_THREADS
/// environment variable, otherwise the hardware concurrency.
int resolve_threads(int requested);

/// Runs body(i) for i in [0, count) on `threads` workers. Each index is
/// handled by exactly one worker; callers store results per index.
void parallel_for(int count, int threads, const std::function<void(int)>& body);

struct GlobalDofMap {
  /// offsets[r][id]: first global dof of the entity (codim r, id).
  std::vector<std::vector<int>> offsets;
  std::vector<std::vector<int>> element_dofs;  // local -> global, per cell
  int size = 0;
};

/// Smooth function with derivatives, used for exact solutions and data.
struct ManufacturedCase {
  std::string name;
  int n = 2;
  int m = 1;
  std::function<double(const Eigen::VectorXd&)> u;
  std::function<double(const Eigen::VectorXd&, const MultiIndex&)> du;
  std::function<double(const Eigen::VectorXd&)> f;  // (-Delta)^m u + u
  int degree = -1;    // polynomial degree of u, -1 if not a polynomial
  int f_degree = -1;  // polynomial degree of f, -1 if not a polynomial
  bool natural = true;  // satisfies the natural boundary conditions
};

/// Named cases: "bump", "poly:<degree>", "trig" (m = 1 only).
ManufacturedCase make_case(const std::string& name, int n, int m);

class Discretization {
 public:
  Discretization(const PolytopalMesh& mesh, const ElementConfig& config, int threads = 1);

  const PolytopalMesh& mesh() const { return *mesh_; }
  const ElementConfig& config() const { return config_; }
  int threads() const { return threads_; }
  const GlobalDofMap& dofs() const { return dofs_; }
  int size() const { return dofs_.size; }
  const VirtualElement& element(int k) const { return *elements_[static_cast<std::size_t>(k)]; }
  int elements() const { return static_cast<int>(elements_.size()); }

  Eigen::VectorXd gather(const Eigen::VectorXd& global, int k) const;

 private:
  const PolytopalMesh* mesh_;
  ElementConfig config_;
  int threads_;
  std::unique_ptr<ElementCache> cache_;
  std::vector<std::shared_ptr<const VirtualElement>> elements_;
  GlobalDofMap dofs_;
};

GlobalDofMap build_dof_map(const PolytopalMesh& mesh, const ElementConfig& config);

struct LinearSystem {
  Eigen::SparseMatrix<double> a;
  Eigen::VectorXd b;
};

/// Quadrature degree for (f, m_b): exact for polynomial f.
int load_degree(const ManufacturedCase& c, int k);
/// Quadrature degree for the error integrals: exact for polynomial u.
int error_degree(const ManufacturedCase& c, int k);

LinearSystem assemble(const Discretization& disc, const std::function<double(const Eigen::VectorXd&)>& f,
                      int quadrature_degree);

enum class SolverKind { Automatic, Dense, SparseCholesky, ConjugateGradient };

struct SolveOptions {
  SolverKind kind = SolverKind::Automatic;
  double tolerance = 1e-10;
  int max_iterations = 0;  // 0: 10 * size
  int dense_limit = 2000;
};

struct SolveResult {
  Eigen::VectorXd x;
  double relative_residual = 0.0;
  int iterations = 0;
  std::string method;
};

/// Throws SolverError for indefinite input or when the residual target is
/// missed.
SolveResult solve(const LinearSystem& system, const SolveOptions& options = {});

/// I_h u: cell L2 projections Q_k u, their dofs averaged over the cells
/// sharing each entity. With exact_vertices the vertex dofs take the exact
/// derivatives of u instead (not the averaged definition).
Eigen::VectorXd interpolate(const Discretization& disc, const ManufacturedCase& c, int quadrature_degree,
                            bool exact_vertices = false);

struct ErrorReport {
  double h = 0.0;
  int ndofs = 0;
  double e_l2 = 0.0;              // ||u - Pi_h u_h||_0
  double e_hm = 0.0;              // |u - Pi_h u_h|_{m,h}
  std::vector<double> seminorms;  // |u - Pi_h u_h|_{j,h}, j = 0..m
  double osc = 0.0;
  double residual = 0.0;
};

ErrorReport error_norms(const Discretization& disc, const ManufacturedCase& c, const Eigen::VectorXd& uh,
                        int quadrature_degree);
/// (sum_K h_K^{2m} ||f - Q_k f||_K^2)^{1/2}
double oscillation(const Discretization& disc, const std::function<double(const Eigen::VectorXd&)>& f,
                   int quadrature_degree);

struct RunResult {
  ErrorReport report;
  Eigen::VectorXd uh;
  std::string method;
};

/// Assemble, solve and measure one case on one mesh. A positive
/// `quadrature_degree` replaces both load_degree and error_degree.
RunResult solve_case(const PolytopalMesh& mesh, const ElementConfig& config, const ManufacturedCase& c, int threads,
                     const SolveOptions& options = {}, int quadrature_degree = -1);
RunResult solve_case(const Discretization& disc, const ManufacturedCase& c, const SolveOptions& options = {},
                     int quadrature_degree = -1);
/// Errors of Pi_h I_h u instead of the discrete solution.
RunResult interpolate_case(const PolytopalMesh& mesh, const ElementConfig& config, const ManufacturedCase& c,
                           int threads, bool exact_vertices = false, int quadrature_degree = -1);
RunResult interpolate_case(const Discretization& disc, const ManufacturedCase& c, bool exact_vertices = false,
                           int quadrature_degree = -1);

struct ConvergenceRow {
  ErrorReport report;
  double rate_l2 = 0.0;
  double rate_hm = 0.0;
  bool has_rate = false;
};

/// log(e_prev / e) / log(h_prev / h) between successive rows.
std::vector<ConvergenceRow> with_rates(const std::vector<ErrorReport>& reports);
/// Columns h,N_h,e_L2,rate_L2,e_Hm,rate_Hm,osc; empty rate cells on row one.
std::string convergence_csv(const std::vector<ConvergenceRow>& rows);

/// Constants of the inverse inequality, the norm equivalence and the
/// stabilization scaling, sampled on random polynomials of P_k.
struct DiagnosticsReport {
  double inverse_max = 0.0;  // max h^{j-i} |p|_j / |p|_i
  double equivalence_min = 0.0;
  double equivalence_max = 0.0;  // ||p||_0^2 / dof norm
  double stabilization_min = 0.0;
  double stabilization_max = 0.0;  // S(p, p) / (h^{-2m} ||p||_0^2)
  int samples = 0;
};

DiagnosticsReport sample_diagnostics(const Discretization& disc, int samples_per_element = 8,
                                     std::uint64_t seed = 20240601);
/// The dof-norm side of the norm equivalence for one dof vector.
double dof_norm(const VirtualElement& element, const Eigen::VectorXd& dofs);

}  // namespace hmvem
