// hmvem: mesh generation and checks, element projections, solves and
// convergence studies. Errors print one line "error: <reason>" and exit 1
// (2 for usage errors).

#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "hmvem/export.hpp"
#include "hmvem/femsolve.hpp"
#include "hmvem/generators.hpp"
#include "hmvem/mesh_io.hpp"

using namespace hmvem;
using nlohmann::json;

namespace {

struct Globals {
  int threads = 0;
  std::uint64_t seed = 0;
};

struct MeshSource {
  std::string file;
  std::string kind;
  int size = 0;

  void add(CLI::App* cmd) {
    cmd->add_option("--mesh", file, "Mesh file (JSON)");
    cmd->add_option("--kind", kind, "Generator kind")->check(CLI::IsMember(generator_kinds()));
    cmd->add_option("--n", size, "Generator size")->check(CLI::PositiveNumber);
  }

  PolytopalMesh load(std::uint64_t seed) const {
    if (!file.empty() && !kind.empty()) throw Error("give either --mesh or --kind, not both");
    if (!file.empty()) return read_mesh(file);
    if (kind.empty()) throw Error("no mesh given (use --mesh FILE or --kind KIND --n N)");
    if (size <= 0) throw Error("--kind needs --n");
    return generate_mesh(kind, size, seed);
  }
};

struct ElementOptions {
  int dim = 0;
  int m = 1;
  int k = 1;

  void add(CLI::App* cmd) {
    cmd->add_option("--dim", dim, "Space dimension (checked against the mesh)");
    cmd->add_option("--m", m, "Sobolev order m")->check(CLI::PositiveNumber);
    cmd->add_option("--k", k, "Polynomial degree k")->check(CLI::PositiveNumber);
  }

  ElementConfig config(const PolytopalMesh& mesh) const {
    if (dim != 0 && dim != mesh.dim())
      throw UnsupportedConfig("--dim " + std::to_string(dim) + " does not match the mesh dimension " +
                              std::to_string(mesh.dim()));
    ElementConfig c{mesh.dim(), m, k};
    validate(c);
    return c;
  }
};

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
  if (!out) throw Error("failed writing '" + path + "'");
}

SolverKind solver_kind(const std::string& name) {
  if (name == "auto") return SolverKind::Automatic;
  if (name == "dense") return SolverKind::Dense;
  if (name == "cholesky") return SolverKind::SparseCholesky;
  return SolverKind::ConjugateGradient;
}

std::vector<double> parse_numbers(const std::string& text) {
  std::vector<double> out;
  std::string item;
  std::stringstream ss(text);
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
    if (used == 0 || used != item.size()) throw Error("not a number in list: '" + item + "'");
    out.push_back(v);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"H^m-conforming virtual element toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "TOML configuration file");
  Globals g;
  app.add_option("--threads", g.threads, "Worker threads (default: HMVEM_THREADS, then hardware)")
      ->check(CLI::PositiveNumber);
  app.add_option("--seed", g.seed, "Seed for randomized generators and sampling");

  // make-mesh
  auto* make = app.add_subcommand("make-mesh", "Write a generated mesh");
  std::string make_kind, make_out;
  int make_n = 0;
  make->add_option("--kind", make_kind, "Generator kind")->required()->check(CLI::IsMember(generator_kinds()));
  make->add_option("--n", make_n, "Cells per direction")->required()->check(CLI::PositiveNumber);
  make->add_option("-o,--output", make_out, "Output path (default stdout)");

  // check-mesh
  auto* check = app.add_subcommand("check-mesh", "Star-shapedness, chunkiness and face-size ratios");
  MeshSource check_src;
  check_src.add(check);
  std::string check_out;
  double check_limit = kChunkinessLimit;
  check->add_option("mesh_file", check_src.file, "Mesh file");
  check->add_option("--limit", check_limit, "Chunkiness flag threshold");
  check->add_option("-o,--output", check_out, "Output path (default stdout)");

  // project
  auto* project = app.add_subcommand("project", "Pi and Q of a dof vector on one element");
  MeshSource proj_src;
  proj_src.add(project);
  ElementOptions proj_el;
  proj_el.add(project);
  int proj_element = 0;
  std::string proj_dofs, proj_case, proj_out;
  int proj_hat = -1;
  bool proj_matrices = false;
  project->add_option("--element", proj_element, "Element id")->check(CLI::NonNegativeNumber);
  auto* dofs_opt = project->add_option("--dofs", proj_dofs, "Comma-separated dof values");
  auto* hat_opt = project->add_option("--hat", proj_hat, "Unit value at this vertex, all other dofs zero");
  auto* case_opt = project->add_option("--case", proj_case, "Dofs of the L2 projection of a named case");
  dofs_opt->excludes(hat_opt)->excludes(case_opt);
  hat_opt->excludes(case_opt);
  project->add_flag("--matrices", proj_matrices, "Also print the operator matrices");
  project->add_option("-o,--output", proj_out, "Output path (default stdout)");

  // solve
  auto* solve_cmd = app.add_subcommand("solve", "Solve one manufactured case and report errors");
  MeshSource solve_src;
  solve_src.add(solve_cmd);
  ElementOptions solve_el;
  solve_el.add(solve_cmd);
  std::string solve_case_name = "bump", solve_solver = "auto", solve_solution, solve_report;
  bool solve_interp = false, solve_exact = false, solve_diag = false;
  int solve_quad = -1;
  solve_cmd->add_option("--case", solve_case_name, "bump, poly:<degree> or trig");
  solve_cmd->add_flag("--interpolate", solve_interp, "Measure Pi_h I_h u instead of solving");
  solve_cmd->add_flag("--exact-vertices", solve_exact, "Interpolate vertex dofs exactly");
  solve_cmd->add_flag("--diagnostics", solve_diag, "Sample the inverse, equivalence and stabilization constants");
  solve_cmd->add_option("--quadrature", solve_quad, "Quadrature degree override")->check(CLI::PositiveNumber);
  solve_cmd->add_option("--solver", solve_solver, "auto, dense, cholesky or cg")
      ->check(CLI::IsMember({"auto", "dense", "cholesky", "cg"}));
  solve_cmd->add_option("--solution", solve_solution, "Write the dof vector as JSON");
  solve_cmd->add_option("--report", solve_report, "Write the error report as JSON (default stdout)");

  // convergence
  auto* conv = app.add_subcommand("convergence", "Error table with observed rates over a mesh family");
  std::string conv_kind, conv_case = "bump", conv_solver = "auto", conv_out;
  std::vector<int> conv_sizes;
  ElementOptions conv_el;
  conv_el.add(conv);
  bool conv_interp = false, conv_exact = false;
  int conv_quad = -1;
  conv->add_option("--kind", conv_kind, "Generator kind")->required()->check(CLI::IsMember(generator_kinds()));
  conv->add_option("--sizes", conv_sizes, "Mesh sizes, e.g. 8,16,32,64")
      ->required()
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  conv->add_option("--case", conv_case, "bump, poly:<degree> or trig");
  conv->add_flag("--interpolate", conv_interp, "Measure Pi_h I_h u instead of solving");
  conv->add_flag("--exact-vertices", conv_exact, "Interpolate vertex dofs exactly");
  conv->add_option("--quadrature", conv_quad, "Quadrature degree override")->check(CLI::PositiveNumber);
  conv->add_option("--solver", conv_solver, "auto, dense, cholesky or cg")
      ->check(CLI::IsMember({"auto", "dense", "cholesky", "cg"}));
  conv->add_option("-o,--output", conv_out, "CSV path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    for (char& c : msg)
      if (c == '\n') c = ' ';
    std::fprintf(stderr, "error: usage: %s\n", msg.c_str());
    return 2;
  }

  try {
    const int threads = resolve_threads(g.threads);
    if (*make) {
      std::string text = mesh_to_json(generate_mesh(make_kind, make_n, g.seed)).dump() + "\n";
      emit(make_out, text);
    } else if (*check) {
      const PolytopalMesh mesh = check_src.load(g.seed);
      emit(check_out, diagnostics_to_json(check_mesh(mesh, check_limit)).dump(2) + "\n");
    } else if (*project) {
      const PolytopalMesh mesh = proj_src.load(g.seed);
      const ElementConfig cfg = proj_el.config(mesh);
      if (proj_element >= mesh.count(0))
        throw Error("element " + std::to_string(proj_element) + " out of range (mesh has " +
                    std::to_string(mesh.count(0)) + ")");
      ElementCache cache(mesh);
      const auto el = build_element(mesh, proj_element, cfg, cache);
      Eigen::VectorXd dofs = Eigen::VectorXd::Zero(el->ndofs());
      if (!proj_dofs.empty()) {
        const auto vals = parse_numbers(proj_dofs);
        if (static_cast<int>(vals.size()) != el->ndofs())
          throw Error("expected " + std::to_string(el->ndofs()) + " dof values, got " + std::to_string(vals.size()));
        for (int i = 0; i < el->ndofs(); ++i) dofs[i] = vals[static_cast<std::size_t>(i)];
      } else if (proj_hat >= 0) {
        const auto& vs = el->entity().vertices;
        if (std::find(vs.begin(), vs.end(), proj_hat) == vs.end())
          throw Error("vertex " + std::to_string(proj_hat) + " is not a vertex of element " +
                      std::to_string(proj_element));
        dofs[el->dof_index(mesh.dim(), proj_hat, MultiIndex(mesh.dim()), 0)] = 1.0;
      } else if (!proj_case.empty()) {
        const ManufacturedCase c = make_case(proj_case, mesh.dim(), cfg.m);
        const int deg = proj_el.k + (c.degree >= 0 ? c.degree : proj_el.k + 8);
        dofs = el->dof_matrix_k() * el->mass().llt().solve(el->basis_moments(c.u, deg));
      }
      emit(proj_out, projection_to_json(*el, dofs, proj_matrices).dump(2) + "\n");
    } else if (*solve_cmd) {
      const PolytopalMesh mesh = solve_src.load(g.seed);
      const ElementConfig cfg = solve_el.config(mesh);
      const ManufacturedCase c = make_case(solve_case_name, mesh.dim(), cfg.m);
      if (!c.natural && !solve_interp)
        throw UnsupportedConfig("case '" + solve_case_name +
                                "' does not satisfy the natural boundary conditions; use --interpolate");
      const Discretization disc(mesh, cfg, threads);
      SolveOptions opt;
      opt.kind = solver_kind(solve_solver);
      const RunResult r = solve_interp ? interpolate_case(disc, c, solve_exact, solve_quad)
                                       : solve_case(disc, c, opt, solve_quad);
      json rep = report_to_json(r.report);
      rep["method"] = r.method;
      rep["case"] = c.name;
      rep["config"] = {{"n", cfg.n}, {"m", cfg.m}, {"k", cfg.k}};
      if (solve_diag) rep["diagnostics"] = diagnostics_to_json(sample_diagnostics(disc, 8, g.seed));
      if (!solve_solution.empty()) emit(solve_solution, solution_to_json(disc, r.uh).dump() + "\n");
      emit(solve_report, rep.dump(2) + "\n");
    } else if (*conv) {
      if (conv_sizes.empty()) throw Error("--sizes is empty");
      std::vector<ErrorReport> reports;
      SolveOptions opt;
      opt.kind = solver_kind(conv_solver);
      for (int size : conv_sizes) {
        const PolytopalMesh mesh = generate_mesh(conv_kind, size, g.seed);
        const ElementConfig cfg = conv_el.config(mesh);
        const ManufacturedCase c = make_case(conv_case, mesh.dim(), cfg.m);
        if (!c.natural && !conv_interp)
          throw UnsupportedConfig("case '" + conv_case +
                                  "' does not satisfy the natural boundary conditions; use --interpolate");
        const Discretization disc(mesh, cfg, threads);
        reports.push_back((conv_interp ? interpolate_case(disc, c, conv_exact, conv_quad)
                                       : solve_case(disc, c, opt, conv_quad))
                              .report);
      }
      emit(conv_out, convergence_csv(with_rates(reports)));
    }
  } catch (const std::exception& e) {
    std::string msg = e.what();
    for (char& c : msg)
      if (c == '\n') c = ' ';
    std::fprintf(stderr, "error: %s\n", msg.c_str());
    return 1;
  }
  return 0;
}
