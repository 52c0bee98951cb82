#include "hmvem/femsolve.hpp"

#include <Eigen/SparseCholesky>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

namespace hmvem {

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("HMVEM_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
    throw Error("HMVEM_THREADS must be a positive integer, got '" + std::string(env) + "'");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(int count, int threads, const std::function<void(int)>& body) {
  threads = std::max(1, std::min(threads, count));
  if (threads <= 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      while (true) {
        const int i = next.fetch_add(1);
        if (i >= count) return;
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          next.store(count);
        }
      }
    });
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

// ---------------------------------------------------------------- cases

namespace {

/// Coefficients of (t (1 - t))^p in powers of t.
std::vector<double> bump_coefficients(int p) {
  std::vector<double> c(static_cast<std::size_t>(2 * p + 1), 0.0);
  for (int i = 0; i <= p; ++i) c[static_cast<std::size_t>(p + i)] = (i % 2 ? -1.0 : 1.0) * static_cast<double>(binomial(p, i));
  return c;
}

double poly1d(const std::vector<double>& c, int deriv, double t) {
  double s = 0.0;
  for (int j = static_cast<int>(c.size()) - 1; j >= deriv; --j) {
    double f = 1.0;
    for (int l = j - deriv + 1; l <= j; ++l) f *= l;
    s = s * t + c[static_cast<std::size_t>(j)] * f;
  }
  return s;
}

double cos_derivative(int p, double x) {
  switch (p % 4) {
    case 0:
      return std::cos(x);
    case 1:
      return -std::sin(x);
    case 2:
      return -std::cos(x);
    default:
      return std::sin(x);
  }
}

}  // namespace

ManufacturedCase make_case(const std::string& name, int n, int m) {
  ManufacturedCase c;
  c.name = name;
  c.n = n;
  c.m = m;
  if (n < 1 || n > 3 || m < 1) throw UnsupportedConfig("invalid case dimension or order");
  if (name == "bump") {
    const auto coef = bump_coefficients(2 * m);
    c.du = [coef, n](const Eigen::VectorXd& x, const MultiIndex& g) {
      double v = 1.0;
      for (int i = 0; i < n; ++i) v *= poly1d(coef, g[i], x[i]);
      return v;
    };
    c.u = [du = c.du, n](const Eigen::VectorXd& x) { return du(x, MultiIndex(n)); };
    c.f = [coef, n, m](const Eigen::VectorXd& x) {
      double lap = 0.0;
      for (const auto& g : multi_indices(n, m)) {
        double v = g.multinomial();
        for (int i = 0; i < n; ++i) v *= poly1d(coef, 2 * g[i], x[i]);
        lap += v;
      }
      double u = 1.0;
      for (int i = 0; i < n; ++i) u *= poly1d(coef, 0, x[i]);
      return (m % 2 ? -1.0 : 1.0) * lap + u;
    };
    c.degree = 4 * m * n;
    c.f_degree = 4 * m * n;
    c.natural = true;
    return c;
  }
  if (name.rfind("poly:", 0) == 0) {
    int d = -1;
    try {
      std::size_t used = 0;
      d = std::stoi(name.substr(5), &used);
      if (used != name.size() - 5) d = -1;
    } catch (const std::exception&) {
      d = -1;
    }
    if (d < 0) throw Error("case '" + name + "': expected poly:<nonnegative degree>");
    Eigen::VectorXd a(3);
    a << 1.0, 0.5, 0.25;
    const Eigen::VectorXd dir = a.head(n);
    const double shift = 0.3;
    c.du = [dir, shift, d, n](const Eigen::VectorXd& x, const MultiIndex& g) {
      const int j = g.order();
      if (j > d) return 0.0;
      double v = std::pow(shift + dir.dot(x.head(n)), d - j);
      for (int l = d - j + 1; l <= d; ++l) v *= l;
      for (int i = 0; i < n; ++i) v *= std::pow(dir[i], g[i]);
      return v;
    };
    c.u = [du = c.du, n](const Eigen::VectorXd& x) { return du(x, MultiIndex(n)); };
    c.f = [dir, shift, d, m](const Eigen::VectorXd& x) {
      const double s = shift + dir.dot(x);
      double lap = 0.0;
      if (d >= 2 * m) {
        lap = std::pow(dir.squaredNorm(), m) * std::pow(s, d - 2 * m);
        for (int l = d - 2 * m + 1; l <= d; ++l) lap *= l;
      }
      return (m % 2 ? -1.0 : 1.0) * lap + std::pow(s, d);
    };
    c.degree = d;
    c.f_degree = d;
    c.natural = false;
    return c;
  }
  if (name == "trig") {
    if (m != 1) throw UnsupportedConfig("case 'trig' satisfies the natural boundary conditions only for m = 1");
    c.du = [n](const Eigen::VectorXd& x, const MultiIndex& g) {
      double v = 1.0;
      for (int i = 0; i < n; ++i) v *= std::pow(M_PI, g[i]) * cos_derivative(g[i], M_PI * x[i]);
      return v;
    };
    c.u = [du = c.du, n](const Eigen::VectorXd& x) { return du(x, MultiIndex(n)); };
    c.f = [u = c.u, n](const Eigen::VectorXd& x) { return (n * M_PI * M_PI + 1.0) * u(x); };
    c.natural = true;
    return c;
  }
  throw Error("unknown case '" + name + "' (expected bump, poly:<degree> or trig)");
}

int load_degree(const ManufacturedCase& c, int k) { return c.f_degree >= 0 ? c.f_degree + k : 2 * k + 4; }

int error_degree(const ManufacturedCase& c, int k) { return c.degree >= 0 ? 2 * std::max(c.degree, k) : 2 * k + 12; }

// ------------------------------------------------------- discretization

GlobalDofMap build_dof_map(const PolytopalMesh& mesh, const ElementConfig& config) {
  const int n = mesh.dim();
  GlobalDofMap map;
  map.offsets.assign(static_cast<std::size_t>(n + 1), {});
  for (int r = n; r >= 0; --r) {
    const int per = entity_dof_count(n, r, config.m, config.k);
    for (int i = 0; i < mesh.count(r); ++i) {
      map.offsets[static_cast<std::size_t>(r)].push_back(map.size);
      map.size += per;
    }
  }
  return map;
}

Discretization::Discretization(const PolytopalMesh& mesh, const ElementConfig& config, int threads)
    : mesh_(&mesh), config_(config), threads_(std::max(1, threads)), cache_(std::make_unique<ElementCache>(mesh)) {
  validate(config);
  if (config.n != mesh.dim())
    throw UnsupportedConfig("configuration dimension " + std::to_string(config.n) + " does not match the mesh dimension " +
                            std::to_string(mesh.dim()));
  elements_.resize(static_cast<std::size_t>(mesh.count(0)));
  parallel_for(mesh.count(0), threads_,
               [&](int k) { elements_[static_cast<std::size_t>(k)] = build_element(mesh, k, config, *cache_); });
  dofs_ = build_dof_map(mesh, config);
  for (const auto& el : elements_) {
    std::vector<int> idx;
    for (const auto& d : el->layout().dofs)
      idx.push_back(dofs_.offsets[static_cast<std::size_t>(d.codim)][static_cast<std::size_t>(d.entity)] + d.local);
    dofs_.element_dofs.push_back(std::move(idx));
  }
}

Eigen::VectorXd Discretization::gather(const Eigen::VectorXd& global, int k) const {
  const auto& idx = dofs_.element_dofs[static_cast<std::size_t>(k)];
  Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out[static_cast<Eigen::Index>(i)] = global[idx[i]];
  return out;
}

LinearSystem assemble(const Discretization& disc, const std::function<double(const Eigen::VectorXd&)>& f,
                      int quadrature_degree) {
  const int ne = disc.elements();
  std::vector<Eigen::VectorXd> loads(static_cast<std::size_t>(ne));
  parallel_for(ne, disc.threads(), [&](int k) {
    const auto& el = disc.element(k);
    loads[static_cast<std::size_t>(k)] = el.load_from_moments(el.basis_moments(f, quadrature_degree));
  });
  LinearSystem sys;
  sys.b = Eigen::VectorXd::Zero(disc.size());
  std::vector<Eigen::Triplet<double>> triplets;
  for (int k = 0; k < ne; ++k) {
    const auto& idx = disc.dofs().element_dofs[static_cast<std::size_t>(k)];
    const auto& a = disc.element(k).local_matrix();
    for (std::size_t i = 0; i < idx.size(); ++i) {
      sys.b[idx[i]] += loads[static_cast<std::size_t>(k)][static_cast<Eigen::Index>(i)];
      for (std::size_t j = 0; j < idx.size(); ++j)
        triplets.emplace_back(idx[i], idx[j], a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    }
  }
  sys.a.resize(disc.size(), disc.size());
  sys.a.setFromTriplets(triplets.begin(), triplets.end());
  return sys;
}

// --------------------------------------------------------------- solver

namespace {

double relative_residual(const LinearSystem& s, const Eigen::VectorXd& x) {
  const double nb = s.b.norm();
  const double nr = (s.b - s.a * x).norm();
  return nb > 0 ? nr / nb : nr;
}

SolveResult conjugate_gradient(const LinearSystem& s, const SolveOptions& opt) {
  const int n = static_cast<int>(s.b.size());
  const int max_it = opt.max_iterations > 0 ? opt.max_iterations : 10 * std::max(n, 1);
  Eigen::VectorXd diag = s.a.diagonal();
  for (int i = 0; i < n; ++i)
    if (!(diag[i] > 0)) throw SolverError("matrix is not positive definite (nonpositive diagonal entry)");
  const Eigen::VectorXd inv = diag.cwiseInverse();
  SolveResult res;
  res.method = "pcg";
  res.x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd r = s.b;
  const double nb = s.b.norm();
  if (nb == 0.0) return res;
  Eigen::VectorXd z = inv.cwiseProduct(r);
  Eigen::VectorXd p = z;
  double rz = r.dot(z);
  for (int it = 1; it <= max_it; ++it) {
    const Eigen::VectorXd ap = s.a * p;
    const double pap = p.dot(ap);
    if (!(pap > 0)) throw SolverError("matrix is not positive definite (p'Ap <= 0 in CG)");
    const double alpha = rz / pap;
    res.x += alpha * p;
    r -= alpha * ap;
    res.iterations = it;
    if (r.norm() <= opt.tolerance * nb) break;
    z = inv.cwiseProduct(r);
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  res.relative_residual = relative_residual(s, res.x);
  if (res.relative_residual > opt.tolerance) {
    std::ostringstream msg;
    msg << "CG did not converge in " << res.iterations << " iterations (relative residual " << res.relative_residual
        << ", diagonal ratio " << diag.maxCoeff() / diag.minCoeff() << ")";
    throw SolverError(msg.str());
  }
  return res;
}

}  // namespace

SolveResult solve(const LinearSystem& s, const SolveOptions& opt) {
  const int n = static_cast<int>(s.b.size());
  if (s.a.rows() != n || s.a.cols() != n) throw SolverError("system dimensions do not match");
  SolverKind kind = opt.kind;
  if (kind == SolverKind::Automatic) kind = n < opt.dense_limit ? SolverKind::Dense : SolverKind::SparseCholesky;
  if (kind == SolverKind::ConjugateGradient) return conjugate_gradient(s, opt);

  // symmetric diagonal scaling before factorizing
  Eigen::VectorXd scale(n);
  for (int i = 0; i < n; ++i) {
    const double d = s.a.coeff(i, i);
    if (!(d > 0)) throw SolverError("matrix is not positive definite (nonpositive diagonal entry)");
    scale[i] = 1.0 / std::sqrt(d);
  }
  const Eigen::SparseMatrix<double> scaled = scale.asDiagonal() * s.a * scale.asDiagonal();
  SolveResult res;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> apply;
  Eigen::LLT<Eigen::MatrixXd> dense;
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> sparse;
  if (kind == SolverKind::Dense) {
    dense.compute(Eigen::MatrixXd(scaled));
    if (dense.info() != Eigen::Success) throw SolverError("matrix is not positive definite (Cholesky failed)");
    apply = [&](const Eigen::VectorXd& r) -> Eigen::VectorXd { return dense.solve(r); };
    res.method = "dense-cholesky";
  } else {
    sparse.compute(scaled);
    if (sparse.info() != Eigen::Success) throw SolverError("matrix is not positive definite (Cholesky failed)");
    apply = [&](const Eigen::VectorXd& r) -> Eigen::VectorXd { return sparse.solve(r); };
    res.method = "sparse-cholesky";
  }
  const Eigen::VectorXd bs = scale.cwiseProduct(s.b);
  Eigen::VectorXd y = apply(bs);
  res.iterations = 1;
  for (int it = 0; it < 3; ++it) {
    res.x = scale.cwiseProduct(y);
    res.relative_residual = relative_residual(s, res.x);
    if (res.relative_residual <= opt.tolerance) break;
    y += apply(bs - scaled * y);
    ++res.iterations;
  }
  res.x = scale.cwiseProduct(y);
  res.relative_residual = relative_residual(s, res.x);
  if (res.relative_residual > opt.tolerance) {
    std::ostringstream msg;
    msg << res.method << " missed the residual target: " << res.relative_residual;
    throw SolverError(msg.str());
  }
  return res;
}

// -------------------------------------------------------- interpolation

namespace {

Eigen::VectorXd l2_coefficients(const VirtualElement& el, const std::function<double(const Eigen::VectorXd&)>& f,
                                int degree) {
  return el.mass().llt().solve(el.basis_moments(f, degree));
}

}  // namespace

Eigen::VectorXd interpolate(const Discretization& disc, const ManufacturedCase& c, int degree, bool exact_vertices) {
  const int ne = disc.elements();
  std::vector<Eigen::VectorXd> local(static_cast<std::size_t>(ne));
  parallel_for(ne, disc.threads(), [&](int k) {
    const auto& el = disc.element(k);
    local[static_cast<std::size_t>(k)] = el.dof_matrix_k() * l2_coefficients(el, c.u, degree);
  });
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(disc.size());
  Eigen::VectorXd count = Eigen::VectorXd::Zero(disc.size());
  for (int k = 0; k < ne; ++k) {
    const auto& idx = disc.dofs().element_dofs[static_cast<std::size_t>(k)];
    for (std::size_t i = 0; i < idx.size(); ++i) {
      sum[idx[i]] += local[static_cast<std::size_t>(k)][static_cast<Eigen::Index>(i)];
      count[idx[i]] += 1.0;
    }
  }
  Eigen::VectorXd out = sum.cwiseQuotient(count);
  if (exact_vertices)
    for (int k = 0; k < ne; ++k) {
      const auto& el = disc.element(k);
      const auto& idx = disc.dofs().element_dofs[static_cast<std::size_t>(k)];
      for (int i = 0; i < el.ndofs(); ++i) {
        const auto& d = el.layout().dofs[static_cast<std::size_t>(i)];
        if (d.kind == DofDescriptor::Kind::Vertex) out[idx[static_cast<std::size_t>(i)]] = c.du(disc.mesh().vertex(d.entity), d.index);
      }
    }
  return out;
}

// --------------------------------------------------------------- errors

ErrorReport error_norms(const Discretization& disc, const ManufacturedCase& c, const Eigen::VectorXd& uh,
                        int degree) {
  const int ne = disc.elements();
  const int m = disc.config().m;
  std::vector<std::vector<double>> parts(static_cast<std::size_t>(ne));
  parallel_for(ne, disc.threads(), [&](int k) {
    const auto& el = disc.element(k);
    const Eigen::VectorXd coeffs = el.pi_star() * disc.gather(uh, k);
    const QuadratureRule rule = disc.mesh().quadrature(0, k, degree);
    std::vector<std::pair<const MultiIndex*, Eigen::VectorXd>> derivs;
    for (int j = 0; j <= m; ++j)
      for (const auto& g : multi_indices(disc.mesh().dim(), j))
        derivs.emplace_back(&g, derivative_matrix(*el.basis(), g) * coeffs);
    std::vector<double> acc(static_cast<std::size_t>(m + 1), 0.0);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Eigen::VectorXd& x = rule.points[q];
      const Eigen::VectorXd vals = el.basis()->values(x);
      for (const auto& [g, dc] : derivs) {
        const double diff = c.du(x, *g) - vals.dot(dc);
        acc[static_cast<std::size_t>(g->order())] += rule.weights[q] * g->multinomial() * diff * diff;
      }
    }
    parts[static_cast<std::size_t>(k)] = acc;
  });
  ErrorReport rep;
  rep.h = disc.mesh().h();
  rep.ndofs = disc.size();
  rep.seminorms.assign(static_cast<std::size_t>(m + 1), 0.0);
  for (const auto& p : parts)
    for (int j = 0; j <= m; ++j) rep.seminorms[static_cast<std::size_t>(j)] += p[static_cast<std::size_t>(j)];
  for (auto& s : rep.seminorms) s = std::sqrt(s);
  rep.e_l2 = rep.seminorms.front();
  rep.e_hm = rep.seminorms.back();
  return rep;
}

double oscillation(const Discretization& disc, const std::function<double(const Eigen::VectorXd&)>& f, int degree) {
  const int ne = disc.elements();
  std::vector<double> parts(static_cast<std::size_t>(ne), 0.0);
  parallel_for(ne, disc.threads(), [&](int k) {
    const auto& el = disc.element(k);
    const Eigen::VectorXd coeffs = l2_coefficients(el, f, degree);
    const QuadratureRule rule = disc.mesh().quadrature(0, k, degree);
    double acc = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double diff = f(rule.points[q]) - el.basis()->values(rule.points[q]).dot(coeffs);
      acc += rule.weights[q] * diff * diff;
    }
    parts[static_cast<std::size_t>(k)] = std::pow(el.entity().diameter, 2 * disc.config().m) * acc;
  });
  double s = 0.0;
  for (double p : parts) s += p;
  return std::sqrt(s);
}

RunResult solve_case(const Discretization& disc, const ManufacturedCase& c, const SolveOptions& options,
                     int quadrature_degree) {
  const int k = disc.config().k;
  const int load = quadrature_degree > 0 ? quadrature_degree : load_degree(c, k);
  const int err = quadrature_degree > 0 ? quadrature_degree : error_degree(c, k);
  const LinearSystem sys = assemble(disc, c.f, load);
  const SolveResult sol = solve(sys, options);
  RunResult out;
  out.uh = sol.x;
  out.method = sol.method;
  out.report = error_norms(disc, c, sol.x, err);
  out.report.osc = oscillation(disc, c.f, load + k);
  out.report.residual = sol.relative_residual;
  return out;
}

RunResult solve_case(const PolytopalMesh& mesh, const ElementConfig& config, const ManufacturedCase& c, int threads,
                     const SolveOptions& options, int quadrature_degree) {
  return solve_case(Discretization(mesh, config, threads), c, options, quadrature_degree);
}

RunResult interpolate_case(const Discretization& disc, const ManufacturedCase& c, bool exact_vertices,
                           int quadrature_degree) {
  const int k = disc.config().k;
  const int load = quadrature_degree > 0 ? quadrature_degree : load_degree(c, k);
  const int err = quadrature_degree > 0 ? quadrature_degree : error_degree(c, k);
  RunResult out;
  out.uh = interpolate(disc, c, load, exact_vertices);
  out.method = exact_vertices ? "interpolation-exact-vertices" : "interpolation";
  out.report = error_norms(disc, c, out.uh, err);
  out.report.osc = oscillation(disc, c.f, load + k);
  return out;
}

RunResult interpolate_case(const PolytopalMesh& mesh, const ElementConfig& config, const ManufacturedCase& c,
                           int threads, bool exact_vertices, int quadrature_degree) {
  return interpolate_case(Discretization(mesh, config, threads), c, exact_vertices, quadrature_degree);
}

std::vector<ConvergenceRow> with_rates(const std::vector<ErrorReport>& reports) {
  std::vector<ConvergenceRow> rows;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    ConvergenceRow row;
    row.report = reports[i];
    if (i > 0) {
      const auto& p = reports[i - 1];
      const double dh = std::log(p.h / row.report.h);
      row.rate_l2 = std::log(p.e_l2 / row.report.e_l2) / dh;
      row.rate_hm = std::log(p.e_hm / row.report.e_hm) / dh;
      row.has_rate = true;
    }
    rows.push_back(row);
  }
  return rows;
}

std::string convergence_csv(const std::vector<ConvergenceRow>& rows) {
  std::string out = "h,N_h,e_L2,rate_L2,e_Hm,rate_Hm,osc\n";
  char buf[512];
  for (const auto& r : rows) {
    char rl2[64] = "", rhm[64] = "";
    if (r.has_rate) {
      std::snprintf(rl2, sizeof rl2, "%.6f", r.rate_l2);
      std::snprintf(rhm, sizeof rhm, "%.6f", r.rate_hm);
    }
    std::snprintf(buf, sizeof buf, "%.12e,%d,%.12e,%s,%.12e,%s,%.12e\n", r.report.h, r.report.ndofs, r.report.e_l2, rl2,
                  r.report.e_hm, rhm, r.report.osc);
    out += buf;
  }
  return out;
}

// ---------------------------------------------------------- diagnostics

double dof_norm(const VirtualElement& el, const Eigen::VectorXd& dofs) {
  const double h = el.entity().diameter;
  const int d = el.dim();
  double s = 0.0;
  for (int i = 0; i < el.ndofs(); ++i) {
    const auto& desc = el.layout().dofs[static_cast<std::size_t>(i)];
    const double v = dofs[i] * dofs[i];
    switch (desc.kind) {
      case DofDescriptor::Kind::Vertex:
        s += std::pow(h, d + 2 * desc.index.order()) * desc.index.multinomial() * v;
        break;
      case DofDescriptor::Kind::Moment:
        s += std::pow(h, desc.rel_codim + 2 * desc.index.order()) *
             el.mesh().entity(desc.codim, desc.entity).measure * v;
        break;
      case DofDescriptor::Kind::Interior:
        s += el.entity().measure * v;
        break;
    }
  }
  return s;
}

DiagnosticsReport sample_diagnostics(const Discretization& disc, int samples, std::uint64_t seed) {
  const int m = disc.config().m;
  const int nk = poly_dim(disc.mesh().dim(), disc.config().k);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<Eigen::VectorXd> polys;
  for (int s = 0; s < samples; ++s) {
    Eigen::VectorXd c(nk);
    for (int i = 0; i < nk; ++i) c[i] = normal(rng);
    polys.push_back(c);
  }
  DiagnosticsReport rep;
  rep.equivalence_min = rep.stabilization_min = std::numeric_limits<double>::infinity();
  for (int k = 0; k < disc.elements(); ++k) {
    const auto& el = disc.element(k);
    const double h = el.entity().diameter;
    const auto& basis = *el.basis();
    std::vector<Eigen::MatrixXd> semis;  // Gram of |.|_j
    for (int j = 0; j <= m; ++j) {
      Eigen::MatrixXd g = Eigen::MatrixXd::Zero(nk, nk);
      for (const auto& gamma : multi_indices(basis.dim(), j)) {
        const Eigen::MatrixXd d = derivative_matrix(basis, gamma);
        g += gamma.multinomial() * d.transpose() * el.mass() * d;
      }
      semis.push_back(g);
    }
    for (const auto& c : polys) {
      std::vector<double> norms;
      for (const auto& g : semis) norms.push_back(std::sqrt(std::max(0.0, c.dot(g * c))));
      for (int i = 0; i <= m; ++i)
        for (int j = i + 1; j <= m; ++j)
          if (norms[static_cast<std::size_t>(i)] > 1e-14 * norms[0])
            rep.inverse_max = std::max(rep.inverse_max, std::pow(h, j - i) * norms[static_cast<std::size_t>(j)] /
                                                            norms[static_cast<std::size_t>(i)]);
      const Eigen::VectorXd dofs = el.dof_matrix_k() * c;
      const double l2 = norms[0] * norms[0];
      const double eq = l2 / dof_norm(el, dofs);
      rep.equivalence_min = std::min(rep.equivalence_min, eq);
      rep.equivalence_max = std::max(rep.equivalence_max, eq);
      const double st = dofs.dot(el.stabilization().cwiseProduct(dofs)) / (std::pow(h, -2 * m) * l2);
      rep.stabilization_min = std::min(rep.stabilization_min, st);
      rep.stabilization_max = std::max(rep.stabilization_max, st);
      ++rep.samples;
    }
  }
  return rep;
}

}  // namespace hmvem
