#include "hmvem/element.hpp"

#include <cmath>
#include <string>

namespace hmvem {

namespace {

std::string config_name(const ElementConfig& c) {
  return "(n=" + std::to_string(c.n) + ", m=" + std::to_string(c.m) + ", k=" + std::to_string(c.k) + ")";
}

/// Pads coefficient rows of a lower-degree space into P_degree (graded order).
Eigen::MatrixXd pad_rows(const Eigen::MatrixXd& coeffs, int rows) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rows, coeffs.cols());
  out.topRows(coeffs.rows()) = coeffs;
  return out;
}

Eigen::MatrixXd weighted_cross(const MonomialBasis& a, const MonomialBasis& b, const QuadratureRule& rule) {
  Eigen::MatrixXd va = a.value_matrix(rule.points);
  const Eigen::MatrixXd vb = b.value_matrix(rule.points);
  for (std::size_t q = 0; q < rule.size(); ++q) va.row(static_cast<Eigen::Index>(q)) *= rule.weights[q];
  return va.transpose() * vb;
}

}  // namespace

bool supported(const ElementConfig& c) {
  if (c.m < 1 || c.k < c.m) return false;
  switch (c.n) {
    case 1:
      return c.m <= 4;
    case 2:
      return c.m <= 3 && c.k <= c.m + 3;
    case 3:
      return c.m <= 2 && c.k <= 3;
    default:
      return false;
  }
}

void validate(const ElementConfig& c) {
  if (c.m < 1) throw UnsupportedConfig("m must be at least 1, got " + config_name(c));
  if (c.k < c.m) throw UnsupportedConfig("k must be at least m, got " + config_name(c));
  if (!supported(c)) throw UnsupportedConfig("unsupported element configuration " + config_name(c));
}

int entity_dof_count(int n, int r, int m, int k) {
  if (r == n) return poly_dim(n, m - 1);
  if (r == 0) return poly_dim(n, k - 2 * m);
  int count = 0;
  for (const auto& alpha : multi_indices_up_to(r, m - 1)) count += poly_dim(n - r, k - 2 * m + alpha.order());
  return count;
}

VirtualElement::VirtualElement(const PolytopalMesh& mesh, int codim, int id, int m, int k, ElementCache& cache)
    : mesh_(&mesh),
      entity_(&mesh.entity(codim, id)),
      codim_(codim),
      id_(id),
      dim_(entity_->dim),
      m_(m),
      k_(k),
      cache_(&cache) {
  if (dim_ < 1) throw UnsupportedConfig("elements need dimension at least 1");
  if (m < 1 || k < m) throw UnsupportedConfig("element needs 1 <= m <= k");
  tangents_ = entity_->coords.tangents;
  basis_ = std::make_shared<const MonomialBasis>(entity_->coords, k);
  build_layout();
  if (dim_ == 1) {
    build_segment();
  } else {
    build_traces();
    build_projectors();
    if (!top_level())
      for (int j = 1; j < m_; ++j)
        for (const auto& beta : multi_indices(dim_, j)) grad_cache_[beta] = grad_projection(beta);
  }
  if (top_level()) build_local();
}

void VirtualElement::build_layout() {
  const int top = mesh_->dim();
  auto add = [this](DofDescriptor d) {
    dof_lookup_[{d.codim, d.entity, d.index.entries(), d.test}] = layout_.size();
    layout_.dofs.push_back(std::move(d));
  };
  for (int v : entity_->subentities[static_cast<std::size_t>(top)]) {
    int local = 0;
    for (const auto& gamma : multi_indices_up_to(dim_, m_ - 1))
      add({DofDescriptor::Kind::Vertex, top, v, dim_, gamma, 0, local++});
  }
  for (int r = dim_ - 1; r >= 1; --r)
    for (int g : entity_->subentities[static_cast<std::size_t>(codim_ + r)]) {
      int local = 0;
      for (const auto& alpha : multi_indices_up_to(r, m_ - 1)) {
        const int t = poly_dim(dim_ - r, k_ - 2 * m_ + alpha.order());
        for (int i = 0; i < t; ++i) add({DofDescriptor::Kind::Moment, codim_ + r, g, r, alpha, i, local++});
      }
    }
  for (int i = 0; i < poly_dim(dim_, k_ - 2 * m_); ++i)
    add({DofDescriptor::Kind::Interior, codim_, id_, 0, MultiIndex(), i, i});
}

int VirtualElement::dof_index(int codim, int entity, const MultiIndex& index, int test) const {
  auto it = dof_lookup_.find({codim, entity, index.entries(), test});
  if (it == dof_lookup_.end()) throw Error("element has no such degree of freedom");
  return it->second;
}

std::vector<Eigen::VectorXd> VirtualElement::sub_normals(int rel_codim, int abs_codim, int entity) const {
  if (rel_codim <= 0) return {};
  if (top_level()) return mesh_->entity(abs_codim, entity).frame.normals;
  if (rel_codim != 1) throw Error("face elements only carry moments on their facets");
  const auto& bnd = entity_->boundary;
  for (std::size_t f = 0; f < bnd.size(); ++f)
    if (bnd[f] == entity) return {entity_->outward[f]};
  throw Error("entity is not a facet of the element");
}

const Eigen::MatrixXd& VirtualElement::test_change(int abs_codim, int entity, int degree) const {
  std::lock_guard<std::mutex> lock(test_mutex_);
  auto& slot = test_cache_[{abs_codim, entity, degree}];
  if (slot.size() == 0 && degree >= 0) {
    const Entity& g = mesh_->entity(abs_codim, entity);
    slot = orthonormalize(MonomialBasis(g.coords, degree), *mesh_->moments(abs_codim, entity, 2 * degree)).change;
  }
  return slot;
}

Eigen::MatrixXd VirtualElement::derivative_combination(const MonomialBasis& basis,
                                                       const std::vector<Eigen::VectorXd>& forms,
                                                       const MultiIndex& powers) const {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(basis.size(), basis.size());
  for (const auto& [gamma, coef] : expand_linear_forms(forms, powers))
    if (coef != 0.0) d += coef * derivative_matrix(basis, gamma);
  return d;
}

Eigen::MatrixXd VirtualElement::dof_matrix(int degree) const {
  const MonomialBasis b(entity_->coords, degree);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(ndofs(), b.size());
  std::map<std::tuple<int, int, std::vector<int>>, bool> done;
  for (int i = 0; i < ndofs(); ++i) {
    const auto& d = layout_.dofs[static_cast<std::size_t>(i)];
    if (d.kind == DofDescriptor::Kind::Vertex) {
      out.row(i) = b.derivative_values(mesh_->vertex(d.entity), d.index).transpose();
      continue;
    }
    if (done.count({d.codim, d.entity, d.index.entries()})) continue;
    done[{d.codim, d.entity, d.index.entries()}] = true;
    if (d.kind == DofDescriptor::Kind::Interior) {
      const int t = k_ - 2 * m_;
      const Eigen::MatrixXd& c = test_change(codim_, id_, t);
      const Eigen::MatrixXd g =
          gram_matrix(MonomialBasis(entity_->coords, t), b, *mesh_->moments(codim_, id_, t + degree));
      const Eigen::MatrixXd rows = c * g / entity_->measure;
      for (int r = 0; r < rows.rows(); ++r) out.row(dof_index(codim_, id_, MultiIndex(), r)) = rows.row(r);
      continue;
    }
    const Entity& g = mesh_->entity(d.codim, d.entity);
    const int t = k_ - 2 * m_ + d.index.order();
    const Eigen::MatrixXd& c = test_change(d.codim, d.entity, t);
    std::vector<Eigen::VectorXd> forms;
    for (const auto& nu : sub_normals(d.rel_codim, d.codim, d.entity)) forms.push_back(tangents_.transpose() * nu);
    const Eigen::MatrixXd dcomb = derivative_combination(b, forms, d.index);
    const QuadratureRule rule = mesh_->quadrature(d.codim, d.entity, degree + t);
    const Eigen::MatrixXd rows = weighted_cross(MonomialBasis(g.coords, t), b, rule);
    const Eigen::MatrixXd moments = c * rows * dcomb / g.measure;
    for (int r = 0; r < moments.rows(); ++r) out.row(dof_index(d.codim, d.entity, d.index, r)) = moments.row(r);
  }
  return out;
}

Eigen::VectorXd VirtualElement::dof_map(const PolyCoeffs& p) const {
  if (!p.basis->coords().same_as(entity_->coords))
    throw Error("dof_map needs a polynomial in the element's coordinates");
  return dof_matrix(p.basis->degree()) * p.coeffs;
}

Eigen::MatrixXd VirtualElement::constraint_rows(int degree, Eigen::MatrixXd& rhs) const {
  const MonomialBasis b(entity_->coords, degree);
  const auto& gammas = multi_indices_up_to(dim_, m_ - 1);
  const int top = mesh_->dim();
  Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(gammas.size()), b.size());
  rhs = Eigen::MatrixXd::Zero(rows.rows(), ndofs());
  const double h = entity_->diameter;
  for (std::size_t g = 0; g < gammas.size(); ++g) {
    const double s = std::pow(h, gammas[g].order());
    for (int v : entity_->subentities[static_cast<std::size_t>(top)]) {
      rows.row(static_cast<Eigen::Index>(g)) += s * b.derivative_values(mesh_->vertex(v), gammas[g]).transpose();
      rhs(static_cast<Eigen::Index>(g), dof_index(top, v, gammas[g], 0)) += s;
    }
  }
  return rows;
}

namespace {

Eigen::MatrixXd solve_saddle(const Eigen::MatrixXd& energy, const Eigen::MatrixXd& rhs, const Eigen::MatrixXd& b,
                             const Eigen::MatrixXd& c, double scale) {
  const Eigen::Index nk = energy.rows(), nc = b.rows();
  Eigen::MatrixXd sys = Eigen::MatrixXd::Zero(nk + nc, nk + nc);
  sys.topLeftCorner(nk, nk) = scale * energy;
  sys.topRightCorner(nk, nc) = b.transpose();
  sys.bottomLeftCorner(nc, nk) = b;
  Eigen::MatrixXd full(nk + nc, rhs.cols());
  full.topRows(nk) = scale * rhs;
  full.bottomRows(nc) = c;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(sys);
  if (!lu.isInvertible()) throw GeometryError("singular projector system on element");
  return lu.solve(full).topRows(nk);
}

Eigen::MatrixXd energy_cross(const MonomialBasis& a, const MonomialBasis& b, const MomentTable& moments, int m) {
  const Eigen::MatrixXd cross = gram_matrix(a, b, moments);
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(a.size(), b.size());
  for (const auto& gamma : multi_indices(a.dim(), m))
    g += gamma.multinomial() * derivative_matrix(a, gamma).transpose() * cross * derivative_matrix(b, gamma);
  return g;
}

}  // namespace

void VirtualElement::build_segment() {
  const int p = segment_degree(m_, k_);
  const MonomialBasis bp(entity_->coords, p);
  const Eigen::MatrixXd dp = dof_matrix(p);
  if (dp.rows() != dp.cols()) throw Error("segment dofs do not match the polynomial space");
  Eigen::FullPivLU<Eigen::MatrixXd> lu(dp);
  if (!lu.isInvertible()) throw GeometryError("singular trace system on segment");
  reconstruction_ = lu.inverse();

  mass_ = gram_matrix(*basis_, *basis_, *mesh_->moments(codim_, id_, 2 * k_));
  energy_ = energy_cross(*basis_, *basis_, *mesh_->moments(codim_, id_, 2 * k_), m_);
  const auto cross_moments = mesh_->moments(codim_, id_, k_ + p);
  const Eigen::MatrixXd rhs = energy_cross(*basis_, bp, *cross_moments, m_) * reconstruction_;
  Eigen::MatrixXd c;
  const Eigen::MatrixXd b = constraint_rows(k_, c);
  pi_star_ = solve_saddle(energy_, rhs, b, c, std::pow(entity_->diameter, 2 * m_ - dim_));
  build_q();
  dof_matrix_k_ = dof_matrix(k_);
}

Eigen::MatrixXd VirtualElement::child_derivative(const VirtualElement& child, const MultiIndex& beta,
                                                 int degree) const {
  const int rows = poly_dim(child.dim(), degree);
  if (child.dim() == 1) {
    const MonomialBasis bp(child.entity().coords, segment_degree(child.m(), child.k()));
    return pad_rows(derivative_matrix(bp, beta) * child.reconstruction(), rows);
  }
  return pad_rows(child.grad_projection(beta), rows);
}

Eigen::MatrixXd VirtualElement::transfer(const VirtualElement& child, const Facet& facet, int a) const {
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(child.ndofs(), ndofs());
  const Entity& g = mesh_->entity(facet.codim, facet.id);
  std::vector<Eigen::VectorXd> forms{tangents_.transpose() * facet.nu};
  for (const auto& t : g.frame.tangents) forms.push_back(tangents_.transpose() * t);
  const int top = mesh_->dim();
  for (int ci = 0; ci < child.ndofs(); ++ci) {
    const auto& d = child.layout().dofs[static_cast<std::size_t>(ci)];
    switch (d.kind) {
      case DofDescriptor::Kind::Vertex: {
        std::vector<int> powers{a};
        powers.insert(powers.end(), d.index.entries().begin(), d.index.entries().end());
        for (const auto& [gamma, coef] : expand_linear_forms(forms, MultiIndex(powers)))
          if (coef != 0.0) r(ci, dof_index(top, d.entity, gamma, 0)) += coef;
        break;
      }
      case DofDescriptor::Kind::Moment: {
        const std::vector<Eigen::VectorXd> from = sub_normals(2, d.codim, d.entity);
        const std::vector<Eigen::VectorXd> to{facet.nu, child.sub_normals(1, d.codim, d.entity)[0]};
        const int s = a + d.index[0];
        const Eigen::MatrixXd rot = normal_bundle_rotation(from, to, s);
        const int row = order_rank(MultiIndex{a, d.index[0]});
        const auto& cols = multi_indices(2, s);
        for (std::size_t c = 0; c < cols.size(); ++c)
          if (rot(row, static_cast<Eigen::Index>(c)) != 0.0)
            r(ci, dof_index(d.codim, d.entity, cols[c], d.test)) += rot(row, static_cast<Eigen::Index>(c));
        break;
      }
      case DofDescriptor::Kind::Interior:
        r(ci, dof_index(facet.codim, facet.id, MultiIndex{a}, d.test)) = 1.0;
        break;
    }
  }
  return r;
}

void VirtualElement::build_traces() {
  const int deg = trace_degree();
  const auto& bnd = entity_->boundary;
  for (std::size_t f = 0; f < bnd.size(); ++f) {
    Facet facet;
    facet.codim = codim_ + 1;
    facet.id = bnd[f];
    facet.outward = entity_->outward[f];
    facet.nu = sub_normals(1, facet.codim, facet.id)[0];
    const Entity& g = mesh_->entity(facet.codim, facet.id);
    facet.cross = weighted_cross(MonomialBasis(g.coords, deg), *basis_,
                                 mesh_->quadrature(facet.codim, facet.id, deg + k_));

    // d^a v / d nu^a and its tangential derivatives, through the face elements
    std::map<std::pair<int, std::vector<int>>, Eigen::MatrixXd> pieces;
    for (int a = 0; a < m_; ++a) {
      const auto child = cache_->get(facet.codim, facet.id, m_ - a, k_ - a);
      const Eigen::MatrixXd r = transfer(*child, facet, a);
      for (const auto& beta : multi_indices_up_to(dim_ - 1, m_ - 1 - a))
        pieces[{a, beta.entries()}] = child_derivative(*child, beta, deg) * r;
    }
    std::vector<Eigen::VectorXd> forms;
    for (int c = 0; c < dim_; ++c) {
      Eigen::VectorXd form(dim_);
      form[0] = tangents_.col(c).dot(facet.nu);
      for (int l = 0; l + 1 < dim_; ++l) form[l + 1] = tangents_.col(c).dot(g.frame.tangents[static_cast<std::size_t>(l)]);
      forms.push_back(form);
    }
    for (const auto& gamma : multi_indices_up_to(dim_, m_ - 1)) {
      Eigen::MatrixXd tr = Eigen::MatrixXd::Zero(poly_dim(dim_ - 1, deg), ndofs());
      for (const auto& [idx, coef] : expand_linear_forms(forms, gamma)) {
        if (coef == 0.0) continue;
        const std::vector<int> beta(idx.entries().begin() + 1, idx.entries().end());
        tr += coef * pieces.at({idx[0], beta});
      }
      facet.traces[gamma] = tr;
    }
    facets_.push_back(std::move(facet));
  }
}

const Eigen::MatrixXd& VirtualElement::trace(int facet, const MultiIndex& gamma) const {
  if (dim_ < 2) throw Error("traces are only stored on elements of dimension 2 and 3");
  return facets_.at(static_cast<std::size_t>(facet)).traces.at(gamma);
}

void VirtualElement::build_projectors() {
  const int nk = basis_->size();
  const auto moments2k = mesh_->moments(codim_, id_, 2 * k_);
  mass_ = gram_matrix(*basis_, *basis_, *moments2k);
  energy_ = energy_cross(*basis_, *basis_, *moments2k, m_);

  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(nk, ndofs());
  const int t = k_ - 2 * m_;
  if (t >= 0) {
    const MonomialBasis bt(entity_->coords, t);
    const int nt = bt.size();
    const Eigen::MatrixXd& c = test_change(codim_, id_, t);
    const Eigen::MatrixXd mt = gram_matrix(bt, bt, *mesh_->moments(codim_, id_, 2 * t));
    const Eigen::MatrixXd lm = laplacian_power_matrix(*basis_, m_).topRows(nt);
    const Eigen::MatrixXd pairing = c * mt * lm;  // row i: ((-Delta)^m m_b, q_i)
    for (int i = 0; i < nt; ++i) rhs.col(dof_index(codim_, id_, MultiIndex(), i)) += pairing.row(i).transpose();
  }
  const Eigen::MatrixXd lap = laplacian_power_matrix(*basis_, 1);
  for (const auto& facet : facets_) {
    Eigen::MatrixXd base = directional_derivative_matrix(*basis_, facet.outward);
    // base = (-Delta)^(m-1-i) d_n, built from i = m-1 downwards
    for (int i = m_ - 1; i >= 0; --i) {
      for (const auto& gamma : multi_indices(dim_, i)) {
        const Eigen::MatrixXd p = derivative_matrix(*basis_, gamma) * base;
        rhs += gamma.multinomial() * p.transpose() * facet.cross.transpose() * facet.traces.at(gamma);
      }
      base = lap * base;
    }
  }
  Eigen::MatrixXd c;
  const Eigen::MatrixXd b = constraint_rows(k_, c);
  pi_star_ = solve_saddle(energy_, rhs, b, c, std::pow(entity_->diameter, 2 * m_ - dim_));

  build_q();
  dof_matrix_k_ = dof_matrix(k_);
}

// Q_k v = Pi v + Q_{k-2m} v - Q_{k-2m} Pi v, Q_{k-2m} v from the interior moments
void VirtualElement::build_q() {
  const int t = k_ - 2 * m_;
  q_star_ = pi_star_;
  if (t >= 0) {
    const MonomialBasis bt(entity_->coords, t);
    const int nt = bt.size();
    const Eigen::MatrixXd& ci = test_change(codim_, id_, t);
    Eigen::MatrixXd inner = -ci * gram_matrix(bt, *basis_, *mesh_->moments(codim_, id_, t + k_)) * pi_star_ /
                            entity_->measure;
    for (int i = 0; i < nt; ++i) inner(i, dof_index(codim_, id_, MultiIndex(), i)) += 1.0;
    q_star_.topRows(nt) += ci.transpose() * inner;
  }
}

Eigen::MatrixXd VirtualElement::grad_projection(const MultiIndex& beta) const {
  const int j = beta.order();
  if (j == 0) return q_star_;
  if (j > m_) throw Error("gradient projections are available up to order m");
  auto it = grad_cache_.find(beta);
  if (it != grad_cache_.end()) return it->second;
  const int deg = k_ - j;
  if (deg < 0) return Eigen::MatrixXd(0, ndofs());
  const MonomialBasis bt(entity_->coords, deg);
  const Eigen::MatrixXd mt = gram_matrix(bt, bt, *mesh_->moments(codim_, id_, 2 * deg));
  if (dim_ == 1) {
    const MonomialBasis bp(entity_->coords, segment_degree(m_, k_));
    const Eigen::MatrixXd cross = gram_matrix(bt, bp, *mesh_->moments(codim_, id_, deg + bp.degree()));
    return mt.llt().solve(cross * derivative_matrix(bp, beta) * reconstruction_);
  }
  int c = dim_ - 1;
  while (beta[c] == 0) --c;
  const MultiIndex prev_index = beta - MultiIndex::unit(dim_, c);
  const Eigen::MatrixXd prev = grad_projection(prev_index);
  const MonomialBasis bprev(entity_->coords, deg + 1);
  // (d^beta v, q) = -(d^beta' v, d_c q) + sum_F n_c (d^beta' v, q)_F
  Eigen::MatrixXd rhs = -derivative_matrix(bt, MultiIndex::unit(dim_, c)).transpose() *
                        gram_matrix(bt, bprev, *mesh_->moments(codim_, id_, 2 * deg + 1)) * prev;
  for (const auto& facet : facets_) {
    const double w = facet.outward.dot(tangents_.col(c));
    if (std::abs(w) < 1e-15) continue;
    rhs += w * facet.cross.leftCols(bt.size()).transpose() * facet.traces.at(prev_index);
  }
  return mt.llt().solve(rhs);
}

Eigen::VectorXd VirtualElement::basis_moments(const std::function<double(const Eigen::VectorXd&)>& f,
                                              int degree) const {
  const QuadratureRule rule = mesh_->quadrature(codim_, id_, degree);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(basis_->size());
  for (std::size_t q = 0; q < rule.size(); ++q) out += rule.weights[q] * f(rule.points[q]) * basis_->values(rule.points[q]);
  return out;
}

void VirtualElement::build_local() {
  const double h = entity_->diameter;
  stab_ = Eigen::VectorXd::Zero(ndofs());
  for (int i = 0; i < ndofs(); ++i) {
    const auto& d = layout_.dofs[static_cast<std::size_t>(i)];
    if (d.kind == DofDescriptor::Kind::Vertex) {
      const int j = d.index.order();
      stab_[i] = std::pow(h, dim_ + 2 * j - 2 * m_) * d.index.multinomial();
    } else if (d.kind == DofDescriptor::Kind::Moment) {
      stab_[i] = std::pow(h, d.rel_codim + 2 * d.index.order() - 2 * m_) * mesh_->entity(d.codim, d.entity).measure;
    }
  }
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(ndofs(), ndofs());
  const Eigen::MatrixXd p1 = id - dof_matrix_k_ * pi_star_;
  const Eigen::MatrixXd p2 = id - dof_matrix_k_ * q_star_;
  local_ = pi_star_.transpose() * energy_ * pi_star_ + p1.transpose() * stab_.asDiagonal() * p1 +
           q_star_.transpose() * mass_ * q_star_ +
           std::pow(h, 2 * m_) * p2.transpose() * stab_.asDiagonal() * p2;
  local_ = 0.5 * (local_ + local_.transpose()).eval();
}

std::shared_ptr<const VirtualElement> ElementCache::get(int codim, int id, int m, int k) {
  std::shared_ptr<Slot> slot;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto& s = slots_[{codim, id, m, k}];
    if (!s) s = std::make_shared<Slot>();
    slot = s;
  }
  std::call_once(slot->once, [&] { slot->element = std::make_shared<const VirtualElement>(*mesh_, codim, id, m, k, *this); });
  return slot->element;
}

std::shared_ptr<const VirtualElement> build_element(const PolytopalMesh& mesh, int id, const ElementConfig& config,
                                                    ElementCache& cache) {
  validate(config);
  if (config.n != mesh.dim())
    throw UnsupportedConfig("configuration dimension " + std::to_string(config.n) + " does not match the mesh");
  return std::make_shared<const VirtualElement>(mesh, 0, id, config.m, config.k, cache);
}

}  // namespace hmvem
