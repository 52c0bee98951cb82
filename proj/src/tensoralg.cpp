#include "hmvem/tensoralg.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <string>

namespace hmvem {

int MultiIndex::order() const { return std::accumulate(entries_.begin(), entries_.end(), 0); }

double MultiIndex::factorial() const {
  double f = 1.0;
  for (int a : entries_) f *= hmvem::factorial(a);
  return f;
}

double MultiIndex::multinomial() const { return hmvem::factorial(order()) / factorial(); }

bool MultiIndex::supported_in_first(int j) const {
  for (int i = j; i < dim(); ++i)
    if (entries_[static_cast<std::size_t>(i)] != 0) return false;
  return true;
}

MultiIndex MultiIndex::operator+(const MultiIndex& other) const {
  if (other.dim() != dim()) throw TensorError("multi-index dimension mismatch");
  MultiIndex r(*this);
  for (int i = 0; i < dim(); ++i) r[i] += other[i];
  return r;
}

MultiIndex MultiIndex::operator-(const MultiIndex& other) const {
  if (other.dim() != dim()) throw TensorError("multi-index dimension mismatch");
  MultiIndex r(*this);
  for (int i = 0; i < dim(); ++i) {
    r[i] -= other[i];
    if (r[i] < 0) throw TensorError("negative multi-index entry");
  }
  return r;
}

bool MultiIndex::dominates(const MultiIndex& other) const {
  for (int i = 0; i < dim(); ++i)
    if (entries_[static_cast<std::size_t>(i)] < other[i]) return false;
  return true;
}

bool operator<(const MultiIndex& a, const MultiIndex& b) {
  const int oa = a.order(), ob = b.order();
  if (oa != ob) return oa < ob;
  for (int i = a.dim() - 1; i >= 0; --i)
    if (a[i] != b[i]) return a[i] < b[i];
  return false;
}

double factorial(int n) {
  if (n < 0) throw TensorError("factorial of negative integer");
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

long long binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0;
  k = std::min(k, n - k);
  long long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

int poly_dim(int n, int k) {
  if (k < 0) return 0;
  return static_cast<int>(binomial(n + k, k));
}

namespace {

void compositions(int dim, int order, int slot, MultiIndex& cur, std::vector<MultiIndex>& out) {
  if (slot == dim - 1) {
    cur[slot] = order;
    out.push_back(cur);
    return;
  }
  for (int a = order; a >= 0; --a) {
    cur[slot] = a;
    compositions(dim, order - a, slot + 1, cur, out);
  }
}

struct IndexCache {
  std::mutex mutex;
  std::map<std::pair<int, int>, std::vector<MultiIndex>> exact;
  std::map<std::pair<int, int>, std::vector<MultiIndex>> graded;
};

IndexCache& index_cache() {
  static IndexCache cache;
  return cache;
}

}  // namespace

const std::vector<MultiIndex>& multi_indices(int dim, int order) {
  if (dim < 0) throw TensorError("negative dimension");
  auto& cache = index_cache();
  std::lock_guard lock(cache.mutex);
  auto key = std::make_pair(dim, order);
  auto it = cache.exact.find(key);
  if (it != cache.exact.end()) return it->second;
  std::vector<MultiIndex> out;
  if (order >= 0) {
    if (dim == 0) {
      if (order == 0) out.emplace_back(0);
    } else {
      MultiIndex cur(dim);
      compositions(dim, order, 0, cur, out);
      std::sort(out.begin(), out.end());
    }
  }
  return cache.exact.emplace(key, std::move(out)).first->second;
}

const std::vector<MultiIndex>& multi_indices_up_to(int dim, int max_order) {
  auto key = std::make_pair(dim, max_order);
  {
    auto& cache = index_cache();
    std::lock_guard lock(cache.mutex);
    auto it = cache.graded.find(key);
    if (it != cache.graded.end()) return it->second;
  }
  std::vector<MultiIndex> out;
  for (int j = 0; j <= max_order; ++j) {
    const auto& level = multi_indices(dim, j);
    out.insert(out.end(), level.begin(), level.end());
  }
  auto& cache = index_cache();
  std::lock_guard lock(cache.mutex);
  return cache.graded.emplace(key, std::move(out)).first->second;
}

int order_rank(const MultiIndex& alpha) {
  const auto& level = multi_indices(alpha.dim(), alpha.order());
  auto it = std::lower_bound(level.begin(), level.end(), alpha);
  if (it == level.end() || *it != alpha) throw TensorError("multi-index not found");
  return static_cast<int>(it - level.begin());
}

int graded_rank(const MultiIndex& alpha) {
  return poly_dim(alpha.dim(), alpha.order() - 1) + order_rank(alpha);
}

// ---------------------------------------------------------------------------

SymTensor::SymTensor(int dim, int order)
    : dim_(dim), order_(order), components_(multi_indices(dim, order).size(), 0.0) {
  if (order < 0 || dim < 1) throw TensorError("invalid symmetric tensor shape");
}

SymTensor::SymTensor(int dim, int order, std::vector<double> components)
    : dim_(dim), order_(order), components_(std::move(components)) {
  if (order < 0 || dim < 1) throw TensorError("invalid symmetric tensor shape");
  if (components_.size() != multi_indices(dim, order).size())
    throw TensorError("symmetric tensor component count mismatch");
}

const std::vector<MultiIndex>& SymTensor::indices() const { return multi_indices(dim_, order_); }

double SymTensor::at(const MultiIndex& alpha) const {
  return components_[static_cast<std::size_t>(order_rank(alpha))];
}

double& SymTensor::at(const MultiIndex& alpha) {
  return components_[static_cast<std::size_t>(order_rank(alpha))];
}

double SymTensor::weight(std::size_t i) const { return indices()[i].multinomial(); }

namespace {

MultiIndex counts_of(int dim, const std::vector<int>& tuple) {
  MultiIndex alpha(dim);
  for (int c : tuple) {
    if (c < 0 || c >= dim) throw TensorError("tensor index " + std::to_string(c) + " out of range");
    alpha[c] += 1;
  }
  return alpha;
}

}  // namespace

double SymTensor::entry(const std::vector<int>& tuple) const {
  if (static_cast<int>(tuple.size()) != order_) throw TensorError("index tuple has wrong length");
  return at(counts_of(dim_, tuple));
}

SymTensor& SymTensor::operator+=(const SymTensor& other) {
  if (other.dim_ != dim_ || other.order_ != order_) throw TensorError("symmetric tensor shape mismatch");
  for (std::size_t i = 0; i < components_.size(); ++i) components_[i] += other.components_[i];
  return *this;
}

SymTensor& SymTensor::operator*=(double s) {
  for (double& c : components_) c *= s;
  return *this;
}

SymTensor sym(int dim, int order, const std::vector<TensorEntry>& entries) {
  SymTensor out(dim, order);
  for (const auto& e : entries) {
    if (static_cast<int>(e.tuple.size()) != order) throw TensorError("index tuple has wrong length");
    out.at(counts_of(dim, e.tuple)) += e.value;
  }
  // each component collects the entries of its permutation class; average it
  const auto& idx = out.indices();
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] /= idx[i].multinomial();
  return out;
}

double contract(const SymTensor& a, const SymTensor& b) {
  if (a.dim() != b.dim() || a.order() != b.order()) throw TensorError("contraction shape mismatch");
  const auto& idx = a.indices();
  double s = 0.0;
  for (std::size_t i = 0; i < idx.size(); ++i) s += idx[i].multinomial() * a[i] * b[i];
  return s;
}

SymTensor sym_outer(const std::vector<Eigen::VectorXd>& vectors) {
  if (vectors.empty()) throw TensorError("sym_outer needs at least one vector; use SymTensor::scalar");
  const int dim = static_cast<int>(vectors.front().size());
  MultiIndex ones(static_cast<int>(vectors.size()));
  for (int l = 0; l < ones.dim(); ++l) ones[l] = 1;
  SymTensor out(dim, ones.dim());
  for (const auto& [alpha, c] : expand_linear_forms(vectors, ones)) out.at(alpha) = c / alpha.multinomial();
  return out;
}

int Frame::ambient_dim() const {
  if (!normals.empty()) return static_cast<int>(normals.front().size());
  if (!tangents.empty()) return static_cast<int>(tangents.front().size());
  return 0;
}

void Frame::validate(double tol) const {
  std::vector<const Eigen::VectorXd*> all;
  for (const auto& v : normals) all.push_back(&v);
  for (const auto& v : tangents) all.push_back(&v);
  const int n = ambient_dim();
  if (static_cast<int>(all.size()) != n) throw TensorError("frame does not span the ambient space");
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (all[i]->size() != n) throw TensorError("frame vector of wrong length");
    if (std::abs(all[i]->norm() - 1.0) > tol) throw TensorError("frame vector is not unit length");
    for (std::size_t j = 0; j < i; ++j)
      if (std::abs(all[i]->dot(*all[j])) > tol) throw TensorError("frame vectors are not orthogonal");
  }
}

SymTensor normal_tangent_product(const Frame& frame, const MultiIndex& alpha, const MultiIndex& beta) {
  if (alpha.dim() != frame.codim() || beta.dim() != static_cast<int>(frame.tangents.size()))
    throw TensorError("multi-index supports inconsistent with frame rank");
  std::vector<Eigen::VectorXd> vecs;
  for (int i = 0; i < alpha.dim(); ++i)
    for (int c = 0; c < alpha[i]; ++c) vecs.push_back(frame.normals[static_cast<std::size_t>(i)]);
  for (int i = 0; i < beta.dim(); ++i)
    for (int c = 0; c < beta[i]; ++c) vecs.push_back(frame.tangents[static_cast<std::size_t>(i)]);
  if (vecs.empty()) return SymTensor(frame.ambient_dim(), 0, {1.0});
  return sym_outer(vecs);
}

std::map<MultiIndex, double> expand_linear_forms(const std::vector<Eigen::VectorXd>& forms,
                                                 const MultiIndex& powers) {
  if (static_cast<int>(forms.size()) != powers.dim()) throw TensorError("one power per linear form required");
  const int vars = forms.empty() ? 0 : static_cast<int>(forms.front().size());
  std::map<MultiIndex, double> poly{{MultiIndex(vars), 1.0}};
  for (std::size_t l = 0; l < forms.size(); ++l) {
    if (forms[l].size() != vars) throw TensorError("linear forms must share the variable count");
    for (int rep = 0; rep < powers[static_cast<int>(l)]; ++rep) {
      std::map<MultiIndex, double> next;
      for (const auto& [alpha, c] : poly)
        for (int v = 0; v < vars; ++v) {
          const double f = forms[l][v];
          if (f == 0.0) continue;
          next[alpha + MultiIndex::unit(vars, v)] += c * f;
        }
      poly = std::move(next);
    }
  }
  return poly;
}

Eigen::MatrixXd normal_bundle_rotation(const std::vector<Eigen::VectorXd>& from,
                                       const std::vector<Eigen::VectorXd>& to, int order, double tol) {
  const int s = static_cast<int>(from.size());
  if (static_cast<int>(to.size()) != s) throw TensorError("normal sets differ in size");
  std::vector<Eigen::VectorXd> forms;
  for (const auto& t : to) {
    Eigen::VectorXd c(s);
    for (int l = 0; l < s; ++l) c[l] = t.dot(from[static_cast<std::size_t>(l)]);
    if (std::abs(c.norm() - 1.0) > tol || std::abs(t.norm() - 1.0) > tol)
      throw TensorError("normal sets do not span the same subspace");
    forms.push_back(std::move(c));
  }
  const auto& idx = multi_indices(s, order);
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(idx.size()),
                                            static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i)
    for (const auto& [beta, c] : expand_linear_forms(forms, idx[i]))
      r(static_cast<Eigen::Index>(i), order_rank(beta)) += c;
  return r;
}

std::map<MultiIndex, double> rotate_normal_bundle(const std::map<MultiIndex, double>& values,
                                                  const std::vector<Eigen::VectorXd>& from,
                                                  const std::vector<Eigen::VectorXd>& to, double tol) {
  const int s = static_cast<int>(from.size());
  std::map<int, int> seen;
  for (const auto& [beta, v] : values) {
    if (beta.dim() != s) throw TensorError("multi-index dimension does not match the normal count");
    seen[beta.order()] += 1;
  }
  std::map<MultiIndex, double> out;
  for (const auto& [order, count] : seen) {
    const auto& idx = multi_indices(s, order);
    if (count != static_cast<int>(idx.size())) throw TensorError("incomplete derivative bundle");
    Eigen::VectorXd old(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) old[static_cast<Eigen::Index>(i)] = values.at(idx[i]);
    const Eigen::VectorXd rotated = normal_bundle_rotation(from, to, order, tol) * old;
    for (std::size_t i = 0; i < idx.size(); ++i) out[idx[i]] = rotated[static_cast<Eigen::Index>(i)];
  }
  return out;
}

}  // namespace hmvem
