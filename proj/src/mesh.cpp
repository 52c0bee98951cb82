#include "hmvem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <set>
#include <string>

#include "hmvem/quadrature.hpp"

namespace hmvem {

namespace {

std::string where(int codim, int id) { return "entities[" + std::to_string(codim) + "][" + std::to_string(id) + "]"; }

Eigen::MatrixXd as_matrix(const std::vector<Eigen::VectorXd>& cols, int rows) {
  Eigen::MatrixXd m(rows, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) m.col(static_cast<Eigen::Index>(i)) = cols[i];
  return m;
}

Eigen::VectorXd orthogonalize(Eigen::VectorXd v, const std::vector<Eigen::VectorXd>& basis) {
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& b : basis) v -= b.dot(v) * b;
  return v;
}

Eigen::Vector3d cross3(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return Eigen::Vector3d(a[0], a[1], a[2]).cross(Eigen::Vector3d(b[0], b[1], b[2]));
}

}  // namespace

Frame entity_frame(const std::vector<Eigen::VectorXd>& xs, int entity_dim, int ambient_dim) {
  Frame frame;
  double diam = 0.0;
  for (const auto& x : xs) diam = std::max(diam, (x - xs.front()).norm());
  for (std::size_t j = 1; j < xs.size() && static_cast<int>(frame.tangents.size()) < entity_dim; ++j) {
    const Eigen::VectorXd r = orthogonalize(xs[j] - xs.front(), frame.tangents);
    if (r.norm() > 1e-8 * diam) frame.tangents.push_back(r.normalized());
  }
  if (static_cast<int>(frame.tangents.size()) != entity_dim) throw GeometryError("degenerate entity: vertices do not span its dimension");

  std::vector<Eigen::VectorXd> span = frame.tangents;
  for (int c = 0; c < ambient_dim - entity_dim; ++c) {
    Eigen::VectorXd best;
    double best_norm = -1.0;
    for (int i = 0; i < ambient_dim; ++i) {
      const Eigen::VectorXd r = orthogonalize(Eigen::VectorXd::Unit(ambient_dim, i), span);
      if (r.norm() > best_norm + 1e-12) {
        best_norm = r.norm();
        best = r;
      }
    }
    Eigen::VectorXd nu = best.normalized();
    for (int i = 0; i < ambient_dim; ++i)
      if (std::abs(nu[i]) > 1e-10) {
        if (nu[i] < 0) nu = -nu;
        break;
      }
    frame.normals.push_back(nu);
    span.push_back(nu);
  }
  return frame;
}

ChebyshevBall chebyshev_center(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  const int m = static_cast<int>(a.rows()), d = static_cast<int>(a.cols());
  Eigen::MatrixXd an(m, d);
  Eigen::VectorXd bn(m);
  for (int i = 0; i < m; ++i) {
    const double s = a.row(i).norm();
    an.row(i) = a.row(i) / s;
    bn[i] = b[i] / s;
  }
  ChebyshevBall best;
  best.radius = -std::numeric_limits<double>::infinity();
  std::vector<int> pick(static_cast<std::size_t>(d + 1));
  // enumerate (d+1)-subsets in lexicographic order
  for (int i = 0; i <= d; ++i) pick[static_cast<std::size_t>(i)] = i;
  if (m < d + 1) {
    best.center = Eigen::VectorXd::Zero(d);
    best.radius = 0.0;
    return best;
  }
  while (true) {
    Eigen::MatrixXd sys(d + 1, d + 1);
    Eigen::VectorXd rhs(d + 1);
    for (int r = 0; r <= d; ++r) {
      const int c = pick[static_cast<std::size_t>(r)];
      sys.row(r).head(d) = an.row(c);
      sys(r, d) = 1.0;
      rhs[r] = bn[c];
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(sys);
    if (lu.isInvertible() && std::abs(lu.determinant()) > 1e-12) {
      const Eigen::VectorXd z = lu.solve(rhs);
      const Eigen::VectorXd x = z.head(d);
      const double r = z[d];
      const bool feasible = ((an * x).array() + r <= bn.array() + 1e-12 * (1.0 + bn.cwiseAbs().maxCoeff())).all();
      if (feasible && r > best.radius + 1e-14) {
        best.radius = r;
        best.center = x;
      }
    }
    int i = d;
    while (i >= 0 && pick[static_cast<std::size_t>(i)] == m - d - 1 + i) --i;
    if (i < 0) break;
    ++pick[static_cast<std::size_t>(i)];
    for (int j = i + 1; j <= d; ++j) pick[static_cast<std::size_t>(j)] = pick[static_cast<std::size_t>(j - 1)] + 1;
  }
  if (!best.center.size()) {
    best.center = Eigen::VectorXd::Zero(d);
    best.radius = 0.0;
  }
  return best;
}

PolytopalMesh::PolytopalMesh(const RawMesh& raw) { build(raw); }

void PolytopalMesh::build(const RawMesh& raw) {
  const int n = raw.dimension;
  if (n < 1 || n > 3) throw SchemaError("dimension must be 1, 2 or 3");
  if (raw.vertices.empty()) throw SchemaError("vertices: mesh has no vertices");
  if (static_cast<int>(raw.entities.size()) != n)
    throw SchemaError("entities: expected " + std::to_string(n) + " codimension arrays");
  for (std::size_t i = 0; i < raw.vertices.size(); ++i)
    if (raw.vertices[i].size() != n)
      throw SchemaError("vertices[" + std::to_string(i) + "]: expected " + std::to_string(n) + " coordinates");
  if (raw.entities[0].empty()) throw SchemaError("entities[0]: mesh has no elements");
  dim_ = n;

  const int nv = static_cast<int>(raw.vertices.size());
  entities_.assign(static_cast<std::size_t>(n + 1), {});
  for (int v = 0; v < nv; ++v) {
    Entity e;
    e.codim = n;
    e.dim = 0;
    e.vertices = {v};
    e.measure = 1.0;
    e.barycenter = raw.vertices[static_cast<std::size_t>(v)];
    for (int i = 0; i < n; ++i) e.frame.normals.push_back(Eigen::VectorXd::Unit(n, i));
    e.coords = LocalCoordinates{e.barycenter, 1.0, Eigen::MatrixXd(n, 0)};
    e.kernel_center = e.barycenter;
    entities_[static_cast<std::size_t>(n)].push_back(e);
  }

  // codim n-1 .. 0, deduplicating by vertex set
  std::vector<int> remap_below(static_cast<std::size_t>(nv));
  for (int v = 0; v < nv; ++v) remap_below[static_cast<std::size_t>(v)] = v;
  for (int r = n - 1; r >= 0; --r) {
    const auto& list = raw.entities[static_cast<std::size_t>(r)];
    const int below = static_cast<int>(remap_below.size());
    std::map<std::vector<int>, int> seen;
    std::vector<int> remap(list.size());
    auto& out = entities_[static_cast<std::size_t>(r)];
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string loc = where(r, static_cast<int>(i));
      if (list[i].empty()) throw SchemaError(loc + ": empty boundary list");
      std::vector<int> bnd;
      std::set<int> verts;
      for (std::size_t j = 0; j < list[i].size(); ++j) {
        const int b = list[i][j];
        if (b < 0 || b >= below)
          throw SchemaError(loc + "[" + std::to_string(j) + "]: references missing " +
                            (r == n - 1 ? std::string("vertex ") : "codim-" + std::to_string(r + 1) + " entity ") +
                            std::to_string(b));
        const int mapped = remap_below[static_cast<std::size_t>(b)];
        bnd.push_back(mapped);
        const auto& vs = entities_[static_cast<std::size_t>(r + 1)][static_cast<std::size_t>(mapped)].vertices;
        verts.insert(vs.begin(), vs.end());
      }
      std::vector<int> sorted_bnd = bnd;
      std::sort(sorted_bnd.begin(), sorted_bnd.end());
      if (std::adjacent_find(sorted_bnd.begin(), sorted_bnd.end()) != sorted_bnd.end())
        throw SchemaError(loc + ": repeated boundary entity");
      std::vector<int> key(verts.begin(), verts.end());
      auto it = seen.find(key);
      if (it != seen.end()) {
        if (r == 0) throw SchemaError(loc + ": duplicate element");
        std::vector<int> other = out[static_cast<std::size_t>(it->second)].boundary;
        std::sort(other.begin(), other.end());
        if (other != sorted_bnd) throw SchemaError(loc + ": same vertices as an earlier entity but different boundary");
        remap[i] = it->second;
        continue;
      }
      Entity e;
      e.codim = r;
      e.dim = n - r;
      e.boundary = bnd;
      e.vertices = key;
      remap[i] = static_cast<int>(out.size());
      seen.emplace(key, remap[i]);
      out.push_back(std::move(e));
    }
    remap_below = remap;
  }

  // every entity must bound something
  for (int r = 1; r <= n; ++r) {
    std::vector<char> used(entities_[static_cast<std::size_t>(r)].size(), 0);
    for (const auto& e : entities_[static_cast<std::size_t>(r - 1)])
      for (int b : e.boundary) used[static_cast<std::size_t>(b)] = 1;
    for (std::size_t i = 0; i < used.size(); ++i)
      if (!used[i])
        throw SchemaError((r == n ? "vertices[" + std::to_string(i) + "]" : where(r, static_cast<int>(i))) +
                          ": dangling entity not on the boundary of any higher-dimensional entity");
  }

  for (int r = n; r >= 0; --r)
    for (auto& e : entities_[static_cast<std::size_t>(r)]) {
      e.subentities.assign(static_cast<std::size_t>(n + 1), {});
      e.subentities[static_cast<std::size_t>(r)] = {static_cast<int>(&e - entities_[static_cast<std::size_t>(r)].data())};
      for (int s = r + 1; s <= n; ++s) {
        std::set<int> acc;
        for (int b : e.boundary) {
          const auto& sub = entities_[static_cast<std::size_t>(r + 1)][static_cast<std::size_t>(b)].subentities[static_cast<std::size_t>(s)];
          acc.insert(sub.begin(), sub.end());
        }
        e.subentities[static_cast<std::size_t>(s)].assign(acc.begin(), acc.end());
      }
    }
  for (int k = 0; k < count(0); ++k)
    for (int s = 0; s <= n; ++s)
      for (int id : entities_[0][static_cast<std::size_t>(k)].subentities[static_cast<std::size_t>(s)])
        entities_[static_cast<std::size_t>(s)][static_cast<std::size_t>(id)].elements.push_back(k);

  for (int r = n; r >= 0; --r)
    for (int i = 0; i < count(r); ++i) compute_geometry(r, i);

  for (int i = 0; i < count(1); ++i) {
    const auto& el = entities_[1][static_cast<std::size_t>(i)].elements;
    if (el.size() > 2) throw GeometryError(where(1, i) + ": face shared by more than two elements");
  }
}

void PolytopalMesh::compute_geometry(int codim, int id) {
  Entity& e = entities_[static_cast<std::size_t>(codim)][static_cast<std::size_t>(id)];
  const int n = dim_;
  const std::string loc = where(codim, id);
  if (e.dim == 0) return;
  std::vector<Eigen::VectorXd> xs;

  for (int v : e.vertices) xs.push_back(vertex(v));
  e.diameter = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (std::size_t j = i + 1; j < xs.size(); ++j) e.diameter = std::max(e.diameter, (xs[i] - xs[j]).norm());
  if (!(e.diameter > 0.0)) throw GeometryError(loc + ": zero-measure entity");

  try {
    if (codim == 0) {
      for (int i = 0; i < n; ++i) e.frame.tangents.push_back(Eigen::VectorXd::Unit(n, i));
    } else {
      e.frame = entity_frame(xs, e.dim, n);
    }
  } catch (const GeometryError& err) {
    throw GeometryError(loc + ": " + err.what());
  }
  const Eigen::MatrixXd t = as_matrix(e.frame.tangents, n);
  for (const auto& x : xs) {
    const Eigen::VectorXd off = (x - xs.front()) - t * (t.transpose() * (x - xs.front()));
    if (off.norm() > 1e-8 * e.diameter) throw GeometryError(loc + ": non-planar face");
  }

  if (e.dim == 1) {
    if (e.vertices.size() != 2) throw GeometryError(loc + ": segment must have two vertices");
    const Eigen::VectorXd a = xs[0], b = xs[1];
    e.measure = (b - a).norm();
    e.barycenter = 0.5 * (a + b);
    for (int v : e.boundary) e.outward.push_back((vertex(v) - e.barycenter).normalized());
    e.kernel_center = e.barycenter;
    e.kernel_radius = 0.5 * e.measure;
  } else if (e.dim == 2) {
    orient_polygon(e);
  } else {
    orient_polyhedron(e);
  }
  e.coords = LocalCoordinates{e.barycenter, e.diameter, t};
}

void PolytopalMesh::orient_polygon(Entity& e) {
  const int n = dim_;
  const std::string loc = where(e.codim, static_cast<int>(&e - entities_[static_cast<std::size_t>(e.codim)].data()));
  std::map<int, std::vector<int>> nbr;
  for (int b : e.boundary) {
    const auto& edge = entity(e.codim + 1, b);
    nbr[edge.vertices[0]].push_back(edge.vertices[1]);
    nbr[edge.vertices[1]].push_back(edge.vertices[0]);
  }
  for (const auto& [v, adj] : nbr)
    if (adj.size() != 2) throw GeometryError(loc + ": polygon boundary is not a simple cycle");
  std::vector<int> cycle{e.vertices.front()};
  int prev = -1, cur = cycle.front();
  while (true) {
    const auto& adj = nbr[cur];
    // start toward the smaller neighbour, deterministic
    const int next = prev < 0 ? std::min(adj[0], adj[1]) : (adj[0] == prev ? adj[1] : adj[0]);
    if (next == cycle.front()) break;
    cycle.push_back(next);
    prev = cur;
    cur = next;
    if (cycle.size() > e.vertices.size()) break;
  }
  if (cycle.size() != e.vertices.size()) throw GeometryError(loc + ": polygon boundary is not a single cycle");

  const Eigen::MatrixXd t = as_matrix(e.frame.tangents, n);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
  for (int v : cycle) c += vertex(v);
  c /= static_cast<double>(cycle.size());
  const double h = e.diameter;
  std::vector<Eigen::Vector2d> p;
  for (int v : cycle) p.push_back(t.transpose() * (vertex(v) - c) / h);
  double area2 = 0.0;
  Eigen::Vector2d cen = Eigen::Vector2d::Zero();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto& a = p[i];
    const auto& b = p[(i + 1) % p.size()];
    const double cr = a.x() * b.y() - a.y() * b.x();
    area2 += cr;
    cen += cr * (a + b);
  }
  if (std::abs(area2) < 1e-14) throw GeometryError(loc + ": zero-measure entity");
  cen /= 3.0 * area2;
  if (area2 < 0) {
    std::reverse(cycle.begin() + 1, cycle.end());
    std::reverse(p.begin() + 1, p.end());
  }
  e.cycle = cycle;
  e.measure = 0.5 * std::abs(area2) * h * h;
  e.barycenter = c + h * t * cen;

  std::map<std::pair<int, int>, Eigen::Vector2d> edge_normal;
  Eigen::MatrixXd a(static_cast<Eigen::Index>(p.size()), 2);
  Eigen::VectorXd b(static_cast<Eigen::Index>(p.size()));
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Eigen::Vector2d d = p[(i + 1) % p.size()] - p[i];
    const Eigen::Vector2d out = Eigen::Vector2d(d.y(), -d.x()).normalized();
    const int u = cycle[i], w = cycle[(i + 1) % cycle.size()];
    edge_normal[{std::min(u, w), std::max(u, w)}] = out;
    a.row(static_cast<Eigen::Index>(i)) = out.transpose();
    b[static_cast<Eigen::Index>(i)] = out.dot(p[i]);
  }
  for (int bid : e.boundary) {
    const auto& edge = entity(e.codim + 1, bid);
    e.outward.push_back(t * edge_normal.at({edge.vertices[0], edge.vertices[1]}));
  }
  const ChebyshevBall ball = chebyshev_center(a, b);
  e.kernel_center = c + h * t * ball.center;
  e.kernel_radius = h * ball.radius;
}

void PolytopalMesh::orient_polyhedron(Entity& e) {
  const std::string loc = where(e.codim, static_cast<int>(&e - entities_[static_cast<std::size_t>(e.codim)].data()));
  const int nf = static_cast<int>(e.boundary.size());
  // directed edges of every face cycle
  std::map<std::pair<int, int>, std::vector<std::pair<int, int>>> uses;  // undirected edge -> (face, direction)
  for (int f = 0; f < nf; ++f) {
    const auto& cyc = entity(e.codim + 1, e.boundary[static_cast<std::size_t>(f)]).cycle;
    for (std::size_t i = 0; i < cyc.size(); ++i) {
      const int u = cyc[i], w = cyc[(i + 1) % cyc.size()];
      uses[{std::min(u, w), std::max(u, w)}].push_back({f, u < w ? 1 : -1});
    }
  }
  for (const auto& [edge, list] : uses)
    if (list.size() != 2) throw GeometryError(loc + ": polyhedron boundary is not closed");
  std::vector<int> sign(static_cast<std::size_t>(nf), 0);
  sign[0] = 1;
  std::queue<int> todo;
  todo.push(0);
  while (!todo.empty()) {
    const int f = todo.front();
    todo.pop();
    for (const auto& [edge, list] : uses) {
      for (int s = 0; s < 2; ++s) {
        if (list[static_cast<std::size_t>(s)].first != f) continue;
        const auto [g, dg] = list[static_cast<std::size_t>(1 - s)];
        const int df = list[static_cast<std::size_t>(s)].second;
        const int want = -df * sign[static_cast<std::size_t>(f)] * dg;
        if (sign[static_cast<std::size_t>(g)] == 0) {
          sign[static_cast<std::size_t>(g)] = want;
          todo.push(g);
        } else if (sign[static_cast<std::size_t>(g)] != want) {
          throw GeometryError(loc + ": polyhedron boundary is not orientable");
        }
      }
    }
  }
  for (int s : sign)
    if (s == 0) throw GeometryError(loc + ": polyhedron boundary is not connected");

  Eigen::VectorXd c = Eigen::VectorXd::Zero(3);
  for (int v : e.vertices) c += vertex(v);
  c /= static_cast<double>(e.vertices.size());
  std::vector<Eigen::VectorXd> normals;
  double vol = 0.0;
  Eigen::VectorXd first = Eigen::VectorXd::Zero(3);
  for (int f = 0; f < nf; ++f) {
    const auto& face = entity(e.codim + 1, e.boundary[static_cast<std::size_t>(f)]);
    Eigen::VectorXd nrm = cross3(face.frame.tangents[0], face.frame.tangents[1]);
    nrm *= sign[static_cast<std::size_t>(f)];
    const double lever = nrm.dot(face.barycenter - c);
    vol += lever * face.measure / 3.0;
    first += lever * face.measure * (face.barycenter - c) / 4.0;
    normals.push_back(nrm);
  }
  if (std::abs(vol) < 1e-14 * std::pow(e.diameter, 3)) throw GeometryError(loc + ": zero-measure entity");
  if (vol < 0) {
    for (auto& nrm : normals) nrm = -nrm;
    vol = -vol;
    first = -first;
  }
  e.measure = vol;
  e.barycenter = c + first / vol;
  e.outward = normals;

  const double h = e.diameter;
  Eigen::MatrixXd a(nf, 3);
  Eigen::VectorXd b(nf);
  for (int f = 0; f < nf; ++f) {
    const auto& face = entity(e.codim + 1, e.boundary[static_cast<std::size_t>(f)]);
    a.row(f) = normals[static_cast<std::size_t>(f)].transpose();
    b[f] = normals[static_cast<std::size_t>(f)].dot(face.barycenter - c) / h;
  }
  const ChebyshevBall ball = chebyshev_center(a, b);
  e.kernel_center = c + h * ball.center;
  e.kernel_radius = h * ball.radius;
}

double PolytopalMesh::h() const {
  double h = 0.0;
  for (const auto& e : entities_[0]) h = std::max(h, e.diameter);
  return h;
}

double PolytopalMesh::total_measure() const {
  double s = 0.0;
  for (const auto& e : entities_[0]) s += e.measure;
  return s;
}

RawMesh PolytopalMesh::raw() const {
  RawMesh raw;
  raw.dimension = dim_;
  for (int v = 0; v < count(dim_); ++v) raw.vertices.push_back(vertex(v));
  for (int r = 0; r < dim_; ++r) {
    raw.entities.emplace_back();
    for (const auto& e : entities_[static_cast<std::size_t>(r)]) raw.entities.back().push_back(e.boundary);
  }
  return raw;
}

QuadratureRule PolytopalMesh::quadrature(int codim, int id, int degree) const {
  const Entity& e = entity(codim, id);
  QuadratureRule rule;
  if (e.dim == 0) {
    rule.points.push_back(e.barycenter);
    rule.weights.push_back(1.0);
    return rule;
  }
  if (e.dim == 1) return segment_rule(vertex(e.vertices[0]), vertex(e.vertices[1]), degree);
  if (!(e.kernel_radius > 1e-12 * e.diameter))
    throw GeometryError(where(codim, id) + ": entity is not star-shaped (empty kernel)");
  auto fan = [&](const Entity& poly, const Eigen::VectorXd& apex3, bool tets) {
    const auto& cyc = poly.cycle;
    const std::size_t nv = cyc.size();
    // convex polygons are fanned from their first vertex
    bool convex = true;
    for (std::size_t i = 0; i < nv && convex; ++i) {
      const Eigen::VectorXd u = vertex(cyc[(i + 1) % nv]) - vertex(cyc[i]);
      const Eigen::VectorXd w = vertex(cyc[(i + 2) % nv]) - vertex(cyc[(i + 1) % nv]);
      const double turn = u.dot(poly.frame.tangents[0]) * w.dot(poly.frame.tangents[1]) -
                          u.dot(poly.frame.tangents[1]) * w.dot(poly.frame.tangents[0]);
      convex = turn > 1e-10 * poly.diameter * poly.diameter;
    }
    const Eigen::VectorXd& apex2 = convex ? vertex(cyc[0]) : poly.kernel_center;
    for (std::size_t i = convex ? 1 : 0; i < (convex ? nv - 1 : nv); ++i) {
      const Eigen::VectorXd& a = vertex(cyc[i]);
      const Eigen::VectorXd& b = vertex(cyc[(i + 1) % nv]);
      if (!tets)
        append(rule, triangle_rule(apex2, a, b, degree));
      else
        append(rule, tetrahedron_rule(apex3, apex2, a, b, degree));
    }
  };
  if (e.dim == 2) {
    fan(e, e.kernel_center, false);
  } else {
    for (int f : e.boundary) {
      const Entity& face = entity(codim + 1, f);
      if (!(face.kernel_radius > 1e-12 * face.diameter))
        throw GeometryError(where(codim + 1, f) + ": entity is not star-shaped (empty kernel)");
      fan(face, e.kernel_center, true);
    }
  }
  return rule;
}

std::shared_ptr<const MomentTable> PolytopalMesh::moments(int codim, int id, int degree) const {
  {
    std::lock_guard<std::mutex> lock(cache_->mutex);
    auto it = cache_->tables.find({codim, id, degree});
    if (it != cache_->tables.end()) return it->second;
  }
  const Entity& e = entity(codim, id);
  std::shared_ptr<const MomentTable> table;
  if (e.dim == 3) {
    // integrals of homogeneous xi^beta reduced to face integrals
    const MonomialBasis basis(e.coords, degree);
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(basis.size());
    for (std::size_t f = 0; f < e.boundary.size(); ++f) {
      const Entity& face = entity(codim + 1, e.boundary[f]);
      const double lever = e.outward[f].dot(face.barycenter - e.coords.center);
      const QuadratureRule rule = quadrature(codim + 1, e.boundary[f], degree);
      Eigen::VectorXd face_int = Eigen::VectorXd::Zero(basis.size());
      for (std::size_t q = 0; q < rule.size(); ++q) face_int += rule.weights[q] * basis.values(rule.points[q]);
      for (int b = 0; b < basis.size(); ++b)
        acc[b] += lever * face_int[b] / (3.0 + basis.exponents()[static_cast<std::size_t>(b)].order());
    }
    table = std::make_shared<MomentTable>(e.coords, degree, std::vector<double>(acc.data(), acc.data() + acc.size()));
  } else {
    table = std::make_shared<MomentTable>(MomentTable::from_quadrature(e.coords, degree, quadrature(codim, id, degree)));
  }
  std::lock_guard<std::mutex> lock(cache_->mutex);
  // keyed by exact degree so values never depend on request history
  auto& slot = cache_->tables[{codim, id, degree}];
  if (!slot) slot = table;
  return slot;
}

PolytopalMesh build_lattice(const RawMesh& raw) { return PolytopalMesh(raw); }

std::shared_ptr<const MomentTable> monomial_moments(const PolytopalMesh& mesh, int codim, int id, int degree) {
  return mesh.moments(codim, id, degree);
}

MeshDiagnostics check_mesh(const PolytopalMesh& mesh, double chunkiness_limit) {
  MeshDiagnostics report;
  report.h = mesh.h();
  const int n = mesh.dim();
  for (int k = 0; k < mesh.count(0); ++k) {
    const Entity& e = mesh.entity(0, k);
    ElementDiagnostics d;
    d.element = k;
    d.diameter = e.diameter;
    d.kernel_radius = e.kernel_radius;
    d.star_shaped = e.kernel_radius > 1e-12 * e.diameter;
    d.chunkiness = d.star_shaped ? e.diameter / e.kernel_radius : std::numeric_limits<double>::infinity();
    for (int r = 1; r < n; ++r)
      for (int f : e.subentities[static_cast<std::size_t>(r)])
        d.eta = std::max(d.eta, e.diameter / mesh.entity(r, f).diameter);
    d.flagged = !d.star_shaped || d.chunkiness > chunkiness_limit;
    report.max_chunkiness = std::max(report.max_chunkiness, d.chunkiness);
    report.max_eta = std::max(report.max_eta, d.eta);
    if (d.flagged) report.flagged.push_back(k);
    report.elements.push_back(d);
  }
  if (n == 3)
    for (int f = 0; f < mesh.count(1); ++f) {
      const Entity& face = mesh.entity(1, f);
      if (!(face.kernel_radius > 1e-12 * face.diameter)) report.faces_star_shaped = false;
    }
  return report;
}

}  // namespace hmvem
