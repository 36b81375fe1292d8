#pragma once

// Convex hulls in R^d: incremental beneath-beyond construction with conflict
// lists, exact-sign predicates, facet merging and the full face lattice.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "peellab/detail/predicates.hpp"
#include "peellab/errors.hpp"

namespace peellab {

using PointId = std::int64_t;

struct Point {
  std::vector<double> coords;
  PointId id = 0;
};

// Points stored contiguously; point i has coordinates coords[i*dim .. i*dim+dim).
class PointSet {
 public:
  PointSet() = default;
  explicit PointSet(int dim) : dim_(dim) {}

  int dim() const { return dim_; }
  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }

  void reserve(std::size_t n) {
    ids_.reserve(n);
    coords_.reserve(n * static_cast<std::size_t>(dim_));
  }

  void add(const double* x, PointId id) {
    ids_.push_back(id);
    coords_.insert(coords_.end(), x, x + dim_);
  }
  void add(const std::vector<double>& x, PointId id) {
    if (static_cast<int>(x.size()) != dim_) throw std::invalid_argument("point dimension mismatch");
    add(x.data(), id);
  }
  void add(const Point& p) { add(p.coords, p.id); }

  const double* coord(std::size_t i) const { return coords_.data() + i * static_cast<std::size_t>(dim_); }
  double* coord(std::size_t i) { return coords_.data() + i * static_cast<std::size_t>(dim_); }
  PointId id(std::size_t i) const { return ids_[i]; }
  Point point(std::size_t i) const { return Point{std::vector<double>(coord(i), coord(i) + dim_), ids_[i]}; }

  const std::vector<double>& raw() const { return coords_; }
  const std::vector<PointId>& ids() const { return ids_; }

  // Subset by positions, preserving order.
  PointSet select(const std::vector<std::size_t>& pos) const {
    PointSet out(dim_);
    out.reserve(pos.size());
    for (std::size_t i : pos) out.add(coord(i), ids_[i]);
    return out;
  }

  // Checks the PointSet invariants: finite coordinates, unique ids, d >= 1.
  void validate() const {
    if (dim_ < 1) throw std::invalid_argument("dimension must be positive");
    for (double c : coords_)
      if (!std::isfinite(c)) throw std::invalid_argument("non-finite coordinate");
    std::vector<PointId> s(ids_);
    std::sort(s.begin(), s.end());
    if (std::adjacent_find(s.begin(), s.end()) != s.end()) throw std::invalid_argument("duplicate point id");
  }

 private:
  int dim_ = 0;
  std::vector<double> coords_;
  std::vector<PointId> ids_;
};

struct HullComplex {
  int dim = 0;
  int affine_dim = 0;
  bool degenerate = false;
  std::vector<PointId> vertex_ids;
  // All input points on the (relative) boundary, vertices included.
  std::vector<PointId> boundary_ids;
  // faces[k] lists the k-faces as sorted vertex-id sets; faces[dim-1] are facets.
  std::vector<std::vector<std::vector<PointId>>> faces;
  std::vector<std::vector<double>> facet_normals;
  // Every input point lying on facet j (aligned with faces[dim-1]).
  std::vector<std::vector<PointId>> facet_points;
  double volume = 0.0;

  std::size_t f(int k) const { return k < static_cast<int>(faces.size()) ? faces[k].size() : 0; }
  std::vector<std::size_t> f_vector() const {
    std::vector<std::size_t> out(dim, 0);
    for (int k = 0; k < dim; ++k) out[k] = f(k);
    return out;
  }
};

namespace detail {

struct RawHull {
  int dim = 0;
  int affine_dim = 0;
  std::vector<int> vertices;
  std::vector<int> boundary;
  std::vector<std::vector<std::vector<int>>> faces;
  std::vector<std::vector<double>> normals;
  std::vector<std::vector<int>> facet_points;
  double volume = 0.0;
};

struct AffineBasis {
  std::vector<int> points;  // affinely independent point indices
  std::vector<int> coords;  // coordinates with a nonzero minor
};

inline const double* at(const std::vector<double>& x, int dim, int i) {
  return x.data() + static_cast<std::size_t>(i) * dim;
}

// Returns -1 if q lies in the affine span of the basis, otherwise a coordinate
// extending the basis minor.
inline int span_escape(const std::vector<double>& x, int dim, const AffineBasis& b, const double* q) {
  std::vector<const double*> pts;
  pts.reserve(b.points.size() + 1);
  for (int p : b.points) pts.push_back(at(x, dim, p));
  pts.push_back(q);
  std::vector<int> cs(b.coords);
  cs.push_back(0);
  for (int c = 0; c < dim; ++c) {
    if (std::find(b.coords.begin(), b.coords.end(), c) != b.coords.end()) continue;
    cs.back() = c;
    if (sign_det_diff(pts, cs) != 0) return c;
  }
  return -1;
}

inline AffineBasis affine_basis(const std::vector<double>& x, int dim, int n) {
  AffineBasis b;
  int p0 = 0;
  for (int i = 1; i < n; ++i) {
    if (std::lexicographical_compare(at(x, dim, i), at(x, dim, i) + dim, at(x, dim, p0), at(x, dim, p0) + dim)) p0 = i;
  }
  b.points.push_back(p0);
  std::vector<std::vector<double>> ortho;
  std::vector<double> dist2(n);
  std::vector<int> order(n);
  while (static_cast<int>(b.points.size()) <= dim) {
    const double* base = at(x, dim, b.points[0]);
    std::vector<double> w(dim);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < dim; ++j) w[j] = at(x, dim, i)[j] - base[j];
      for (const auto& u : ortho) {
        double dot = 0.0;
        for (int j = 0; j < dim; ++j) dot += w[j] * u[j];
        for (int j = 0; j < dim; ++j) w[j] -= dot * u[j];
      }
      double s = 0.0;
      for (double v : w) s += v * v;
      dist2[i] = s;
    }
    int found = -1, coord = -1;
    // Try the farthest point first; scan everything in distance order only if it
    // turns out to lie in the span.
    const int far = static_cast<int>(std::max_element(dist2.begin(), dist2.end()) - dist2.begin());
    if (dist2[far] > 0.0 && std::find(b.points.begin(), b.points.end(), far) == b.points.end()) {
      const int c = span_escape(x, dim, b, at(x, dim, far));
      if (c >= 0) {
        found = far;
        coord = c;
      }
    }
    if (found < 0) {
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](int a, int c) { return dist2[a] > dist2[c]; });
      for (int i : order) {
        if (std::find(b.points.begin(), b.points.end(), i) != b.points.end()) continue;
        const int c = span_escape(x, dim, b, at(x, dim, i));
        if (c >= 0) {
          found = i;
          coord = c;
          break;
        }
      }
    }
    if (found < 0) break;
    b.points.push_back(found);
    b.coords.push_back(coord);
    for (int j = 0; j < dim; ++j) w[j] = at(x, dim, found)[j] - base[j];
    for (const auto& u : ortho) {
      double dot = 0.0;
      for (int j = 0; j < dim; ++j) dot += w[j] * u[j];
      for (int j = 0; j < dim; ++j) w[j] -= dot * u[j];
    }
    double nrm = 0.0;
    for (double v : w) nrm += v * v;
    nrm = std::sqrt(nrm);
    if (nrm > 0)
      for (double& v : w) v /= nrm;
    ortho.push_back(std::move(w));
  }
  return b;
}

inline void all_subsets(const std::vector<int>& v, int size, std::vector<std::vector<int>>& out) {
  const int n = static_cast<int>(v.size());
  std::vector<int> idx(size);
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    std::vector<int> s(size);
    for (int i = 0; i < size; ++i) s[i] = v[idx[i]];
    out.push_back(std::move(s));
    int i = size - 1;
    while (i >= 0 && idx[i] == n - size + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int j = i + 1; j < size; ++j) idx[j] = idx[j - 1] + 1;
  }
}

inline RawHull raw_hull(const std::vector<double>& x, int dim, int n, bool want_faces);

class IncrementalHull {
 public:
  struct Facet {
    std::vector<int> v;
    std::vector<int> nb;
    PlanePredicate plane;
    std::vector<int> conflict;
    bool alive = true;
    int vis = -1;
    int hid = -1;
  };

  IncrementalHull(const std::vector<double>& x, int dim, int n, const std::vector<int>& simplex)
      : x_(x), dim_(dim), n_(n) {
    build_simplex(simplex);
    std::vector<char> in_simplex(n, 0);
    for (int s : simplex) in_simplex[s] = 1;
    interior_.assign(n, 0);
    for (int i = 0; i < n; ++i) {
      if (in_simplex[i]) continue;
      bool strict = true, placed = false;
      for (int f = 0; f <= dim_; ++f) {
        const int s = facets_[f].plane.side(pt(i));
        if (s > 0) {
          facets_[f].conflict.push_back(i);
          placed = true;
          break;
        }
        if (s == 0) strict = false;
      }
      if (!placed && strict) interior_[i] = 1;
    }
    for (int f = 0; f <= dim_; ++f)
      if (!facets_[f].conflict.empty()) pending_.push_back(f);
  }

  void run() {
    while (true) {
      drain();
      if (!verify()) break;
    }
  }

  const std::vector<Facet>& facets() const { return facets_; }
  const std::vector<std::vector<int>>& incidences() const { return incid_; }

 private:
  const double* pt(int i) const { return at(x_, dim_, i); }

  PlanePredicate make_plane(const std::vector<int>& v) const {
    std::vector<const double*> ps(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) ps[i] = pt(v[i]);
    return PlanePredicate(ps, dim_);
  }

  void build_simplex(const std::vector<int>& s) {
    const int m = dim_ + 1;
    facets_.resize(m);
    for (int i = 0; i < m; ++i) {
      Facet& f = facets_[i];
      for (int j = 0; j < m; ++j)
        if (j != i) f.v.push_back(s[j]);
      f.plane = make_plane(f.v);
      if (f.plane.side(pt(s[i])) > 0) {
        std::swap(f.v[0], f.v[1]);
        f.plane = make_plane(f.v);
      }
      f.nb.assign(dim_, -1);
      for (int k = 0; k < dim_; ++k) {
        const int opp = f.v[k];
        const int j = static_cast<int>(std::find(s.begin(), s.end(), opp) - s.begin());
        f.nb[k] = j;
      }
    }
  }

  int side(const Facet& f, int q) const {
    if (std::find(f.v.begin(), f.v.end(), q) != f.v.end()) return 0;
    return f.plane.side(pt(q));
  }

  void drain() {
    while (!pending_.empty()) {
      const int f0 = pending_.back();
      pending_.pop_back();
      if (!facets_[f0].alive || facets_[f0].conflict.empty()) continue;
      insert(f0);
    }
  }

  void insert(int f0) {
    ++stamp_;
    Facet& start = facets_[f0];
    int p = start.conflict[0];
    double best = start.plane.value(pt(p));
    for (int q : start.conflict) {
      const double v = start.plane.value(pt(q));
      if (v > best) { best = v; p = q; }
    }
    std::vector<int> visible{f0};
    facets_[f0].vis = stamp_;
    std::vector<std::pair<int, int>> horizon;
    for (std::size_t qi = 0; qi < visible.size(); ++qi) {
      const int f = visible[qi];
      for (int k = 0; k < dim_; ++k) {
        const int g = facets_[f].nb[k];
        Facet& gf = facets_[g];
        if (gf.vis == stamp_) continue;
        if (gf.hid == stamp_) {
          horizon.emplace_back(f, k);
          continue;
        }
        if (side(gf, p) > 0) {
          gf.vis = stamp_;
          visible.push_back(g);
        } else {
          gf.hid = stamp_;
          horizon.emplace_back(f, k);
        }
      }
    }
    std::map<std::vector<int>, std::pair<int, int>> ridge;
    std::vector<int> created;
    created.reserve(horizon.size());
    for (auto [f, k] : horizon) {
      Facet nf;
      nf.v = facets_[f].v;
      nf.v[k] = p;
      nf.plane = make_plane(nf.v);
      nf.nb.assign(dim_, -1);
      const int g = facets_[f].nb[k];
      nf.nb[k] = g;
      const int id = static_cast<int>(facets_.size());
      for (int& r : facets_[g].nb)
        if (r == f) r = id;
      facets_.push_back(std::move(nf));
      created.push_back(id);
      for (int j = 0; j < dim_; ++j) {
        if (j == k) continue;
        std::vector<int> key;
        key.reserve(dim_ - 2);
        for (int t = 0; t < dim_; ++t)
          if (t != j && t != k) key.push_back(facets_[id].v[t]);
        std::sort(key.begin(), key.end());
        auto it = ridge.find(key);
        if (it == ridge.end()) {
          ridge.emplace(std::move(key), std::make_pair(id, j));
        } else {
          facets_[id].nb[j] = it->second.first;
          facets_[it->second.first].nb[it->second.second] = id;
          ridge.erase(it);
        }
      }
    }
    for (int f : visible) {
      Facet& vf = facets_[f];
      vf.alive = false;
      for (int q : vf.conflict) {
        if (q == p) continue;
        // A point beyond a removed facet and strictly beneath every new facet is
        // strictly interior from now on.
        bool strict = true, placed = false;
        for (int c : created) {
          const int s = facets_[c].plane.side(pt(q));
          if (s > 0) {
            facets_[c].conflict.push_back(q);
            placed = true;
            break;
          }
          if (s == 0) strict = false;
        }
        if (!placed && strict) interior_[q] = 1;
      }
      std::vector<int>().swap(vf.conflict);
    }
    for (int c : created)
      if (!facets_[c].conflict.empty()) pending_.push_back(c);
  }

  // Classifies every point against the final facets.  Returns true if some point
  // was found outside (and queued for insertion).
  bool verify() {
    std::vector<int> alive;
    for (int f = 0; f < static_cast<int>(facets_.size()); ++f)
      if (facets_[f].alive) alive.push_back(f);
    incid_.assign(n_, {});
    bool outside = false;
    for (int q = 0; q < n_; ++q) {
      if (interior_[q]) continue;
      for (int f : alive) {
        const int s = side(facets_[f], q);
        if (s > 0) {
          facets_[f].conflict.push_back(q);
          pending_.push_back(f);
          outside = true;
          break;
        }
        if (s == 0) incid_[q].push_back(f);
      }
    }
    return outside;
  }

  const std::vector<double>& x_;
  int dim_;
  int n_;
  std::vector<Facet> facets_;
  std::vector<int> pending_;
  std::vector<std::vector<int>> incid_;
  std::vector<char> interior_;
  int stamp_ = 0;
};

inline RawHull full_hull(const std::vector<double>& x, int dim, int n, const std::vector<int>& simplex,
                         bool want_faces) {
  IncrementalHull ih(x, dim, n, simplex);
  ih.run();
  const auto& facets = ih.facets();
  const int nf = static_cast<int>(facets.size());

  // Merge coplanar neighbours.
  std::vector<int> parent(nf);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  for (int f = 0; f < nf; ++f) {
    if (!facets[f].alive) continue;
    for (int k = 0; k < dim; ++k) {
      const int g = facets[f].nb[k];
      if (g < f) continue;
      int opp = -1;
      for (int j = 0; j < dim; ++j)
        if (facets[g].nb[j] == f) opp = facets[g].v[j];
      if (opp < 0) continue;
      if (facets[f].plane.side(at(x, dim, opp)) == 0) parent[find(g)] = find(f);
    }
  }
  std::map<int, int> group_of_root;
  std::vector<int> group(nf, -1);
  std::vector<int> rep;
  std::vector<int> members_count;
  for (int f = 0; f < nf; ++f) {
    if (!facets[f].alive) continue;
    const int r = find(f);
    auto it = group_of_root.find(r);
    if (it == group_of_root.end()) {
      it = group_of_root.emplace(r, static_cast<int>(rep.size())).first;
      rep.push_back(f);
      members_count.push_back(0);
    }
    group[f] = it->second;
    ++members_count[it->second];
  }
  const int ng = static_cast<int>(rep.size());
  std::vector<std::vector<int>> gpts(ng);
  const auto& incid = ih.incidences();
  std::vector<int> last(ng, -1);
  for (int q = 0; q < n; ++q) {
    for (int f : incid[q]) {
      const int g = group[f];
      if (last[g] == q) continue;
      last[g] = q;
      gpts[g].push_back(q);
    }
  }

  RawHull out;
  out.dim = dim;
  out.affine_dim = dim;

  // Facet vertex sets and lower faces.
  std::vector<std::vector<int>> gverts(ng);
  std::vector<std::set<std::vector<int>>> lower(dim > 1 ? dim - 1 : 0);
  for (int g = 0; g < ng; ++g) {
    const auto& f = facets[rep[g]];
    if (members_count[g] == 1 && static_cast<int>(gpts[g].size()) == dim) {
      gverts[g] = f.v;
      std::sort(gverts[g].begin(), gverts[g].end());
      if (want_faces)
        for (int k = 0; k + 1 < dim; ++k) {
          std::vector<std::vector<int>> subs;
          all_subsets(gverts[g], k + 1, subs);
          for (auto& s : subs) lower[k].insert(std::move(s));
        }
      continue;
    }
    // Project the facet's points onto dim-1 coordinates injective on its hyperplane.
    const auto& cof = f.plane.cofactors();
    std::vector<int> order(dim);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return std::fabs(cof[a]) > std::fabs(cof[b]); });
    std::vector<const double*> fv(dim);
    for (int i = 0; i < dim; ++i) fv[i] = at(x, dim, f.v[i]);
    int drop = order[0];
    for (int c : order) {
      std::vector<int> keep;
      for (int j = 0; j < dim; ++j)
        if (j != c) keep.push_back(j);
      std::vector<const double*> pv(fv.begin(), fv.end());
      if (sign_det_diff(pv, keep) != 0) {
        drop = c;
        break;
      }
    }
    const int m = static_cast<int>(gpts[g].size());
    std::vector<double> y(static_cast<std::size_t>(m) * (dim - 1));
    for (int i = 0; i < m; ++i) {
      int t = 0;
      for (int j = 0; j < dim; ++j)
        if (j != drop) y[static_cast<std::size_t>(i) * (dim - 1) + t++] = at(x, dim, gpts[g][i])[j];
    }
    RawHull sub = raw_hull(y, dim - 1, m, want_faces);
    for (int v : sub.vertices) gverts[g].push_back(gpts[g][v]);
    std::sort(gverts[g].begin(), gverts[g].end());
    if (want_faces)
      for (int k = 0; k + 1 < dim && k < static_cast<int>(sub.faces.size()); ++k)
        for (const auto& face : sub.faces[k]) {
          std::vector<int> mapped;
          for (int v : face) mapped.push_back(gpts[g][v]);
          std::sort(mapped.begin(), mapped.end());
          lower[k].insert(std::move(mapped));
        }
  }

  // Order facets canonically by vertex set.
  std::vector<int> gorder(ng);
  std::iota(gorder.begin(), gorder.end(), 0);
  std::sort(gorder.begin(), gorder.end(), [&](int a, int b) { return gverts[a] < gverts[b]; });
  out.faces.assign(dim, {});
  std::set<int> vset, bset;
  for (int g : gorder) {
    out.faces[dim - 1].push_back(gverts[g]);
    for (int v : gverts[g]) vset.insert(v);
    for (int q : gpts[g]) bset.insert(q);
    const auto& cof = facets[rep[g]].plane.cofactors();
    double nrm = 0.0;
    for (double c : cof) nrm += c * c;
    nrm = std::sqrt(nrm);
    std::vector<double> nvec(dim);
    for (int j = 0; j < dim; ++j) nvec[j] = cof[j] / nrm;
    out.normals.push_back(std::move(nvec));
    out.facet_points.push_back(gpts[g]);
  }
  if (want_faces)
    for (int k = 0; k + 1 < dim; ++k) out.faces[k].assign(lower[k].begin(), lower[k].end());
  else
    for (int v : vset) out.faces[0].push_back({v});
  out.vertices.assign(vset.begin(), vset.end());
  out.boundary.assign(bset.begin(), bset.end());

  // Volume by fanning simplices from the vertex centroid.
  std::vector<double> c(dim, 0.0);
  for (int v : out.vertices)
    for (int j = 0; j < dim; ++j) c[j] += at(x, dim, v)[j];
  for (double& cj : c) cj /= static_cast<double>(out.vertices.size());
  double vol = 0.0;
  double fact = 1.0;
  for (int i = 2; i <= dim; ++i) fact *= i;
  std::vector<double> m(static_cast<std::size_t>(dim) * dim);
  const std::size_t full = (std::size_t{1} << dim) - 1;
  for (const auto& f : facets) {
    if (!f.alive) continue;
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) m[i * dim + j] = at(x, dim, f.v[i])[j] - c[j];
    vol += std::fabs(minor_table(m.data(), dim, dim).det[full]);
  }
  out.volume = vol / fact;
  return out;
}

inline RawHull raw_hull(const std::vector<double>& x, int dim, int n, bool want_faces) {
  RawHull out;
  out.dim = dim;
  if (n == 0) return out;
  if (n == 1) {
    out.affine_dim = 0;
    out.vertices = {0};
    out.boundary = {0};
    out.faces = {{{0}}};
    return out;
  }
  if (dim == 1) {
    int lo = 0, hi = 0;
    for (int i = 1; i < n; ++i) {
      if (x[i] < x[lo]) lo = i;
      if (x[i] > x[hi]) hi = i;
    }
    out.affine_dim = (x[lo] == x[hi]) ? 0 : 1;
    if (out.affine_dim == 0) {
      out.vertices = {lo};
      out.boundary = {lo};
      out.faces = {{{lo}}};
      return out;
    }
    const int a = std::min(lo, hi), b = std::max(lo, hi);
    out.vertices = {a, b};
    out.boundary = {a, b};
    out.faces = {{{a}, {b}}};
    out.normals = {{a == lo ? -1.0 : 1.0}, {b == lo ? -1.0 : 1.0}};
    out.facet_points = {{a}, {b}};
    out.volume = x[hi] - x[lo];
    return out;
  }
  const AffineBasis b = affine_basis(x, dim, n);
  const int k = static_cast<int>(b.coords.size());
  if (k == dim) return full_hull(x, dim, n, b.points, want_faces);
  if (k == 0) {
    out.affine_dim = 0;
    out.vertices = {b.points[0]};
    out.boundary = {b.points[0]};
    out.faces = {{{b.points[0]}}};
    return out;
  }
  std::vector<double> y(static_cast<std::size_t>(n) * k);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < k; ++j) y[static_cast<std::size_t>(i) * k + j] = at(x, dim, i)[b.coords[j]];
  RawHull sub = raw_hull(y, k, n, want_faces);
  sub.dim = dim;
  sub.affine_dim = k;
  sub.normals.clear();
  sub.facet_points.clear();
  sub.volume = 0.0;
  return sub;
}

struct Deduped {
  std::vector<double> x;
  std::vector<PointId> ids;             // representative id per unique point
  std::vector<std::size_t> rep_of;      // input position -> unique index
};

inline Deduped dedupe(const PointSet& ps) {
  const int d = ps.dim();
  const std::size_t n = ps.size();
  auto less = [&](std::size_t a, std::size_t b) {
    const double* pa = ps.coord(a);
    const double* pb = ps.coord(b);
    for (int j = 0; j < d; ++j) {
      if (pa[j] < pb[j]) return true;
      if (pa[j] > pb[j]) return false;
    }
    return ps.id(a) < ps.id(b);
  };
  std::vector<std::pair<double, std::size_t>> keyed(n);
  for (std::size_t i = 0; i < n; ++i) keyed[i] = {ps.coord(i)[0], i};
  std::sort(keyed.begin(), keyed.end());
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = keyed[i].second;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i + 1;
    while (j < n && keyed[j].first == keyed[i].first) ++j;
    if (j - i > 1) std::sort(order.begin() + i, order.begin() + j, less);
    i = j;
  }
  // Groups of identical coordinates; the representative is the lowest id.
  std::vector<std::size_t> group_rep(n);
  std::vector<std::size_t> reps;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t cur = order[i];
    if (i > 0 && std::equal(ps.coord(cur), ps.coord(cur) + d, ps.coord(order[i - 1]))) {
      group_rep[cur] = group_rep[order[i - 1]];
    } else {
      group_rep[cur] = cur;
      reps.push_back(cur);
    }
  }
  auto by_id = [&](std::size_t a, std::size_t b) { return ps.id(a) < ps.id(b); };
  std::sort(reps.begin(), reps.end(), by_id);
  std::vector<std::size_t> uidx(n, 0);
  Deduped out;
  out.x.reserve(reps.size() * d);
  for (std::size_t u = 0; u < reps.size(); ++u) {
    uidx[reps[u]] = u;
    out.ids.push_back(ps.id(reps[u]));
    out.x.insert(out.x.end(), ps.coord(reps[u]), ps.coord(reps[u]) + d);
  }
  out.rep_of.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.rep_of[i] = uidx[group_rep[i]];
  return out;
}

inline HullComplex to_complex(const RawHull& r, const std::vector<PointId>& ids, int dim) {
  HullComplex h;
  h.dim = dim;
  h.affine_dim = r.affine_dim;
  h.degenerate = r.affine_dim < dim;
  auto map_sorted = [&](const std::vector<int>& v) {
    std::vector<PointId> out;
    out.reserve(v.size());
    for (int i : v) out.push_back(ids[i]);
    std::sort(out.begin(), out.end());
    return out;
  };
  h.vertex_ids = map_sorted(r.vertices);
  h.boundary_ids = map_sorted(r.boundary);
  h.faces.resize(r.faces.size());
  for (std::size_t k = 0; k < r.faces.size(); ++k) {
    for (const auto& f : r.faces[k]) h.faces[k].push_back(map_sorted(f));
  }
  // Keep facets, normals and facet points aligned after the id sort.
  if (!h.degenerate && !h.faces.empty()) {
    auto& facets = h.faces[dim - 1];
    std::vector<std::size_t> perm(facets.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) { return facets[a] < facets[b]; });
    std::vector<std::vector<PointId>> fs;
    std::vector<std::vector<double>> ns;
    std::vector<std::vector<PointId>> fp;
    for (std::size_t i : perm) {
      fs.push_back(facets[i]);
      ns.push_back(r.normals[i]);
      fp.push_back(map_sorted(r.facet_points[i]));
    }
    facets = std::move(fs);
    h.facet_normals = std::move(ns);
    h.facet_points = std::move(fp);
  }
  for (std::size_t k = 0; k < h.faces.size(); ++k)
    if (h.degenerate || static_cast<int>(k) != dim - 1) std::sort(h.faces[k].begin(), h.faces[k].end());
  h.volume = r.volume;
  return h;
}

}  // namespace detail

// Hull relative to the affine span of the input: flat inputs yield the
// lower-dimensional polytope (flagged degenerate, volume 0).
inline HullComplex relative_hull(const PointSet& ps, bool want_faces = true) {
  if (ps.empty()) throw std::invalid_argument("convex hull of an empty point set");
  const detail::Deduped u = detail::dedupe(ps);
  const int n = static_cast<int>(u.ids.size());
  const detail::RawHull r = detail::raw_hull(u.x, ps.dim(), n, want_faces);
  return detail::to_complex(r, u.ids, ps.dim());
}

inline HullComplex convex_hull(const PointSet& ps) {
  HullComplex h = relative_hull(ps, true);
  if (h.degenerate)
    throw DegenerateInput("points span an affine subspace of dimension " + std::to_string(h.affine_dim),
                          h.affine_dim);
  return h;
}

inline std::vector<PointId> extreme_points(const PointSet& ps) { return relative_hull(ps, false).vertex_ids; }

inline double hull_volume(const HullComplex& h) {
  if (h.degenerate) throw DegenerateInput("flat hull has no d-volume", h.affine_dim);
  return h.volume;
}

}  // namespace peellab
