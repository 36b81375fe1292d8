#pragma once

// Convex hull peeling.  A layer is every remaining point on the boundary of the
// current hull (vertices and points interior to faces).  Once the remainder is
// flat, peeling continues inside its affine hull.
//
// The planar case has its own engine: one lexicographic sort, then a linear
// monotone-chain pass per layer.  Deep peels restrict each pass to an outer band
// of candidates and check that the discarded core stays strictly inside.

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "peellab/detail/predicates.hpp"
#include "peellab/errors.hpp"
#include "peellab/geom_core.hpp"
#include "peellab/polytope_model.hpp"

namespace peellab {

struct PeelOptions {
  std::optional<int> max_layers;
  bool want_complexes = true;
};

struct PeelingResult {
  int dim = 0;
  // layers[n-1] is the hull of the n-th layer (empty when complexes were not requested).
  std::vector<HullComplex> layers;
  // ids of each layer, sorted.
  std::vector<std::vector<PointId>> layer_ids;
  // (id, layer) sorted by id; unplaced ids are absent.
  std::vector<std::pair<PointId, int>> label;
  // ids left when max_layers stopped the peel, sorted.
  std::vector<PointId> leftover;

  int num_layers() const { return static_cast<int>(layer_ids.size()); }

  // Layer of id, or 0 if the id was not placed.
  int label_of(PointId id) const {
    auto it = std::lower_bound(label.begin(), label.end(), std::make_pair(id, 0),
                               [](const auto& a, const auto& b) { return a.first < b.first; });
    return (it != label.end() && it->first == id) ? it->second : 0;
  }
};

struct LayerStats {
  int n = 0;
  std::vector<std::size_t> f;
  double defect_volume = 0.0;
};

namespace detail {

// Exact sign of (b - a) x (c - a).
inline int orient2d(const double* a, const double* b, const double* c) {
  const double l = (b[0] - a[0]) * (c[1] - a[1]);
  const double r = (b[1] - a[1]) * (c[0] - a[0]);
  const double det = l - r;
  const double bound = 3.3306690738754716e-16 * (std::fabs(l) + std::fabs(r));
  if (det > bound) return 1;
  if (det < -bound) return -1;
  if (l == 0.0 && r == 0.0) return 0;
  return sign_det_diff({a, b, c}, 2);
}

// Unique points ordered by representative (lowest) id.
struct UniquePoints {
  int dim = 0;
  std::vector<double> x;
  std::vector<PointId> rep;  // ascending
  // Ids of unique point k: member_ids[member_start[k] .. member_start[k+1]).
  std::vector<std::size_t> member_start;
  std::vector<PointId> member_ids;
  // Unique indices in lexicographic coordinate order.
  std::vector<std::size_t> lex;

  const double* at(std::size_t u) const { return x.data() + u * static_cast<std::size_t>(dim); }
  std::size_t size() const { return rep.size(); }
  template <class F>
  void for_members(std::size_t k, F&& f) const {
    for (std::size_t i = member_start[k]; i < member_start[k + 1]; ++i) f(member_ids[i]);
  }
};

inline UniquePoints unique_points(const PointSet& ps) {
  const int d = ps.dim();
  const std::size_t n = ps.size();
  auto less = [&](std::size_t a, std::size_t b) {
    const double* pa = ps.coord(a);
    const double* pb = ps.coord(b);
    for (int j = 0; j < d; ++j) {
      if (pa[j] != pb[j]) return pa[j] < pb[j];
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
    if (j - i > 1)
      std::sort(order.begin() + static_cast<std::ptrdiff_t>(i), order.begin() + static_cast<std::ptrdiff_t>(j), less);
    i = j;
  }
  // Groups of equal coordinates in lexicographic order; the first member has the lowest id.
  std::vector<std::size_t> start;
  for (std::size_t i = 0; i < n; ++i)
    if (i == 0 || !std::equal(ps.coord(order[i]), ps.coord(order[i]) + d, ps.coord(order[i - 1]))) start.push_back(i);
  const std::size_t m = start.size();
  start.push_back(n);
  // Groups ranked by representative id; dense ids avoid a comparison sort.
  std::vector<std::pair<PointId, std::size_t>> by_id(m);
  PointId lo = 0, hi = 0;
  for (std::size_t k = 0; k < m; ++k) {
    by_id[k] = {ps.id(order[start[k]]), k};
    lo = k == 0 ? by_id[k].first : std::min(lo, by_id[k].first);
    hi = k == 0 ? by_id[k].first : std::max(hi, by_id[k].first);
  }
  if (m > 0 && hi - lo < static_cast<PointId>(4 * m + 16)) {
    std::vector<std::size_t> slot(static_cast<std::size_t>(hi - lo + 1), m);
    for (std::size_t k = 0; k < m; ++k) slot[static_cast<std::size_t>(by_id[k].first - lo)] = k;
    std::size_t r = 0;
    for (std::size_t t = 0; t < slot.size(); ++t)
      if (slot[t] != m) by_id[r++] = {lo + static_cast<PointId>(t), slot[t]};
  } else {
    std::sort(by_id.begin(), by_id.end());
  }
  UniquePoints u;
  u.dim = d;
  u.x.resize(m * static_cast<std::size_t>(d));
  u.rep.resize(m);
  u.member_start.resize(m + 1);
  u.member_ids.resize(n);
  u.lex.resize(m);
  std::size_t pos = 0;
  for (std::size_t r = 0; r < m; ++r) {
    const std::size_t k = by_id[r].second;
    u.lex[k] = r;
    u.rep[r] = by_id[r].first;
    std::copy(ps.coord(order[start[k]]), ps.coord(order[start[k]]) + d, u.x.begin() + static_cast<std::ptrdiff_t>(r * d));
    u.member_start[r] = pos;
    for (std::size_t i = start[k]; i < start[k + 1]; ++i) u.member_ids[pos++] = ps.id(order[i]);
  }
  u.member_start[m] = pos;
  return u;
}

// Planar peeling over lexicographically sorted points.
class PlanarPeeler {
 public:
  // emit(layer as lexicographic ranks) returns false to stop.
  using Emit = std::function<bool(const std::vector<int>&)>;

  explicit PlanarPeeler(std::vector<double> lex, bool banding = true)
      : x_(std::move(lex)), n_(static_cast<int>(x_.size() / 2)), banding_(banding) {}

  void run(const Emit& emit) {
    std::vector<int> s(n_);
    for (int i = 0; i < n_; ++i) s[i] = i;
    double band_factor = 2.0;
    while (!s.empty()) {
      Layer top = layer(s);
      if (!emit(top.boundary)) return;
      s = minus(s, top.boundary);
      if (!banding_ || static_cast<int>(s.size()) < kBandThreshold || top.hull.size() < 3) continue;

      // Outer band of candidates around a core; valid while the core hull stays strictly inside.
      const std::vector<int> p0 = pick_vertices(top.hull, 16);
      if (p0.size() < 3) continue;
      double cx = 0, cy = 0;
      for (int v : p0) {
        cx += pt(v)[0];
        cy += pt(v)[1];
      }
      cx /= static_cast<double>(p0.size());
      cy /= static_cast<double>(p0.size());
      struct Edge {
        double nx, ny, b;
      };
      std::vector<Edge> edges;
      bool ok = true;
      for (std::size_t i = 0; i < p0.size(); ++i) {
        const double* u = pt(p0[i]);
        const double* w = pt(p0[(i + 1) % p0.size()]);
        const double nx = w[1] - u[1], ny = -(w[0] - u[0]);
        const double b = nx * (u[0] - cx) + ny * (u[1] - cy);
        if (!(b > 0)) ok = false;
        edges.push_back({nx, ny, b});
      }
      if (!ok) continue;
      std::vector<double> g(s.size());
      for (std::size_t i = 0; i < s.size(); ++i) {
        const double* p = pt(s[i]);
        double m = -1e300;
        for (const Edge& e : edges) m = std::max(m, (e.nx * (p[0] - cx) + e.ny * (p[1] - cy)) / e.b);
        g[i] = m;
      }
      const double m_layer = static_cast<double>(std::max<std::size_t>(top.boundary.size(), 3));
      std::size_t target = static_cast<std::size_t>(band_factor * std::sqrt(static_cast<double>(s.size()) * m_layer));
      target = std::max<std::size_t>(target, 2048);
      if (target >= s.size()) continue;
      std::vector<double> gs(g);
      std::nth_element(gs.begin(), gs.begin() + static_cast<std::ptrdiff_t>(s.size() - target), gs.end());
      const double f = gs[s.size() - target];
      if (!(f > 1e-3)) continue;
      std::vector<int> core, band;
      for (std::size_t i = 0; i < s.size(); ++i) (g[i] < f ? core : band).push_back(s[i]);
      if (core.empty()) continue;
      const std::vector<int> core_hull = layer(core).hull;
      int peeled = 0;
      bool stopped = false;
      const std::size_t band0 = band.size();
      while (!band.empty()) {
        Layer l = layer(band);
        if (!strictly_inside(core_hull, l.hull)) break;
        if (!emit(l.boundary)) {
          stopped = true;
          break;
        }
        ++peeled;
        band = minus(band, l.boundary);
      }
      if (stopped) return;
      // Aim for bands that are mostly consumed before the core check fails.
      if (peeled < 8) band_factor = std::min(band_factor * 2.0, 1024.0);
      else if (band.size() * 2 > band0) band_factor = std::max(band_factor / 1.5, 0.25);
      s.clear();
      std::merge(band.begin(), band.end(), core.begin(), core.end(), std::back_inserter(s));
    }
  }

 private:
  static constexpr int kBandThreshold = 20000;

  struct Layer {
    std::vector<int> boundary;  // ascending ranks
    std::vector<int> hull;      // strict vertices, counter-clockwise
  };

  const double* pt(int i) const { return x_.data() + 2 * static_cast<std::size_t>(i); }

  static std::vector<int> minus(const std::vector<int>& a, const std::vector<int>& b) {
    std::vector<int> out;
    out.reserve(a.size() - std::min(a.size(), b.size()));
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
  }

  static std::vector<int> pick_vertices(const std::vector<int>& hull, std::size_t k) {
    if (hull.size() <= k) return hull;
    std::vector<int> out;
    for (std::size_t i = 0; i < k; ++i) out.push_back(hull[i * hull.size() / k]);
    return out;
  }

  // Every point q strictly inside the counter-clockwise polygon.
  bool strictly_inside(const std::vector<int>& q, const std::vector<int>& hull) const {
    if (hull.size() < 3) return false;
    for (int v : q) {
      for (std::size_t i = 0; i < hull.size(); ++i) {
        if (orient2d(pt(hull[i]), pt(hull[(i + 1) % hull.size()]), pt(v)) <= 0) return false;
      }
    }
    return true;
  }

  // Boundary of conv(s); s ascending (lexicographic order).  Chains keep
  // collinear points, so they list every boundary point.
  Layer layer(const std::vector<int>& s) const {
    Layer out;
    const std::size_t n = s.size();
    if (n <= 2) {
      out.boundary = s;
      out.hull = s;
      return out;
    }
    std::vector<int>& lower = lower_;
    std::vector<int>& upper = upper_;
    lower.clear();
    upper.clear();
    for (int v : s) {
      while (lower.size() >= 2 && orient2d(pt(lower[lower.size() - 2]), pt(lower.back()), pt(v)) < 0) lower.pop_back();
      lower.push_back(v);
      while (upper.size() >= 2 && orient2d(pt(upper[upper.size() - 2]), pt(upper.back()), pt(v)) > 0) upper.pop_back();
      upper.push_back(v);
    }
    if (lower.size() == n && upper.size() == n) {
      // Collinear: the relative boundary is the two endpoints.
      out.boundary = {s.front(), s.back()};
      out.hull = out.boundary;
      return out;
    }
    out.boundary.reserve(lower.size() + upper.size());
    std::set_union(lower.begin(), lower.end(), upper.begin(), upper.end(), std::back_inserter(out.boundary));
    out.hull.reserve(lower.size() + upper.size());
    out.hull.assign(lower.begin(), lower.end());
    for (std::size_t k = upper.size() - 1; k-- > 1;) out.hull.push_back(upper[k]);
    return out;
  }

  mutable std::vector<int> lower_, upper_;
  std::vector<double> x_;
  int n_;
  bool banding_;
};

inline PointSet unique_subset(const UniquePoints& u, const std::vector<std::size_t>& which) {
  PointSet ps(u.dim);
  ps.reserve(which.size());
  for (std::size_t k : which) ps.add(u.at(k), u.rep[k]);
  return ps;
}

// Drives the peel; emit(unique indices of the layer) returns false to stop early.
inline void peel_unique(const UniquePoints& u, const std::function<bool(const std::vector<std::size_t>&)>& emit,
                        bool banding = true) {
  const std::size_t n = u.rep.size();
  if (n == 0) return;
  if (u.dim == 2) {
    const std::vector<std::size_t>& lex = u.lex;
    std::vector<double> xs(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
      xs[2 * i] = u.at(lex[i])[0];
      xs[2 * i + 1] = u.at(lex[i])[1];
    }
    PlanarPeeler peeler(std::move(xs), banding);
    std::vector<std::size_t> buf;
    peeler.run([&](const std::vector<int>& ranks) {
      buf.clear();
      for (int r : ranks) buf.push_back(lex[r]);
      std::sort(buf.begin(), buf.end());
      return emit(buf);
    });
    return;
  }
  std::vector<std::size_t> rem(n);
  for (std::size_t i = 0; i < n; ++i) rem[i] = i;
  while (!rem.empty()) {
    const HullComplex h = relative_hull(unique_subset(u, rem), false);
    std::vector<std::size_t> layer;
    std::vector<std::size_t> keep;
    std::size_t b = 0;
    for (std::size_t k : rem) {
      while (b < h.boundary_ids.size() && h.boundary_ids[b] < u.rep[k]) ++b;
      if (b < h.boundary_ids.size() && h.boundary_ids[b] == u.rep[k]) layer.push_back(k);
      else keep.push_back(k);
    }
    if (!emit(layer)) return;
    rem = std::move(keep);
  }
}

}  // namespace detail

inline PeelingResult peel(const PointSet& ps, const PeelOptions& opt) {
  if (opt.max_layers && *opt.max_layers < 0) throw std::invalid_argument("max_layers must be nonnegative");
  PeelingResult out;
  out.dim = ps.dim();
  const detail::UniquePoints u = detail::unique_points(ps);
  std::vector<char> placed(u.rep.size(), 0);
  const int cap = opt.max_layers.value_or(-1);
  if (cap != 0) {
    detail::peel_unique(u, [&](const std::vector<std::size_t>& layer) {
      const int n = out.num_layers() + 1;
      std::vector<PointId> ids;
      for (std::size_t k : layer) {
        placed[k] = 1;
        u.for_members(k, [&](PointId id) {
          ids.push_back(id);
          out.label.emplace_back(id, n);
        });
      }
      std::sort(ids.begin(), ids.end());
      out.layer_ids.push_back(std::move(ids));
      if (opt.want_complexes) out.layers.push_back(relative_hull(detail::unique_subset(u, layer), true));
      return cap < 0 || n < cap;
    });
  }
  for (std::size_t k = 0; k < u.rep.size(); ++k)
    if (!placed[k]) u.for_members(k, [&](PointId id) { out.leftover.push_back(id); });
  std::sort(out.leftover.begin(), out.leftover.end());
  std::sort(out.label.begin(), out.label.end());
  return out;
}

inline PeelingResult peel(const PointSet& ps, std::optional<int> max_layers = std::nullopt) {
  PeelOptions opt;
  opt.max_layers = max_layers;
  return peel(ps, opt);
}

// Layer of x in the peeling of ps together with x.  x.id is ignored; if x
// coincides with a point of ps it shares that point's layer.
inline int layer_label(const PointSet& ps, const Point& x) {
  if (static_cast<int>(x.coords.size()) != ps.dim()) throw std::invalid_argument("point dimension mismatch");
  PointSet all(ps.dim());
  all.reserve(ps.size() + 1);
  PointId top = 0;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    all.add(ps.coord(i), ps.id(i));
    top = std::max(top, ps.id(i));
  }
  const PointId xid = ps.empty() ? 0 : top + 1;
  all.add(x.coords, xid);
  const detail::UniquePoints u = detail::unique_points(all);
  std::size_t xu = 0;
  for (std::size_t k = 0; k < u.size(); ++k)
    u.for_members(k, [&](PointId id) {
      if (id == xid) xu = k;
    });
  int n = 0, found = 0;
  detail::peel_unique(u, [&](const std::vector<std::size_t>& layer) {
    ++n;
    if (std::binary_search(layer.begin(), layer.end(), xu)) found = n;
    return found == 0;
  });
  return found;
}

inline LayerStats layer_stats(const PeelingResult& pr, const HPolytope& k, int n) {
  if (n < 1 || n > pr.num_layers())
    throw LayerMissing("layer " + std::to_string(n) + " requested but only " + std::to_string(pr.num_layers()) +
                       " layers exist");
  if (static_cast<int>(pr.layers.size()) < n) throw std::logic_error("peeling was run without layer complexes");
  const HullComplex& h = pr.layers[n - 1];
  LayerStats s;
  s.n = n;
  s.f = h.f_vector();
  s.defect_volume = k.volume() - (h.degenerate ? 0.0 : h.volume);
  return s;
}

inline int total_layers(const PointSet& ps) {
  PeelOptions opt;
  opt.want_complexes = false;
  return peel(ps, opt).num_layers();
}

// id,layer rows sorted by id; leftover ids get layer 0.
inline void write_labels_csv(const PeelingResult& pr, std::ostream& os) {
  std::vector<std::pair<PointId, int>> rows(pr.label);
  for (PointId id : pr.leftover) rows.emplace_back(id, 0);
  std::sort(rows.begin(), rows.end());
  os << "id,layer\n";
  for (const auto& [id, l] : rows) os << id << ',' << l << '\n';
}

inline nlohmann::json layers_json(const PeelingResult& pr) {
  nlohmann::json j;
  j["dim"] = pr.dim;
  j["num_layers"] = pr.num_layers();
  j["layers"] = nlohmann::json::array();
  for (int n = 1; n <= pr.num_layers(); ++n) {
    nlohmann::json l;
    l["n"] = n;
    l["points"] = pr.layer_ids[n - 1].size();
    if (static_cast<int>(pr.layers.size()) >= n) {
      const HullComplex& h = pr.layers[n - 1];
      l["f"] = h.f_vector();
      l["affine_dim"] = h.affine_dim;
      l["volume"] = h.degenerate ? 0.0 : h.volume;
    }
    j["layers"].push_back(std::move(l));
  }
  j["leftover"] = pr.leftover.size();
  return j;
}

}  // namespace peellab
