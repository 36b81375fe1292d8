#pragma once

// The corner scaling transform (v, h), the grain function G, cone-like peeling
// computed by pullback to the corner, and the height-tail and stabilization
// estimators for the limit process.
//
// Rescaled points are stored in a PointSet of dimension d with coordinates
// (v_1, ..., v_{d-1}, h), v expressed in the Helmert basis of V = {sum z_i = 0}.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include "peellab/detail/lp.hpp"
#include "peellab/errors.hpp"
#include "peellab/geom_core.hpp"
#include "peellab/peeling.hpp"
#include "peellab/sampling.hpp"
#include "peellab/stats.hpp"

namespace peellab {

// Row j (0-based) is (1, ..., 1, -(j+1), 0, ..., 0) / sqrt((j+1)(j+2)).
inline std::vector<std::vector<double>> helmert_basis(int d) {
  std::vector<std::vector<double>> u(d - 1, std::vector<double>(d, 0.0));
  for (int j = 0; j < d - 1; ++j) {
    const double s = 1.0 / std::sqrt((j + 1.0) * (j + 2.0));
    for (int i = 0; i <= j; ++i) u[j][i] = s;
    u[j][j + 1] = -(j + 1.0) * s;
  }
  return u;
}

// Standard coordinates l(v) in R^d of v in V.
inline std::vector<double> l_of(const double* v, int d) {
  std::vector<double> l(d, 0.0);
  for (int j = 0; j < d - 1; ++j) {
    const double s = 1.0 / std::sqrt((j + 1.0) * (j + 2.0));
    for (int i = 0; i <= j; ++i) l[i] += v[j] * s;
    l[j + 1] -= v[j] * (j + 1.0) * s;
  }
  return l;
}

inline std::vector<double> l_of(const std::vector<double>& v) {
  return l_of(v.data(), static_cast<int>(v.size()) + 1);
}

// Coordinates of the projection of x in R^d onto V.
inline std::vector<double> project_v(const double* x, int d) {
  std::vector<double> v(d - 1, 0.0);
  double prefix = 0.0;
  for (int j = 0; j < d - 1; ++j) {
    prefix += x[j];
    v[j] = (prefix - (j + 1.0) * x[j + 1]) / std::sqrt((j + 1.0) * (j + 2.0));
  }
  return v;
}

// G(v) = log((1/d) sum_i exp(l_i(v))).
inline double grain_G(const double* v, int d) {
  const auto l = l_of(v, d);
  const double m = *std::max_element(l.begin(), l.end());
  double s = 0.0;
  for (double li : l) s += std::exp(li - m);
  return m + std::log(s / d);
}

inline double grain_G(const std::vector<double>& v) { return grain_G(v.data(), static_cast<int>(v.size()) + 1); }

inline std::vector<double> grad_G(const std::vector<double>& v) {
  const int d = static_cast<int>(v.size()) + 1;
  const auto l = l_of(v);
  const double m = *std::max_element(l.begin(), l.end());
  std::vector<double> w(d);
  double s = 0.0;
  for (int i = 0; i < d; ++i) s += (w[i] = std::exp(l[i] - m));
  for (double& wi : w) wi /= s;
  return project_v(w.data(), d);
}

// Constant bound on |grad G|: the norm of the projection of a unit coordinate vector onto V.
inline double grad_G_bound(int d) { return std::sqrt(1.0 - 1.0 / d); }

struct NormConstants {
  double lower = 0.0;  // c such that c|v| - log d <= G(v)
  double upper = 0.0;  // c such that G(v) <= c|v|
};

// Extremes of max_i l_i over the unit sphere of V.
inline NormConstants g_norm_constants(int d) { return {1.0 / std::sqrt(d * (d - 1.0)), std::sqrt(1.0 - 1.0 / d)}; }

struct RescaledPoint {
  std::vector<double> v;
  double h = 0.0;
};

inline RescaledPoint scaling_transform(const double* z, int d, double lambda) {
  std::vector<double> lz(d);
  double s = 0.0;
  for (int i = 0; i < d; ++i) {
    if (!(z[i] > 0.0)) throw NonPositiveCoordinate("scaling transform needs positive coordinates");
    lz[i] = std::log(z[i]);
    s += lz[i];
  }
  return {project_v(lz.data(), d), (std::log(lambda) + s) / d};
}

inline RescaledPoint scaling_transform(const std::vector<double>& z, double lambda) {
  return scaling_transform(z.data(), static_cast<int>(z.size()), lambda);
}

inline std::vector<double> inverse_transform(const double* v, double h, int d, double lambda) {
  const auto l = l_of(v, d);
  std::vector<double> z(d);
  const double base = h - std::log(lambda) / d;
  for (int i = 0; i < d; ++i) z[i] = std::exp(base + l[i]);
  return z;
}

inline std::vector<double> inverse_transform(const RescaledPoint& w, double lambda) {
  return inverse_transform(w.v.data(), w.h, static_cast<int>(w.v.size()) + 1, lambda);
}

// Image of Q_0 = [0, delta0]^d.
struct Window {
  double lambda = 0.0;  // +inf for the limit model
  double delta0 = 0.0;
  static Window at(double lambda, int d) { return {lambda, std::exp(-std::pow(std::log(lambda), 1.0 / d))}; }
  bool contains(const RescaledPoint& w) const {
    if (std::isinf(lambda)) return true;
    const int d = static_cast<int>(w.v.size()) + 1;
    const auto l = l_of(w.v);
    const double cap = std::log(std::pow(lambda, 1.0 / d) * delta0);
    for (int i = 0; i < d; ++i)
      if (w.h > -l[i] + cap) return false;
    return true;
  }
};

enum class GrainDirection { Down, Up };

struct Grain {
  RescaledPoint apex;
  GrainDirection direction = GrainDirection::Down;

  // Signed vertical gap: positive strictly inside, zero on the boundary.
  double gap(const RescaledPoint& w) const {
    std::vector<double> dv(w.v.size());
    if (direction == GrainDirection::Down) {
      for (std::size_t j = 0; j < dv.size(); ++j) dv[j] = w.v[j] - apex.v[j];
      return apex.h - grain_G(dv) - w.h;
    }
    for (std::size_t j = 0; j < dv.size(); ++j) dv[j] = apex.v[j] - w.v[j];
    return w.h - apex.h - grain_G(dv);
  }
  bool contains(const RescaledPoint& w) const { return gap(w) > 0; }
};

// Open cap of the corner below the hyperplane through z0 tangent to the level of z0.
inline bool in_halfspace_plus(const std::vector<double>& z, const std::vector<double>& z0) {
  double s = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) s += z[i] / z0[i];
  return s < static_cast<double>(z.size());
}

inline Grain halfspace_to_grain(const std::vector<double>& z0, double lambda) {
  return {scaling_transform(z0, lambda), GrainDirection::Down};
}

struct ConePeelingResult {
  int dim = 0;
  std::vector<std::vector<PointId>> layer_ids;  // sorted
  std::vector<std::pair<PointId, int>> label;   // sorted by id
  // faces[n][k]: cone-extreme k-faces of layer n+1 as sorted vertex-id sets.
  std::vector<std::vector<std::vector<std::vector<PointId>>>> faces;
  bool has_faces = false;

  int num_layers() const { return static_cast<int>(layer_ids.size()); }
  int label_of(PointId id) const {
    auto it = std::lower_bound(label.begin(), label.end(), std::make_pair(id, std::numeric_limits<int>::min()));
    return (it != label.end() && it->first == id) ? it->second : 0;
  }
  std::vector<std::size_t> face_counts(int layer) const {
    std::vector<std::size_t> out;
    for (const auto& f : faces.at(layer - 1)) out.push_back(f.size());
    return out;
  }
};

struct ConePeelOptions {
  std::optional<int> max_layers;
  bool want_faces = false;
  double lp_eps = 1e-9;
  bool exact_planar = true;  // planar chain instead of the LP test when d = 2
};

namespace detail {

// Does some direction a > 0 attain min a.y over the set at x?  Scaled by x so
// the rows are well conditioned across magnitudes.
inline bool cone_extreme_lp(const double* x, const std::vector<const double*>& others, int d, double eps) {
  lp::Matrix a;
  std::vector<double> b;
  for (const double* y : others) {
    std::vector<double> row(d);
    double mx = 0.0;
    bool same = true;
    for (int i = 0; i < d; ++i) {
      row[i] = 1.0 - y[i] / x[i];
      mx = std::max(mx, std::fabs(row[i]));
      same = same && y[i] == x[i];
    }
    if (same) continue;
    for (double& r : row) r /= mx;
    a.push_back(std::move(row));
    b.push_back(0.0);
  }
  for (int i = 0; i < d; ++i) {
    std::vector<double> row(d, 0.0);
    row[i] = -1.0;
    a.push_back(std::move(row));
    b.push_back(-1.0);
  }
  return lp::feasible(d, a, b, {}, {}, eps);
}

// Does the cone spanned by the given outward normals meet the open negative orthant?
inline bool normal_cone_negative(const std::vector<const std::vector<double>*>& normals, int d, double eps) {
  const int m = static_cast<int>(normals.size());
  lp::Matrix a(d, std::vector<double>(m, 0.0));
  std::vector<double> b(d, -1.0);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < d; ++i) a[i][j] = (*normals[j])[i];
  return lp::feasible(m, a, b, {}, {}, eps);
}

struct ConeLayer {
  std::vector<std::size_t> members;                      // positions in the working set
  std::vector<std::vector<std::vector<std::size_t>>> faces;  // faces[k], positions
};

// Planar cone-extreme chain: the lower hull from the lowest leftmost point to
// the leftmost lowest point, collinear boundary points included.
inline ConeLayer cone_layer_2d(const std::vector<double>& z, const std::vector<std::size_t>& alive) {
  std::vector<std::size_t> s(alive);
  std::sort(s.begin(), s.end(), [&](std::size_t a, std::size_t b) {
    return z[2 * a] != z[2 * b] ? z[2 * a] < z[2 * b] : z[2 * a + 1] < z[2 * b + 1];
  });
  std::size_t bottom = 0;
  for (std::size_t i = 1; i < s.size(); ++i)
    if (z[2 * s[i] + 1] < z[2 * s[bottom] + 1]) bottom = i;
  std::vector<std::size_t> chain;
  for (std::size_t i = 0; i <= bottom; ++i) {
    while (chain.size() >= 2 &&
           orient2d(&z[2 * chain[chain.size() - 2]], &z[2 * chain.back()], &z[2 * s[i]]) < 0)
      chain.pop_back();
    chain.push_back(s[i]);
  }
  ConeLayer out;
  out.members = chain;
  // Vertices: chain points where the turn is strict.
  std::vector<std::size_t> verts;
  for (std::size_t i = 0; i < out.members.size(); ++i) {
    if (i == 0 || i + 1 == out.members.size() ||
        orient2d(&z[2 * out.members[i - 1]], &z[2 * out.members[i]], &z[2 * out.members[i + 1]]) != 0)
      verts.push_back(out.members[i]);
  }
  out.faces.resize(2);
  for (std::size_t v : verts) out.faces[0].push_back({v});
  for (std::size_t i = 0; i + 1 < verts.size(); ++i) out.faces[1].push_back({verts[i], verts[i + 1]});
  return out;
}

inline ConeLayer cone_layer_general(const std::vector<double>& z, const std::vector<std::size_t>& alive, int d,
                                    bool want_faces, double eps) {
  PointSet sub(d);
  for (std::size_t p : alive) sub.add(&z[d * p], static_cast<PointId>(p));
  const HullComplex h = relative_hull(sub, want_faces);
  std::vector<const double*> verts;
  for (PointId id : h.vertex_ids) verts.push_back(&z[d * static_cast<std::size_t>(id)]);
  ConeLayer out;
  std::vector<PointId> cand = h.degenerate ? std::vector<PointId>() : h.boundary_ids;
  if (h.degenerate)
    for (std::size_t p : alive) cand.push_back(static_cast<PointId>(p));
  for (PointId id : cand)
    if (cone_extreme_lp(&z[d * static_cast<std::size_t>(id)], verts, d, eps))
      out.members.push_back(static_cast<std::size_t>(id));
  if (want_faces && !h.degenerate) {
    out.faces.resize(d);
    const auto& facets = h.faces[d - 1];
    for (int k = 0; k < d; ++k)
      for (const auto& f : h.faces[k]) {
        std::vector<const std::vector<double>*> normals;
        for (std::size_t j = 0; j < facets.size(); ++j)
          if (std::includes(facets[j].begin(), facets[j].end(), f.begin(), f.end()))
            normals.push_back(&h.facet_normals[j]);
        if (!normals.empty() && normal_cone_negative(normals, d, eps)) {
          std::vector<std::size_t> face;
          for (PointId id : f) face.push_back(static_cast<std::size_t>(id));
          out.faces[k].push_back(std::move(face));
        }
      }
  } else if (want_faces) {
    // Point or segment: extreme vertices, plus the segment when both ends are.
    out.faces.resize(d);
    std::vector<std::size_t> ext;
    for (PointId id : h.vertex_ids)
      if (std::find(out.members.begin(), out.members.end(), static_cast<std::size_t>(id)) != out.members.end())
        ext.push_back(static_cast<std::size_t>(id));
    std::sort(ext.begin(), ext.end());
    for (std::size_t v : ext) out.faces[0].push_back({v});
    if (h.affine_dim == 1 && ext.size() == 2) out.faces[1].push_back(ext);
  }
  return out;
}

inline ConePeelingResult cone_peel_corner(const PointSet& zs, const ConePeelOptions& opt) {
  const int d = zs.dim();
  // Duplicates share a label through their lowest-id representative.
  const UniquePoints u = unique_points(zs);
  const std::size_t m = u.size();
  std::vector<double> z(u.x);
  std::vector<std::size_t> alive(m);
  std::iota(alive.begin(), alive.end(), 0);
  std::vector<int> lab(m, 0);
  ConePeelingResult r;
  r.dim = d;
  r.has_faces = opt.want_faces;
  int layer = 0;
  while (!alive.empty() && (!opt.max_layers || layer < *opt.max_layers)) {
    ++layer;
    ConeLayer cl = d == 2 && opt.exact_planar ? cone_layer_2d(z, alive) : cone_layer_general(z, alive, d, opt.want_faces, opt.lp_eps);
    if (cl.members.empty()) throw std::logic_error("cone peeling found no extreme point");
    std::vector<PointId> ids;
    for (std::size_t p : cl.members) {
      lab[p] = layer;
      u.for_members(p, [&](PointId id) { ids.push_back(id); });
    }
    std::sort(ids.begin(), ids.end());
    r.layer_ids.push_back(std::move(ids));
    if (opt.want_faces) {
      std::vector<std::vector<std::vector<PointId>>> fk(cl.faces.size());
      for (std::size_t k = 0; k < cl.faces.size(); ++k)
        for (const auto& f : cl.faces[k]) {
          std::vector<PointId> face;
          for (std::size_t p : f) face.push_back(u.rep[p]);
          std::sort(face.begin(), face.end());
          fk[k].push_back(std::move(face));
        }
      fk.resize(d);
      r.faces.push_back(std::move(fk));
    }
    std::vector<std::size_t> keep;
    for (std::size_t p : alive)
      if (lab[p] == 0) keep.push_back(p);
    alive.swap(keep);
  }
  for (std::size_t p = 0; p < m; ++p)
    u.for_members(p, [&](PointId id) { r.label.emplace_back(id, lab[p]); });
  std::sort(r.label.begin(), r.label.end());
  return r;
}

}  // namespace detail

// Cone-like peeling of points in the corner (0, inf)^d.
inline ConePeelingResult cone_peel_corner(const PointSet& zs, const ConePeelOptions& opt = {}) {
  for (std::size_t i = 0; i < zs.size(); ++i)
    for (int j = 0; j < zs.dim(); ++j)
      if (!(zs.coord(i)[j] > 0.0)) throw NonPositiveCoordinate("corner points must be positive");
  if (zs.empty()) return ConePeelingResult{zs.dim()};
  return detail::cone_peel_corner(zs, opt);
}

// Pulls rescaled points back to the corner; labels do not depend on lambda, so
// heights are shifted to keep the coordinates in floating range.
inline PointSet pullback(const PointSet& ys) {
  const int d = ys.dim();
  double hmax = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < ys.size(); ++i) hmax = std::max(hmax, ys.coord(i)[d - 1]);
  PointSet zs(d);
  zs.reserve(ys.size());
  for (std::size_t i = 0; i < ys.size(); ++i) {
    const double* w = ys.coord(i);
    zs.add(inverse_transform(w, w[d - 1] - hmax, d, 1.0), ys.id(i));
  }
  return zs;
}

inline ConePeelingResult cone_peel(const PointSet& ys, const ConePeelOptions& opt = {}) {
  if (ys.empty()) return ConePeelingResult{ys.dim()};
  return detail::cone_peel_corner(pullback(ys), opt);
}

// The peeling is invariant under the vertical shifts relating different lambdas.
inline ConePeelingResult cone_peel(const PointSet& ys, double /*lambda*/, const ConePeelOptions& opt = {}) {
  return cone_peel(ys, opt);
}

inline PointSet to_rescaled(const PointSet& zs, double lambda) {
  PointSet ys(zs.dim());
  ys.reserve(zs.size());
  for (std::size_t i = 0; i < zs.size(); ++i) {
    const auto w = scaling_transform(zs.coord(i), zs.dim(), lambda);
    std::vector<double> c(w.v);
    c.push_back(w.h);
    ys.add(c, zs.id(i));
  }
  return ys;
}

// True when every point of the convex layers 1..n is cone-extreme among the
// points still present when its layer is removed.
inline bool layers_cone_extreme(const PointSet& zs, int n, double eps = 1e-9) {
  const PeelingResult pr = peel(zs, PeelOptions{n, false});
  const int d = zs.dim();
  std::vector<std::pair<PointId, std::size_t>> pos;
  for (std::size_t i = 0; i < zs.size(); ++i) pos.emplace_back(zs.id(i), i);
  std::sort(pos.begin(), pos.end());
  auto coord = [&](PointId id) {
    return zs.coord(std::lower_bound(pos.begin(), pos.end(), std::make_pair(id, std::size_t{0}))->second);
  };
  for (int k = 0; k < pr.num_layers(); ++k) {
    std::vector<const double*> rest;
    for (std::size_t i = 0; i < zs.size(); ++i) {
      const int l = pr.label_of(zs.id(i));
      if (l == 0 || l > k) rest.push_back(zs.coord(i));
    }
    for (PointId id : pr.layer_ids[k])
      if (!detail::cone_extreme_lp(coord(id), rest, d, eps)) return false;
  }
  return true;
}

// ---- estimators on the limit process -------------------------------------

struct HeightTail {
  std::vector<double> t_grid;
  std::vector<double> tail;         // P(max height of layer n >= t)
  std::vector<double> max_heights;  // per replication (-inf when the layer misses the core)
  std::optional<stats::LineFit> fit;  // log(-log tail) against t
};

inline HeightTail height_tail_estimate(const LimitWindow& win, int d, int n, std::size_t reps,
                                       const std::vector<double>& t_grid, Seed seed, double core = 0.5) {
  HeightTail out;
  out.t_grid = t_grid;
  for (std::size_t r = 0; r < reps; ++r) {
    const PointSet ys = sample_limit_process(win, d, child_seed(seed, r));
    double mh = -std::numeric_limits<double>::infinity();
    if (!ys.empty()) {
      const auto cr = cone_peel(ys, ConePeelOptions{n, false});
      for (std::size_t i = 0; i < ys.size(); ++i) {
        if (cr.label_of(ys.id(i)) != n) continue;
        double nv = 0.0;
        for (int j = 0; j < d - 1; ++j) nv += ys.coord(i)[j] * ys.coord(i)[j];
        if (std::sqrt(nv) <= core * win.r) mh = std::max(mh, ys.coord(i)[d - 1]);
      }
    }
    out.max_heights.push_back(mh);
  }
  std::vector<double> xs, ls;
  for (double t : t_grid) {
    std::size_t c = 0;
    for (double m : out.max_heights) c += m >= t;
    const double p = reps ? static_cast<double>(c) / static_cast<double>(reps) : 0.0;
    out.tail.push_back(p);
    if (p > 0 && p < 1) {
      xs.push_back(t);
      ls.push_back(std::log(-std::log(p)));
    }
  }
  if (xs.size() >= 2) out.fit = stats::fit_line(xs, ls);
  return out;
}

struct Score {
  int n = 1;
  int k = -1;  // -1: layer-membership indicator; otherwise k-face count / (k+1)
};

namespace detail {

inline double score_of(const PointSet& ys, PointId id, const Score& s) {
  const auto cr = cone_peel(ys, ConePeelOptions{s.n, s.k >= 0});
  if (s.k < 0) return cr.label_of(id) == s.n ? 1.0 : 0.0;
  if (cr.num_layers() < s.n || s.k >= static_cast<int>(cr.faces[s.n - 1].size())) return 0.0;
  std::size_t c = 0;
  for (const auto& f : cr.faces[s.n - 1][s.k]) c += std::binary_search(f.begin(), f.end(), id);
  return static_cast<double>(c) / (s.k + 1);
}

}  // namespace detail

// Smallest grid radius r such that the score of w0 computed from the points of
// Y in the cylinder |v - v0| <= s matches the full-window score for every grid
// s >= r; +inf when even the largest radius disagrees.
inline double stabilization_radius(const RescaledPoint& w0, const PointSet& ys, const Score& score,
                                   std::vector<double> r_grid) {
  const int d = ys.dim();
  std::sort(r_grid.begin(), r_grid.end());
  PointId fresh = 0;
  for (std::size_t i = 0; i < ys.size(); ++i) fresh = std::max(fresh, ys.id(i) + 1);
  auto with_w0 = [&](double radius) {
    PointSet s(d);
    std::vector<double> c(w0.v);
    c.push_back(w0.h);
    s.add(c, fresh);
    for (std::size_t i = 0; i < ys.size(); ++i) {
      double nv = 0.0;
      for (int j = 0; j < d - 1; ++j) nv += (ys.coord(i)[j] - w0.v[j]) * (ys.coord(i)[j] - w0.v[j]);
      if (std::sqrt(nv) <= radius) s.add(ys.coord(i), ys.id(i));
    }
    return s;
  };
  const double ref = detail::score_of(with_w0(std::numeric_limits<double>::infinity()), fresh, score);
  double result = std::numeric_limits<double>::infinity();
  for (std::size_t i = r_grid.size(); i-- > 0;) {
    if (detail::score_of(with_w0(r_grid[i]), fresh, score) != ref) break;
    result = r_grid[i];
  }
  return result;
}

struct StabilizationTail {
  std::vector<double> r_grid;
  std::vector<double> tail;  // P(R >= r)
  std::vector<double> radii;
  std::optional<stats::LineFit> fit;  // log tail against r
};

inline StabilizationTail stabilization_tail(const LimitWindow& win, int d, const Score& score, double h0,
                                            const std::vector<double>& r_grid, std::size_t reps, Seed seed) {
  StabilizationTail out;
  out.r_grid = r_grid;
  RescaledPoint w0{std::vector<double>(d - 1, 0.0), h0};
  for (std::size_t r = 0; r < reps; ++r)
    out.radii.push_back(stabilization_radius(w0, sample_limit_process(win, d, child_seed(seed, r)), score, r_grid));
  std::vector<double> xs, ls;
  for (double r : r_grid) {
    std::size_t c = 0;
    for (double x : out.radii) c += x >= r;
    const double p = reps ? static_cast<double>(c) / static_cast<double>(reps) : 0.0;
    out.tail.push_back(p);
    if (p > 0) {
      xs.push_back(r);
      ls.push_back(std::log(p));
    }
  }
  if (xs.size() >= 2) out.fit = stats::fit_line(xs, ls);
  return out;
}

}  // namespace peellab
