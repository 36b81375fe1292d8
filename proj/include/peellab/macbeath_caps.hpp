#pragma once

// Macbeath regions, dyadic M-region nets in corner coordinates, the economic
// cap covering check, layer counts inside the M-regions and the probability of
// convex position.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "peellab/detail/log.hpp"
#include "peellab/errors.hpp"
#include "peellab/floating_sandwich.hpp"
#include "peellab/geom_core.hpp"
#include "peellab/peeling.hpp"
#include "peellab/polytope_model.hpp"
#include "peellab/sampling.hpp"
#include "peellab/stats.hpp"

namespace peellab {

struct Box {
  std::vector<double> lo;
  std::vector<double> hi;
  double volume() const {
    double v = 1.0;
    for (std::size_t i = 0; i < lo.size(); ++i) v *= hi[i] - lo[i];
    return v;
  }
  bool contains(const double* y) const {
    for (std::size_t i = 0; i < lo.size(); ++i)
      if (y[i] < lo[i] || y[i] > hi[i]) return false;
    return true;
  }
};

struct MRegion {
  std::vector<double> center;
  double factor = 1.0;
  std::optional<Box> box;
  std::vector<int> k;  // exponents of a dyadic center, empty otherwise
};

// z + factor [(K - z) ∩ (z - K)] as an H-polytope.
inline HPolytope macbeath_region(const HPolytope& k, const std::vector<double>& z, double factor) {
  const int d = k.dim();
  if (static_cast<int>(z.size()) != d) throw std::invalid_argument("center dimension mismatch");
  if (!(factor > 0)) throw std::invalid_argument("factor must be positive");
  std::vector<Halfspace> hs;
  for (const auto& h : k.halfspaces()) {
    double az = 0.0, norm = 0.0;
    for (int j = 0; j < d; ++j) {
      az += h.a[j] * z[j];
      norm += h.a[j] * h.a[j];
    }
    const double slack = h.b - az;
    if (!(slack > 1e-12 * (1.0 + std::sqrt(norm) + std::fabs(h.b))))
      throw BoundaryPoint("Macbeath center is not interior to K");
    std::vector<double> neg(h.a);
    for (double& c : neg) c = -c;
    hs.push_back({h.a, az + factor * slack});
    hs.push_back({neg, -az + factor * slack});
  }
  if (k.is_box()) {
    // Tighten to the 2d coordinate halfspaces.
    std::vector<Halfspace> box;
    for (int j = 0; j < d; ++j) {
      const double r = factor * std::min(z[j] - k.box_lo()[j], k.box_hi()[j] - z[j]);
      std::vector<double> e(d, 0.0);
      e[j] = 1.0;
      box.push_back({e, z[j] + r});
      e[j] = -1.0;
      box.push_back({e, -(z[j] - r)});
    }
    return HPolytope(d, box);
  }
  return HPolytope(d, hs);
}

// Level sum k_1 + ... + k_d = log_3(d! T / (d^d delta^d)).
inline double dyadic_level(int d, double delta, double t) {
  return std::log(factorial(d) * t / (std::pow(static_cast<double>(d), d) * std::pow(delta, d))) / std::log(3.0);
}

// Smallest delta >= delta0 (within a factor 3^{1/d}) making the level an integer.
inline double dyadic_delta(int d, double t, double delta0) {
  const double lev = dyadic_level(d, delta0, t);
  const double l = std::floor(lev + 1e-12);
  return delta0 * std::pow(3.0, (lev - l) / d);
}

inline double delta0_of(double lambda, int d) { return std::exp(-std::pow(std::log(lambda), 1.0 / d)); }

// All dyadic M-regions with centers (3^{k_i} delta) on the level v = t of the unit cube corner.
inline std::vector<MRegion> dyadic_net(int d, double delta, double t) {
  if (!(delta > 0 && delta < 0.5)) throw std::invalid_argument("delta must lie in (0, 1/2)");
  if (!(t > 0)) throw std::invalid_argument("level must be positive");
  const double lev = dyadic_level(d, delta, t);
  const long long level = std::llround(lev);
  if (std::fabs(lev - static_cast<double>(level)) > 1e-9)
    throw NonIntegerLevel("log_3(d! T / (d^d delta^d)) = " + std::to_string(lev) + " is not an integer");
  // 3^{k} < 1/(3 delta)
  int kmax = static_cast<int>(std::ceil(std::log(1.0 / (3.0 * delta)) / std::log(3.0))) - 1;
  while (std::pow(3.0, kmax + 1) < 1.0 / (3.0 * delta)) ++kmax;
  while (std::pow(3.0, kmax) >= 1.0 / (3.0 * delta)) --kmax;
  const long long kmin = level - static_cast<long long>(d - 1) * kmax;
  std::vector<MRegion> out;
  if (kmin > kmax) return out;
  std::vector<int> k(d);
  auto rec = [&](auto&& self, int i, long long rest) -> void {
    if (i == d - 1) {
      if (rest < kmin || rest > kmax) return;
      k[i] = static_cast<int>(rest);
      MRegion m;
      m.k = k;
      m.factor = 0.5;
      Box b;
      for (int j = 0; j < d; ++j) {
        const double zj = std::pow(3.0, k[j]) * delta;
        m.center.push_back(zj);
        b.lo.push_back(zj / 2);
        b.hi.push_back(3 * zj / 2);
      }
      m.box = b;
      out.push_back(std::move(m));
      return;
    }
    for (long long ki = kmin; ki <= kmax; ++ki) {
      k[i] = static_cast<int>(ki);
      self(self, i + 1, rest - ki);
    }
  };
  rec(rec, 0, level);
  return out;
}

namespace detail {

// Volume of {y in [0,1]^d : sum a_i y_i <= c} for positive weights.
inline double box_simplex_volume(const std::vector<double>& a, double c) {
  const int d = static_cast<int>(a.size());
  double prod = 1.0;
  for (double ai : a) prod *= ai;
  double s = 0.0;
  for (unsigned mask = 0; mask < (1u << d); ++mask) {
    double shift = 0.0;
    int bits = 0;
    for (int i = 0; i < d; ++i)
      if (mask & (1u << i)) {
        shift += a[i];
        ++bits;
      }
    if (c > shift) s += ((bits & 1) ? -1.0 : 1.0) * std::pow(c - shift, d);
  }
  return std::clamp(s / (factorial(d) * prod), 0.0, 1.0);
}

inline double tangent_ratio(const double* y, const std::vector<double>& z) {
  double s = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) s += y[i] / z[i];
  return s;
}

}  // namespace detail

// K'(z) = M(z, 1/2) ∩ C(z) for a dyadic center: half of the box.
inline double kprime_volume(const std::vector<double>& z) {
  double p = 1.0;
  for (double zi : z) p *= zi;
  return p / 2;
}

// K(z) = C^6(z) in the unit cube corner model.
inline double kfull_volume(const std::vector<double>& z) {
  std::vector<double> a;
  for (double zi : z) a.push_back(1.0 / zi);
  return detail::box_simplex_volume(a, 6.0 * z.size());
}

inline double cap_threshold_s0(int d) { return std::pow(2.0 * d, -2.0 * d); }

struct CapCoverRow {
  std::size_t corner = 0;
  std::vector<int> k;
  std::vector<double> center;
  double vol_kprime = 0.0;
  double vol_kfull = 0.0;
};

struct CapCoverReport {
  int d = 0;
  double s = 0.0;
  double s0 = 0.0;
  bool above_s0 = false;
  double delta = 0.0;
  long long level = 0;
  std::vector<CapCoverRow> rows;
  std::vector<std::string> violations;
  std::size_t inner_checked = 0;
  std::size_t inner_violations = 0;
  std::size_t outer_checked = 0;
  std::size_t outer_uncovered = 0;
  bool ok() const { return violations.empty() && inner_violations == 0 && outer_uncovered == 0; }
};

struct CapCoverOptions {
  std::optional<double> delta;  // default: adjusted from 1/6
  std::size_t samples_per_region = 1000;
  std::size_t coverage_samples = 20000;
  Seed seed{};
};

// Builds the dyadic system at level s in every corner of K (normalized to unit
// volume), checks the volume bounds and samples both inclusions.
inline CapCoverReport cap_cover_check(const HPolytope& k, double s, const CapCoverOptions& opt = {}) {
  const CornerRegime reg(k);
  const int d = k.dim();
  CapCoverReport r;
  r.d = d;
  r.s = s;
  r.s0 = cap_threshold_s0(d);
  r.above_s0 = s > r.s0;
  if (r.above_s0) log::warn("cap covering level " + std::to_string(s) + " exceeds s_0 = " + std::to_string(r.s0));
  r.delta = opt.delta.value_or(dyadic_delta(d, s, 1.0 / 6.0));
  r.level = std::llround(dyadic_level(d, r.delta, s));
  const auto net = dyadic_net(d, r.delta, s);
  const double rel = 1e-9;
  const double lo2 = std::pow(6.0 * d, -d) * s, hi2 = std::pow(2.0, -d) * s, hi1 = std::pow(6.0, d) * s;
  for (std::size_t f = 0; f < reg.frames().size(); ++f)
    for (const auto& m : net) {
      CapCoverRow row{f, m.k, m.center, kprime_volume(m.center), kfull_volume(m.center)};
      auto tag = [&] {
        std::string t = "corner " + std::to_string(f) + " k=(";
        for (std::size_t i = 0; i < m.k.size(); ++i) t += (i ? "," : "") + std::to_string(m.k[i]);
        return t + ")";
      };
      if (row.vol_kfull < s * (1 - rel) || row.vol_kfull > hi1 * (1 + rel))
        r.violations.push_back(tag() + ": Vol(K_i) outside [s, 6^d s]");
      if (row.vol_kprime < lo2 * (1 - rel) || row.vol_kprime > hi2 * (1 + rel))
        r.violations.push_back(tag() + ": Vol(K'_i) outside [(6d)^-d s, 2^-d s]");
      r.rows.push_back(std::move(row));
    }
  Engine eng = make_engine(opt.seed);
  std::vector<double> y(d);
  // K'_i inside K(v <= s).
  for (std::size_t f = 0; f < reg.frames().size(); ++f)
    for (const auto& m : net) {
      for (std::size_t c = 0; c < opt.samples_per_region;) {
        for (int j = 0; j < d; ++j) y[j] = m.box->lo[j] + (m.box->hi[j] - m.box->lo[j]) * detail::uniform(eng);
        if (detail::tangent_ratio(y.data(), m.center) > d) continue;
        ++c;
        ++r.inner_checked;
        const auto x = reg.denormalized(f, y);
        const auto v = reg.try_v(x.data());
        if (!v || classify(*v / reg.volume(), s) == FloatClass::Above) ++r.inner_violations;
      }
    }
  // K(v <= s) inside the union of the K_i, sampled over the corner boxes.
  if (!net.empty()) {
    for (std::size_t c = 0; c < opt.coverage_samples; ++c) {
      const std::size_t f0 = static_cast<std::size_t>(detail::uniform(eng) * reg.frames().size()) % reg.frames().size();
      // Sample the level region near the corner: log-uniform radii keep small v well represented.
      for (int j = 0; j < d; ++j) y[j] = 0.5 * std::pow(detail::uniform(eng), 1.0 + 3.0 * detail::uniform(eng));
      const auto x = reg.denormalized(f0, y);
      const auto v = reg.try_v(x.data());
      if (!v || *v / reg.volume() > s) continue;
      ++r.outer_checked;
      bool covered = false;
      for (std::size_t f = 0; f < reg.frames().size() && !covered; ++f) {
        const auto yf = reg.normalized(f, x.data());
        for (const auto& m : net)
          if (detail::tangent_ratio(yf.data(), m.center) <= 6.0 * d) {
            covered = true;
            break;
          }
      }
      if (!covered) ++r.outer_uncovered;
    }
  }
  return r;
}

struct MRegionLayerRow {
  std::size_t corner = 0;
  std::vector<int> k;
  std::vector<double> center;
  double vol_kprime = 0.0;
  double vol_kfull = 0.0;
  std::size_t count = 0;
  int layers = 0;
};

struct MRegionLayers {
  FloatingParams params;
  double delta = 0.0;
  std::vector<MRegionLayerRow> rows;
  int min_layers = 0;
  bool success = false;  // every region has more than n layers
};

// Peels the Poisson points inside each dyadic K'_i at level T.
inline MRegionLayers layers_in_mregions(const HPolytope& k, double lambda, int n, Seed seed,
                                         std::optional<double> alpha = std::nullopt) {
  const CornerRegime reg(k);
  const int d = k.dim();
  // Intensity per unit of normalized volume.
  const double lam = lambda * reg.volume();
  MRegionLayers out;
  out.params = sandwich_params(lam, d, alpha);
  const double t = out.params.T;
  if (t > cap_threshold_s0(d))
    log::warn("T = " + std::to_string(t) + " exceeds the cap covering threshold s_0 = " +
              std::to_string(cap_threshold_s0(d)));
  out.delta = dyadic_delta(d, t, delta0_of(lam, d));
  const auto net = out.delta < 0.5 ? dyadic_net(d, out.delta, t) : std::vector<MRegion>{};
  const std::size_t nf = reg.frames().size();
  std::vector<PointSet> groups(nf * net.size(), PointSet(d));
  const PointSet ps = sample_poisson(k, lambda, seed);
  for (std::size_t i = 0; i < ps.size(); ++i)
    for (std::size_t f = 0; f < nf; ++f) {
      const auto y = reg.normalized(f, ps.coord(i));
      bool near = true;
      for (double c : y) near = near && c <= 0.5;
      if (!near) continue;
      for (std::size_t m = 0; m < net.size(); ++m)
        if (net[m].box->contains(y.data()) && detail::tangent_ratio(y.data(), net[m].center) <= d)
          groups[f * net.size() + m].add(y, ps.id(i));
    }
  out.min_layers = std::numeric_limits<int>::max();
  for (std::size_t f = 0; f < nf; ++f)
    for (std::size_t m = 0; m < net.size(); ++m) {
      const PointSet& g = groups[f * net.size() + m];
      MRegionLayerRow row{f, net[m].k, net[m].center, kprime_volume(net[m].center), kfull_volume(net[m].center),
                          g.size(), 0};
      if (g.size() > 0) row.layers = peel(g, PeelOptions{std::nullopt, false}).num_layers();
      out.min_layers = std::min(out.min_layers, row.layers);
      out.rows.push_back(std::move(row));
    }
  if (out.rows.empty()) out.min_layers = 0;
  out.success = !out.rows.empty() && out.min_layers > n;
  return out;
}

struct Frequency {
  std::size_t successes = 0;
  std::size_t reps = 0;
  double rate() const { return reps ? static_cast<double>(successes) / static_cast<double>(reps) : 0.0; }
  stats::Interval ci() const { return stats::wilson(successes, reps); }
};

inline Frequency mregion_success_frequency(const HPolytope& k, double lambda, int n, std::size_t reps, Seed seed,
                                           std::optional<double> alpha = std::nullopt) {
  Frequency fr;
  for (std::size_t r = 0; r < reps; ++r) {
    fr.successes += layers_in_mregions(k, lambda, n, child_seed(seed, r), alpha).success;
    ++fr.reps;
  }
  return fr;
}

namespace detail {

// Points of a small planar set in strict convex position, returned in
// counter-clockwise order; empty when some point is not a vertex.
inline std::vector<std::vector<double>> convex_order_2d(std::vector<std::vector<double>> p) {
  const std::size_t n = p.size();
  std::sort(p.begin(), p.end());
  std::vector<std::size_t> h(2 * n);
  std::size_t m = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (m >= 2 && orient2d(p[h[m - 2]].data(), p[h[m - 1]].data(), p[i].data()) <= 0) --m;
    h[m++] = i;
  }
  for (std::size_t i = n - 1, t = m + 1; i-- > 0;) {
    while (m >= t && orient2d(p[h[m - 2]].data(), p[h[m - 1]].data(), p[i].data()) <= 0) --m;
    h[m++] = i;
  }
  if (n >= 3 && m - 1 != n) return {};
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i + 1 < m; ++i) out.push_back(p[h[i]]);
  return out;
}

// Sample of n points in convex position (as vertices of their hull).
inline bool in_convex_position(const PointSet& ps) {
  if (ps.size() <= static_cast<std::size_t>(ps.dim())) return true;
  if (ps.dim() == 2) {
    std::vector<std::vector<double>> p;
    for (std::size_t i = 0; i < ps.size(); ++i) p.emplace_back(ps.coord(i), ps.coord(i) + 2);
    return !convex_order_2d(std::move(p)).empty();
  }
  return relative_hull(ps, false).vertex_ids.size() == ps.size();
}

}  // namespace detail

// Monte Carlo frequency that n uniform points of L are in convex position.
inline Frequency convex_position_prob(const HPolytope& l, int n, std::size_t reps, Seed seed) {
  if (n < 3) throw std::invalid_argument("convex position needs n >= 3");
  Frequency fr;
  for (std::size_t r = 0; r < reps; ++r) {
    fr.successes += detail::in_convex_position(sample_binomial(l, n, child_seed(seed, r)));
    ++fr.reps;
  }
  return fr;
}

struct ConvexPositionCurve {
  std::vector<int> n;
  std::vector<double> log_p;
  std::vector<double> survival;  // conditional survival fraction at each step
};

// Sequential Monte Carlo estimate of log p(n, L) for n = 3..n_max in the plane:
// particles are configurations in convex position grown one uniform point at a
// time; the product of survival fractions estimates p, and resampled particles
// are refreshed by Metropolis moves that keep the uniform law on convex
// configurations invariant.
inline ConvexPositionCurve convex_position_smc(const HPolytope& l, int n_max, std::size_t particles, Seed seed,
                                               int sweeps = 4) {
  if (l.dim() != 2) throw std::invalid_argument("sequential convex-position estimator is planar");
  if (n_max < 3 || particles < 2) throw std::invalid_argument("need n_max >= 3 and at least two particles");
  Engine eng = make_engine(seed);
  const auto& lo = l.box_lo();
  const auto& hi = l.box_hi();
  auto draw = [&] {
    std::vector<double> x(2);
    do {
      for (int j = 0; j < 2; ++j) x[j] = lo[j] + (hi[j] - lo[j]) * detail::uniform(eng);
    } while (!l.contains(x));
    return x;
  };
  using Config = std::vector<std::vector<double>>;
  std::vector<Config> pop(particles);
  for (auto& c : pop) {
    Config raw{draw(), draw(), draw()};
    c = detail::convex_order_2d(raw);
    while (c.empty()) c = detail::convex_order_2d({draw(), draw(), draw()});
  }
  ConvexPositionCurve out;
  out.n.push_back(3);
  out.log_p.push_back(0.0);
  out.survival.push_back(1.0);
  double logp = 0.0;
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int k = 3; k < n_max; ++k) {
    std::vector<Config> alive;
    for (const auto& c : pop) {
      Config next(c);
      next.push_back(draw());
      auto ordered = detail::convex_order_2d(std::move(next));
      if (!ordered.empty()) alive.push_back(std::move(ordered));
    }
    const double frac = static_cast<double>(alive.size()) / static_cast<double>(particles);
    out.n.push_back(k + 1);
    out.survival.push_back(frac);
    if (alive.empty()) {
      for (int m = k + 1; m <= n_max; ++m) {
        if (m > k + 1) {
          out.n.push_back(m);
          out.survival.push_back(0.0);
        }
        out.log_p.push_back(-std::numeric_limits<double>::infinity());
      }
      return out;
    }
    logp += std::log(frac);
    out.log_p.push_back(logp);
    if (k + 1 == n_max) break;
    // Systematic resampling.
    std::vector<Config> fresh;
    fresh.reserve(particles);
    const double u0 = detail::uniform(eng);
    for (std::size_t i = 0; i < particles; ++i) {
      const std::size_t j = static_cast<std::size_t>((static_cast<double>(i) + u0) * alive.size() / particles);
      fresh.push_back(alive[std::min(j, alive.size() - 1)]);
    }
    pop = std::move(fresh);
    // Metropolis refresh: move one vertex within the wedge that keeps convexity.
    const int m = k + 1;
    for (auto& c : pop)
      for (int step = 0; step < sweeps * m; ++step) {
        const int i = static_cast<int>(detail::uniform(eng) * m) % m;
        const auto& a1 = c[(i + m - 1) % m];
        const auto& a2 = c[(i + m - 2) % m];
        const auto& b1 = c[(i + 1) % m];
        const auto& b2 = c[(i + 2) % m];
        const double scale = 0.5 * std::hypot(b1[0] - a1[0], b1[1] - a1[1]);
        std::vector<double> q{c[i][0] + scale * gauss(eng), c[i][1] + scale * gauss(eng)};
        if (!l.contains(q)) continue;
        if (detail::orient2d(a1.data(), q.data(), b1.data()) <= 0) continue;
        if (m > 3 && (detail::orient2d(a2.data(), a1.data(), q.data()) <= 0 ||
                      detail::orient2d(q.data(), b1.data(), b2.data()) <= 0))
          continue;
        c[i] = std::move(q);
      }
  }
  return out;
}

}  // namespace peellab
