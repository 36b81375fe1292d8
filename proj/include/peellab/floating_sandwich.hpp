#pragma once

// Floating bodies in the corner regime, the sandwich constants and the
// sandwiching event for the first n peeling layers.
//
// Corner coordinates: K is rescaled to unit volume and each vertex frame maps
// K near that vertex into the positive orthant.  A point is in the corner regime
// when some frame sends it into [0, 1/2]^d, where v(z) = (d^d/d!) prod z_i.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "peellab/errors.hpp"
#include "peellab/geom_core.hpp"
#include "peellab/peeling.hpp"
#include "peellab/polytope_model.hpp"

namespace peellab {

enum class FloatClass { Below = -1, On = 0, Above = 1 };

inline const char* to_string(FloatClass c) {
  switch (c) {
    case FloatClass::Below: return "below";
    case FloatClass::On: return "on";
    default: return "above";
  }
}

inline double factorial(int d) { return std::tgamma(d + 1.0); }

// d^d / d!
inline double corner_constant(int d) { return std::pow(static_cast<double>(d), d) / factorial(d); }

inline double v_cube_corner(const double* z, int d) {
  double p = 1.0;
  for (int i = 0; i < d; ++i) {
    if (!(z[i] > 0.0) || z[i] > 0.5)
      throw OutOfRegime("corner coordinate " + std::to_string(z[i]) + " outside (0, 1/2]");
    p *= z[i];
  }
  return corner_constant(d) * p;
}

inline double v_cube_corner(const std::vector<double>& z) { return v_cube_corner(z.data(), static_cast<int>(z.size())); }

// Cap {y >= 0 : sum y_i / z_i <= d} of the orthant cut by the tangent plane at z.
struct CornerCap {
  std::vector<double> normal;  // outward normal (1/z_i)
  double offset = 0.0;         // d: cap is normal . y <= offset
  double volume = 0.0;
};

inline CornerCap minimal_cap_cube_corner(const std::vector<double>& z) {
  const int d = static_cast<int>(z.size());
  CornerCap c;
  c.volume = v_cube_corner(z);
  for (double zi : z) c.normal.push_back(1.0 / zi);
  c.offset = d;
  return c;
}

struct FloatingParams {
  double lambda = 0.0;
  int d = 0;
  double s = 0.0;
  double T = 0.0;
  double T_star = 0.0;
  double alpha = 0.0;
  bool alpha_overridden = false;
};

inline double alpha_constant(int d) {
  return 16.0 * std::pow(2.0, -d) * std::pow(6.0 * d, 2.0 * d) * (4.0 * d * d + d - 1.0);
}

inline FloatingParams sandwich_params(double lambda, int d, std::optional<double> alpha_override = std::nullopt) {
  if (!(lambda > std::exp(std::exp(1.0)))) throw std::invalid_argument("sandwich constants need lambda > e^e");
  if (d < 2) throw std::invalid_argument("dimension must be at least 2");
  FloatingParams p;
  p.lambda = lambda;
  p.d = d;
  const double l = std::log(lambda);
  p.s = 1.0 / (lambda * std::pow(l, 4.0 * d * d + d - 1.0));
  p.alpha = alpha_override.value_or(alpha_constant(d));
  p.alpha_overridden = alpha_override.has_value();
  if (!(p.alpha > 0)) throw std::invalid_argument("alpha must be positive");
  p.T = p.alpha * std::log(l) / lambda;
  p.T_star = d * std::pow(6.0, d) * p.T;
  return p;
}

// Corner coordinates of K normalized to unit volume.
class CornerRegime {
 public:
  explicit CornerRegime(const HPolytope& k) : k_(k), frames_(all_corner_frames(k)) {
    d_ = k.dim();
    vol_ = k.volume();
    sigma_ = std::pow(vol_, -1.0 / d_);
    if (k.is_box()) {
      cube_ = true;
      const double side = k.box_hi()[0] - k.box_lo()[0];
      for (int j = 1; j < d_; ++j)
        if (std::fabs((k.box_hi()[j] - k.box_lo()[j]) - side) > 1e-12 * side) cube_ = false;
    }
  }

  int dim() const { return d_; }
  double volume() const { return vol_; }
  const HPolytope& polytope() const { return k_; }
  const std::vector<CornerFrame>& frames() const { return frames_; }
  // Corner boxes tile K exactly when K is an axis-aligned cube.
  bool tiles() const { return cube_; }

  std::vector<double> normalized(std::size_t f, const double* x) const {
    std::vector<double> y = frames_[f].apply(x);
    for (double& c : y) c *= sigma_;
    return y;
  }

  std::vector<double> denormalized(std::size_t f, const std::vector<double>& y) const {
    std::vector<double> t(y);
    for (double& c : t) c /= sigma_;
    return frames_[f].unapply(t);
  }

  // v(x) in the volume units of K; nullopt outside the corner regime.
  std::optional<double> try_v(const double* x) const {
    std::optional<double> best;
    for (std::size_t f = 0; f < frames_.size(); ++f) {
      std::vector<double> y = normalized(f, x);
      bool in = true;
      double p = 1.0;
      for (double& c : y) {
        if (c < -kSlack || c > 0.5 + kSlack) {
          in = false;
          break;
        }
        c = std::clamp(c, 0.0, 0.5);
        p *= c;
      }
      if (!in) continue;
      const double v = corner_constant(d_) * p * vol_;
      if (!best || v < *best) best = v;
    }
    return best;
  }

  double v(const double* x) const {
    auto r = try_v(x);
    if (!r) throw RegimeViolation("point maps outside every corner box");
    return *r;
  }

  // Maximum of u.x over the corner piece {y in [0,1/2]^d : v >= t} of frame f.
  double max_linear_on_piece(std::size_t f, const std::vector<double>& u, double t) const {
    const CornerFrame& cf = frames_[f];
    std::vector<double> w(d_, 0.0);
    double base = 0.0;
    for (int j = 0; j < d_; ++j) {
      for (int i = 0; i < d_; ++i) w[j] += u[i] * cf.inverse[i * d_ + j];
      w[j] /= sigma_;
    }
    for (int i = 0; i < d_; ++i)
      for (int j = 0; j < d_; ++j) base -= u[i] * cf.inverse[i * d_ + j] * cf.offset[j];
    // prod y >= c with c the normalized level.
    const double c = t / vol_ / corner_constant(d_);
    if (c > std::pow(0.5, d_)) return -std::numeric_limits<double>::infinity();
    auto y_of = [&](double mu, int i) { return w[i] >= 0 ? 0.5 : std::min(0.5, mu / -w[i]); };
    auto logprod = [&](double mu) {
      double s = 0.0;
      for (int i = 0; i < d_; ++i) s += std::log(y_of(mu, i));
      return s;
    };
    const double target = std::log(c);
    // Smallest multiplier whose KKT point meets the level (log-scale bisection).
    double lo = -700.0, hi = 700.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (logprod(std::exp(mid)) < target ? lo : hi) = mid;
    }
    const double mu = std::exp(hi);
    double val = base;
    for (int i = 0; i < d_; ++i) val += w[i] * y_of(mu, i);
    return val;
  }

 private:
  static constexpr double kSlack = 1e-12;
  HPolytope k_;
  std::vector<CornerFrame> frames_;
  int d_ = 0;
  double vol_ = 1.0;
  double sigma_ = 1.0;
  bool cube_ = false;
};

inline FloatClass classify(double v, double t) {
  if (std::fabs(v - t) <= 1e-10 * std::max(std::fabs(t), std::numeric_limits<double>::min())) return FloatClass::On;
  return v > t ? FloatClass::Above : FloatClass::Below;
}

// Position of z relative to the floating body K(v >= t).
inline FloatClass floating_membership(const CornerRegime& reg, const double* z, double t) {
  return classify(reg.v(z), t);
}

inline FloatClass floating_membership(const HPolytope& k, const std::vector<double>& z, double t) {
  return floating_membership(CornerRegime(k), z.data(), t);
}

struct SandwichReport {
  int n = 0;
  bool event = false;
  // Points labeled <= n below the s-level or not below the T*-level.
  std::size_t outer_violations = 0;
  std::size_t inner_violations = 0;
  // Points of the sample with s <= v <= T* (corner regime only).
  std::size_t shell_point_count = 0;
  // Whether K(v >= T*) lies inside conv_n as a region; only decidable when the
  // corner boxes tile K.
  std::optional<bool> floating_body_inside;
  bool strict_event = false;
};

namespace detail {

inline bool floating_body_inside_hull(const CornerRegime& reg, const PointSet& ps, const HullComplex& h, double t) {
  if (h.degenerate || h.faces.empty()) return false;
  const int d = ps.dim();
  std::vector<std::pair<PointId, std::size_t>> by_id;
  by_id.reserve(ps.size());
  for (std::size_t i = 0; i < ps.size(); ++i) by_id.emplace_back(ps.id(i), i);
  std::sort(by_id.begin(), by_id.end());
  auto coord_of = [&](PointId id) {
    auto it = std::lower_bound(by_id.begin(), by_id.end(), std::make_pair(id, std::size_t{0}));
    return ps.coord(it->second);
  };
  for (std::size_t f = 0; f < h.faces[d - 1].size(); ++f) {
    const auto& u = h.facet_normals[f];
    const double* p = coord_of(h.faces[d - 1][f][0]);
    double c = 0.0;
    for (int j = 0; j < d; ++j) c += u[j] * p[j];
    for (std::size_t fr = 0; fr < reg.frames().size(); ++fr)
      if (reg.max_linear_on_piece(fr, u, t) > c + 1e-12 * (1.0 + std::fabs(c))) return false;
  }
  return true;
}

}  // namespace detail

inline SandwichReport sandwich_event(const PointSet& ps, const PeelingResult& pr, const HPolytope& k,
                                     const FloatingParams& p, int n) {
  if (n < 1 || n > pr.num_layers())
    throw LayerMissing("sandwich check needs " + std::to_string(n) + " layers, have " +
                       std::to_string(pr.num_layers()));
  const CornerRegime reg(k);
  SandwichReport r;
  r.n = n;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const int l = pr.label_of(ps.id(i));
    const bool outer = l >= 1 && l <= n;
    std::optional<double> v = reg.try_v(ps.coord(i));
    if (!v) {
      if (outer) throw RegimeViolation("layer point maps outside every corner box");
      continue;
    }
    const FloatClass cs = classify(*v, p.s);
    const FloatClass ct = classify(*v, p.T_star);
    if (cs != FloatClass::Below && ct != FloatClass::Above) ++r.shell_point_count;
    if (outer) {
      if (cs == FloatClass::Below) ++r.outer_violations;
      if (ct != FloatClass::Below) ++r.inner_violations;
    }
  }
  r.event = r.outer_violations == 0 && r.inner_violations == 0;
  if (reg.tiles() && static_cast<int>(pr.layers.size()) >= n)
    r.floating_body_inside = detail::floating_body_inside_hull(reg, ps, pr.layers[n - 1], p.T_star);
  r.strict_event = r.event && r.floating_body_inside.value_or(false);
  return r;
}

}  // namespace peellab
