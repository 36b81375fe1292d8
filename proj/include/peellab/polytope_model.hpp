#pragma once

// Bounded H-polytopes, vertex enumeration, simplicity, corner frames and towers.

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "peellab/detail/lp.hpp"
#include "peellab/errors.hpp"
#include "peellab/geom_core.hpp"

namespace peellab {

struct Halfspace {
  std::vector<double> a;  // unit outward normal
  double b = 0.0;         // a.x <= b
};

namespace detail {

// Solves the square system m x = r by partial pivoting; false when singular.
inline bool solve_linear(std::vector<double> m, std::vector<double> r, int d, std::vector<double>& x,
                         double tol = 1e-12) {
  for (int c = 0; c < d; ++c) {
    int piv = c;
    for (int i = c + 1; i < d; ++i)
      if (std::fabs(m[i * d + c]) > std::fabs(m[piv * d + c])) piv = i;
    if (std::fabs(m[piv * d + c]) < tol) return false;
    if (piv != c) {
      for (int j = 0; j < d; ++j) std::swap(m[piv * d + j], m[c * d + j]);
      std::swap(r[piv], r[c]);
    }
    for (int i = c + 1; i < d; ++i) {
      const double f = m[i * d + c] / m[c * d + c];
      if (f == 0.0) continue;
      for (int j = c; j < d; ++j) m[i * d + j] -= f * m[c * d + j];
      r[i] -= f * r[c];
    }
  }
  x.assign(d, 0.0);
  for (int i = d - 1; i >= 0; --i) {
    double s = r[i];
    for (int j = i + 1; j < d; ++j) s -= m[i * d + j] * x[j];
    x[i] = s / m[i * d + i];
  }
  return true;
}

inline bool invert_matrix(const std::vector<double>& m, int d, std::vector<double>& inv) {
  inv.assign(static_cast<std::size_t>(d) * d, 0.0);
  for (int c = 0; c < d; ++c) {
    std::vector<double> e(d, 0.0), col;
    e[c] = 1.0;
    if (!solve_linear(m, e, d, col)) return false;
    for (int i = 0; i < d; ++i) inv[i * d + c] = col[i];
  }
  return true;
}

inline int numeric_rank(std::vector<std::vector<double>> rows, double tol = 1e-10) {
  if (rows.empty()) return 0;
  const int cols = static_cast<int>(rows[0].size());
  int rank = 0;
  for (int c = 0; c < cols && rank < static_cast<int>(rows.size()); ++c) {
    int piv = rank;
    for (int i = rank; i < static_cast<int>(rows.size()); ++i)
      if (std::fabs(rows[i][c]) > std::fabs(rows[piv][c])) piv = i;
    if (std::fabs(rows[piv][c]) < tol) continue;
    std::swap(rows[piv], rows[rank]);
    for (int i = rank + 1; i < static_cast<int>(rows.size()); ++i) {
      const double f = rows[i][c] / rows[rank][c];
      for (int j = c; j < cols; ++j) rows[i][j] -= f * rows[rank][j];
    }
    ++rank;
  }
  return rank;
}

inline double det_matrix(std::vector<double> m, int d) {
  double det = 1.0;
  for (int c = 0; c < d; ++c) {
    int piv = c;
    for (int i = c + 1; i < d; ++i)
      if (std::fabs(m[i * d + c]) > std::fabs(m[piv * d + c])) piv = i;
    if (m[piv * d + c] == 0.0) return 0.0;
    if (piv != c) {
      for (int j = 0; j < d; ++j) std::swap(m[piv * d + j], m[c * d + j]);
      det = -det;
    }
    det *= m[c * d + c];
    for (int i = c + 1; i < d; ++i) {
      const double f = m[i * d + c] / m[c * d + c];
      for (int j = c; j < d; ++j) m[i * d + j] -= f * m[c * d + j];
    }
  }
  return det;
}

}  // namespace detail

class HPolytope {
 public:
  static constexpr double kTightTol = 1e-9;

  HPolytope() = default;

  HPolytope(int dim, std::vector<Halfspace> hs) : dim_(dim) {
    if (dim < 1) throw std::invalid_argument("polytope dimension must be positive");
    for (auto& h : hs) {
      if (static_cast<int>(h.a.size()) != dim) throw std::invalid_argument("halfspace dimension mismatch");
      double n = 0.0;
      for (double c : h.a) {
        if (!std::isfinite(c)) throw std::invalid_argument("non-finite halfspace normal");
        n += c * c;
      }
      n = std::sqrt(n);
      if (n == 0.0 || !std::isfinite(h.b)) throw std::invalid_argument("degenerate halfspace");
      for (double& c : h.a) c /= n;
      h.b /= n;
    }
    std::sort(hs.begin(), hs.end(), [](const Halfspace& x, const Halfspace& y) {
      if (x.a != y.a) return x.a < y.a;
      return x.b < y.b;
    });
    // Parallel duplicates: keep the tightest.
    std::vector<Halfspace> uniq;
    for (auto& h : hs) {
      if (!uniq.empty()) {
        double diff = 0.0;
        for (int j = 0; j < dim; ++j) diff = std::max(diff, std::fabs(uniq.back().a[j] - h.a[j]));
        if (diff < 1e-12) {
          uniq.back().b = std::min(uniq.back().b, h.b);
          continue;
        }
      }
      uniq.push_back(h);
    }
    hs_ = std::move(uniq);
    check_bounded();
    enumerate_vertices();
    drop_redundant();
    compute_volume();
  }

  int dim() const { return dim_; }
  const std::vector<Halfspace>& halfspaces() const { return hs_; }
  const std::vector<std::vector<double>>& vertices() const { return verts_; }
  double volume() const { return volume_; }
  const std::vector<double>& box_lo() const { return lo_; }
  const std::vector<double>& box_hi() const { return hi_; }

  bool contains(const double* x, double tol = 0.0) const {
    for (const auto& h : hs_) {
      double s = 0.0;
      for (int j = 0; j < dim_; ++j) s += h.a[j] * x[j];
      if (s > h.b + tol) return false;
    }
    return true;
  }
  bool contains(const std::vector<double>& x, double tol = 0.0) const { return contains(x.data(), tol); }

  // Halfspace indices tight at vertex i, in canonical order.
  std::vector<int> facets_at(std::size_t i) const {
    std::vector<int> out;
    const auto& v = verts_[i];
    for (int k = 0; k < static_cast<int>(hs_.size()); ++k) {
      double s = 0.0;
      for (int j = 0; j < dim_; ++j) s += hs_[k].a[j] * v[j];
      if (std::fabs(s - hs_[k].b) <= kTightTol * (1.0 + std::fabs(hs_[k].b))) out.push_back(k);
    }
    return out;
  }

  bool is_simple() const {
    for (std::size_t i = 0; i < verts_.size(); ++i)
      if (static_cast<int>(facets_at(i).size()) != dim_) return false;
    return true;
  }

  // Axis-aligned box [lo, hi] detection (2d facets with coordinate normals).
  bool is_box() const {
    if (static_cast<int>(hs_.size()) != 2 * dim_) return false;
    for (const auto& h : hs_) {
      int nz = 0;
      for (double c : h.a)
        if (c != 0.0) ++nz;
      if (nz != 1) return false;
    }
    return true;
  }

  static HPolytope cube(int d) { return scaled_cube(d, 1.0); }

  static HPolytope scaled_cube(int d, double side) {
    if (!(side > 0)) throw std::invalid_argument("cube side must be positive");
    std::vector<Halfspace> hs;
    for (int j = 0; j < d; ++j) {
      std::vector<double> e(d, 0.0);
      e[j] = 1.0;
      hs.push_back({e, side});
      e[j] = -1.0;
      hs.push_back({e, 0.0});
    }
    return HPolytope(d, hs);
  }

  // Standard simplex conv{0, e_1, ..., e_d}.
  static HPolytope simplex(int d) {
    std::vector<Halfspace> hs;
    for (int j = 0; j < d; ++j) {
      std::vector<double> e(d, 0.0);
      e[j] = -1.0;
      hs.push_back({e, 0.0});
    }
    hs.push_back({std::vector<double>(d, 1.0), 1.0});
    return HPolytope(d, hs);
  }

  static HPolytope from_json(const nlohmann::json& j) {
    if (!j.contains("dim") || !j["dim"].is_number_integer()) throw SchemaError("dim", "integer required");
    const int d = j["dim"].get<int>();
    if (!j.contains("halfspaces") || !j["halfspaces"].is_array()) throw SchemaError("halfspaces", "array required");
    std::vector<Halfspace> hs;
    for (std::size_t i = 0; i < j["halfspaces"].size(); ++i) {
      const auto& e = j["halfspaces"][i];
      const std::string key = "halfspaces[" + std::to_string(i) + "]";
      if (!e.is_array() || e.size() != 2 || !e[0].is_array() || !e[1].is_number())
        throw SchemaError(key, "expected [[a...], b]");
      Halfspace h;
      for (const auto& c : e[0]) {
        if (!c.is_number()) throw SchemaError(key, "non-numeric normal entry");
        h.a.push_back(c.get<double>());
      }
      if (static_cast<int>(h.a.size()) != d) throw SchemaError(key, "normal length differs from dim");
      h.b = e[1].get<double>();
      hs.push_back(std::move(h));
    }
    return HPolytope(d, hs);
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["dim"] = dim_;
    j["halfspaces"] = nlohmann::json::array();
    for (const auto& h : hs_) j["halfspaces"].push_back({h.a, h.b});
    return j;
  }

  // Built-in names: "cube", "simplex", "scaled-cube" (parameter = side length).
  static HPolytope builtin(const std::string& name, int d, double param = 1.0) {
    if (name == "cube") return cube(d);
    if (name == "simplex") return simplex(d);
    if (name == "scaled-cube") return scaled_cube(d, param);
    throw SchemaError("polytope", "unknown built-in '" + name + "'");
  }

 private:
  void check_bounded() const {
    const int m = static_cast<int>(hs_.size());
    std::vector<std::vector<double>> rows;
    for (const auto& h : hs_) rows.push_back(h.a);
    if (m <= dim_ || detail::numeric_rank(rows) < dim_) throw Unbounded("normals do not span the space");
    // Recession cone is trivial iff some strictly positive mu has sum mu_j a_j = 0.
    lp::Matrix aeq(dim_, std::vector<double>(m, 0.0));
    std::vector<double> beq(dim_, 0.0);
    for (int j = 0; j < dim_; ++j) {
      for (int k = 0; k < m; ++k) {
        aeq[j][k] = hs_[k].a[j];
        beq[j] -= hs_[k].a[j];
      }
    }
    if (!lp::feasible(m, {}, {}, aeq, beq)) throw Unbounded("recession cone is nontrivial");
  }

  void enumerate_vertices() {
    const int m = static_cast<int>(hs_.size());
    std::vector<int> idx(dim_);
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<double> mat(static_cast<std::size_t>(dim_) * dim_), rhs(dim_), x;
    verts_.clear();
    if (m < dim_) return;
    while (true) {
      for (int i = 0; i < dim_; ++i) {
        for (int j = 0; j < dim_; ++j) mat[i * dim_ + j] = hs_[idx[i]].a[j];
        rhs[i] = hs_[idx[i]].b;
      }
      if (detail::solve_linear(mat, rhs, dim_, x, 1e-12) && contains(x, kTightTol * (1.0 + max_abs_b()))) {
        bool dup = false;
        for (const auto& v : verts_) {
          double diff = 0.0;
          for (int j = 0; j < dim_; ++j) diff = std::max(diff, std::fabs(v[j] - x[j]));
          if (diff < 1e-9) {
            dup = true;
            break;
          }
        }
        if (!dup) verts_.push_back(x);
      }
      int i = dim_ - 1;
      while (i >= 0 && idx[i] == m - dim_ + i) --i;
      if (i < 0) break;
      ++idx[i];
      for (int j = i + 1; j < dim_; ++j) idx[j] = idx[j - 1] + 1;
    }
    std::sort(verts_.begin(), verts_.end());
    if (static_cast<int>(verts_.size()) <= dim_) throw DegenerateInput("polytope has empty interior", -1);
  }

  double max_abs_b() const {
    double s = 0.0;
    for (const auto& h : hs_) s = std::max(s, std::fabs(h.b));
    return s;
  }

  void drop_redundant() {
    std::vector<Halfspace> keep;
    for (const auto& h : hs_) {
      std::vector<std::vector<double>> on;
      for (const auto& v : verts_) {
        double s = 0.0;
        for (int j = 0; j < dim_; ++j) s += h.a[j] * v[j];
        if (std::fabs(s - h.b) <= kTightTol * (1.0 + std::fabs(h.b))) on.push_back(v);
      }
      if (static_cast<int>(on.size()) < dim_) continue;
      std::vector<std::vector<double>> diffs;
      for (std::size_t i = 1; i < on.size(); ++i) {
        std::vector<double> w(dim_);
        for (int j = 0; j < dim_; ++j) w[j] = on[i][j] - on[0][j];
        diffs.push_back(std::move(w));
      }
      if (detail::numeric_rank(diffs, 1e-9) == dim_ - 1) keep.push_back(h);
    }
    hs_ = std::move(keep);
  }

  void compute_volume() {
    PointSet ps(dim_);
    for (std::size_t i = 0; i < verts_.size(); ++i) ps.add(verts_[i], static_cast<PointId>(i));
    volume_ = dim_ == 1 ? 0.0 : hull_volume(convex_hull(ps));
    if (dim_ == 1) volume_ = verts_.back()[0] - verts_.front()[0];
    lo_.assign(dim_, 0.0);
    hi_.assign(dim_, 0.0);
    for (int j = 0; j < dim_; ++j) {
      lo_[j] = hi_[j] = verts_[0][j];
      for (const auto& v : verts_) {
        lo_[j] = std::min(lo_[j], v[j]);
        hi_[j] = std::max(hi_[j], v[j]);
      }
    }
  }

  int dim_ = 0;
  std::vector<Halfspace> hs_;
  std::vector<std::vector<double>> verts_;
  double volume_ = 0.0;
  std::vector<double> lo_, hi_;
};

inline std::pair<std::vector<std::vector<double>>, bool> vertices_and_simplicity(const HPolytope& k) {
  return {k.vertices(), k.is_simple()};
}

// Affine map y = L x + c sending vertex V to 0 and the facets through V to the
// coordinate hyperplanes; y_k is the scaled slack of the k-th incident facet.
struct CornerFrame {
  int dim = 0;
  std::size_t vertex_index = 0;
  std::vector<double> vertex;
  std::vector<int> facets;      // incident halfspace indices (axis order)
  std::vector<double> linear;   // row-major d x d
  std::vector<double> offset;
  std::vector<double> inverse;  // row-major inverse of `linear`

  std::vector<double> apply(const double* x) const {
    std::vector<double> y(offset);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) y[i] += linear[i * dim + j] * x[j];
    return y;
  }
  std::vector<double> apply(const std::vector<double>& x) const { return apply(x.data()); }

  std::vector<double> unapply(const double* y) const {
    std::vector<double> t(dim);
    for (int i = 0; i < dim; ++i) t[i] = y[i] - offset[i];
    std::vector<double> x(dim, 0.0);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) x[i] += inverse[i * dim + j] * t[j];
    return x;
  }
  std::vector<double> unapply(const std::vector<double>& y) const { return unapply(y.data()); }

  double det() const { return detail::det_matrix(linear, dim); }
};

inline CornerFrame corner_frame(const HPolytope& k, std::size_t i) {
  const int d = k.dim();
  if (i >= k.vertices().size()) throw std::out_of_range("vertex index out of range");
  const std::vector<int> fac = k.facets_at(i);
  if (static_cast<int>(fac.size()) != d) throw NotSimple("vertex lies on " + std::to_string(fac.size()) + " facets");
  CornerFrame cf;
  cf.dim = d;
  cf.vertex_index = i;
  cf.vertex = k.vertices()[i];
  cf.facets = fac;
  std::vector<double> a(static_cast<std::size_t>(d) * d);
  for (int r = 0; r < d; ++r)
    for (int j = 0; j < d; ++j) a[r * d + j] = k.halfspaces()[fac[r]].a[j];
  const double s = std::pow(std::fabs(detail::det_matrix(a, d)), -1.0 / d);
  cf.linear.resize(a.size());
  for (std::size_t t = 0; t < a.size(); ++t) cf.linear[t] = -s * a[t];
  cf.offset.assign(d, 0.0);
  for (int r = 0; r < d; ++r) cf.offset[r] = s * k.halfspaces()[fac[r]].b;
  if (!detail::invert_matrix(cf.linear, d, cf.inverse)) throw NotSimple("singular corner");
  return cf;
}

inline std::vector<CornerFrame> all_corner_frames(const HPolytope& k) {
  std::vector<CornerFrame> out;
  for (std::size_t i = 0; i < k.vertices().size(); ++i) out.push_back(corner_frame(k, i));
  return out;
}

// Number of flags F_0 < F_1 < ... < F_{d-1} in the face lattice.
inline long long count_towers(const HPolytope& k) {
  const int d = k.dim();
  PointSet ps(d);
  for (std::size_t i = 0; i < k.vertices().size(); ++i) ps.add(k.vertices()[i], static_cast<PointId>(i));
  const HullComplex h = convex_hull(ps);
  std::vector<long long> prev(h.faces[0].size(), 1);
  for (int level = 1; level < d; ++level) {
    std::vector<long long> cur(h.faces[level].size(), 0);
    for (std::size_t a = 0; a < h.faces[level].size(); ++a) {
      const auto& big = h.faces[level][a];
      for (std::size_t b = 0; b < h.faces[level - 1].size(); ++b) {
        const auto& small = h.faces[level - 1][b];
        if (std::includes(big.begin(), big.end(), small.begin(), small.end())) cur[a] += prev[b];
      }
    }
    prev = std::move(cur);
  }
  return std::accumulate(prev.begin(), prev.end(), 0LL);
}

}  // namespace peellab
