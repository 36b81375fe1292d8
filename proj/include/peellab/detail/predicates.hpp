#pragma once

// Filtered determinant signs with an exact integer fallback.

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

namespace peellab::detail {

using Rational = boost::multiprecision::cpp_rational;

inline constexpr double kUnitRoundoff = std::numeric_limits<double>::epsilon() * 0.5;

inline double filter_constant(int k) { return 4.0 * (k + 1) * (k + 1) * kUnitRoundoff; }

// Sign of the determinant of a square rational matrix (row-major, k x k).
inline int exact_det_sign(std::vector<Rational> m, int k) {
  int sign = 1;
  for (int col = 0; col < k; ++col) {
    int piv = -1;
    for (int r = col; r < k; ++r) {
      if (m[r * k + col] != 0) { piv = r; break; }
    }
    if (piv < 0) return 0;
    if (piv != col) {
      for (int c = 0; c < k; ++c) std::swap(m[piv * k + c], m[col * k + c]);
      sign = -sign;
    }
    const Rational& p = m[col * k + col];
    if (p < 0) sign = -sign;
    for (int r = col + 1; r < k; ++r) {
      if (m[r * k + col] == 0) continue;
      Rational f = m[r * k + col] / p;
      for (int c = col; c < k; ++c) m[r * k + c] -= f * m[col * k + c];
    }
  }
  return sign;
}

using BigInt = boost::multiprecision::cpp_int;

// Sign of the determinant of a square integer matrix (row-major, k x k), by
// fraction-free (Bareiss) elimination.
inline int exact_det_sign(std::vector<BigInt> m, int k) {
  int sign = 1;
  BigInt prev = 1;
  for (int col = 0; col < k; ++col) {
    int piv = -1;
    for (int r = col; r < k; ++r) {
      if (m[r * k + col] != 0) { piv = r; break; }
    }
    if (piv < 0) return 0;
    if (piv != col) {
      for (int c = 0; c < k; ++c) std::swap(m[piv * k + c], m[col * k + c]);
      sign = -sign;
    }
    for (int r = col + 1; r < k; ++r) {
      for (int c = col + 1; c < k; ++c)
        m[r * k + c] = (m[r * k + c] * m[col * k + col] - m[r * k + col] * m[col * k + c]) / prev;
      m[r * k + col] = 0;
    }
    prev = m[col * k + col];
  }
  return m[(k - 1) * k + (k - 1)] < 0 ? -sign : sign;
}

// Exact sign of det[p_{i+1}[c_j] - p_0[c_j]] via integers on a common binary scale.
inline int exact_diff_det_sign(const std::vector<const double*>& pts, const std::vector<int>& coords) {
  const int k = static_cast<int>(coords.size());
  int emin = std::numeric_limits<int>::max();
  for (int i = 0; i <= k; ++i)
    for (int c : coords) {
      const double v = pts[i][c];
      if (v == 0.0) continue;
      int e = 0;
      std::frexp(v, &e);
      emin = std::min(emin, e - 53);
    }
  if (emin == std::numeric_limits<int>::max()) return 0;
  auto scaled = [&](double v) {
    if (v == 0.0) return BigInt(0);
    int e = 0;
    const double mant = std::frexp(v, &e);
    BigInt r(static_cast<std::int64_t>(std::ldexp(mant, 53)));
    return BigInt(r << (e - 53 - emin));
  };
  std::vector<BigInt> m(static_cast<std::size_t>(k) * k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) m[i * k + j] = scaled(pts[i + 1][coords[j]]) - scaled(pts[0][coords[j]]);
  return exact_det_sign(std::move(m), k);
}

// Determinant and permanent-of-absolute-values of every r x r column minor of an
// r x c matrix, by dynamic programming over column subsets.  Entry `mask` of the
// returned vectors holds values for the column subset `mask` (popcount r).
struct MinorTable {
  std::vector<double> det;
  std::vector<double> perm;
};

inline MinorTable minor_table(const double* rows, int r, int c) {
  const std::size_t n = std::size_t{1} << c;
  MinorTable t{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  t.det[0] = 1.0;
  t.perm[0] = 1.0;
  for (std::size_t s = 1; s < n; ++s) {
    const int size = __builtin_popcountll(s);
    if (size > r) continue;
    const double* row = rows + static_cast<std::size_t>(size - 1) * c;
    double d = 0.0, p = 0.0;
    int idx = 0;
    for (int col = 0; col < c; ++col) {
      if (!(s & (std::size_t{1} << col))) continue;
      const std::size_t rest = s & ~(std::size_t{1} << col);
      const double a = row[col];
      const double term = a * t.det[rest];
      d += (((size - 1 + idx) & 1) ? -term : term);
      p += std::fabs(a) * t.perm[rest];
      ++idx;
    }
    t.det[s] = d;
    t.perm[s] = p;
  }
  return t;
}

// Sign of det[p_1 - p_0, ..., p_k - p_0] restricted to the coordinate list `coords`
// (k entries).  `pts` holds k+1 pointers into coordinate arrays.
inline int sign_det_diff(const std::vector<const double*>& pts, const std::vector<int>& coords) {
  const int k = static_cast<int>(coords.size());
  if (k == 0) return 1;
  std::vector<double> m(static_cast<std::size_t>(k) * k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) m[i * k + j] = pts[i + 1][coords[j]] - pts[0][coords[j]];
  const MinorTable t = minor_table(m.data(), k, k);
  const std::size_t full = (std::size_t{1} << k) - 1;
  const double det = t.det[full];
  const double bound = filter_constant(k) * t.perm[full];
  if (det > bound) return 1;
  if (det < -bound) return -1;
  return exact_diff_det_sign(pts, coords);
}

inline int sign_det_diff(const std::vector<const double*>& pts, int dim) {
  std::vector<int> coords(dim);
  for (int i = 0; i < dim; ++i) coords[i] = i;
  return sign_det_diff(pts, coords);
}

// Oriented hyperplane through d points of R^d.  side(q) is the sign of
// det[v_1 - v_0, ..., v_{d-1} - v_0, q - v_0].
class PlanePredicate {
 public:
  PlanePredicate() = default;

  PlanePredicate(const std::vector<const double*>& verts, int dim) : dim_(dim), verts_(verts) {
    const int r = dim - 1;
    std::vector<double> w(static_cast<std::size_t>(r) * dim);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < dim; ++j) w[i * dim + j] = verts[i + 1][j] - verts[0][j];
    const MinorTable t = minor_table(w.data(), r, dim);
    cof_.resize(dim);
    perm_.resize(dim);
    const std::size_t full = (std::size_t{1} << dim) - 1;
    for (int j = 0; j < dim; ++j) {
      const std::size_t s = full & ~(std::size_t{1} << j);
      cof_[j] = (((r + j) & 1) ? -t.det[s] : t.det[s]);
      perm_[j] = t.perm[s];
    }
    bound_ = filter_constant(dim);
  }

  // Unnormalized signed distance, float only.
  double value(const double* q) const {
    double s = 0.0;
    for (int j = 0; j < dim_; ++j) s += (q[j] - verts_[0][j]) * cof_[j];
    return s;
  }

  int side(const double* q) const {
    double s = 0.0, b = 0.0;
    for (int j = 0; j < dim_; ++j) {
      const double dq = q[j] - verts_[0][j];
      s += dq * cof_[j];
      b += std::fabs(dq) * perm_[j];
    }
    b *= bound_;
    if (s > b) return 1;
    if (s < -b) return -1;
    return exact_side(q);
  }

  int exact_side(const double* q) const {
    std::vector<const double*> pts(verts_);
    pts.push_back(q);
    std::vector<int> coords(dim_);
    for (int j = 0; j < dim_; ++j) coords[j] = j;
    return exact_diff_det_sign(pts, coords);
  }

  const std::vector<double>& cofactors() const { return cof_; }

 private:
  int dim_ = 0;
  std::vector<const double*> verts_;
  std::vector<double> cof_;
  std::vector<double> perm_;
  double bound_ = 0.0;
};

}  // namespace peellab::detail
