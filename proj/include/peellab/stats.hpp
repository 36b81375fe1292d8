#pragma once

// Descriptive statistics, goodness-of-fit distances and small regressions.

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace peellab::stats {

inline double mean(const std::vector<double>& x) {
  if (x.empty()) return 0.0;
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

// Unbiased sample variance (0 for fewer than two values).
inline double variance(const std::vector<double>& x) {
  if (x.size() < 2) return 0.0;
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

inline double std_error(const std::vector<double>& x) {
  return x.empty() ? 0.0 : std::sqrt(variance(x) / static_cast<double>(x.size()));
}

inline double median(std::vector<double> x) {
  if (x.empty()) return 0.0;
  std::sort(x.begin(), x.end());
  const std::size_t n = x.size();
  return n % 2 ? x[n / 2] : 0.5 * (x[n / 2 - 1] + x[n / 2]);
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// sup |F_n - F| for a continuous reference CDF; ties handled at the jumps.
inline double ks_distance(std::vector<double> x, const std::function<double(double)>& cdf) {
  if (x.empty()) return 0.0;
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size();) {
    std::size_t j = i;
    while (j < x.size() && x[j] == x[i]) ++j;
    const double f = cdf(x[i]);
    d = std::max(d, std::fabs(f - static_cast<double>(i) / n));
    d = std::max(d, std::fabs(static_cast<double>(j) / n - f));
    i = j;
  }
  return d;
}

// KS distance of the standardized sample against N(0,1).
inline double ks_standard_normal(const std::vector<double>& x) {
  const double m = mean(x);
  const double sd = std::sqrt(variance(x));
  if (!(sd > 0.0)) return 1.0;
  std::vector<double> z(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) z[i] = (x[i] - m) / sd;
  return ks_distance(std::move(z), normal_cdf);
}

inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

// Asymptotic Kolmogorov tail probability Q(t) = 2 sum (-1)^{k-1} exp(-2 k^2 t^2).
inline double kolmogorov_q(double t) {
  if (t < 0.2) return 1.0;
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * t * t);
    s += (k % 2 ? term : -term);
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

// p-value for a KS distance with effective sample size n (n = na*nb/(na+nb) for two samples).
inline double ks_pvalue(double d, double n) {
  const double sn = std::sqrt(n);
  return kolmogorov_q((sn + 0.12 + 0.11 / sn) * d);
}

inline double chi_square_pvalue(double stat, double dof) {
  boost::math::chi_squared dist(dof);
  return boost::math::cdf(boost::math::complement(dist, stat));
}

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

inline Interval wilson(std::size_t successes, std::size_t n, double z = 1.959963984540054) {
  if (n == 0) return {0.0, 1.0};
  const double p = static_cast<double>(successes) / static_cast<double>(n);
  const double nn = static_cast<double>(n);
  const double denom = 1.0 + z * z / nn;
  const double center = (p + z * z / (2 * nn)) / denom;
  const double half = z * std::sqrt(p * (1 - p) / nn + z * z / (4 * nn * nn)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

inline double correlation(const std::vector<double>& x, const std::vector<double>& y) {
  const double mx = mean(x), my = mean(y);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return (sxx > 0 && syy > 0) ? sxy / std::sqrt(sxx * syy) : 0.0;
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("line fit needs >= 2 points");
  const double mx = mean(x), my = mean(y);
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0) throw std::invalid_argument("degenerate abscissae");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  return f;
}

// Ordinary least squares y ~ X b via normal equations (small problems).
inline std::vector<double> least_squares(const std::vector<std::vector<double>>& rows, const std::vector<double>& y) {
  const std::size_t p = rows.at(0).size();
  std::vector<double> a(p * p, 0.0), r(p, 0.0);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < p; ++j) {
      r[j] += rows[i][j] * y[i];
      for (std::size_t k = 0; k < p; ++k) a[j * p + k] += rows[i][j] * rows[i][k];
    }
  // Gaussian elimination with partial pivoting.
  for (std::size_t c = 0; c < p; ++c) {
    std::size_t piv = c;
    for (std::size_t i = c + 1; i < p; ++i)
      if (std::fabs(a[i * p + c]) > std::fabs(a[piv * p + c])) piv = i;
    if (a[piv * p + c] == 0.0) throw std::invalid_argument("singular design");
    for (std::size_t j = 0; j < p; ++j) std::swap(a[c * p + j], a[piv * p + j]);
    std::swap(r[c], r[piv]);
    for (std::size_t i = c + 1; i < p; ++i) {
      const double f = a[i * p + c] / a[c * p + c];
      for (std::size_t j = c; j < p; ++j) a[i * p + j] -= f * a[c * p + j];
      r[i] -= f * r[c];
    }
  }
  std::vector<double> b(p);
  for (std::size_t i = p; i-- > 0;) {
    double s = r[i];
    for (std::size_t j = i + 1; j < p; ++j) s -= a[i * p + j] * b[j];
    b[i] = s / a[i * p + i];
  }
  return b;
}

}  // namespace peellab::stats
