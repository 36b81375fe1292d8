#pragma once

// Small dense two-phase simplex with Bland's rule.  Intended for problems with
// at most a few hundred rows and columns.

#include <cmath>
#include <cstddef>
#include <vector>

namespace peellab::lp {

enum class Status { Optimal, Infeasible, Unbounded };

struct Result {
  Status status = Status::Infeasible;
  std::vector<double> x;
  double value = 0.0;
};

using Matrix = std::vector<std::vector<double>>;

namespace detail {

class Tableau {
 public:
  Tableau(int rows, int cols) : m_(rows), n_(cols), a_(static_cast<std::size_t>(rows + 1) * (cols + 1), 0.0), basis_(rows, -1) {}

  double& at(int i, int j) { return a_[static_cast<std::size_t>(i) * (n_ + 1) + j]; }
  double at(int i, int j) const { return a_[static_cast<std::size_t>(i) * (n_ + 1) + j]; }
  double& rhs(int i) { return at(i, n_); }
  double& cost(int j) { return at(m_, j); }

  void pivot(int r, int c) {
    const double p = at(r, c);
    for (int j = 0; j <= n_; ++j) at(r, j) /= p;
    for (int i = 0; i <= m_; ++i) {
      if (i == r) continue;
      const double f = at(i, c);
      if (f == 0.0) continue;
      for (int j = 0; j <= n_; ++j) at(i, j) -= f * at(r, j);
      at(i, c) = 0.0;
    }
    basis_[r] = c;
  }

  // Maximizes the objective encoded in the cost row; columns >= enter_limit never enter.
  Status run(int enter_limit, double eps) {
    for (int iter = 0; iter < 50000; ++iter) {
      int c = -1;
      for (int j = 0; j < enter_limit; ++j) {
        if (cost(j) > eps) { c = j; break; }
      }
      if (c < 0) return Status::Optimal;
      int r = -1;
      double best = 0.0;
      for (int i = 0; i < m_; ++i) {
        const double a = at(i, c);
        if (a <= eps) continue;
        const double ratio = at(i, n_) / a;
        if (r < 0 || ratio < best - eps || (ratio <= best + eps && basis_[i] < basis_[r])) {
          r = i;
          best = ratio;
        }
      }
      if (r < 0) return Status::Unbounded;
      pivot(r, c);
    }
    return Status::Unbounded;
  }

  int rows() const { return m_; }
  int cols() const { return n_; }
  std::vector<int>& basis() { return basis_; }

 private:
  int m_, n_;
  std::vector<double> a_;
  std::vector<int> basis_;
};

}  // namespace detail

// maximize c.x subject to A_ub x <= b_ub, A_eq x = b_eq, x >= 0.
inline Result maximize(const std::vector<double>& c, const Matrix& a_ub, const std::vector<double>& b_ub,
                       const Matrix& a_eq = {}, const std::vector<double>& b_eq = {}, double eps = 1e-9) {
  const int nx = static_cast<int>(c.size());
  const int nub = static_cast<int>(a_ub.size());
  const int neq = static_cast<int>(a_eq.size());
  const int m = nub + neq;
  const int art0 = nx + nub;
  const int ncol = art0 + m;
  detail::Tableau t(m, ncol);

  for (int i = 0; i < m; ++i) {
    const bool ub = i < nub;
    const std::vector<double>& row = ub ? a_ub[i] : a_eq[i - nub];
    double b = ub ? b_ub[i] : b_eq[i - nub];
    const double s = b < 0 ? -1.0 : 1.0;
    for (int j = 0; j < nx; ++j) t.at(i, j) = s * row[j];
    if (ub) t.at(i, nx + i) = s;
    t.at(i, art0 + i) = 1.0;
    t.rhs(i) = s * b;
    t.basis()[i] = art0 + i;
  }
  // Phase 1: maximize -sum(artificials).
  for (int j = 0; j < art0; ++j) {
    double s = 0.0;
    for (int i = 0; i < m; ++i) s += t.at(i, j);
    t.cost(j) = s;
  }
  {
    double s = 0.0;
    for (int i = 0; i < m; ++i) s += t.rhs(i);
    t.cost(ncol) = s;
  }
  t.run(art0, eps);
  double infeas = 0.0;
  for (int i = 0; i < m; ++i)
    if (t.basis()[i] >= art0) infeas += t.rhs(i);
  Result res;
  if (infeas > eps * (1.0 + m)) {
    res.status = Status::Infeasible;
    return res;
  }
  for (int i = 0; i < m; ++i) {
    if (t.basis()[i] < art0) continue;
    for (int j = 0; j < art0; ++j) {
      if (std::fabs(t.at(i, j)) > eps) {
        t.pivot(i, j);
        break;
      }
    }
  }
  // Phase 2.
  for (int j = 0; j <= ncol; ++j) t.cost(j) = 0.0;
  for (int j = 0; j < nx; ++j) t.cost(j) = c[j];
  for (int i = 0; i < m; ++i) {
    const int b = t.basis()[i];
    if (b < nx && c[b] != 0.0) {
      const double f = c[b];
      for (int j = 0; j <= ncol; ++j) t.cost(j) -= f * t.at(i, j);
    }
  }
  const Status st = t.run(art0, eps);
  res.status = st;
  res.x.assign(nx, 0.0);
  for (int i = 0; i < m; ++i)
    if (t.basis()[i] < nx) res.x[t.basis()[i]] = t.rhs(i);
  res.value = 0.0;
  for (int j = 0; j < nx; ++j) res.value += c[j] * res.x[j];
  return res;
}

inline bool feasible(int nx, const Matrix& a_ub, const std::vector<double>& b_ub, const Matrix& a_eq = {},
                     const std::vector<double>& b_eq = {}, double eps = 1e-9) {
  return maximize(std::vector<double>(nx, 0.0), a_ub, b_ub, a_eq, b_eq, eps).status != Status::Infeasible;
}

}  // namespace peellab::lp
