#include <gtest/gtest.h>

#include <random>

#include "peellab/detail/predicates.hpp"

using namespace peellab::detail;

TEST(Predicates, ExactDeterminantSigns) {
  std::vector<Rational> m{1, 2, 3, 4};
  EXPECT_EQ(exact_det_sign(m, 2), -1);
  std::vector<Rational> z{1, 2, 2, 4};
  EXPECT_EQ(exact_det_sign(z, 2), 0);
  std::vector<Rational> id{1, 0, 0, 0, 1, 0, 0, 0, 1};
  EXPECT_EQ(exact_det_sign(id, 3), 1);
}

TEST(Predicates, MinorTableMatchesClosedForm) {
  const double a[9] = {2, -1, 0.5, 3, 4, -2, 1, 1, 7};
  const auto t = minor_table(a, 3, 3);
  const double det = 2 * (4 * 7 - (-2) * 1) - (-1) * (3 * 7 - (-2) * 1) + 0.5 * (3 * 1 - 4 * 1);
  EXPECT_NEAR(t.det[7], det, 1e-12);
  EXPECT_GE(t.perm[7], std::fabs(det));
}

TEST(Predicates, CollinearDetectedExactly) {
  // Points on the line y = x/3 that are not exactly representable.
  const double p0[2] = {0.1, 0.1 / 3};
  const double p1[2] = {0.7, 0.7 / 3};
  const double p2[2] = {0.3, 0.1};
  std::vector<const double*> pts{p0, p1, p2};
  const int s = sign_det_diff(pts, 2);
  // The answer must agree with exact rational evaluation.
  std::vector<Rational> m{Rational(p1[0]) - Rational(p0[0]), Rational(p1[1]) - Rational(p0[1]),
                          Rational(p2[0]) - Rational(p0[0]), Rational(p2[1]) - Rational(p0[1])};
  EXPECT_EQ(s, exact_det_sign(m, 2));
  const double q0[2] = {0, 0}, q1[2] = {1, 1}, q2[2] = {0.5, 0.5};
  std::vector<const double*> qs{q0, q1, q2};
  EXPECT_EQ(sign_det_diff(qs, 2), 0);
}

TEST(Predicates, FilterAgreesWithExactOnNearDegenerateInputs) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 2000; ++trial) {
    const int d = 2 + trial % 3;
    std::vector<std::vector<double>> p(d + 1, std::vector<double>(d));
    for (int i = 0; i < d; ++i)
      for (auto& c : p[i]) c = u(rng);
    // last point: an affine combination of the first d, perturbed by a few ulps
    std::vector<double> w(d);
    double s = 0;
    for (auto& c : w) { c = u(rng); s += c; }
    for (auto& c : w) c /= s;
    for (int j = 0; j < d; ++j) {
      double v = 0;
      for (int i = 0; i < d; ++i) v += w[i] * p[i][j];
      p[d][j] = (trial % 2) ? std::nextafter(v, 2.0) : v;
    }
    std::vector<const double*> ptr;
    for (auto& q : p) ptr.push_back(q.data());
    std::vector<Rational> m(d * d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) m[i * d + j] = Rational(p[i + 1][j]) - Rational(p[0][j]);
    ASSERT_EQ(sign_det_diff(ptr, d), exact_det_sign(m, d));
    std::vector<const double*> verts(ptr.begin(), ptr.begin() + d);
    PlanePredicate pl(verts, d);
    std::vector<Rational> m2(d * d);
    for (int i = 0; i < d - 1; ++i)
      for (int j = 0; j < d; ++j) m2[i * d + j] = Rational(p[i + 1][j]) - Rational(p[0][j]);
    for (int j = 0; j < d; ++j) m2[(d - 1) * d + j] = Rational(p[d][j]) - Rational(p[0][j]);
    ASSERT_EQ(pl.side(p[d].data()), exact_det_sign(m2, d));
  }
}
