#include <gtest/gtest.h>

#include <random>

#include "peellab/macbeath_caps.hpp"
#include "support/oracles.hpp"

using namespace peellab;

namespace {
// Exact probability that n uniform points of a triangle are in convex position.
double valtr_triangle_log(int n) {
  return n * std::log(2.0) + std::lgamma(3.0 * n - 2) - 3 * std::lgamma(static_cast<double>(n)) -
         std::lgamma(2.0 * n + 1);
}

void expect_box(const HPolytope& p, const std::vector<double>& lo, const std::vector<double>& hi) {
  ASSERT_TRUE(p.is_box());
  for (std::size_t j = 0; j < lo.size(); ++j) {
    EXPECT_NEAR(p.box_lo()[j], lo[j], 1e-15);
    EXPECT_NEAR(p.box_hi()[j], hi[j], 1e-15);
  }
}
}  // namespace

TEST(MacbeathRegion, BoxExamples) {
  expect_box(macbeath_region(HPolytope::cube(2), {0.5, 0.5}, 0.5), {0.25, 0.25}, {0.75, 0.75});
  expect_box(macbeath_region(HPolytope::cube(3), {0.5, 0.5, 0.5}, 0.5), {0.25, 0.25, 0.25}, {0.75, 0.75, 0.75});
  expect_box(macbeath_region(HPolytope::cube(2), {0.125, 0.25}, 0.5), {1.0 / 16, 1.0 / 8}, {3.0 / 16, 3.0 / 8});
  EXPECT_THROW(macbeath_region(HPolytope::cube(2), {0.0, 0.5}, 0.5), BoundaryPoint);
}

TEST(MacbeathRegion, GeneralPolytopeSymmetryAndMonotonicity) {
  const HPolytope tri = HPolytope::simplex(2);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.02, 0.45);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> z{u(rng), u(rng)};
    const HPolytope m1 = macbeath_region(tri, z, 0.5);
    const HPolytope m2 = macbeath_region(tri, z, 1.0);
    EXPECT_NEAR(m2.volume(), 4 * m1.volume(), 1e-12);
    for (const auto& v : m1.vertices()) {
      std::vector<double> refl{2 * z[0] - v[0], 2 * z[1] - v[1]};
      EXPECT_TRUE(m1.contains(refl, 1e-12));
      EXPECT_TRUE(m2.contains(v, 1e-12));
      EXPECT_TRUE(tri.contains(v, 1e-12));
    }
  }
}

TEST(DyadicNet, EnumerationExample) {
  // delta = 0.45: 3^{k_i} < 1/(3 delta) forces k_i <= -1; level -4.
  const int d = 2;
  const double delta = 0.45;
  const double t = 4.0 * delta * delta * std::pow(3.0, -4) / 2.0;
  const auto net = dyadic_net(d, delta, t);
  ASSERT_EQ(net.size(), 3u);
  std::vector<int> k1;
  for (const auto& m : net) {
    k1.push_back(m.k[0]);
    EXPECT_EQ(m.k[0] + m.k[1], -4);
  }
  EXPECT_EQ(k1, (std::vector<int>{-3, -2, -1}));
  EXPECT_THROW(dyadic_net(d, delta, t * 1.5), NonIntegerLevel);
}

TEST(DyadicNet, BruteForceCountCentersAndDisjointness) {
  for (int d = 2; d <= 3; ++d)
    for (double t : {1e-3, 1e-4, 3e-6}) {
      const double delta = dyadic_delta(d, t, 0.05);
      EXPECT_GE(delta, 0.05);
      EXPECT_LT(delta, 0.05 * std::pow(3.0, 1.0 / d));
      const auto net = dyadic_net(d, delta, t);
      const long long level = std::llround(dyadic_level(d, delta, t));
      std::size_t brute = 0;
      if (d == 2) {
        for (int a = -40; a <= 40; ++a)
          for (int b = -40; b <= 40; ++b)
            brute += a + b == level && std::pow(3.0, a) < 1 / (3 * delta) && std::pow(3.0, b) < 1 / (3 * delta);
      } else {
        for (int a = -40; a <= 40; ++a)
          for (int b = -40; b <= 40; ++b)
            for (int c = -40; c <= 40; ++c)
              brute += a + b + c == level && std::pow(3.0, a) < 1 / (3 * delta) &&
                       std::pow(3.0, b) < 1 / (3 * delta) && std::pow(3.0, c) < 1 / (3 * delta);
      }
      EXPECT_EQ(net.size(), brute);
      for (const auto& m : net) {
        EXPECT_NEAR(v_cube_corner(m.center), t, 1e-10 * t);
        for (int j = 0; j < d; ++j) EXPECT_LE(m.box->hi[j], 0.5);
        // Box equals the M-region of the cube at factor 1/2.
        const HPolytope mr = macbeath_region(HPolytope::cube(d), m.center, 0.5);
        for (int j = 0; j < d; ++j) {
          EXPECT_NEAR(mr.box_lo()[j], m.box->lo[j], 1e-15);
          EXPECT_NEAR(mr.box_hi()[j], m.box->hi[j], 1e-15);
        }
      }
      for (std::size_t i = 0; i < net.size(); ++i)
        for (std::size_t j = i + 1; j < net.size(); ++j) {
          double overlap = 1.0, vol = net[i].box->volume();
          for (int c = 0; c < d; ++c)
            overlap *= std::max(0.0, std::min(net[i].box->hi[c], net[j].box->hi[c]) -
                                         std::max(net[i].box->lo[c], net[j].box->lo[c]));
          EXPECT_LE(overlap, 1e-12 * vol);  // shared faces only
        }
    }
}

TEST(CapVolumes, AgreeWithPolytopeVolumes) {
  const int d = 2;
  const double t = std::pow(3.0, -8) / 2;
  const auto net = dyadic_net(d, dyadic_delta(d, t, 1.0 / 6), t);
  ASSERT_FALSE(net.empty());
  for (const auto& m : net) {
    const auto& z = m.center;
    std::vector<Halfspace> kp{{{1, 0}, 1.5 * z[0]}, {{-1, 0}, -0.5 * z[0]}, {{0, 1}, 1.5 * z[1]},
                              {{0, -1}, -0.5 * z[1]}, {{1 / z[0], 1 / z[1]}, 2.0}};
    EXPECT_NEAR(HPolytope(2, kp).volume(), kprime_volume(z), 1e-12 * kprime_volume(z));
    std::vector<Halfspace> kf{{{1, 0}, 1}, {{-1, 0}, 0}, {{0, 1}, 1}, {{0, -1}, 0}, {{1 / z[0], 1 / z[1]}, 12.0}};
    EXPECT_NEAR(HPolytope(2, kf).volume(), kfull_volume(z), 1e-12);
    EXPECT_NEAR(oracle::cube_halfspace_volume({1 / z[0], 1 / z[1]}, 12.0), kfull_volume(z), 1e-12);
  }
}

TEST(CapCover, UnitSquareBoundsAndInclusions) {
  for (double s : {std::pow(3.0, -8) / 2, std::pow(3.0, -10) / 2}) {
    CapCoverOptions opt;
    opt.seed = {17, 0};
    const auto r = cap_cover_check(HPolytope::cube(2), s, opt);
    EXPECT_FALSE(r.above_s0);
    EXPECT_FALSE(r.rows.empty());
    EXPECT_TRUE(r.violations.empty()) << r.violations.front();
    EXPECT_EQ(r.inner_violations, 0u);
    EXPECT_GT(r.inner_checked, 0u);
    EXPECT_GT(r.outer_checked, 0u);
    EXPECT_EQ(r.outer_uncovered, 0u);
    for (const auto& row : r.rows) EXPECT_GE(std::pow(2.0, -2) * s / row.vol_kprime, 1.0 - 1e-12);
  }
}

TEST(CapCover, CubeInThreeDimensions) {
  CapCoverOptions opt;
  opt.samples_per_region = 200;
  const auto r = cap_cover_check(HPolytope::cube(3), 1e-6, opt);
  EXPECT_TRUE(r.ok());
}

TEST(CapCover, WarnsAboveThreshold) {
  const auto r = cap_cover_check(HPolytope::cube(2), 0.01);
  EXPECT_TRUE(r.above_s0);
}

TEST(LayersInMRegions, SmallRegionsAndFrequency) {
  const auto res = layers_in_mregions(HPolytope::cube(2), 1e5, 2, {3, 1}, 20.0);
  ASSERT_FALSE(res.rows.empty());
  for (const auto& row : res.rows) {
    if (row.count == 0) EXPECT_EQ(row.layers, 0);
    if (row.count >= 1 && row.count <= 3) EXPECT_EQ(row.layers, 1);
    EXPECT_LE(row.layers, static_cast<int>(row.count));
  }
  const auto fr = mregion_success_frequency(HPolytope::cube(2), 1e5, 2, 5, {4, 0}, 20.0);
  EXPECT_EQ(fr.reps, 5u);
  EXPECT_LE(fr.ci().lo, fr.rate());
  EXPECT_GE(fr.ci().hi, fr.rate());
}

TEST(ConvexPosition, SmallCases) {
  EXPECT_EQ(convex_position_prob(HPolytope::simplex(2), 3, 200, {1, 0}).successes, 200u);
  const auto fr = convex_position_prob(HPolytope::simplex(2), 4, 20000, {2, 0});
  EXPECT_NEAR(fr.rate(), 2.0 / 3.0, 0.02);
  EXPECT_NEAR(std::exp(valtr_triangle_log(4)), 2.0 / 3.0, 1e-12);
}

TEST(ConvexPosition, NonincreasingInN) {
  double prev_hi = 1.0;
  for (int n = 4; n <= 7; ++n) {
    const auto fr = convex_position_prob(HPolytope::cube(2), n, 4000, {6, static_cast<std::uint64_t>(n)});
    EXPECT_LE(fr.ci().lo, prev_hi);
    prev_hi = fr.ci().hi;
  }
}

TEST(ConvexPosition, OrderHelperMatchesHullVertexCount) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0, 1);
  for (int rep = 0; rep < 300; ++rep) {
    PointSet ps(2);
    const int n = 4 + rep % 6;
    for (int i = 0; i < n; ++i) ps.add(std::vector<double>{u(rng), u(rng)}, i);
    EXPECT_EQ(detail::in_convex_position(ps), relative_hull(ps, false).vertex_ids.size() == ps.size());
  }
}

TEST(ConvexPosition, SequentialEstimatorMatchesExactTriangle) {
  const auto c = convex_position_smc(HPolytope::simplex(2), 30, 4000, {9, 0});
  ASSERT_EQ(c.n.back(), 30);
  for (std::size_t i = 0; i < c.n.size(); ++i) {
    const double exact = valtr_triangle_log(c.n[i]);
    EXPECT_NEAR(c.log_p[i], exact, 0.1 + 0.03 * std::fabs(exact)) << "n=" << c.n[i];
  }
}
