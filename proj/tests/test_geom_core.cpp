#include <gtest/gtest.h>

#include <random>

#include "peellab/geom_core.hpp"
#include "support/oracles.hpp"

using namespace peellab;

namespace {

PointSet from(int d, const std::vector<std::vector<double>>& pts) {
  PointSet ps(d);
  for (std::size_t i = 0; i < pts.size(); ++i) ps.add(pts[i], static_cast<PointId>(i));
  return ps;
}

PointSet cube_corners(int d) {
  PointSet ps(d);
  for (int m = 0; m < (1 << d); ++m) {
    std::vector<double> x(d);
    for (int j = 0; j < d; ++j) x[j] = (m >> j) & 1;
    ps.add(x, m);
  }
  return ps;
}

}  // namespace

TEST(ConvexHull, UnitSquare) {
  auto h = convex_hull(cube_corners(2));
  EXPECT_EQ(h.f(0), 4u);
  EXPECT_EQ(h.f(1), 4u);
  EXPECT_NEAR(hull_volume(h), 1.0, 1e-12);
}

TEST(ConvexHull, Tetrahedron) {
  auto h = convex_hull(from(3, {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}}));
  EXPECT_EQ(h.f(0), 4u);
  EXPECT_EQ(h.f(1), 6u);
  EXPECT_EQ(h.f(2), 4u);
  EXPECT_EQ(static_cast<long>(h.f(0)) - static_cast<long>(h.f(1)) + static_cast<long>(h.f(2)), 2);
  EXPECT_NEAR(hull_volume(h), 1.0 / 6.0, 1e-14);
}

TEST(ConvexHull, CubeMergesCoplanarTriangles) {
  auto h = convex_hull(cube_corners(3));
  EXPECT_EQ(h.f(0), 8u);
  EXPECT_EQ(h.f(1), 12u);
  EXPECT_EQ(h.f(2), 6u);
  EXPECT_NEAR(hull_volume(h), 1.0, 1e-12);
  for (const auto& facet : h.faces[2]) EXPECT_EQ(facet.size(), 4u);
  for (const auto& n : h.facet_normals) {
    double s = 0;
    for (double c : n) s += c * c;
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(ConvexHull, SimplexVolumes) {
  double fact = 1;
  for (int d = 2; d <= 5; ++d) {
    fact *= d;
    PointSet ps(d);
    ps.add(std::vector<double>(d, 0.0), 0);
    for (int i = 0; i < d; ++i) {
      std::vector<double> e(d, 0.0);
      e[i] = 1.0;
      ps.add(e, i + 1);
    }
    EXPECT_NEAR(hull_volume(convex_hull(ps)), 1.0 / fact, 1e-14) << d;
  }
}

TEST(ConvexHull, FlatInputThrowsDegenerate) {
  auto ps = from(2, {{0, 0}, {1, 1}, {2, 2}});
  EXPECT_THROW(convex_hull(ps), DegenerateInput);
  auto h = relative_hull(ps);
  EXPECT_TRUE(h.degenerate);
  EXPECT_EQ(h.affine_dim, 1);
  EXPECT_EQ(h.volume, 0.0);
}

TEST(ExtremePoints, CollinearKeepsEndpoints) {
  auto ids = extreme_points(from(2, {{0, 0}, {0.5, 0.5}, {1, 1}}));
  EXPECT_EQ(ids, (std::vector<PointId>{0, 2}));
}

TEST(ExtremePoints, DuplicatesKeepLowestId) {
  PointSet ps(2);
  ps.add({0, 0}, 5);
  ps.add({1, 0}, 1);
  ps.add({0, 1}, 2);
  ps.add({0, 0}, 3);
  ps.add({0, 0}, 9);
  EXPECT_EQ(extreme_points(ps), (std::vector<PointId>{1, 2, 3}));
}

TEST(ExtremePoints, BoundaryNonVerticesReported) {
  // Square with midpoints of edges and the center.
  auto ps = from(2, {{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0}, {1, 0.5}, {0.5, 0.5}});
  auto h = convex_hull(ps);
  EXPECT_EQ(h.vertex_ids, (std::vector<PointId>{0, 1, 2, 3}));
  EXPECT_EQ(h.boundary_ids, (std::vector<PointId>{0, 1, 2, 3, 4, 5}));
  EXPECT_EQ(h.f(1), 4u);
}

TEST(ExtremePoints, GridInThreeDimensions) {
  PointSet ps(3);
  PointId id = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) ps.add({i * 0.5, j * 0.5, k * 0.5}, id++);
  auto h = convex_hull(ps);
  EXPECT_EQ(h.f(0), 8u);
  EXPECT_EQ(h.f(1), 12u);
  EXPECT_EQ(h.f(2), 6u);
  EXPECT_EQ(h.boundary_ids.size(), 26u);
  EXPECT_NEAR(h.volume, 1.0, 1e-12);
}

TEST(ExtremePoints, TwentySquarePointsMatchLpOracle) {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 50; ++rep) {
    auto ps = oracle::uniform_cube(2, 20, rng);
    EXPECT_EQ(extreme_points(ps), oracle::lp_extreme(ps));
  }
}

TEST(ExtremePoints, FiftyPointsInR3MatchLpOracle) {
  std::mt19937_64 rng(12);
  for (int rep = 0; rep < 20; ++rep) {
    auto ps = oracle::uniform_cube(3, 50, rng);
    EXPECT_EQ(extreme_points(ps), oracle::lp_extreme(ps));
  }
}

TEST(ExtremePoints, SmallSetsMatchLpOracleUpToDimensionFour) {
  std::mt19937_64 rng(13);
  for (int rep = 0; rep < 300; ++rep) {
    const int d = 2 + rep % 3;
    const int n = d + 1 + static_cast<int>(rng() % (15 - d));
    auto ps = oracle::uniform_cube(d, n, rng);
    ASSERT_EQ(extreme_points(ps), oracle::lp_extreme(ps)) << "d=" << d << " n=" << n;
  }
}

TEST(ExtremePoints, DegenerateLatticeInputsMatchLpOracle) {
  std::mt19937_64 rng(14);
  std::uniform_int_distribution<int> g(0, 3);
  for (int rep = 0; rep < 200; ++rep) {
    const int d = 2 + rep % 2;
    PointSet ps(d);
    const int n = 4 + static_cast<int>(rng() % 12);
    for (int i = 0; i < n; ++i) {
      std::vector<double> x(d);
      for (auto& c : x) c = g(rng) / 4.0;
      ps.add(x, i);
    }
    ASSERT_EQ(extreme_points(ps), oracle::lp_extreme(ps)) << rep;
  }
}

TEST(HullVolume, ShoelaceOracle) {
  std::mt19937_64 rng(15);
  for (int rep = 0; rep < 50; ++rep) {
    auto ps = oracle::uniform_cube(2, 30, rng);
    auto h = convex_hull(ps);
    std::vector<std::vector<double>> verts;
    for (PointId id : h.vertex_ids) verts.emplace_back(ps.coord(id), ps.coord(id) + 2);
    EXPECT_NEAR(hull_volume(h), oracle::shoelace(verts), 1e-10);
  }
}

TEST(HullProperties, IdempotenceMonotonicityEuler) {
  std::mt19937_64 rng(16);
  for (int rep = 0; rep < 30; ++rep) {
    auto ps = oracle::uniform_cube(3, 60, rng);
    auto h = convex_hull(ps);
    std::vector<std::size_t> pos(h.vertex_ids.begin(), h.vertex_ids.end());
    auto h2 = convex_hull(ps.select(pos));
    EXPECT_EQ(h2.vertex_ids, h.vertex_ids);
    EXPECT_NEAR(h2.volume, h.volume, 1e-12);
    std::vector<std::size_t> half;
    for (std::size_t i = 0; i < 30; ++i) half.push_back(i);
    EXPECT_LE(convex_hull(ps.select(half)).volume, h.volume + 1e-15);
    EXPECT_EQ(static_cast<long>(h.f(0)) - static_cast<long>(h.f(1)) + static_cast<long>(h.f(2)), 2);
    for (int k = 0; k < 3; ++k)
      for (const auto& face : h.faces[k]) EXPECT_GE(face.size(), static_cast<std::size_t>(k + 1));
    for (PointId v : h.vertex_ids) {
      int count = 0;
      for (const auto& facet : h.faces[2]) count += std::binary_search(facet.begin(), facet.end(), v);
      EXPECT_GE(count, 3);
    }
  }
}

TEST(HullProperties, AffineEquivariance) {
  std::mt19937_64 rng(17);
  for (int rep = 0; rep < 20; ++rep) {
    auto ps = oracle::uniform_cube(3, 40, rng);
    // Shear with unit determinant plus translation.
    PointSet q(3);
    for (std::size_t i = 0; i < ps.size(); ++i) {
      const double* x = ps.coord(i);
      q.add({x[0] + 0.7 * x[1] - 0.2 * x[2] + 3, x[1] + 0.4 * x[2] - 1, x[2] + 0.5}, ps.id(i));
    }
    auto a = convex_hull(ps);
    auto b = convex_hull(q);
    EXPECT_EQ(a.vertex_ids, b.vertex_ids);
    EXPECT_NEAR(a.volume, b.volume, 1e-9);
  }
}

TEST(HullProperties, FacetsOrientedOutward) {
  std::mt19937_64 rng(18);
  auto ps = oracle::uniform_cube(4, 80, rng);
  auto h = convex_hull(ps);
  for (std::size_t f = 0; f < h.faces[3].size(); ++f) {
    const auto& n = h.facet_normals[f];
    const double* v0 = ps.coord(h.faces[3][f][0]);
    double off = 0;
    for (int j = 0; j < 4; ++j) off += n[j] * v0[j];
    for (std::size_t i = 0; i < ps.size(); ++i) {
      double s = 0;
      for (int j = 0; j < 4; ++j) s += n[j] * ps.coord(i)[j];
      EXPECT_LE(s, off + 1e-12);
    }
  }
}
