#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "peellab/peeling.hpp"
#include "peellab/sampling.hpp"
#include "support/oracles.hpp"

using namespace peellab;

namespace {

PointSet from_rows(const std::vector<std::vector<double>>& rows) {
  PointSet ps(static_cast<int>(rows.at(0).size()));
  for (std::size_t i = 0; i < rows.size(); ++i) ps.add(rows[i], static_cast<PointId>(i));
  return ps;
}

void expect_partition(const PeelingResult& pr, const PointSet& ps) {
  std::size_t total = pr.leftover.size();
  for (const auto& l : pr.layer_ids) total += l.size();
  EXPECT_EQ(total, ps.size());
  EXPECT_EQ(pr.label.size() + pr.leftover.size(), ps.size());
}

// Plain per-layer reference: rebuild the relative hull of the remainder each time.
std::vector<std::vector<PointId>> naive_layers(const PointSet& ps) {
  std::vector<std::size_t> rem(ps.size());
  for (std::size_t i = 0; i < ps.size(); ++i) rem[i] = i;
  std::vector<std::vector<PointId>> out;
  while (!rem.empty()) {
    PointSet cur = ps.select(rem);
    const HullComplex h = relative_hull(cur, false);
    // Coordinates on the boundary (duplicates included).
    std::vector<std::vector<double>> bd;
    for (PointId id : h.boundary_ids)
      for (std::size_t i : rem)
        if (ps.id(i) == id) bd.emplace_back(ps.coord(i), ps.coord(i) + ps.dim());
    std::vector<std::size_t> keep;
    std::vector<PointId> layer;
    for (std::size_t i : rem) {
      std::vector<double> c(ps.coord(i), ps.coord(i) + ps.dim());
      if (std::find(bd.begin(), bd.end(), c) != bd.end()) layer.push_back(ps.id(i));
      else keep.push_back(i);
    }
    std::sort(layer.begin(), layer.end());
    out.push_back(layer);
    rem = keep;
  }
  return out;
}

}  // namespace

TEST(Peel, TriangleIsOneLayer) {
  auto pr = peel(from_rows({{0, 0}, {1, 0}, {0, 1}}));
  ASSERT_EQ(pr.num_layers(), 1);
  for (PointId i = 0; i < 3; ++i) EXPECT_EQ(pr.label_of(i), 1);
}

TEST(Peel, NestedSquares) {
  auto pr = peel(from_rows({{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.25, 0.25}, {0.75, 0.25}, {0.75, 0.75}, {0.25, 0.75}}));
  ASSERT_EQ(pr.num_layers(), 2);
  for (PointId i = 0; i < 4; ++i) EXPECT_EQ(pr.label_of(i), 1);
  for (PointId i = 4; i < 8; ++i) EXPECT_EQ(pr.label_of(i), 2);
  EXPECT_EQ(pr.layers[1].vertex_ids, (std::vector<PointId>{4, 5, 6, 7}));
}

TEST(Peel, BoundaryNonVerticesLeaveWithTheirLayer) {
  // Edge midpoints of the square plus the center.
  auto pr = peel(from_rows({{0, 0}, {2, 0}, {2, 2}, {0, 2}, {1, 0}, {2, 1}, {1, 2}, {0, 1}, {1, 1}}));
  ASSERT_EQ(pr.num_layers(), 2);
  for (PointId i = 0; i < 8; ++i) EXPECT_EQ(pr.label_of(i), 1);
  EXPECT_EQ(pr.label_of(8), 2);
  EXPECT_EQ(pr.layers[0].vertex_ids.size(), 4u);
  EXPECT_EQ(pr.layers[0].boundary_ids.size(), 8u);
}

TEST(Peel, FlatRemainderPeelsInsideItsAffineHull) {
  // Square around five collinear points: layers 1, then endpoints pairwise, then the middle.
  auto pr = peel(from_rows({{-1, -1}, {5, -1}, {5, 1}, {-1, 1}, {0, 0}, {1, 0}, {2, 0}, {3, 0}, {4, 0}}));
  ASSERT_EQ(pr.num_layers(), 4);
  EXPECT_EQ(pr.label_of(4), 2);
  EXPECT_EQ(pr.label_of(8), 2);
  EXPECT_EQ(pr.label_of(5), 3);
  EXPECT_EQ(pr.label_of(7), 3);
  EXPECT_EQ(pr.label_of(6), 4);
  EXPECT_TRUE(pr.layers[1].degenerate);
  EXPECT_EQ(pr.layers[1].affine_dim, 1);
}

TEST(Peel, DuplicatesShareALabel) {
  auto pr = peel(from_rows({{0, 0}, {1, 0}, {0, 1}, {0.2, 0.2}, {0.2, 0.2}, {1, 0}}));
  EXPECT_EQ(pr.label_of(1), 1);
  EXPECT_EQ(pr.label_of(5), 1);
  EXPECT_EQ(pr.label_of(3), 2);
  EXPECT_EQ(pr.label_of(4), 2);
  expect_partition(pr, from_rows({{0, 0}, {1, 0}, {0, 1}, {0.2, 0.2}, {0.2, 0.2}, {1, 0}}));
}

TEST(Peel, MaxLayersLeavesTheRest) {
  std::mt19937_64 rng(3);
  auto ps = oracle::uniform_cube(2, 200, rng);
  auto pr = peel(ps, 2);
  EXPECT_EQ(pr.num_layers(), 2);
  EXPECT_FALSE(pr.leftover.empty());
  expect_partition(pr, ps);
  auto full = peel(ps);
  for (const auto& [id, l] : pr.label) EXPECT_EQ(full.label_of(id), l);
  EXPECT_EQ(peel(ps, 0).leftover.size(), ps.size());
}

TEST(Peel, MatchesLpOracleSmallSets) {
  std::mt19937_64 rng(2024);
  for (int rep = 0; rep < 60; ++rep) {
    const int d = 2 + rep % 2;
    auto ps = oracle::uniform_cube(d, 12, rng);
    auto pr = peel(ps);
    auto ref = oracle::lp_peel(ps);
    for (const auto& [id, l] : ref) ASSERT_EQ(pr.label_of(id), l) << "rep " << rep << " id " << id;
    expect_partition(pr, ps);
  }
}

TEST(Peel, PlanarEngineMatchesGenericOnLattices) {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> g(0, 6);
  for (int rep = 0; rep < 150; ++rep) {
    PointSet ps(2);
    const int n = 3 + rep % 40;
    for (int i = 0; i < n; ++i) ps.add(std::vector<double>{g(rng) / 4.0, g(rng) / 4.0}, i);
    auto pr = peel(ps);
    auto ref = naive_layers(ps);
    ASSERT_EQ(pr.layer_ids, ref) << "rep " << rep;
  }
}

TEST(Peel, GenericEngineOnThreeDimensionalLattices) {
  std::mt19937_64 rng(78);
  std::uniform_int_distribution<int> g(0, 3);
  for (int rep = 0; rep < 40; ++rep) {
    PointSet ps(3);
    const int n = 4 + rep % 30;
    for (int i = 0; i < n; ++i) ps.add(std::vector<double>{g(rng) / 2.0, g(rng) / 2.0, g(rng) / 2.0}, i);
    auto pr = peel(ps);
    ASSERT_EQ(pr.layer_ids, naive_layers(ps)) << "rep " << rep;
  }
}

TEST(Peel, BandedPlanarPeelMatchesUnbanded) {
  for (std::uint64_t r = 0; r < 3; ++r) {
    auto ps = sample_poisson(r == 2 ? HPolytope::simplex(2) : HPolytope::cube(2), 80000, {12, r});
    const auto u = detail::unique_points(ps);
    auto layers = [&](bool banding) {
      std::vector<int> label(u.rep.size(), 0);
      int n = 0;
      detail::peel_unique(u, [&](const std::vector<std::size_t>& l) {
        ++n;
        for (std::size_t k : l) label[k] = n;
        return true;
      }, banding);
      return label;
    };
    ASSERT_EQ(layers(true), layers(false)) << "rep " << r;
  }
}

TEST(Peel, NestingAndPartitionOnRandomInput) {
  auto ps = sample_poisson(HPolytope::cube(3), 400, {4, 1});
  auto pr = peel(ps);
  expect_partition(pr, ps);
  for (int n = 1; n < pr.num_layers(); ++n) {
    // Every point of a deeper layer lies in the hull of layer n.
    std::vector<std::vector<double>> outer;
    for (PointId id : pr.layers[n - 1].vertex_ids) {
      for (std::size_t i = 0; i < ps.size(); ++i)
        if (ps.id(i) == id) outer.emplace_back(ps.coord(i), ps.coord(i) + 3);
    }
    for (PointId id : pr.layers[n].vertex_ids)
      for (std::size_t i = 0; i < ps.size(); ++i)
        if (ps.id(i) == id)
          ASSERT_TRUE(oracle::in_hull(std::vector<double>(ps.coord(i), ps.coord(i) + 3), outer));
    if (!pr.layers[n].degenerate && !pr.layers[n - 1].degenerate) EXPECT_LT(pr.layers[n].volume, pr.layers[n - 1].volume);
  }
  for (int n = 1; n <= pr.num_layers(); ++n) {
    for (PointId id : pr.layers[n - 1].vertex_ids) EXPECT_EQ(pr.label_of(id), n);
    for (PointId id : pr.layer_ids[n - 1]) EXPECT_EQ(pr.label_of(id), n);
  }
}

TEST(Peel, AffineInvariance) {
  std::mt19937_64 rng(9);
  auto ps = oracle::uniform_cube(2, 300, rng);
  PointSet mapped(2);
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const double* p = ps.coord(i);
    mapped.add(std::vector<double>{2.0 * p[0] + 0.7 * p[1] + 3.0, 0.5 * p[1] - 1.0}, ps.id(i));
  }
  EXPECT_EQ(peel(ps).label, peel(mapped).label);
}

TEST(LayerLabel, Examples) {
  PointSet two = from_rows({{0, 0}, {4, 0}, {4, 4}, {0, 4}, {1, 1}, {3, 1}, {3, 3}, {1, 3}});
  EXPECT_EQ(layer_label(two, Point{{2, 2}, 99}), 3);
  EXPECT_EQ(layer_label(two, Point{{9, 9}, 99}), 1);
  EXPECT_EQ(layer_label(two, Point{{1, 1}, 99}), 2);
  EXPECT_EQ(layer_label(PointSet(2), Point{{1, 1}, 0}), 1);
}

TEST(LayerLabel, MatchesFullRecomputation) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0, 1);
  for (int rep = 0; rep < 200; ++rep) {
    const int d = 2 + rep % 2;
    auto ps = oracle::uniform_cube(d, 30 + rep % 20, rng);
    Point x{std::vector<double>(d), 0};
    for (auto& c : x.coords) c = u(rng);
    PointSet all = ps;
    all.add(x.coords, 1000);
    EXPECT_EQ(layer_label(ps, x), peel(all).label_of(1000));
  }
}

TEST(LayerLabel, Monotone) {
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> u(0, 1);
  for (int rep = 0; rep < 300; ++rep) {
    const int d = 2 + rep % 2;
    auto y = oracle::uniform_cube(d, 40, rng);
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < y.size(); ++i)
      if (u(rng) < 0.6) keep.push_back(i);
    PointSet x = y.select(keep);
    Point w{std::vector<double>(d), 0};
    for (auto& c : w.coords) c = 0.2 + 0.6 * u(rng);
    EXPECT_LE(layer_label(x, w), layer_label(y, w));
  }
}

TEST(LayerStats, Examples) {
  auto sq = peel(from_rows({{0, 0}, {1, 0}, {1, 1}, {0, 1}}));
  auto s = layer_stats(sq, HPolytope::cube(2), 1);
  EXPECT_EQ(s.f, (std::vector<std::size_t>{4, 4}));
  EXPECT_NEAR(s.defect_volume, 0.0, 1e-15);
  auto tet = peel(from_rows({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}}));
  EXPECT_EQ(layer_stats(tet, HPolytope::cube(3), 1).f, (std::vector<std::size_t>{4, 6, 4}));
  EXPECT_THROW(layer_stats(tet, HPolytope::cube(3), 2), LayerMissing);
}

TEST(LayerStats, DefectVolumeNondecreasing) {
  for (std::uint64_t r = 0; r < 5; ++r) {
    auto ps = sample_poisson(HPolytope::cube(2), 10000, {21, r});
    auto pr = peel(ps, 3);
    double prev = 0;
    for (int n = 1; n <= 3; ++n) {
      const double v = layer_stats(pr, HPolytope::cube(2), n).defect_volume;
      EXPECT_GE(v, prev);
      EXPECT_LE(v, 1.0);
      prev = v;
    }
  }
}

TEST(TotalLayers, Examples) {
  EXPECT_EQ(total_layers(from_rows({{0, 0}, {1, 0}, {0, 1}})), 1);
  EXPECT_EQ(total_layers(from_rows({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}})), 1);
  PointSet sq(2);
  PointId id = 0;
  for (int k = 1; k <= 7; ++k)
    for (auto [a, b] : std::vector<std::pair<int, int>>{{-1, -1}, {1, -1}, {1, 1}, {-1, 1}})
      sq.add(std::vector<double>{a * k * 1.0, b * k * 1.0}, id++);
  EXPECT_EQ(total_layers(sq), 7);
}

TEST(Export, CsvAndJson) {
  auto pr = peel(from_rows({{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}}));
  std::stringstream ss;
  write_labels_csv(pr, ss);
  EXPECT_EQ(ss.str(), "id,layer\n0,1\n1,1\n2,1\n3,1\n4,2\n");
  auto j = layers_json(pr);
  EXPECT_EQ(j["num_layers"], 2);
  EXPECT_EQ(j["layers"][0]["f"][0], 4);
  EXPECT_EQ(j["layers"][1]["affine_dim"], 0);
}
