#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "peellab/estimators.hpp"

using namespace peellab;

namespace {

ExperimentConfig small_config(std::vector<double> grid, int reps) {
  ExperimentConfig c;
  c.dim = 2;
  c.lambda_grid = std::move(grid);
  c.reps = reps;
  c.seed = 11;
  c.threads = 1;
  return c;
}

std::string csv_of(const ExperimentResult& r) {
  std::ostringstream os;
  write_rows_csv(r.rows, os);
  return os.str();
}

}  // namespace

TEST(Config, MinimalGetsDefaults) {
  const auto c = config_from_json(nlohmann::json::parse(R"({"dim":2,"lambda_grid":[1000],"n":1,"reps":10})"));
  EXPECT_EQ(c.polytope, "cube");
  EXPECT_EQ(c.k, std::vector<int>{0});
  EXPECT_EQ(c.n, std::vector<int>{1});
  EXPECT_EQ(c.seed, 1u);
  EXPECT_FALSE(c.alpha_override.has_value());
  EXPECT_DOUBLE_EQ(c.integral.h_step, 0.25);
}

TEST(Config, SchemaErrorsNameTheKey) {
  auto key_of = [](const char* text) {
    try {
      config_from_json(nlohmann::json::parse(text));
    } catch (const SchemaError& e) {
      return e.key;
    }
    return std::string("<none>");
  };
  EXPECT_EQ(key_of(R"({"dim":2,"lambda_grid":[1000],"n":1,"reps":-3})"), "reps");
  EXPECT_EQ(key_of(R"({"dim":2,"lambda_grid":[1000],"n":1})"), "reps");
  EXPECT_EQ(key_of(R"({"dim":2,"lambda_grid":[1000,100],"n":1,"reps":5})"), "lambda_grid");
  EXPECT_EQ(key_of(R"({"dim":2,"lambda_grid":[1000],"n":1,"reps":5,"colour":1})"), "colour");
  EXPECT_EQ(key_of(R"({"dim":2,"lambda_grid":[1000],"n":1,"reps":5,"window":{"r":"x"}})"), "window.r");
  EXPECT_EQ(key_of(R"({"dim":2,"lambda_grid":[1000],"n":1,"reps":5,"polytope":"dodecahedron"})"), "polytope");
  EXPECT_EQ(key_of(R"({"dim":2,"lambda_grid":[1000],"n":[1,0],"reps":5})"), "n");
}

TEST(Config, AlphaOverrideReachesFloatingParams) {
  const auto c =
      config_from_json(nlohmann::json::parse(R"({"dim":2,"lambda_grid":[1000],"n":1,"reps":2,"alpha_override":3.5})"));
  ASSERT_TRUE(c.alpha_override.has_value());
  const auto p = sandwich_params(1000.0, 2, c.alpha_override);
  EXPECT_DOUBLE_EQ(p.alpha, 3.5);
  EXPECT_TRUE(p.alpha_overridden);
  EXPECT_EQ(config_from_json(config_to_json(c)).alpha_override, c.alpha_override);
}

TEST(RunExperiment, SmokeContract) {
  auto cfg = small_config({1000.0}, 2);
  cfg.sandwich = true;
  cfg.total_layers = true;
  const auto r = run_experiment(cfg);
  ASSERT_EQ(r.rows.size(), 2u);
  EXPECT_EQ(r.failed, 0u);
  const auto* s = r.find("N", 1000.0, 1, 0);
  ASSERT_NE(s, nullptr);
  EXPECT_EQ(s->count, 2u);
  EXPECT_TRUE(std::isfinite(s->ratio_mean));
  EXPECT_TRUE(std::isfinite(s->ratio_variance));
  EXPECT_GE(s->variance, 0.0);
  EXPECT_GE(s->ks, 0.0);
  EXPECT_LE(s->ks, 1.0);
  ASSERT_NE(r.find("V", 1000.0, 1), nullptr);
  ASSERT_NE(r.find("total_layers", 1000.0, 0), nullptr);
  for (const auto& row : r.rows) {
    EXPECT_GT(row.total_layers, 1);
    EXPECT_NE(row.sandwich_event, -1);
  }
  const std::string csv = csv_of(r);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "lambda,rep,n,k,N,V,total_layers,sandwich_event,runtime_ms,flag");
  const auto j = summary_json(r);
  EXPECT_TRUE(j.contains("summaries"));
  EXPECT_TRUE(j.contains("config"));
}

TEST(RunExperiment, TotalLayersMatchFullPeel) {
  auto cfg = small_config({2000.0}, 3);
  cfg.n = {2};
  cfg.total_layers = true;
  const auto r = run_experiment(cfg);
  for (const auto& row : r.rows) {
    const PointSet ps = sample_poisson(HPolytope::cube(2), 2000.0, replication_seed(cfg.seed, 2000.0, row.rep));
    EXPECT_EQ(row.total_layers, total_layers(ps));
  }
}

TEST(RunExperiment, DefectVolumeNondecreasingInDepth) {
  auto cfg = small_config({1000.0, 5000.0}, 10);
  cfg.n = {1, 2, 3, 4};
  cfg.k = {0, 1};
  const auto r = run_experiment(cfg);
  std::map<std::pair<double, int>, std::vector<double>> by_rep;
  for (const auto& row : r.rows)
    if (row.k == 0) by_rep[{row.lambda, row.rep}].push_back(row.V);
  for (const auto& [key, v] : by_rep) {
    ASSERT_EQ(v.size(), 4u);
    for (std::size_t i = 1; i < v.size(); ++i) EXPECT_GE(v[i], v[i - 1]);
  }
  // In the plane f_0 = f_1 on every layer.
  for (std::size_t i = 0; i + 1 < r.rows.size(); i += 2) EXPECT_EQ(r.rows[i].N, r.rows[i + 1].N);
}

TEST(RunExperiment, ShortReplicationsAreFlagged) {
  auto cfg = small_config({20.0}, 5);
  cfg.n = {30};
  const auto r = run_experiment(cfg);
  for (const auto& row : r.rows) {
    EXPECT_EQ(row.flag, "short");
    EXPECT_EQ(row.N, 0.0);
    EXPECT_DOUBLE_EQ(row.V, 1.0);
  }
  EXPECT_EQ(r.find("N", 20.0, 30, 0)->short_reps, 5u);
}

TEST(RunExperiment, IndependentOfThreadCount) {
  auto cfg = small_config({500.0, 3000.0}, 12);
  cfg.n = {1, 2};
  cfg.total_layers = true;
  const std::string one = csv_of(run_experiment(cfg));
  cfg.threads = 4;
  const std::string four = csv_of(run_experiment(cfg));
  EXPECT_EQ(one, four);
  EXPECT_EQ(summary_json(run_experiment(cfg)).dump(), summary_json(run_experiment(cfg)).dump());
}

TEST(RunExperiment, StandardErrorScalesWithReplications) {
  auto cfg = small_config({1000.0}, 300);
  cfg.threads = 0;
  const double se1 = run_experiment(cfg).find("N", 1000.0, 1, 0)->std_error;
  cfg.reps = 600;
  const double se2 = run_experiment(cfg).find("N", 1000.0, 1, 0)->std_error;
  EXPECT_NEAR(se1 / se2, std::sqrt(2.0), 0.2 * std::sqrt(2.0));
}

TEST(RunExperiment, FirstLayerRatioSettles) {
  auto cfg = small_config({1e3, 1e4, 1e5}, 40);
  cfg.threads = 0;
  const auto r = run_experiment(cfg);
  double prev = 0;
  for (double l : cfg.lambda_grid) {
    const double ratio = r.find("N", l, 1, 0)->ratio_mean;
    EXPECT_GT(ratio, 0.0);
    if (prev > 0) EXPECT_LT(std::fabs(ratio / prev - 1.0), 0.25);
    prev = ratio;
  }
  EXPECT_GT(r.slopes.at("N:1,0"), 0.0);
}

TEST(Clt, CalibrationAndGuard) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  std::vector<double> x(500);
  for (auto& v : x) v = g(rng);
  const auto c = clt_diagnostic(x);
  EXPECT_LT(c.ks, 0.08);
  EXPECT_EQ(c.curve.size(), 500u);
  EXPECT_THROW(clt_diagnostic(std::vector<double>(100, 1.0)), InsufficientReplications);
}

TEST(Exponent, PowerLawRecovered) {
  std::vector<double> x{1e3, 1e4, 1e5, 1e6}, y;
  for (double v : x) y.push_back(3.7 * std::pow(v, 2.0 / 3.0));
  const auto f = power_law_fit(x, y);
  EXPECT_NEAR(f.slope, 2.0 / 3.0, 1e-6);
  EXPECT_NEAR(std::exp(f.intercept), 3.7, 1e-6);
  EXPECT_THROW(layer_count_exponent(small_config({1e3, 1e4}, 2)), SchemaError);
}

TEST(Exponent, SmallGridTrend) {
  auto cfg = small_config({300, 1000, 3000, 10000}, 4);
  cfg.threads = 0;
  const auto f = layer_count_exponent(cfg);
  ASSERT_EQ(f.mean.size(), 4u);
  for (std::size_t i = 1; i < f.mean.size(); ++i) EXPECT_GT(f.mean[i], f.mean[i - 1]);
  EXPECT_GT(f.slope, 0.4);
  EXPECT_LT(f.slope, 0.9);
}

TEST(LimitConstant, SimplexVolumeAndQuadrature) {
  EXPECT_NEAR(simplex_S_volume(2), 2 * std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(simplex_S_volume(3), std::sqrt(3.0) / 4 * 18, 1e-12);
  EXPECT_NEAR(trapezoid({0, 1, 2}, {0, 1, 2}), 2.0, 1e-15);
  // A score identically 1 recovers the expected point count of the window.
  const LimitWindow win{3.0, -4.0, 1.0};
  IntegralSettings s{-4.0, 1.0, 0.01, 2};
  for (int d = 2; d <= 3; ++d) {
    const auto si = score_integral(Score{0, -1}, d, win, s, {1, 2}, 1);
    const double count = std::sqrt(double(d)) * ball_volume(d - 1, win.r) * si.value;
    EXPECT_NEAR(count / limit_expected_count(win, d), 1.0, 1e-3);
    EXPECT_EQ(si.std_error, 0.0);
  }
}

TEST(LimitConstant, IntegrandIsAProbabilityWeight) {
  IntegralSettings s{-4.0, 2.0, 0.5, 20};
  const auto si = score_integral(Score{1, -1}, 2, LimitWindow{5.0, -6.0, 2.5}, s, {5, 0}, 0);
  for (std::size_t j = 0; j < si.h.size(); ++j) {
    EXPECT_GE(si.mean_score[j], 0.0);
    EXPECT_LE(si.mean_score[j], 1.0);
    EXPECT_NEAR(si.integrand[j], si.mean_score[j] * std::exp(2 * si.h[j]), 1e-12);
  }
  EXPECT_GT(si.mean_score.front(), 0.9);  // deep below the process a point is extreme
  EXPECT_LT(si.mean_score.back(), 0.1);
}

TEST(LimitConstant, SmokeBothPositive) {
  auto cfg = small_config({1e4}, 8);
  cfg.threads = 0;
  cfg.integral.reps = 8;
  cfg.integral.h_step = 0.5;
  const auto e = limit_constant_two_ways(1, 0, cfg);
  EXPECT_GT(e.direct_ratio, 0.0);
  EXPECT_GT(e.integral_estimate, 0.0);
  EXPECT_THROW(limit_constant_two_ways(0, 0, cfg), std::invalid_argument);
}

TEST(ConjectureProbe, ReducesToFirstLayerAndIsNonnegative) {
  auto cfg = small_config({2000.0}, 4);
  const double t = 1.0 / std::pow(2000.0, 2.0 / 3.0) * 1.5;
  ASSERT_EQ(cs_depth(2000.0, t, 2), 1);
  const auto rows = conjecture_cs_probe({2000.0}, t, cfg);
  const auto ref = run_experiment(cfg);
  ASSERT_EQ(rows.size(), 4u);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].n, 1);
    EXPECT_EQ(rows[i].N, ref.rows[i].N);
    EXPECT_NEAR(rows[i].normalized, rows[i].N * std::pow(2000.0, -1.0 / 3.0), 1e-12);
  }
  EXPECT_THROW(conjecture_cs_probe({10.0}, 0.01, cfg), std::invalid_argument);
}

TEST(ConjectureProbe, GrowingDepthSmoke) {
  auto cfg = small_config({1e4, 1e5}, 3);
  cfg.threads = 0;
  const auto rows = conjecture_cs_probe({1e4, 1e5}, 0.5, cfg);
  std::vector<double> a, b;
  for (const auto& r : rows) {
    EXPECT_GE(r.normalized, 0.0);
    (r.lambda == 1e4 ? a : b).push_back(r.normalized);
  }
  EXPECT_TRUE(std::isfinite(stats::median(a)));
  EXPECT_TRUE(std::isfinite(stats::median(b)));
  std::ostringstream os;
  write_cs_csv(rows, os);
  EXPECT_EQ(os.str().substr(0, 32), "lambda,rep,n,N,normalized,presen");
}
