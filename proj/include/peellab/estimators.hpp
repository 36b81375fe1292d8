#pragma once

// Monte Carlo orchestration: seeded replications run on a worker pool and are
// folded in replication order, so outputs do not depend on the thread count.

#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "peellab/detail/format.hpp"
#include "peellab/detail/log.hpp"
#include "peellab/errors.hpp"
#include "peellab/floating_sandwich.hpp"
#include "peellab/peeling.hpp"
#include "peellab/polytope_model.hpp"
#include "peellab/rescaled_conelike.hpp"
#include "peellab/sampling.hpp"
#include "peellab/stats.hpp"

namespace peellab {

struct IntegralSettings {
  double h_lo = -6.0;
  double h_hi = 3.0;
  double h_step = 0.25;
  int reps = 200;
};

struct ExperimentConfig {
  nlohmann::json polytope = "cube";  // built-in name, {"name", "param"}, or {"dim", "halfspaces"}
  int dim = 2;
  std::vector<double> lambda_grid;
  std::vector<int> n{1};
  std::vector<int> k{0};
  int reps = 10;
  std::uint64_t seed = 1;
  std::optional<double> alpha_override;
  LimitWindow window{6.0, -8.0, 3.0};
  IntegralSettings integral;
  bool total_layers = false;
  bool sandwich = false;
  bool record_runtime = false;
  int threads = 0;  // 0: PEELLAB_THREADS, else hardware concurrency

  int max_n() const { return *std::max_element(n.begin(), n.end()); }

  HPolytope body() const {
    if (polytope.is_string()) return HPolytope::builtin(polytope.get<std::string>(), dim);
    if (polytope.is_object() && polytope.contains("name"))
      return HPolytope::builtin(polytope["name"].get<std::string>(), dim, polytope.value("param", 1.0));
    if (polytope.is_object()) {
      HPolytope k = HPolytope::from_json(polytope);
      if (k.dim() != dim) throw SchemaError("polytope.dim", "differs from dim");
      return k;
    }
    throw SchemaError("polytope", "expected a name or an object");
  }

  void validate() const {
    if (dim < 2) throw SchemaError("dim", "must be at least 2");
    if (lambda_grid.empty()) throw SchemaError("lambda_grid", "must not be empty");
    for (std::size_t i = 0; i < lambda_grid.size(); ++i) {
      if (!(lambda_grid[i] > 0) || !std::isfinite(lambda_grid[i])) throw SchemaError("lambda_grid", "entries must be positive");
      if (i > 0 && !(lambda_grid[i] > lambda_grid[i - 1])) throw SchemaError("lambda_grid", "must be increasing");
    }
    if (n.empty()) throw SchemaError("n", "must not be empty");
    for (int v : n)
      if (v < 1) throw SchemaError("n", "layers start at 1");
    for (int v : k)
      if (v < 0 || v >= dim) throw SchemaError("k", "face dimension out of range");
    if (reps < 2) throw SchemaError("reps", "at least 2 replications required");
    if (threads < 0) throw SchemaError("threads", "must be nonnegative");
    try {
      window.validate();
    } catch (const std::invalid_argument& e) {
      throw SchemaError("window", e.what());
    }
    if (!(integral.h_lo < integral.h_hi) || !(integral.h_step > 0)) throw SchemaError("integral", "bad h grid");
    if (integral.reps < 2) throw SchemaError("integral.reps", "at least 2 replications required");
    if (alpha_override && !(*alpha_override > 0)) throw SchemaError("alpha_override", "must be positive");
    body();
  }
};

namespace detail {

inline const nlohmann::json& require(const nlohmann::json& j, const std::string& key) {
  if (!j.contains(key)) throw SchemaError(key, "missing");
  return j[key];
}

template <class T>
T get_as(const nlohmann::json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw SchemaError(key, "wrong type");
  }
}

inline std::vector<int> int_or_list(const nlohmann::json& v, const std::string& key) {
  if (v.is_number_integer()) return {v.get<int>()};
  if (!v.is_array()) throw SchemaError(key, "integer or array of integers required");
  std::vector<int> out;
  for (const auto& e : v) {
    if (!e.is_number_integer()) throw SchemaError(key, "integer entries required");
    out.push_back(e.get<int>());
  }
  return out;
}

}  // namespace detail

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw SchemaError("<root>", "object required");
  static const std::vector<std::string> known{"polytope", "dim", "lambda_grid", "n", "k", "reps", "seed",
                                              "alpha_override", "window", "integral", "total_layers", "sandwich",
                                              "record_runtime", "threads"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (std::find(known.begin(), known.end(), it.key()) == known.end()) throw SchemaError(it.key(), "unknown key");
  ExperimentConfig c;
  const auto& dim = detail::require(j, "dim");
  if (!dim.is_number_integer()) throw SchemaError("dim", "integer required");
  c.dim = dim.get<int>();
  const auto& grid = detail::require(j, "lambda_grid");
  if (!grid.is_array()) throw SchemaError("lambda_grid", "array required");
  for (const auto& v : grid) {
    if (!v.is_number()) throw SchemaError("lambda_grid", "numeric entries required");
    c.lambda_grid.push_back(v.get<double>());
  }
  c.n = detail::int_or_list(detail::require(j, "n"), "n");
  const auto& reps = detail::require(j, "reps");
  if (!reps.is_number_integer()) throw SchemaError("reps", "integer required");
  c.reps = reps.get<int>();
  if (j.contains("polytope")) c.polytope = j["polytope"];
  if (j.contains("k")) c.k = detail::int_or_list(j["k"], "k");
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw SchemaError("seed", "nonnegative integer required");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("alpha_override") && !j["alpha_override"].is_null())
    c.alpha_override = detail::get_as<double>(j["alpha_override"], "alpha_override");
  if (j.contains("window")) {
    const auto& w = j["window"];
    if (!w.is_object()) throw SchemaError("window", "object required");
    c.window.r = detail::get_as<double>(w.value("r", nlohmann::json(c.window.r)), "window.r");
    c.window.h_min = detail::get_as<double>(w.value("h_min", nlohmann::json(c.window.h_min)), "window.h_min");
    c.window.h_max = detail::get_as<double>(w.value("h_max", nlohmann::json(c.window.h_max)), "window.h_max");
  }
  if (j.contains("integral")) {
    const auto& w = j["integral"];
    if (!w.is_object()) throw SchemaError("integral", "object required");
    auto& s = c.integral;
    s.h_lo = detail::get_as<double>(w.value("h_lo", nlohmann::json(s.h_lo)), "integral.h_lo");
    s.h_hi = detail::get_as<double>(w.value("h_hi", nlohmann::json(s.h_hi)), "integral.h_hi");
    s.h_step = detail::get_as<double>(w.value("h_step", nlohmann::json(s.h_step)), "integral.h_step");
    s.reps = detail::get_as<int>(w.value("reps", nlohmann::json(s.reps)), "integral.reps");
  }
  for (const char* flag : {"total_layers", "sandwich", "record_runtime"})
    if (j.contains(flag) && !j[flag].is_boolean()) throw SchemaError(flag, "boolean required");
  c.total_layers = j.value("total_layers", false);
  c.sandwich = j.value("sandwich", false);
  c.record_runtime = j.value("record_runtime", false);
  if (j.contains("threads")) c.threads = detail::get_as<int>(j["threads"], "threads");
  c.validate();
  return c;
}

inline nlohmann::json config_to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["polytope"] = c.polytope;
  j["dim"] = c.dim;
  j["lambda_grid"] = c.lambda_grid;
  j["n"] = c.n;
  j["k"] = c.k;
  j["reps"] = c.reps;
  j["seed"] = c.seed;
  j["alpha_override"] = c.alpha_override ? nlohmann::json(*c.alpha_override) : nlohmann::json(nullptr);
  j["window"] = {{"r", c.window.r}, {"h_min", c.window.h_min}, {"h_max", c.window.h_max}};
  j["integral"] = {{"h_lo", c.integral.h_lo}, {"h_hi", c.integral.h_hi}, {"h_step", c.integral.h_step},
                   {"reps", c.integral.reps}};
  j["total_layers"] = c.total_layers;
  j["sandwich"] = c.sandwich;
  j["record_runtime"] = c.record_runtime;
  return j;
}

// ---- worker pool ---------------------------------------------------------

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("PEELLAB_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// Runs f(i) for i in [0, count) on `threads` workers; the first exception is rethrown.
template <class F>
void parallel_for(std::size_t count, int threads, F&& f) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, threads)), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < count;) {
        try {
          f(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!err) err = std::current_exception();
          next = count;
        }
      }
    });
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

// ---- replications --------------------------------------------------------

struct ReplicationRow {
  double lambda = 0;
  int rep = 0;
  int n = 0;
  int k = 0;
  double N = 0;
  double V = 0;
  int total_layers = -1;    // -1: not requested
  int sandwich_event = -1;  // -1: not requested or outside the corner regime
  double runtime_ms = 0;
  std::string flag = "ok";  // ok | short (fewer than n layers) | failed
};

struct StatSummary {
  std::string statistic;  // N, V or total_layers
  double lambda = 0;
  int n = 0;
  int k = -1;
  std::size_t count = 0;
  double mean = 0, variance = 0, std_error = 0;
  double ratio_mean = 0, ratio_variance = 0;  // divided by log^{d-1} lambda
  double ks = 0;
  std::size_t short_reps = 0;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<ReplicationRow> rows;
  std::vector<StatSummary> summaries;
  std::size_t failed = 0;
  std::vector<std::string> failures;
  // Slope of mean N against log^{d-1} lambda per "n,k"; log-log slope of total layers.
  std::map<std::string, double> slopes;

  std::vector<double> samples(const std::string& stat, double lambda, int n, int k) const {
    std::vector<double> out;
    std::vector<int> seen;
    for (const auto& r : rows) {
      if (r.flag == "failed" || r.lambda != lambda) continue;
      if (stat == "N" && r.n == n && r.k == k) out.push_back(r.N);
      if (stat == "V" && r.n == n && r.k == config.k.front()) out.push_back(r.V);
      if (stat == "total_layers" && r.n == config.n.front() && r.k == config.k.front()) out.push_back(r.total_layers);
    }
    return out;
  }

  const StatSummary* find(const std::string& stat, double lambda, int n, int k = -1) const {
    for (const auto& s : summaries)
      if (s.statistic == stat && s.lambda == lambda && s.n == n && s.k == k) return &s;
    return nullptr;
  }
};

inline Seed replication_seed(std::uint64_t master, double lambda, int rep) {
  return child_seed(Seed{master, 0}, std::bit_cast<std::uint64_t>(lambda), static_cast<std::uint64_t>(rep));
}

inline double log_power(double lambda, int d) { return std::pow(std::log(lambda), d - 1); }

namespace detail {

// Points of ps whose ids appear in the sorted list ids.
inline PointSet subset_by_ids(const PointSet& ps, const std::vector<PointId>& ids) {
  PointSet out(ps.dim());
  for (std::size_t i = 0; i < ps.size(); ++i)
    if (std::binary_search(ids.begin(), ids.end(), ps.id(i))) out.add(ps.coord(i), ps.id(i));
  return out;
}

inline std::vector<ReplicationRow> run_replication(const ExperimentConfig& cfg, const HPolytope& body, double lambda,
                                                   int rep) {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<ReplicationRow> rows;
  auto base = [&](int n, int k) {
    ReplicationRow r;
    r.lambda = lambda;
    r.rep = rep;
    r.n = n;
    r.k = k;
    return r;
  };
  try {
    const PointSet ps = sample_poisson(body, lambda, replication_seed(cfg.seed, lambda, rep));
    const int nmax = cfg.max_n();
    const PeelingResult pr = peel(ps, PeelOptions{nmax, true});
    int total = -1;
    if (cfg.total_layers)
      total = pr.leftover.empty() ? pr.num_layers() : nmax + total_layers(subset_by_ids(ps, pr.leftover));
    std::optional<FloatingParams> fp;
    if (cfg.sandwich && lambda > std::exp(std::exp(1.0))) fp = sandwich_params(lambda * body.volume(), cfg.dim, cfg.alpha_override);
    for (int n : cfg.n) {
      int event = -1;
      if (fp && n <= pr.num_layers()) {
        try {
          event = sandwich_event(ps, pr, body, *fp, n).event ? 1 : 0;
        } catch (const OutOfRegime&) {
        }
      }
      const bool present = n <= pr.num_layers();
      const LayerStats ls = present ? layer_stats(pr, body, n) : LayerStats{};
      for (int k : cfg.k) {
        ReplicationRow r = base(n, k);
        r.N = present ? static_cast<double>(ls.f.at(k)) : 0.0;
        r.V = present ? ls.defect_volume : body.volume();
        r.flag = present ? "ok" : "short";
        r.total_layers = total;
        r.sandwich_event = event;
        rows.push_back(r);
      }
    }
  } catch (const Error& e) {
    for (int n : cfg.n)
      for (int k : cfg.k) {
        ReplicationRow r = base(n, k);
        r.flag = "failed";
        rows.push_back(r);
      }
    log::warn("replication lambda=" + fmt::num(lambda) + " rep=" + std::to_string(rep) + " failed: " + e.what());
  }
  if (cfg.record_runtime) {
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    for (auto& r : rows) r.runtime_ms = std::round(ms * 1000.0) / 1000.0;
  }
  return rows;
}

inline StatSummary summarize(const std::string& stat, double lambda, int n, int k, const std::vector<double>& x, int d) {
  StatSummary s;
  s.statistic = stat;
  s.lambda = lambda;
  s.n = n;
  s.k = k;
  s.count = x.size();
  s.mean = stats::mean(x);
  s.variance = stats::variance(x);
  s.std_error = stats::std_error(x);
  const double lp = log_power(lambda, d);
  s.ratio_mean = s.mean / lp;
  s.ratio_variance = s.variance / lp;
  s.ks = x.size() >= 2 ? stats::ks_standard_normal(x) : 1.0;
  return s;
}

}  // namespace detail

inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const HPolytope body = cfg.body();
  ExperimentResult res;
  res.config = cfg;
  const std::size_t per = static_cast<std::size_t>(cfg.reps);
  std::vector<std::vector<ReplicationRow>> out(cfg.lambda_grid.size() * per);
  parallel_for(out.size(), resolve_threads(cfg.threads), [&](std::size_t i) {
    out[i] = detail::run_replication(cfg, body, cfg.lambda_grid[i / per], static_cast<int>(i % per));
  });
  for (auto& o : out)
    for (auto& r : o) res.rows.push_back(std::move(r));

  const int d = cfg.dim;
  for (double lambda : cfg.lambda_grid) {
    std::size_t failed = 0;
    for (const auto& r : res.rows)
      if (r.lambda == lambda && r.flag == "failed" && r.n == cfg.n.front() && r.k == cfg.k.front()) ++failed;
    res.failed += failed;
    if (failed) res.failures.push_back("lambda=" + fmt::num(lambda) + ": " + std::to_string(failed) + " failed");
    for (int n : cfg.n) {
      std::size_t short_reps = 0;
      for (const auto& r : res.rows)
        if (r.lambda == lambda && r.n == n && r.k == cfg.k.front() && r.flag == "short") ++short_reps;
      for (int k : cfg.k) {
        auto s = detail::summarize("N", lambda, n, k, res.samples("N", lambda, n, k), d);
        s.short_reps = short_reps;
        res.summaries.push_back(s);
      }
      auto v = detail::summarize("V", lambda, n, -1, res.samples("V", lambda, n, -1), d);
      v.short_reps = short_reps;
      res.summaries.push_back(v);
    }
    if (cfg.total_layers)
      res.summaries.push_back(detail::summarize("total_layers", lambda, 0, -1, res.samples("total_layers", lambda, 0, -1), d));
  }
  if (cfg.lambda_grid.size() >= 2) {
    std::vector<double> x, lx;
    for (double l : cfg.lambda_grid) {
      x.push_back(log_power(l, d));
      lx.push_back(std::log(l));
    }
    for (int n : cfg.n)
      for (int k : cfg.k) {
        std::vector<double> y;
        for (double l : cfg.lambda_grid) y.push_back(res.find("N", l, n, k)->mean);
        res.slopes["N:" + std::to_string(n) + "," + std::to_string(k)] = stats::fit_line(x, y).slope;
      }
    if (cfg.total_layers) {
      std::vector<double> y;
      bool ok = true;
      for (double l : cfg.lambda_grid) {
        const double m = res.find("total_layers", l, 0)->mean;
        ok = ok && m > 0;
        y.push_back(std::log(std::max(m, 1e-300)));
      }
      if (ok) res.slopes["total_layers"] = stats::fit_line(lx, y).slope;
    }
  }
  return res;
}

inline void write_rows_csv(const std::vector<ReplicationRow>& rows, std::ostream& os) {
  os << "lambda,rep,n,k,N,V,total_layers,sandwich_event,runtime_ms,flag\n";
  for (const auto& r : rows)
    os << fmt::num(r.lambda) << ',' << r.rep << ',' << r.n << ',' << r.k << ',' << fmt::num(r.N) << ','
       << fmt::num(r.V) << ',' << r.total_layers << ',' << r.sandwich_event << ',' << fmt::num(r.runtime_ms) << ','
       << r.flag << '\n';
}

inline nlohmann::json summary_json(const ExperimentResult& res) {
  nlohmann::json j;
  j["config"] = config_to_json(res.config);
  j["failed"] = res.failed;
  j["failures"] = res.failures;
  j["summaries"] = nlohmann::json::array();
  for (const auto& s : res.summaries)
    j["summaries"].push_back({{"statistic", s.statistic},
                              {"lambda", s.lambda},
                              {"n", s.n},
                              {"k", s.k},
                              {"count", s.count},
                              {"mean", s.mean},
                              {"variance", s.variance},
                              {"std_error", s.std_error},
                              {"ratio_mean", s.ratio_mean},
                              {"ratio_variance", s.ratio_variance},
                              {"ks", s.ks},
                              {"short_reps", s.short_reps}});
  j["slopes"] = res.slopes;
  return j;
}

// ---- CLT -----------------------------------------------------------------

struct CltDiagnostic {
  std::size_t count = 0;
  double mean = 0, sd = 0;
  double ks = 0;
  double p_value = 0;
  // (standardized value, empirical CDF, normal CDF) for plotting.
  std::vector<std::array<double, 3>> curve;
};

inline CltDiagnostic clt_diagnostic(const std::vector<double>& samples, std::size_t min_reps = 200) {
  if (samples.size() < min_reps)
    throw InsufficientReplications("CLT diagnostic needs " + std::to_string(min_reps) + " replications, got " +
                                   std::to_string(samples.size()));
  CltDiagnostic c;
  c.count = samples.size();
  c.mean = stats::mean(samples);
  c.sd = std::sqrt(stats::variance(samples));
  c.ks = stats::ks_standard_normal(samples);
  c.p_value = stats::ks_pvalue(c.ks, static_cast<double>(c.count));
  std::vector<double> z(samples);
  std::sort(z.begin(), z.end());
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double x = c.sd > 0 ? (z[i] - c.mean) / c.sd : 0.0;
    c.curve.push_back({x, static_cast<double>(i + 1) / z.size(), stats::normal_cdf(x)});
  }
  return c;
}

// ---- total layer count -----------------------------------------------------

struct ExponentFit {
  std::vector<double> lambda;
  std::vector<double> mean;
  std::vector<double> std_error;
  double slope = 0;
  double intercept = 0;
};

inline stats::LineFit power_law_fit(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0 && y[i] > 0)) throw std::invalid_argument("power law fit needs positive data");
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  return stats::fit_line(lx, ly);
}

// Mean total number of layers per lambda and its log-log slope.
inline ExponentFit layer_count_exponent(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.lambda_grid.size() < 4) throw SchemaError("lambda_grid", "exponent fit needs at least 4 intensities");
  const HPolytope body = cfg.body();
  const std::size_t per = static_cast<std::size_t>(cfg.reps);
  std::vector<double> counts(cfg.lambda_grid.size() * per);
  parallel_for(counts.size(), resolve_threads(cfg.threads), [&](std::size_t i) {
    const double lambda = cfg.lambda_grid[i / per];
    const PointSet ps = sample_poisson(body, lambda, replication_seed(cfg.seed, lambda, static_cast<int>(i % per)));
    counts[i] = total_layers(ps);
  });
  ExponentFit f;
  for (std::size_t j = 0; j < cfg.lambda_grid.size(); ++j) {
    const std::vector<double> x(counts.begin() + j * per, counts.begin() + (j + 1) * per);
    f.lambda.push_back(cfg.lambda_grid[j]);
    f.mean.push_back(stats::mean(x));
    f.std_error.push_back(stats::std_error(x));
  }
  const auto lf = power_law_fit(f.lambda, f.mean);
  f.slope = lf.slope;
  f.intercept = lf.intercept;
  return f;
}

// ---- limit constant two ways ---------------------------------------------

// (d-1)-dimensional measure of {x <= 1, sum x = 0}: a regular simplex of edge d sqrt 2.
inline double simplex_S_volume(int d) {
  const double a = d * std::sqrt(2.0);
  return std::pow(a, d - 1) / std::tgamma(static_cast<double>(d)) * std::sqrt(d / std::pow(2.0, d - 1));
}

inline double trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0;
  for (std::size_t i = 1; i < x.size(); ++i) s += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
  return s;
}

inline std::vector<double> h_grid(const IntegralSettings& s) {
  std::vector<double> g;
  const int m = static_cast<int>(std::llround((s.h_hi - s.h_lo) / s.h_step));
  for (int i = 0; i <= m; ++i) g.push_back(s.h_lo + (s.h_hi - s.h_lo) * i / m);
  return g;
}

struct ScoreIntegral {
  std::vector<double> h;
  std::vector<double> mean_score;  // E[xi((0,h), P)]
  std::vector<double> integrand;   // mean_score * e^{dh}
  double value = 0;
  double std_error = 0;
};

// Estimates int E[xi((0,h), P)] e^{dh} dh by trapezoid quadrature; each
// replication reuses one limit-process sample for every grid height.
inline ScoreIntegral score_integral(const Score& score, int d, const LimitWindow& win, const IntegralSettings& s,
                                    Seed seed, int threads = 0) {
  ScoreIntegral out;
  out.h = h_grid(s);
  const std::size_t m = out.h.size();
  std::vector<std::vector<double>> vals(static_cast<std::size_t>(s.reps));
  parallel_for(vals.size(), resolve_threads(threads), [&](std::size_t r) {
    const PointSet base = sample_limit_process(win, d, child_seed(seed, r));
    const PointId fresh = static_cast<PointId>(base.size());
    vals[r].resize(m);
    for (std::size_t j = 0; j < m; ++j) {
      if (score.n == 0) {
        vals[r][j] = 1.0;
        continue;
      }
      PointSet ys = base;
      std::vector<double> w(d, 0.0);
      w[d - 1] = out.h[j];
      ys.add(w, fresh);
      vals[r][j] = detail::score_of(ys, fresh, score);
    }
  });
  std::vector<double> per_rep;
  for (const auto& v : vals) {
    std::vector<double> f(m);
    for (std::size_t j = 0; j < m; ++j) f[j] = v[j] * std::exp(d * out.h[j]);
    per_rep.push_back(trapezoid(out.h, f));
  }
  for (std::size_t j = 0; j < m; ++j) {
    double acc = 0;
    for (const auto& v : vals) acc += v[j];
    out.mean_score.push_back(acc / vals.size());
    out.integrand.push_back(out.mean_score.back() * std::exp(d * out.h[j]));
  }
  out.value = trapezoid(out.h, out.integrand);
  out.std_error = stats::std_error(per_rep);
  return out;
}

struct LimitConstantEstimate {
  int n = 1;
  int k = 0;
  double lambda = 0;
  double direct_ratio = 0;
  double direct_std_error = 0;
  double integral_estimate = 0;
  double integral_std_error = 0;
  double simplex_volume = 0;
  double h_integral = 0;
  ScoreIntegral integral;

  double relative_difference() const { return std::fabs(direct_ratio - integral_estimate) / integral_estimate; }
};

// k >= 0: k-face count of layer n; the defect-volume score is not supported.
inline LimitConstantEstimate limit_constant_two_ways(int n, int k, const ExperimentConfig& cfg) {
  cfg.validate();
  if (n < 1 || k < 0 || k >= cfg.dim) throw std::invalid_argument("limit constant needs n >= 1 and 0 <= k < d");
  const int d = cfg.dim;
  const HPolytope body = cfg.body();
  LimitConstantEstimate e;
  e.n = n;
  e.k = k;
  e.lambda = cfg.lambda_grid.back();

  const std::size_t f0 = body.vertices().size();
  std::vector<double> counts(static_cast<std::size_t>(cfg.reps));
  parallel_for(counts.size(), resolve_threads(cfg.threads), [&](std::size_t r) {
    const PointSet ps = sample_poisson(body, e.lambda, replication_seed(cfg.seed, e.lambda, static_cast<int>(r)));
    const PeelingResult pr = peel(ps, PeelOptions{n, true});
    counts[r] = n <= pr.num_layers() ? static_cast<double>(layer_stats(pr, body, n).f.at(k)) : 0.0;
  });
  const double scale = log_power(e.lambda, d) * static_cast<double>(f0);
  e.direct_ratio = stats::mean(counts) / scale;
  e.direct_std_error = stats::std_error(counts) / scale;

  e.simplex_volume = simplex_S_volume(d);
  const double c = std::pow(d, -d + 1.5) * e.simplex_volume;
  e.integral = score_integral(Score{n, k}, d, cfg.window, cfg.integral, Seed{cfg.seed, 1}, cfg.threads);
  e.h_integral = e.integral.value;
  e.integral_estimate = c * e.integral.value;
  e.integral_std_error = c * e.integral.std_error;
  return e;
}

// ---- layer count at a growing depth ----------------------------------------

struct CsProbeRow {
  double lambda = 0;
  int rep = 0;
  int n = 0;
  double N = 0;
  double normalized = 0;  // lambda^{-(d-1)/(d+1)} N
  bool present = true;
};

inline int cs_depth(double lambda, double t, int d) {
  return static_cast<int>(std::floor(t * std::pow(lambda, 2.0 / (d + 1))));
}

inline std::vector<CsProbeRow> conjecture_cs_probe(const std::vector<double>& lambdas, double t,
                                                   const ExperimentConfig& cfg) {
  const HPolytope body = cfg.body();
  const int d = cfg.dim;
  for (double l : lambdas)
    if (cs_depth(l, t, d) < 1) throw std::invalid_argument("t * lambda^{2/(d+1)} must be at least 1");
  const std::size_t per = static_cast<std::size_t>(cfg.reps);
  std::vector<CsProbeRow> rows(lambdas.size() * per);
  parallel_for(rows.size(), resolve_threads(cfg.threads), [&](std::size_t i) {
    CsProbeRow& r = rows[i];
    r.lambda = lambdas[i / per];
    r.rep = static_cast<int>(i % per);
    r.n = cs_depth(r.lambda, t, d);
    const PointSet ps = sample_poisson(body, r.lambda, replication_seed(cfg.seed, r.lambda, r.rep));
    const PeelingResult pr = peel(ps, PeelOptions{r.n, false});
    r.present = r.n <= pr.num_layers();
    if (r.present) {
      r.N = static_cast<double>(relative_hull(detail::subset_by_ids(ps, pr.layer_ids[r.n - 1]), false).vertex_ids.size());
    }
    r.normalized = std::pow(r.lambda, -(d - 1.0) / (d + 1.0)) * r.N;
  });
  return rows;
}

inline void write_cs_csv(const std::vector<CsProbeRow>& rows, std::ostream& os) {
  os << "lambda,rep,n,N,normalized,present\n";
  for (const auto& r : rows)
    os << fmt::num(r.lambda) << ',' << r.rep << ',' << r.n << ',' << fmt::num(r.N) << ',' << fmt::num(r.normalized)
       << ',' << (r.present ? 1 : 0) << '\n';
}

}  // namespace peellab
