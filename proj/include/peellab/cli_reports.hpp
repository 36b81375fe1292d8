#pragma once

// Command line front end: config loading, run manifests, SVG plots and the
// subcommand dispatcher used by the peellab tool.

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "peellab/detail/format.hpp"
#include "peellab/estimators.hpp"
#include "peellab/floating_sandwich.hpp"
#include "peellab/macbeath_caps.hpp"
#include "peellab/peeling.hpp"
#include "peellab/rescaled_conelike.hpp"
#include "peellab/sampling.hpp"

#ifndef PEELLAB_VERSION
#define PEELLAB_VERSION "1.0.0"
#endif

namespace peellab {

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("<file>", "cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError("<file>", std::string("invalid JSON: ") + e.what());
  }
  return config_from_json(j);
}

// ---- manifests -----------------------------------------------------------

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Hash of the canonical (key-sorted) JSON form.
inline std::string config_hash(const nlohmann::json& config) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << fnv1a64(config.dump());
  return os.str();
}

inline std::string utc_timestamp(std::chrono::system_clock::time_point t = std::chrono::system_clock::now()) {
  const std::time_t tt = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct RunManifest {
  std::string tool_version = PEELLAB_VERSION;
  std::string command;
  nlohmann::json config;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string started;
  std::string finished;
  std::vector<std::string> outputs;

  nlohmann::json to_json() const {
    return {{"tool", "peellab"},     {"tool_version", tool_version}, {"command", command},
            {"config", config},      {"config_hash", config_hash},   {"seed", seed},
            {"started", started},    {"finished", finished},         {"outputs", outputs}};
  }

  void write(const std::filesystem::path& dir) const {
    std::ofstream(dir / "manifest.json") << to_json().dump(2) << '\n';
  }
};

inline RunManifest start_manifest(const std::string& command, const nlohmann::json& config, std::uint64_t seed) {
  RunManifest m;
  m.command = command;
  m.config = config;
  m.config_hash = config_hash(config);
  m.seed = seed;
  m.started = utc_timestamp();
  return m;
}

// ---- SVG -----------------------------------------------------------------

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotOptions {
  std::string title;
  std::string xlabel;
  std::string ylabel;
  bool logx = false;
  bool logy = false;
  int width = 640;
  int height = 420;
};

inline std::string xml_escape(const std::string& s) {
  std::string o;
  for (char c : s) {
    if (c == '<') o += "&lt;";
    else if (c == '>') o += "&gt;";
    else if (c == '&') o += "&amp;";
    else o += c;
  }
  return o;
}

// Line plot with markers; nonpositive values are dropped on log axes.
inline std::string svg_line_plot(const std::vector<PlotSeries>& series, const PlotOptions& opt) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  auto tx = [&](double v) { return opt.logx ? std::log10(v) : v; };
  auto ty = [&](double v) { return opt.logy ? std::log10(v) : v; };
  auto usable = [&](double x, double y) {
    return std::isfinite(x) && std::isfinite(y) && (!opt.logx || x > 0) && (!opt.logy || y > 0);
  };
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i)
      if (usable(s.x[i], s.y[i])) {
        x0 = std::min(x0, tx(s.x[i]));
        x1 = std::max(x1, tx(s.x[i]));
        y0 = std::min(y0, ty(s.y[i]));
        y1 = std::max(y1, ty(s.y[i]));
      }
  if (x0 > x1) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 - x0 < 1e-12) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 < 1e-12) y0 -= 0.5, y1 += 0.5;
  const double ml = 70, mr = 20, mt = 40, mb = 55;
  const double pw = opt.width - ml - mr, ph = opt.height - mt - mb;
  auto px = [&](double v) { return ml + (tx(v) - x0) / (x1 - x0) * pw; };
  auto py = [&](double v) { return mt + ph - (ty(v) - y0) / (y1 - y0) * ph; };
  std::ostringstream o;
  o << std::setprecision(6);
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opt.width << "\" height=\"" << opt.height
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << opt.width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << xml_escape(opt.title)
    << "</text>\n";
  o << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double fx = x0 + (x1 - x0) * t / 4, fy = y0 + (y1 - y0) * t / 4;
    const double gx = ml + pw * t / 4, gy = mt + ph - ph * t / 4;
    const double lx = opt.logx ? std::pow(10.0, fx) : fx, ly = opt.logy ? std::pow(10.0, fy) : fy;
    o << "<text x=\"" << gx << "\" y=\"" << mt + ph + 16 << "\" text-anchor=\"middle\">" << fmt::num(std::round(lx * 1e4) / 1e4)
      << "</text>\n";
    o << "<text x=\"" << ml - 6 << "\" y=\"" << gy + 4 << "\" text-anchor=\"end\">" << fmt::num(std::round(ly * 1e4) / 1e4)
      << "</text>\n";
  }
  o << "<text x=\"" << ml + pw / 2 << "\" y=\"" << opt.height - 12 << "\" text-anchor=\"middle\">"
    << xml_escape(opt.xlabel) << (opt.logx ? " (log)" : "") << "</text>\n";
  o << "<text x=\"16\" y=\"" << mt + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << mt + ph / 2
    << ")\">" << xml_escape(opt.ylabel) << (opt.logy ? " (log)" : "") << "</text>\n";
  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const char* col = colors[si % 6];
    o << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i)
      if (usable(s.x[i], s.y[i])) o << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
    o << "\"/>\n";
    for (std::size_t i = 0; i < s.x.size(); ++i)
      if (usable(s.x[i], s.y[i]))
        o << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i]) << "\" r=\"3\" fill=\"" << col << "\"/>\n";
    o << "<text x=\"" << ml + 10 << "\" y=\"" << mt + 16 + 16 * si << "\" fill=\"" << col << "\">" << xml_escape(s.name)
      << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

// ---- report from a summary ---------------------------------------------------

// Writes ratio and KS plots plus a markdown table; returns the file names written.
inline std::vector<std::string> write_report(const nlohmann::json& summary, const std::filesystem::path& dir) {
  if (!summary.contains("summaries") || !summary["summaries"].is_array())
    throw SchemaError("summaries", "array required in summary file");
  std::filesystem::create_directories(dir);
  std::map<std::string, PlotSeries> ratio, ks;
  std::ostringstream md;
  md << "# peellab summary\n\n| statistic | lambda | n | k | count | mean | variance | mean / log^(d-1) | KS |\n"
     << "|---|---|---|---|---|---|---|---|---|\n";
  for (const auto& s : summary["summaries"]) {
    const std::string stat = s.at("statistic").get<std::string>();
    const double lambda = s.at("lambda").get<double>();
    const std::string key = stat + " n=" + std::to_string(s.at("n").get<int>()) +
                            (s.at("k").get<int>() >= 0 ? " k=" + std::to_string(s.at("k").get<int>()) : "");
    auto& r = ratio[key];
    r.name = key;
    r.x.push_back(std::log(lambda));
    r.y.push_back(s.at("ratio_mean").get<double>());
    if (stat == "N") {
      auto& q = ks[key];
      q.name = key;
      q.x.push_back(lambda);
      q.y.push_back(s.at("ks").get<double>());
    }
    md << '|' << stat << '|' << fmt::num(lambda) << '|' << s.at("n").get<int>() << '|' << s.at("k").get<int>() << '|'
       << s.at("count").get<std::size_t>() << '|' << fmt::num(s.at("mean").get<double>()) << '|'
       << fmt::num(s.at("variance").get<double>()) << '|' << fmt::num(s.at("ratio_mean").get<double>()) << '|'
       << fmt::num(s.at("ks").get<double>()) << "|\n";
  }
  std::vector<PlotSeries> rs, ks_series;
  for (auto& [k, v] : ratio)
    if (k.rfind("N", 0) == 0) rs.push_back(v);
  for (auto& [k, v] : ks) ks_series.push_back(v);
  std::vector<std::string> files{"ratio_vs_log_lambda.svg", "ks_vs_lambda.svg", "report.md"};
  std::ofstream(dir / files[0]) << svg_line_plot(rs, {"mean N / log^(d-1) lambda", "log lambda", "ratio"});
  std::ofstream(dir / files[1]) << svg_line_plot(ks_series, {"KS distance to the normal law", "lambda", "KS", true, false});
  md << "\n![ratio](" << files[0] << ")\n\n![ks](" << files[1] << ")\n";
  std::ofstream(dir / files[2]) << md.str();
  return files;
}

// ---- dispatcher ------------------------------------------------------------

namespace detail {

inline void write_text(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << text;
}

inline HPolytope cli_body(const std::string& name, int d, double param, const std::string& file) {
  if (!file.empty()) {
    std::ifstream in(file);
    if (!in) throw SchemaError("polytope-file", "cannot open " + file);
    nlohmann::json j;
    in >> j;
    return HPolytope::from_json(j);
  }
  return HPolytope::builtin(name, d, param);
}

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace detail

// Exit codes: 0 success, 1 usage or configuration error, 2 runtime error.
inline int cli_dispatch(int argc, const char* const* argv, std::ostream& out = std::cout,
                        std::ostream& err = std::cerr) {
  CLI::App app{"peellab: convex hull peeling of Poisson processes in polytopes"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(PEELLAB_VERSION));

  struct BodyOpts {
    std::string name = "cube";
    std::string file;
    int dim = 2;
    double param = 1.0;
  };
  auto add_body = [](CLI::App* s, BodyOpts& b) {
    s->add_option("--polytope", b.name, "built-in body: cube, simplex, scaled-cube")->capture_default_str();
    s->add_option("--polytope-file", b.file, "JSON H-representation {dim, halfspaces}");
    s->add_option("--dim", b.dim, "dimension")->capture_default_str();
    s->add_option("--param", b.param, "side length for scaled-cube")->capture_default_str();
  };

  // peel
  BodyOpts peel_body;
  double peel_lambda = 1000;
  std::uint64_t peel_seed = 1;
  std::string peel_in, peel_out;
  int peel_layers = 0;
  auto* peel_cmd = app.add_subcommand("peel", "sample one configuration (or read one) and write its layer labels");
  add_body(peel_cmd, peel_body);
  peel_cmd->add_option("--lambda", peel_lambda, "intensity")->capture_default_str();
  peel_cmd->add_option("--seed", peel_seed, "master seed")->capture_default_str();
  peel_cmd->add_option("--in", peel_in, "points CSV (id,x1,..) instead of sampling");
  peel_cmd->add_option("--layers", peel_layers, "stop after this many layers (0: all)");
  peel_cmd->add_option("--out", peel_out, "output CSV (default stdout)");

  // sample
  BodyOpts sample_body;
  double sample_lambda = 1000;
  long long sample_count = -1;
  std::uint64_t sample_seed = 1;
  std::string sample_out, sample_format = "csv";
  auto* sample_cmd = app.add_subcommand("sample", "sample a Poisson (or binomial) point set");
  add_body(sample_cmd, sample_body);
  sample_cmd->add_option("--lambda", sample_lambda, "intensity")->capture_default_str();
  sample_cmd->add_option("--count", sample_count, "fixed number of points instead of Poisson");
  sample_cmd->add_option("--seed", sample_seed, "master seed")->capture_default_str();
  sample_cmd->add_option("--format", sample_format, "csv or bin")->check(CLI::IsMember({"csv", "bin"}));
  sample_cmd->add_option("--out", sample_out, "output file (default stdout, csv only)");

  // estimate
  std::string est_config, est_dir = "peellab_out", est_what = "experiment";
  int est_threads = 0, est_n = 1, est_k = 0;
  double est_t = 0.5;
  auto* est_cmd = app.add_subcommand("estimate", "run a Monte Carlo experiment from a JSON config");
  est_cmd->add_option("--config", est_config, "experiment JSON")->required();
  est_cmd->add_option("--out-dir", est_dir, "output directory")->capture_default_str();
  est_cmd->add_option("--threads", est_threads, "worker count (overrides config and PEELLAB_THREADS)");
  est_cmd->add_option("--what", est_what, "experiment, exponent, limit-constant or cs-probe")
      ->check(CLI::IsMember({"experiment", "exponent", "limit-constant", "cs-probe"}))
      ->capture_default_str();
  est_cmd->add_option("--n", est_n, "layer for limit-constant")->capture_default_str();
  est_cmd->add_option("--k", est_k, "face dimension for limit-constant")->capture_default_str();
  est_cmd->add_option("--t", est_t, "depth factor for cs-probe")->capture_default_str();

  // sandwich-check
  BodyOpts sw_body;
  double sw_lambda = 1e4;
  int sw_n = 1;
  std::uint64_t sw_seed = 1;
  std::optional<double> sw_alpha;
  auto* sw_cmd = app.add_subcommand("sandwich-check", "test whether the first n layers lie in the sandwich set");
  add_body(sw_cmd, sw_body);
  sw_cmd->add_option("--lambda", sw_lambda, "intensity")->capture_default_str();
  sw_cmd->add_option("--n", sw_n, "number of layers")->capture_default_str();
  sw_cmd->add_option("--seed", sw_seed, "master seed")->capture_default_str();
  sw_cmd->add_option("--alpha", sw_alpha, "override of the constant alpha");

  // capcover
  BodyOpts cc_body;
  double cc_s = 1e-4;
  std::optional<double> cc_delta;
  std::uint64_t cc_seed = 1;
  std::size_t cc_samples = 1000, cc_cover = 20000;
  auto* cc_cmd = app.add_subcommand("capcover", "check the dyadic economic cap covering at level s");
  add_body(cc_cmd, cc_body);
  cc_cmd->add_option("--s", cc_s, "cap volume level")->capture_default_str();
  cc_cmd->add_option("--delta", cc_delta, "dyadic base delta");
  cc_cmd->add_option("--seed", cc_seed, "master seed")->capture_default_str();
  cc_cmd->add_option("--samples", cc_samples, "inclusion samples per region")->capture_default_str();
  cc_cmd->add_option("--coverage-samples", cc_cover, "coverage samples")->capture_default_str();

  // rescaled
  int rs_dim = 2, rs_reps = 1, rs_layers = 3;
  double rs_r = 5, rs_hmin = -6, rs_hmax = 2;
  std::uint64_t rs_seed = 1;
  std::string rs_out;
  auto* rs_cmd = app.add_subcommand("rescaled", "cone-like peeling of the limit process; one JSON line per replication");
  rs_cmd->add_option("--dim", rs_dim, "dimension")->capture_default_str();
  rs_cmd->add_option("--r", rs_r, "window radius in v")->capture_default_str();
  rs_cmd->add_option("--h-min", rs_hmin, "lowest height")->capture_default_str();
  rs_cmd->add_option("--h-max", rs_hmax, "highest height")->capture_default_str();
  rs_cmd->add_option("--reps", rs_reps, "replications")->capture_default_str();
  rs_cmd->add_option("--layers", rs_layers, "layers to peel")->capture_default_str();
  rs_cmd->add_option("--seed", rs_seed, "master seed")->capture_default_str();
  rs_cmd->add_option("--out", rs_out, "output JSONL (default stdout)");

  // convexpos
  std::string cp_body = "simplex";
  int cp_n = 4, cp_nmax = 0;
  std::size_t cp_reps = 10000, cp_particles = 2000;
  std::uint64_t cp_seed = 1;
  auto* cp_cmd = app.add_subcommand("convexpos", "probability that n uniform points in a planar body are in convex position");
  cp_cmd->add_option("--polytope", cp_body, "cube or simplex (planar)")->capture_default_str();
  cp_cmd->add_option("--n", cp_n, "number of points")->capture_default_str();
  cp_cmd->add_option("--reps", cp_reps, "plain Monte Carlo replications")->capture_default_str();
  cp_cmd->add_option("--smc-max", cp_nmax, "also run the sequential estimator up to this n");
  cp_cmd->add_option("--particles", cp_particles, "particles for the sequential estimator")->capture_default_str();
  cp_cmd->add_option("--seed", cp_seed, "master seed")->capture_default_str();

  // report
  std::string rep_in, rep_dir = "peellab_report";
  auto* rep_cmd = app.add_subcommand("report", "turn a summary JSON into SVG plots and a markdown table");
  rep_cmd->add_option("--in", rep_in, "summary.json from estimate")->required();
  rep_cmd->add_option("--out-dir", rep_dir, "output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*peel_cmd) {
      PointSet ps(peel_body.dim);
      if (!peel_in.empty()) {
        std::ifstream in(peel_in);
        if (!in) throw detail::ConfigError("cannot open " + peel_in);
        ps = read_points_csv(in);
      } else {
        ps = sample_poisson(detail::cli_body(peel_body.name, peel_body.dim, peel_body.param, peel_body.file),
                            peel_lambda, Seed{peel_seed, 0});
      }
      PeelOptions opt;
      opt.want_complexes = false;
      if (peel_layers > 0) opt.max_layers = peel_layers;
      const PeelingResult pr = peel(ps, opt);
      std::ostringstream os;
      os << "id";
      for (int j = 1; j <= ps.dim(); ++j) os << ",x" << j;
      os << ",layer\n";
      std::vector<std::size_t> order(ps.size());
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ps.id(a) < ps.id(b); });
      for (std::size_t i : order) {
        os << ps.id(i);
        for (int j = 0; j < ps.dim(); ++j) os << ',' << fmt::num(ps.coord(i)[j]);
        os << ',' << pr.label_of(ps.id(i)) << '\n';
      }
      detail::write_text(peel_out, os.str(), out);
    } else if (*sample_cmd) {
      const HPolytope k = detail::cli_body(sample_body.name, sample_body.dim, sample_body.param, sample_body.file);
      const PointSet ps = sample_count >= 0 ? sample_binomial(k, sample_count, Seed{sample_seed, 0})
                                            : sample_poisson(k, sample_lambda, Seed{sample_seed, 0});
      if (sample_format == "bin") {
        if (sample_out.empty()) throw detail::ConfigError("--format bin needs --out");
        std::ofstream f(sample_out, std::ios::binary);
        write_points_binary(ps, f);
      } else {
        std::ostringstream os;
        write_points_csv(ps, os);
        detail::write_text(sample_out, os.str(), out);
      }
    } else if (*est_cmd) {
      ExperimentConfig cfg = load_config(est_config);
      if (est_threads > 0) cfg.threads = est_threads;
      const std::filesystem::path dir(est_dir);
      std::filesystem::create_directories(dir);
      nlohmann::json cj = config_to_json(cfg);
      cj["what"] = est_what;
      if (est_what == "limit-constant") cj["limit"] = {{"n", est_n}, {"k", est_k}};
      if (est_what == "cs-probe") cj["t"] = est_t;
      RunManifest m = start_manifest("estimate", cj, cfg.seed);
      if (est_what == "experiment") {
        const ExperimentResult res = run_experiment(cfg);
        std::ofstream(dir / "rows.csv") << [&] {
          std::ostringstream os;
          write_rows_csv(res.rows, os);
          return os.str();
        }();
        std::ofstream(dir / "summary.json") << summary_json(res).dump(2) << '\n';
        m.outputs = {"rows.csv", "summary.json"};
      } else if (est_what == "exponent") {
        const ExponentFit f = layer_count_exponent(cfg);
        std::ostringstream os;
        os << "lambda,mean_total_layers,std_error\n";
        for (std::size_t i = 0; i < f.lambda.size(); ++i)
          os << fmt::num(f.lambda[i]) << ',' << fmt::num(f.mean[i]) << ',' << fmt::num(f.std_error[i]) << '\n';
        std::ofstream(dir / "exponent.csv") << os.str();
        std::ofstream(dir / "exponent.json")
            << nlohmann::json{{"slope", f.slope}, {"intercept", f.intercept}, {"target", 2.0 / (cfg.dim + 1)}}.dump(2)
            << '\n';
        m.outputs = {"exponent.csv", "exponent.json"};
      } else if (est_what == "limit-constant") {
        const LimitConstantEstimate e = limit_constant_two_ways(est_n, est_k, cfg);
        std::ostringstream os;
        os << "h,mean_score,integrand\n";
        for (std::size_t i = 0; i < e.integral.h.size(); ++i)
          os << fmt::num(e.integral.h[i]) << ',' << fmt::num(e.integral.mean_score[i]) << ','
             << fmt::num(e.integral.integrand[i]) << '\n';
        std::ofstream(dir / "integrand.csv") << os.str();
        std::ofstream(dir / "limit_constant.json") << nlohmann::json{{"n", e.n},
                                                                     {"k", e.k},
                                                                     {"lambda", e.lambda},
                                                                     {"direct_ratio", e.direct_ratio},
                                                                     {"direct_std_error", e.direct_std_error},
                                                                     {"integral_estimate", e.integral_estimate},
                                                                     {"integral_std_error", e.integral_std_error},
                                                                     {"simplex_volume", e.simplex_volume},
                                                                     {"h_integral", e.h_integral},
                                                                     {"relative_difference", e.relative_difference()}}
                                                                      .dump(2)
                                                               << '\n';
        m.outputs = {"integrand.csv", "limit_constant.json"};
      } else {
        const auto rows = conjecture_cs_probe(cfg.lambda_grid, est_t, cfg);
        std::ostringstream os;
        write_cs_csv(rows, os);
        std::ofstream(dir / "cs_probe.csv") << os.str();
        m.outputs = {"cs_probe.csv"};
      }
      m.finished = utc_timestamp();
      m.write(dir);
      out << "wrote " << dir.string() << " (config hash " << m.config_hash << ")\n";
    } else if (*sw_cmd) {
      const HPolytope k = detail::cli_body(sw_body.name, sw_body.dim, sw_body.param, sw_body.file);
      const PointSet ps = sample_poisson(k, sw_lambda, Seed{sw_seed, 0});
      const PeelingResult pr = peel(ps, PeelOptions{sw_n, false});
      const FloatingParams p = sandwich_params(sw_lambda * k.volume(), k.dim(), sw_alpha);
      const SandwichReport r = sandwich_event(ps, pr, k, p, sw_n);
      nlohmann::json j{{"lambda", sw_lambda},
                       {"n", sw_n},
                       {"s", p.s},
                       {"T", p.T},
                       {"T_star", p.T_star},
                       {"alpha", p.alpha},
                       {"event", r.event},
                       {"outer_violations", r.outer_violations},
                       {"inner_violations", r.inner_violations},
                       {"shell_point_count", r.shell_point_count},
                       {"strict_event", r.strict_event}};
      j["floating_body_inside"] = r.floating_body_inside ? nlohmann::json(*r.floating_body_inside) : nlohmann::json();
      out << j.dump(2) << '\n';
    } else if (*cc_cmd) {
      const HPolytope k = detail::cli_body(cc_body.name, cc_body.dim, cc_body.param, cc_body.file);
      CapCoverOptions opt;
      opt.delta = cc_delta;
      opt.seed = Seed{cc_seed, 0};
      opt.samples_per_region = cc_samples;
      opt.coverage_samples = cc_cover;
      const CapCoverReport r = cap_cover_check(k, cc_s, opt);
      nlohmann::json j{{"d", r.d},
                       {"s", r.s},
                       {"s0", r.s0},
                       {"above_s0", r.above_s0},
                       {"delta", r.delta},
                       {"level", r.level},
                       {"regions", r.rows.size()},
                       {"violations", r.violations},
                       {"inner_checked", r.inner_checked},
                       {"inner_violations", r.inner_violations},
                       {"outer_checked", r.outer_checked},
                       {"outer_uncovered", r.outer_uncovered},
                       {"ok", r.ok()}};
      j["rows"] = nlohmann::json::array();
      for (const auto& row : r.rows)
        j["rows"].push_back({{"corner", row.corner},
                             {"k", row.k},
                             {"center", row.center},
                             {"vol_kprime", row.vol_kprime},
                             {"vol_kfull", row.vol_kfull}});
      out << j.dump(2) << '\n';
    } else if (*rs_cmd) {
      const LimitWindow win{rs_r, rs_hmin, rs_hmax};
      try {
        win.validate();
      } catch (const std::invalid_argument& e) {
        throw detail::ConfigError(e.what());
      }
      if (rs_dim < 2 || rs_reps < 1 || rs_layers < 1) throw detail::ConfigError("need dim >= 2, reps >= 1, layers >= 1");
      std::ostringstream os;
      for (int rep = 0; rep < rs_reps; ++rep) {
        const PointSet ys = sample_limit_process(win, rs_dim, child_seed(Seed{rs_seed, 0}, rep));
        const ConePeelingResult cr = cone_peel(ys, ConePeelOptions{rs_layers, true});
        nlohmann::json j{{"rep", rep}, {"window", {{"r", rs_r}, {"h_min", rs_hmin}, {"h_max", rs_hmax}}},
                         {"points", ys.size()}};
        j["labels"] = nlohmann::json::array();
        for (const auto& [id, l] : cr.label) j["labels"].push_back({id, l});
        j["face_counts"] = nlohmann::json::array();
        j["max_heights"] = nlohmann::json::array();
        std::vector<double> hmax(cr.num_layers(), -std::numeric_limits<double>::infinity());
        for (std::size_t i = 0; i < ys.size(); ++i) {
          const int l = cr.label_of(ys.id(i));
          if (l >= 1) hmax[l - 1] = std::max(hmax[l - 1], ys.coord(i)[rs_dim - 1]);
        }
        for (int l = 1; l <= cr.num_layers(); ++l) {
          j["face_counts"].push_back(cr.face_counts(l));
          j["max_heights"].push_back(hmax[l - 1]);
        }
        os << j.dump() << '\n';
      }
      detail::write_text(rs_out, os.str(), out);
    } else if (*cp_cmd) {
      const HPolytope body = HPolytope::builtin(cp_body, 2);
      const Frequency f = convex_position_prob(body, cp_n, cp_reps, Seed{cp_seed, 0});
      nlohmann::json j{{"body", cp_body}, {"n", cp_n}, {"reps", f.reps}, {"p", f.rate()},
                       {"ci", {f.ci().lo, f.ci().hi}}};
      if (cp_nmax > 0) {
        const ConvexPositionCurve c = convex_position_smc(body, cp_nmax, cp_particles, Seed{cp_seed, 1});
        j["smc"] = {{"n", c.n}, {"log_p", c.log_p}};
      }
      out << j.dump(2) << '\n';
    } else if (*rep_cmd) {
      std::ifstream in(rep_in);
      if (!in) throw detail::ConfigError("cannot open " + rep_in);
      nlohmann::json s;
      try {
        in >> s;
      } catch (const nlohmann::json::parse_error& e) {
        throw detail::ConfigError(std::string("invalid JSON: ") + e.what());
      }
      const std::filesystem::path dir(rep_dir);
      RunManifest m = start_manifest("report", s.value("config", nlohmann::json::object()),
                                     s.contains("config") ? s["config"].value("seed", std::uint64_t{0}) : 0);
      m.outputs = write_report(s, dir);
      m.finished = utc_timestamp();
      m.write(dir);
      out << "wrote " << dir.string() << '\n';
    }
  } catch (const SchemaError& e) {
    err << "config error: " << e.what() << '\n';
    return 1;
  } catch (const detail::ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    err << "invalid argument: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace peellab
