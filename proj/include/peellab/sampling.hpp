#pragma once

// Random inputs: Poisson and binomial processes in a polytope, and the rescaled
// limit process on a truncated cylinder.
//
// Streams: each (master, stream) pair seeds its own std::mt19937_64 through a
// SplitMix64 hash of both words.  Variates come from Boost.Random, whose
// algorithms are fixed across platforms (unlike std:: distributions).

#include <boost/random/normal_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>
#include <boost/random/uniform_01.hpp>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "peellab/detail/format.hpp"
#include "peellab/detail/log.hpp"
#include "peellab/errors.hpp"
#include "peellab/geom_core.hpp"
#include "peellab/polytope_model.hpp"

namespace peellab {

struct Seed {
  std::uint64_t master = 0;
  std::uint64_t stream = 0;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t stream_key(Seed s) { return splitmix64(splitmix64(s.master) ^ splitmix64(~s.stream)); }

using Engine = std::mt19937_64;

inline Engine make_engine(Seed s) { return Engine(stream_key(s)); }

// Derives a child seed for a sub-task (e.g. replication r of grid cell c).
inline Seed child_seed(Seed s, std::uint64_t a, std::uint64_t b = 0) {
  return Seed{stream_key(s), splitmix64(a * 0x100000001B3ULL ^ splitmix64(b))};
}

struct SamplingStats {
  std::uint64_t proposals = 0;
  std::uint64_t accepted = 0;
  double acceptance() const { return proposals ? static_cast<double>(accepted) / proposals : 1.0; }
};

namespace detail {

inline double uniform(Engine& eng) { return boost::random::uniform_01<double>()(eng); }

inline long long poisson(Engine& eng, double mean) {
  if (mean <= 0.0) return 0;
  return boost::random::poisson_distribution<long long, double>(mean)(eng);
}

inline void uniform_in(const HPolytope& k, Engine& eng, long long count, PointSet& out, PointId first_id,
                       SamplingStats* stats) {
  const int d = k.dim();
  const auto& lo = k.box_lo();
  const auto& hi = k.box_hi();
  const bool box = k.is_box();
  std::vector<double> x(d);
  std::uint64_t proposals = 0;
  for (long long i = 0; i < count;) {
    for (int j = 0; j < d; ++j) x[j] = lo[j] + (hi[j] - lo[j]) * uniform(eng);
    ++proposals;
    if (box || k.contains(x)) {
      out.add(x.data(), first_id + i);
      ++i;
    }
  }
  if (stats) {
    stats->proposals += proposals;
    stats->accepted += static_cast<std::uint64_t>(count);
  }
  if (count > 0)
    log::debug("rejection sampling: " + std::to_string(count) + " accepted of " + std::to_string(proposals) +
               " proposals");
}

}  // namespace detail

inline PointSet sample_poisson(const HPolytope& k, double lambda, Seed seed, SamplingStats* stats = nullptr) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("intensity must be nonnegative");
  Engine eng = make_engine(seed);
  const long long n = detail::poisson(eng, lambda * k.volume());
  PointSet ps(k.dim());
  ps.reserve(static_cast<std::size_t>(n));
  detail::uniform_in(k, eng, n, ps, 0, stats);
  return ps;
}

inline PointSet sample_binomial(const HPolytope& k, long long n, Seed seed, SamplingStats* stats = nullptr) {
  if (n < 0) throw std::invalid_argument("sample size must be nonnegative");
  Engine eng = make_engine(seed);
  PointSet ps(k.dim());
  ps.reserve(static_cast<std::size_t>(n));
  detail::uniform_in(k, eng, n, ps, 0, stats);
  return ps;
}

struct LimitWindow {
  double r = 1.0;
  double h_min = -1.0;
  double h_max = 1.0;

  void validate() const {
    if (!(r > 0.0) || !std::isfinite(r)) throw std::invalid_argument("window radius must be positive");
    if (!(h_min < h_max) || !std::isfinite(h_min) || !std::isfinite(h_max))
      throw std::invalid_argument("window needs h_min < h_max");
  }
};

inline double ball_volume(int k, double r) {
  return std::pow(M_PI, 0.5 * k) / std::tgamma(0.5 * k + 1.0) * std::pow(r, k);
}

// Expected number of points of the limit process with intensity sqrt(d) e^{dh} dv dh.
inline double limit_expected_count(const LimitWindow& w, int d) {
  return std::sqrt(static_cast<double>(d)) * ball_volume(d - 1, w.r) *
         (std::exp(d * w.h_max) - std::exp(d * w.h_min)) / d;
}

// Points (v_1..v_{d-1}, h) of the limit process restricted to B_{d-1}(0,r) x [h_min, h_max].
inline PointSet sample_limit_process(const LimitWindow& w, int d, Seed seed) {
  w.validate();
  if (d < 2) throw std::invalid_argument("limit process needs d >= 2");
  Engine eng = make_engine(seed);
  const long long n = detail::poisson(eng, limit_expected_count(w, d));
  PointSet ps(d);
  ps.reserve(static_cast<std::size_t>(n));
  const int k = d - 1;
  std::vector<double> x(d);
  boost::random::normal_distribution<double> gauss(0.0, 1.0);
  const double span = d * (w.h_min - w.h_max);
  for (long long i = 0; i < n; ++i) {
    if (k == 1) {
      x[0] = w.r * (2.0 * detail::uniform(eng) - 1.0);
    } else {
      double nrm = 0.0;
      for (int j = 0; j < k; ++j) {
        x[j] = gauss(eng);
        nrm += x[j] * x[j];
      }
      nrm = std::sqrt(nrm);
      const double rad = w.r * std::pow(detail::uniform(eng), 1.0 / k);
      for (int j = 0; j < k; ++j) x[j] *= rad / nrm;
    }
    // Inverse CDF of e^{dh} on [h_min, h_max].
    const double u = detail::uniform(eng);
    x[k] = w.h_max + std::log(u + (1.0 - u) * std::exp(span)) / d;
    ps.add(x.data(), i);
  }
  return ps;
}

// ---- serialization -------------------------------------------------------

inline void write_points_csv(const PointSet& ps, std::ostream& os) {
  os << "id";
  for (int j = 1; j <= ps.dim(); ++j) os << ",x" << j;
  os << '\n';
  for (std::size_t i = 0; i < ps.size(); ++i) {
    os << ps.id(i);
    for (int j = 0; j < ps.dim(); ++j) os << ',' << fmt::num(ps.coord(i)[j]);
    os << '\n';
  }
}

inline PointSet read_points_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw SchemaError("csv", "empty input");
  int d = 0;
  for (char c : line)
    if (c == ',') ++d;
  if (d < 1 || line.rfind("id", 0) != 0) throw SchemaError("csv", "header must be id,x1,...");
  PointSet ps(d);
  std::vector<double> x(d);
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    if (!std::getline(ss, cell, ',')) throw SchemaError("csv line " + std::to_string(lineno), "missing id");
    const PointId id = std::stoll(cell);
    for (int j = 0; j < d; ++j) {
      if (!std::getline(ss, cell, ','))
        throw SchemaError("csv line " + std::to_string(lineno), "expected " + std::to_string(d) + " coordinates");
      x[j] = std::stod(cell);
    }
    ps.add(x.data(), id);
  }
  return ps;
}

// Binary cache: "PLPS", u32 version, u32 dim, u64 count, then (i64 id, dim x f64) records,
// all little-endian.
inline void write_points_binary(const PointSet& ps, std::ostream& os) {
  static_assert(sizeof(double) == 8);
  auto put = [&](const void* p, std::size_t n) { os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n)); };
  put("PLPS", 4);
  const std::uint32_t version = 1, dim = static_cast<std::uint32_t>(ps.dim());
  const std::uint64_t count = ps.size();
  put(&version, 4);
  put(&dim, 4);
  put(&count, 8);
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const std::int64_t id = ps.id(i);
    put(&id, 8);
    put(ps.coord(i), 8 * static_cast<std::size_t>(ps.dim()));
  }
}

inline PointSet read_points_binary(std::istream& is) {
  auto get = [&](void* p, std::size_t n) {
    is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!is) throw SchemaError("binary", "truncated point cache");
  };
  char magic[4];
  get(magic, 4);
  if (std::memcmp(magic, "PLPS", 4) != 0) throw SchemaError("binary", "bad magic");
  std::uint32_t version = 0, dim = 0;
  std::uint64_t count = 0;
  get(&version, 4);
  get(&dim, 4);
  get(&count, 8);
  if (version != 1) throw SchemaError("binary", "unsupported version");
  PointSet ps(static_cast<int>(dim));
  ps.reserve(count);
  std::vector<double> x(dim);
  for (std::uint64_t i = 0; i < count; ++i) {
    std::int64_t id = 0;
    get(&id, 8);
    get(x.data(), 8 * static_cast<std::size_t>(dim));
    ps.add(x.data(), id);
  }
  return ps;
}

}  // namespace peellab
