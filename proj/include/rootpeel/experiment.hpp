#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <limits>
#include <memory>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "rootpeel/error.hpp"
#include "rootpeel/rng.hpp"
#include "rootpeel/rooted.hpp"
#include "rootpeel/space.hpp"

namespace rootpeel {

// ---------------------------------------------------------------------------
// Special functions

namespace detail {

// Continued fraction for the incomplete beta (modified Lentz).
inline double beta_continued_fraction(double a, double b, double x) {
  constexpr double tiny = 1e-300;
  constexpr double tol = 1e-15;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 10000; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < tol) return h;
  }
  throw ConsistencyError("incomplete beta continued fraction did not converge");
}

}  // namespace detail

// Regularized incomplete beta I_x(a, b).
inline double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw PreconditionError("incomplete beta needs a, b > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw PreconditionError("incomplete beta needs x in [0, 1]");
  if (x == 0.0 || x == 1.0) return x;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * detail::beta_continued_fraction(b, a, 1.0 - x) / b;
}

// Limiting probability that a sample point lies in a mutual nearest-neighbor
// pair: unit-ball volume over the volume of two unit balls at distance 1.
inline double b_constant(int d) {
  if (d < 1) throw PreconditionError("b(d) needs d >= 1");
  const double caps = incomplete_beta((d + 1) / 2.0, 0.5, 0.75);
  return 1.0 / (2.0 - caps);
}

inline double c_constant(int d) { return b_constant(d) / 2.0; }

// ---------------------------------------------------------------------------
// Samplers

struct UniformCube {
  int d = 2;
};

struct GaussianMixture {
  int d = 2;
  int peaks = 5;
  double spread = 0.05;
};

using SamplerConfig = std::variant<UniformCube, GaussianMixture>;

inline int sampler_dimension(const SamplerConfig& c) {
  return std::visit([](const auto& s) { return s.d; }, c);
}

inline std::string sampler_name(const SamplerConfig& c) {
  return std::holds_alternative<UniformCube>(c) ? "uniform" : "mixture";
}

// n points, reproducible from the seed. Mixture peaks are drawn uniformly in
// the unit cube, then each point picks a peak and adds isotropic noise.
inline AugmentedMetricSpace sample(const SamplerConfig& config, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw PreconditionError("sample size must be positive");
  const int d = sampler_dimension(config);
  if (d < 1) throw PreconditionError("sampler dimension must be positive");
  Rng rng(seed);
  std::vector<double> coords(n * static_cast<std::size_t>(d));
  if (const auto* mix = std::get_if<GaussianMixture>(&config)) {
    if (mix->peaks < 1) throw PreconditionError("mixture needs at least one peak");
    if (!(mix->spread > 0.0)) throw PreconditionError("mixture spread must be positive");
    std::vector<double> centers(static_cast<std::size_t>(mix->peaks * d));
    for (auto& c : centers) c = rng.uniform();
    for (std::size_t i = 0; i < n; ++i) {
      const auto k = static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(mix->peaks)));
      for (int j = 0; j < d; ++j)
        coords[i * d + j] = centers[k * d + j] + mix->spread * rng.normal();
    }
  } else {
    for (auto& c : coords) c = rng.uniform();
  }
  return AugmentedMetricSpace::from_coordinates(std::move(coords), static_cast<std::size_t>(d));
}

// ---------------------------------------------------------------------------
// Trials

enum class DensityKind { kde, random };

inline const char* to_string(DensityKind k) { return k == DensityKind::kde ? "kde" : "random"; }

struct TrialConfig {
  SamplerConfig sampler = UniformCube{};
  DensityKind density = DensityKind::random;
  std::size_t n = 100;
  std::size_t trials = 1;
  std::uint64_t seed = 0;
  std::size_t threads = 0;  // 0: hardware, capped by ROOTPEEL_THREADS
};

struct TrialResult {
  std::size_t index = 0;
  std::size_t n = 0;
  int d = 0;
  std::string sampler;
  std::string density;
  std::uint64_t seed = 0;
  std::size_t mutual_pair_count = 0;
  std::size_t peeled_interval_count = 0;  // records with a nonzero interval
  std::size_t trace_length = 0;           // all records, including the bottom
  double elapsed_seconds = 0.0;

  double mutual_fraction() const { return 2.0 * static_cast<double>(mutual_pair_count) / static_cast<double>(n); }
  double peeled_fraction() const { return static_cast<double>(peeled_interval_count) / static_cast<double>(n); }
};

struct Summary {
  double mean = 0.0;
  double standard_error = 0.0;
  double min = 0.0;
  double max = 0.0;
};

inline Summary summarize(const std::vector<double>& xs) {
  Summary s;
  if (xs.empty()) return s;
  const double n = static_cast<double>(xs.size());
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / n;
  double ss = 0.0;
  for (double x : xs) ss += (x - s.mean) * (x - s.mean);
  s.standard_error = xs.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
  s.min = *std::min_element(xs.begin(), xs.end());
  s.max = *std::max_element(xs.begin(), xs.end());
  return s;
}

struct TrialReport {
  TrialConfig config;
  std::vector<TrialResult> results;  // in trial-index order
  Summary mutual_fraction;
  Summary peeled_fraction;
  double b = 0.0;
  double c = 0.0;
};

inline std::size_t worker_count(std::size_t requested, std::size_t jobs) {
  std::size_t t = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("ROOTPEEL_THREADS")) {
    char* end = nullptr;
    const unsigned long cap = std::strtoul(env, &end, 10);
    if (end != env && cap > 0) t = std::min<std::size_t>(t, cap);
  }
  return std::max<std::size_t>(1, std::min(t, jobs));
}

// Runs fn(i) for i in [0, jobs) on a small pool; the first exception wins.
template <class Fn>
void parallel_for(std::size_t jobs, std::size_t threads, Fn fn) {
  threads = worker_count(threads, jobs);
  if (threads <= 1) {
    for (std::size_t i = 0; i < jobs; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < jobs;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = jobs;
        }
      }
    });
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

inline TrialResult run_trial(const TrialConfig& config, std::size_t index) {
  const auto start = std::chrono::steady_clock::now();
  Rng stream = Rng::stream(config.seed, index);
  TrialResult r;
  r.index = index;
  r.n = config.n;
  r.d = sampler_dimension(config.sampler);
  r.sampler = sampler_name(config.sampler);
  r.density = to_string(config.density);
  r.seed = stream.next_u64();
  const std::uint64_t density_seed = stream.next_u64();
  const auto points = sample(config.sampler, config.n, r.seed);
  const auto space = config.density == DensityKind::kde
                         ? attach_density(points, KdeDensity{})
                         : attach_density(points, RandomDensity{density_seed});
  auto forest = std::make_shared<const LeveledMergeForest>(space);
  std::optional<NNGraph> graph;
  if (space.size() >= 2) {
    graph = nn_graph(space);
    r.mutual_pair_count = graph->mutual_pairs.size();
  }
  const auto trace = peel_all(std::move(forest), graph);
  r.peeled_interval_count = trace.nonzero_count();
  r.trace_length = trace.size();
  r.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

inline TrialReport run_trials(const TrialConfig& config) {
  if (config.trials < 1) throw PreconditionError("need at least one trial");
  if (config.n < 1) throw PreconditionError("sample size must be positive");
  TrialReport report;
  report.config = config;
  report.results.resize(config.trials);
  parallel_for(config.trials, config.threads,
               [&](std::size_t i) { report.results[i] = run_trial(config, i); });
  std::vector<double> mf, pf;
  for (const auto& r : report.results) {
    mf.push_back(r.mutual_fraction());
    pf.push_back(r.peeled_fraction());
  }
  report.mutual_fraction = summarize(mf);
  report.peeled_fraction = summarize(pf);
  const int d = sampler_dimension(config.sampler);
  report.b = b_constant(d);
  report.c = c_constant(d);
  return report;
}

// ---------------------------------------------------------------------------
// Interval-count table

struct Table1Row {
  std::size_t run = 0;
  std::size_t n = 0;
  std::string sampler;
  std::string density;
  std::size_t peeled_interval_count = 0;
  bool interval_decomposable = false;  // certified only when every generator peeled
};

// One row per independent run of a table cell. Counts are certified lower
// bounds on the number of interval summands.
inline std::vector<Table1Row> table1_replica(const TrialConfig& config) {
  const auto report = run_trials(config);
  std::vector<Table1Row> rows;
  for (const auto& r : report.results)
    rows.push_back({r.index, r.n, r.sampler, r.density, r.peeled_interval_count,
                    r.peeled_interval_count == r.n});
  return rows;
}

// ---------------------------------------------------------------------------
// Reports

namespace detail {

inline std::string fmt_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace detail

inline void write_trials_csv(std::ostream& out, const TrialReport& report, bool timing = false) {
  out << "trial,n,d,sampler,density,seed,mutual_pairs,mutual_fraction,peeled_intervals,"
         "peeled_fraction,trace_length";
  if (timing) out << ",elapsed_seconds";
  out << '\n';
  for (const auto& r : report.results) {
    out << r.index << ',' << r.n << ',' << r.d << ',' << r.sampler << ',' << r.density << ','
        << r.seed << ',' << r.mutual_pair_count << ',' << detail::fmt_double(r.mutual_fraction())
        << ',' << r.peeled_interval_count << ',' << detail::fmt_double(r.peeled_fraction()) << ','
        << r.trace_length;
    if (timing) out << ',' << detail::fmt_double(r.elapsed_seconds);
    out << '\n';
  }
}

inline void write_table1_csv(std::ostream& out, const std::vector<Table1Row>& rows) {
  out << "run,n,sampler,density,peeled_intervals,interval_decomposable\n";
  for (const auto& r : rows)
    out << r.run << ',' << r.n << ',' << r.sampler << ',' << r.density << ','
        << r.peeled_interval_count << ',' << (r.interval_decomposable ? "true" : "false") << '\n';
}

}  // namespace rootpeel
