#pragma once

#include <cstdio>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rootpeel/error.hpp"
#include "rootpeel/experiment.hpp"
#include "rootpeel/io.hpp"
#include "rootpeel/linalg/module.hpp"
#include "rootpeel/oracle.hpp"
#include "rootpeel/pset.hpp"
#include "rootpeel/rooted.hpp"
#include "rootpeel/space.hpp"

namespace rootpeel::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

// Largest point count the oracle-check subcommand accepts.
inline constexpr std::size_t kOracleMaxPoints = 8;

struct InputOptions {
  std::string input;
  std::optional<std::string> density_column;
  std::string density_mode;  // empty: use the file's density, else kde
  std::optional<double> kde_bandwidth;
  std::uint64_t seed = 0;
};

namespace detail {

inline void add_input_flags(CLI::App* sub, InputOptions& o) {
  sub->add_option("--input", o.input, "point table or #matrix file")->required();
  sub->add_option("--density-column", o.density_column, "density column (header name or index)");
  sub->add_option("--density-mode", o.density_mode, "kde, random or explicit")
      ->check(CLI::IsMember({"kde", "random", "explicit"}));
  sub->add_option("--kde-bandwidth", o.kde_bandwidth, "common KDE bandwidth (default: Scott)");
  sub->add_option("--seed", o.seed, "seed for random densities");
}

inline AugmentedMetricSpace load_space(const InputOptions& o) {
  std::ifstream in(o.input);
  if (!in) throw ParseError("cannot open " + o.input);
  auto space = load_points(in, LoadOptions{o.density_column});
  if (o.density_mode == "explicit" || (o.density_mode.empty() && space.has_density())) {
    if (!space.has_density()) throw ParseError("explicit density needs a density column");
    return space;
  }
  if (o.density_mode == "random") return attach_density(space, RandomDensity{o.seed});
  return attach_density(space, KdeDensity{o.kde_bandwidth});
}

// Writes to --output when given, else to out.
inline void emit(const std::string& text, const std::optional<std::string>& path, std::ostream& out) {
  if (!path) {
    out << text;
    return;
  }
  std::ofstream f(*path);
  if (!f) throw ParseError("cannot write " + *path);
  f << text;
}

inline std::string thresholds_field(const IntervalSupport& s) {
  std::string out;
  for (const auto& [sigma, theta] : s.thresholds) {
    if (!out.empty()) out += '|';
    out += rootpeel::detail::fmt_double(sigma) + ':' + rootpeel::detail::fmt_double(theta);
  }
  return out;
}

inline std::string dump(const io::json& j) { return j.dump(2) + "\n"; }

}  // namespace detail

/// Runs the command line; returns the process exit code.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"rootpeel: interval summands of density-Rips persistence modules"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "expanded help");

  // peel
  InputOptions peel_in;
  std::optional<std::string> peel_out;
  std::string peel_format = "json";
  auto* peel = app.add_subcommand("peel", "peel interval summands and print the trace");
  detail::add_input_flags(peel, peel_in);
  peel->add_option("--output", peel_out, "write the trace here instead of stdout");
  peel->add_option("--format", peel_format)->check(CLI::IsMember({"json", "csv"}));

  // nn
  InputOptions nn_in;
  std::optional<std::string> nn_out;
  std::string nn_format = "json";
  auto* nn = app.add_subcommand("nn", "nearest neighbors, mutual pairs and neighborly points");
  detail::add_input_flags(nn, nn_in);
  nn->add_option("--output", nn_out);
  nn->add_option("--format", nn_format)->check(CLI::IsMember({"json", "csv"}));

  // barcode
  InputOptions bar_in;
  std::optional<std::string> bar_out;
  std::string bar_format = "csv";
  std::optional<double> bar_sigma, bar_eps;
  auto* barcode = app.add_subcommand("barcode", "one-parameter elder-rule barcode");
  detail::add_input_flags(barcode, bar_in);
  barcode->add_option("--output", bar_out);
  barcode->add_option("--format", bar_format)->check(CLI::IsMember({"json", "csv"}));
  auto* sigma_opt = barcode->add_option("--sigma", bar_sigma, "density level (default: top)");
  barcode->add_option("--eps", bar_eps, "fixed scale: barcode along the density axis")
      ->excludes(sigma_opt);

  // staircode
  InputOptions stair_in;
  std::optional<std::string> stair_out;
  std::optional<std::size_t> stair_point;
  auto* stair = app.add_subcommand("staircode", "grades where a point is the oldest of its cluster");
  detail::add_input_flags(stair, stair_in);
  stair->add_option("--output", stair_out);
  stair->add_option("--point", stair_point, "point index (default: all)");

  // simulate
  TrialConfig sim;
  std::size_t sim_d = 2;
  std::string sim_sampler = "uniform", sim_density = "random", sim_format = "csv";
  int sim_peaks = 5;
  double sim_spread = 0.05;
  bool sim_table1 = false, sim_timing = false;
  std::optional<std::string> sim_out;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo trials on random samples");
  simulate->add_option("--n", sim.n, "points per trial")->check(CLI::PositiveNumber);
  simulate->add_option("--d", sim_d, "ambient dimension")->check(CLI::PositiveNumber);
  simulate->add_option("--trials", sim.trials)->check(CLI::PositiveNumber);
  simulate->add_option("--seed", sim.seed);
  simulate->add_option("--sampler", sim_sampler)->check(CLI::IsMember({"uniform", "mixture"}));
  simulate->add_option("--peaks", sim_peaks, "mixture peaks")->check(CLI::PositiveNumber);
  simulate->add_option("--spread", sim_spread, "mixture standard deviation")->check(CLI::PositiveNumber);
  simulate->add_option("--density-mode", sim_density)->check(CLI::IsMember({"kde", "random"}));
  simulate->add_option("--format", sim_format)->check(CLI::IsMember({"json", "csv"}));
  simulate->add_option("--output", sim_out);
  simulate->add_flag("--table1", sim_table1, "one row per run: peeled count and certificate");
  simulate->add_flag("--timing", sim_timing, "include per-trial wall time");

  // oracle-check
  InputOptions oracle_in;
  std::string oracle_trace;
  std::size_t oracle_budget = 4096;
  auto* oracle = app.add_subcommand("oracle-check", "replay a trace through exact linear algebra");
  oracle->add_option("trace", oracle_trace, "trace JSON written by peel")->required();
  detail::add_input_flags(oracle, oracle_in);
  oracle->add_option("--dim-budget", oracle_budget, "largest module dimension to build")
      ->check(CLI::PositiveNumber);

  // b-constant
  int bc_d = 1;
  auto* bconst = app.add_subcommand("b-constant", "limiting mutual-neighbor probability b(d) and c(d)");
  bconst->add_option("d", bc_d, "dimension")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kExitOk;
    }
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*peel) {
      const auto space = detail::load_space(peel_in);
      const auto trace = peel_all(space);
      std::string text;
      if (peel_format == "json") {
        text = detail::dump(io::to_json(trace));
      } else {
        std::ostringstream s;
        s << "generator,root,reason,zero_interval,birth_sigma,thresholds\n";
        for (const auto& r : trace.records)
          s << r.generator << ',' << (r.root ? std::to_string(*r.root) : "") << ','
            << to_string(r.reason) << ',' << (r.zero_interval ? "true" : "false") << ','
            << rootpeel::detail::fmt_double(r.support.birth_sigma) << ','
            << detail::thresholds_field(r.support) << '\n';
        text = s.str();
      }
      detail::emit(text, peel_out, out);
      out << "peeled " << trace.size() << " of " << space.size() << " generators\n";
    } else if (*nn) {
      const auto space = detail::load_space(nn_in);
      const auto graph = nn_graph(space);
      const auto rooted = neighborly_rooted(space, graph);
      std::vector<char> is_mutual(space.size(), 0), is_rooted(space.size(), 0);
      for (const auto& [a, b] : graph.mutual_pairs) is_mutual[a] = is_mutual[b] = 1;
      for (std::size_t x : rooted) is_rooted[x] = 1;
      std::string text;
      if (nn_format == "json") {
        io::json pairs = io::json::array();
        for (const auto& [a, b] : graph.mutual_pairs) pairs.push_back(io::json::array({a, b}));
        text = detail::dump({{"n", space.size()},
                             {"nn", graph.nn},
                             {"mutual_pairs", std::move(pairs)},
                             {"neighborly_rooted", rooted}});
      } else {
        std::ostringstream s;
        s << "point,nn,distance,mutual,neighborly_rooted\n";
        for (std::size_t x = 0; x < space.size(); ++x)
          s << x << ',' << graph.nn[x] << ','
            << rootpeel::detail::fmt_double(space.distance(x, graph.nn[x])) << ','
            << (is_mutual[x] ? "true" : "false") << ',' << (is_rooted[x] ? "true" : "false") << '\n';
        text = s.str();
      }
      detail::emit(text, nn_out, out);
    } else if (*barcode) {
      const auto space = detail::load_space(bar_in);
      OneParameterFiltration filt;
      if (bar_eps) {
        filt = density_filtration(space, *bar_eps);
      } else {
        const double top = space.density(space.order().back());
        filt = scale_filtration(space, bar_sigma.value_or(top));
      }
      const auto bars = elder_barcode_1d(filt);
      std::ostringstream s;
      if (bar_format == "csv") io::write_barcode_csv(s, bars);
      else s << detail::dump(io::to_json(bars));
      detail::emit(s.str(), bar_out, out);
    } else if (*stair) {
      const auto space = detail::load_space(stair_in);
      const LeveledMergeForest forest(space);
      io::json arr = io::json::array();
      const auto one = [&](std::size_t x) {
        arr.push_back({{"point", x}, {"support", io::to_json(staircode(forest, x))}});
      };
      if (stair_point) {
        if (*stair_point >= space.size()) throw QueryError("point index out of range");
        one(*stair_point);
      } else {
        for (std::size_t x = 0; x < space.size(); ++x) one(x);
      }
      detail::emit(detail::dump(arr), stair_out, out);
    } else if (*simulate) {
      const int d = static_cast<int>(sim_d);
      if (sim_sampler == "uniform") sim.sampler = UniformCube{d};
      else sim.sampler = GaussianMixture{d, sim_peaks, sim_spread};
      sim.density = sim_density == "kde" ? DensityKind::kde : DensityKind::random;
      std::ostringstream s;
      if (sim_table1) {
        const auto rows = table1_replica(sim);
        if (sim_format == "csv") {
          write_table1_csv(s, rows);
        } else {
          io::json arr = io::json::array();
          for (const auto& r : rows)
            arr.push_back({{"run", r.run},
                           {"n", r.n},
                           {"sampler", r.sampler},
                           {"density", r.density},
                           {"peeled_intervals", r.peeled_interval_count},
                           {"interval_decomposable", r.interval_decomposable}});
          s << detail::dump(arr);
        }
      } else {
        const auto report = run_trials(sim);
        if (sim_format == "csv") {
          write_trials_csv(s, report, sim_timing);
        } else {
          auto j = io::to_json(report);
          if (sim_timing) {
            for (std::size_t i = 0; i < report.results.size(); ++i)
              j["trials"][i]["elapsed_seconds"] = report.results[i].elapsed_seconds;
          }
          s << detail::dump(j);
        }
      }
      detail::emit(s.str(), sim_out, out);
    } else if (*oracle) {
      const auto space = detail::load_space(oracle_in);
      if (space.size() > kOracleMaxPoints)
        throw PreconditionError("oracle-check is limited to n <= " + std::to_string(kOracleMaxPoints));
      std::ifstream tf(oracle_trace);
      if (!tf) throw ParseError("cannot open " + oracle_trace);
      io::json tj;
      try {
        tj = io::json::parse(tf);
      } catch (const io::json::exception& e) {
        throw ParseError(std::string("malformed trace: ") + e.what());
      }
      const auto doc = io::trace_from_json(tj);
      if (doc.n != space.size())
        throw ParseError("trace has n = " + std::to_string(doc.n) + " but input has " +
                         std::to_string(space.size()) + " points");
      auto forest = std::make_shared<const LeveledMergeForest>(space);
      const auto grid = grade_grid(space);
      const auto checks = linalg::check_trace(forest, grid, doc.records, oracle_budget);
      std::size_t passed = 0;
      for (std::size_t i = 0; i < checks.size(); ++i) {
        const auto& rec = doc.records[i];
        out << "record " << i << ": " << (checks[i].pass ? "PASS" : "FAIL") << " generator "
            << rec.generator;
        if (rec.root) out << " root " << *rec.root;
        out << " (" << checks[i].detail << ")\n";
        passed += checks[i].pass;
      }
      out << passed << " of " << checks.size() << " records pass\n";
      return passed == checks.size() ? kExitOk : kExitData;
    } else if (*bconst) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "b(%d)=%.12f, c(%d)=%.12f", bc_d, b_constant(bc_d), bc_d,
                    c_constant(bc_d));
      out << buf << '\n';
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}

}  // namespace rootpeel::cli
