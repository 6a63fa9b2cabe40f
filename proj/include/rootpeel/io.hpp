#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rootpeel/error.hpp"
#include "rootpeel/experiment.hpp"
#include "rootpeel/linalg/module.hpp"
#include "rootpeel/pset.hpp"
#include "rootpeel/rooted.hpp"

namespace rootpeel::io {

using json = nlohmann::ordered_json;

// Reals go out as numbers, except infinities which become "inf" / "-inf".
inline json real(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

inline double real_from(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw ParseError("expected a number, got \"" + s + "\"");
  }
  if (!j.is_number()) throw ParseError("expected a number");
  return j.get<double>();
}

// ---------------------------------------------------------------------------
// Supports and traces

inline json to_json(const IntervalSupport& s) {
  json t = json::array();
  for (const auto& [sigma, theta] : s.thresholds) t.push_back(json::array({real(sigma), real(theta)}));
  return {{"birth_sigma", real(s.birth_sigma)}, {"thresholds", std::move(t)}};
}

inline IntervalSupport support_from_json(const json& j) {
  IntervalSupport s;
  s.birth_sigma = real_from(j.at("birth_sigma"));
  for (const auto& t : j.at("thresholds"))
    s.thresholds.emplace_back(real_from(t.at(0)), real_from(t.at(1)));
  return s;
}

inline json to_json(const PeelRecord& r) {
  json j;
  j["generator"] = r.generator;
  j["root"] = r.root ? json(*r.root) : json(nullptr);
  j["reason"] = std::string(to_string(r.reason));
  j["zero_interval"] = r.zero_interval;
  j["support"] = to_json(r.support);
  return j;
}

inline PeelRecord record_from_json(const json& j) {
  PeelRecord r;
  r.generator = j.at("generator").get<std::size_t>();
  if (!j.at("root").is_null()) r.root = j.at("root").get<std::size_t>();
  r.reason = peel_reason_from_string(j.at("reason").get<std::string>());
  r.zero_interval = j.value("zero_interval", false);
  r.support = support_from_json(j.at("support"));
  return r;
}

inline json to_json(const PeelTrace& trace) {
  json records = json::array();
  for (const auto& r : trace.records) records.push_back(to_json(r));
  return {{"n", trace.final_view.size()},
          {"trace_length", trace.size()},
          {"nonzero_intervals", trace.nonzero_count()},
          {"survivors", trace.final_view.survivor_count()},
          {"records", std::move(records)}};
}

struct TraceDocument {
  std::size_t n = 0;
  std::vector<PeelRecord> records;
};

inline TraceDocument trace_from_json(const json& j) {
  try {
    TraceDocument doc;
    doc.n = j.at("n").get<std::size_t>();
    for (const auto& r : j.at("records")) doc.records.push_back(record_from_json(r));
    return doc;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed trace: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Forest

inline json to_json(const LeveledMergeForest& f) {
  json levels = json::array();
  for (std::size_t level = 0; level < f.level_count(); ++level) {
    json merges = json::array();
    for (const auto& e : f.events(level)) merges.push_back(json::array({real(e.eps), e.a, e.b}));
    levels.push_back({{"sigma", real(f.sigma(level))},
                      {"active", f.active(level)},
                      {"merges", std::move(merges)}});
  }
  json order = json::array();
  for (std::size_t r = 0; r < f.size(); ++r) order.push_back(f.point_of_rank(r));
  return {{"n", f.size()}, {"canonical_order", std::move(order)}, {"levels", std::move(levels)}};
}

// ---------------------------------------------------------------------------
// Grid modules: entries are exact field elements written as strings ("3/2").

template <class F>
json matrix_to_json(const linalg::Matrix<F>& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (std::size_t k = 0; k < m.cols(); ++k) row.push_back(linalg::FieldTraits<F>::to_string(m(i, k)));
    rows.push_back(std::move(row));
  }
  return rows;
}

template <class F>
linalg::Matrix<F> matrix_from_json(const json& j, std::size_t rows, std::size_t cols) {
  linalg::Matrix<F> m(rows, cols);
  if (j.size() != rows) throw ParseError("matrix has the wrong number of rows");
  for (std::size_t i = 0; i < rows; ++i) {
    if (j[i].size() != cols) throw ParseError("matrix has the wrong number of columns");
    for (std::size_t k = 0; k < cols; ++k) {
      const auto& v = j[i][k];
      m(i, k) = linalg::FieldTraits<F>::from_string(v.is_string() ? v.get<std::string>() : v.dump());
    }
  }
  return m;
}

// Layout: eps, sigma, dims[sigma][eps], and lists of the nonempty covering
// maps keyed by their source grade indices.
template <class F>
json to_json(const linalg::GridModule<F>& m) {
  json eps = json::array(), sigma = json::array(), dims = json::array();
  for (double e : m.eps_values) eps.push_back(real(e));
  for (double s : m.sigma_values) sigma.push_back(real(s));
  json right = json::array(), up = json::array();
  for (std::size_t j = 0; j < m.sigma_count(); ++j) {
    json row = json::array();
    for (std::size_t i = 0; i < m.eps_count(); ++i) {
      const std::size_t g = m.grade(i, j);
      row.push_back(m.dims[g]);
      if (i + 1 < m.eps_count() && m.right[g].rows() && m.right[g].cols())
        right.push_back({{"from", json::array({i, j})}, {"matrix", matrix_to_json(m.right[g])}});
      if (j + 1 < m.sigma_count() && m.up[g].rows() && m.up[g].cols())
        up.push_back({{"from", json::array({i, j})}, {"matrix", matrix_to_json(m.up[g])}});
    }
    dims.push_back(std::move(row));
  }
  return {{"eps", std::move(eps)}, {"sigma", std::move(sigma)}, {"dims", std::move(dims)},
          {"right", std::move(right)}, {"up", std::move(up)}};
}

template <class F>
linalg::GridModule<F> module_from_json(const json& j) {
  try {
    std::vector<double> eps, sigma;
    for (const auto& v : j.at("eps")) eps.push_back(real_from(v));
    for (const auto& v : j.at("sigma")) sigma.push_back(real_from(v));
    auto m = linalg::GridModule<F>::zero(eps, sigma);
    const auto& dims = j.at("dims");
    if (dims.size() != m.sigma_count()) throw ParseError("dims has the wrong number of rows");
    for (std::size_t s = 0; s < m.sigma_count(); ++s) {
      if (dims[s].size() != m.eps_count()) throw ParseError("dims has the wrong number of columns");
      for (std::size_t e = 0; e < m.eps_count(); ++e) m.dims[m.grade(e, s)] = dims[s][e].get<std::size_t>();
    }
    for (std::size_t s = 0; s < m.sigma_count(); ++s)
      for (std::size_t e = 0; e < m.eps_count(); ++e) {
        const std::size_t g = m.grade(e, s);
        if (e + 1 < m.eps_count()) m.right[g] = linalg::Matrix<F>(m.dims[m.grade(e + 1, s)], m.dims[g]);
        if (s + 1 < m.sigma_count()) m.up[g] = linalg::Matrix<F>(m.dims[m.grade(e, s + 1)], m.dims[g]);
      }
    const auto load = [&](const json& list, bool is_right) {
      for (const auto& entry : list) {
        const auto e = entry.at("from").at(0).get<std::size_t>();
        const auto s = entry.at("from").at(1).get<std::size_t>();
        if (e >= m.eps_count() || s >= m.sigma_count() || (is_right ? e + 1 >= m.eps_count()
                                                                      : s + 1 >= m.sigma_count()))
          throw ParseError("covering map outside the grid");
        const std::size_t g = m.grade(e, s);
        auto& target = is_right ? m.right[g] : m.up[g];
        target = matrix_from_json<F>(entry.at("matrix"), target.rows(), target.cols());
      }
    };
    load(j.at("right"), true);
    load(j.at("up"), false);
    m.validate();
    return m;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed module: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Tabular output

inline void write_barcode_csv(std::ostream& out, const std::vector<Bar>& bars) {
  out << "birth,death\n";
  for (const auto& b : bars) out << detail::fmt_double(b.birth) << ',' << detail::fmt_double(b.death) << '\n';
}

inline json to_json(const std::vector<Bar>& bars) {
  json out = json::array();
  for (const auto& b : bars) out.push_back(json::array({real(b.birth), real(b.death)}));
  return out;
}

inline json to_json(const TrialReport& report) {
  json trials = json::array();
  for (const auto& r : report.results)
    trials.push_back({{"trial", r.index},
                      {"seed", r.seed},
                      {"mutual_pairs", r.mutual_pair_count},
                      {"peeled_intervals", r.peeled_interval_count},
                      {"trace_length", r.trace_length}});
  const auto summary = [](const Summary& s) {
    return json{{"mean", s.mean}, {"standard_error", s.standard_error}, {"min", s.min}, {"max", s.max}};
  };
  const auto& c = report.config;
  json config = {{"sampler", sampler_name(c.sampler)},
                 {"d", sampler_dimension(c.sampler)},
                 {"density", to_string(c.density)},
                 {"n", c.n},
                 {"trials", c.trials},
                 {"seed", c.seed}};
  if (const auto* mix = std::get_if<GaussianMixture>(&c.sampler)) {
    config["peaks"] = mix->peaks;
    config["spread"] = mix->spread;
  }
  return {{"config", std::move(config)},
          {"mutual_fraction", summary(report.mutual_fraction)},
          {"peeled_fraction", summary(report.peeled_fraction)},
          {"b", report.b},
          {"c", report.c},
          {"trials", std::move(trials)}};
}

}  // namespace rootpeel::io
