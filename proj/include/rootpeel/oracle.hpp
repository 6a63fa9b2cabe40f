#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "rootpeel/error.hpp"
#include "rootpeel/linalg/module.hpp"
#include "rootpeel/pset.hpp"
#include "rootpeel/rooted.hpp"

namespace rootpeel::linalg {

struct RecordCheck {
  bool pass = false;
  std::string detail;
};

namespace detail {

// Whether m is the interval module on the grades where support holds: rank one
// there, zero elsewhere, and every covering map inside the support nonzero.
template <class F>
std::string interval_mismatch(const GridModule<F>& m, const IntervalSupport& support) {
  for (std::size_t j = 0; j < m.sigma_count(); ++j)
    for (std::size_t i = 0; i < m.eps_count(); ++i) {
      const bool in = support.contains(m.eps_values[i], m.sigma_values[j]);
      const std::size_t g = m.grade(i, j);
      const std::string where = " at (" + std::to_string(m.eps_values[i]) + ", " +
                                std::to_string(m.sigma_values[j]) + ")";
      if (m.dims[g] != (in ? 1u : 0u))
        return "interval summand has dimension " + std::to_string(m.dims[g]) + where;
      if (!in) continue;
      if (i + 1 < m.eps_count() && m.dims[m.grade(i + 1, j)] == 1 && m.right[g].is_zero())
        return "interval summand has a zero map" + where;
      if (j + 1 < m.sigma_count() && m.dims[m.grade(i, j + 1)] == 1 && m.up[g].is_zero())
        return "interval summand has a zero map" + where;
    }
  return {};
}

}  // namespace detail

/// Checks one peel record against exact linear algebra on the view it was
/// peeled from: the idempotent must split off exactly the claimed interval,
/// and (for non-bottom records) leave the linearization of the restricted view.
template <class F = Rational>
RecordCheck check_record(const PeelView& before, const GradeGrid& grid, const PeelRecord& rec,
                         std::size_t dim_budget = kDefaultDimBudget) {
  try {
    const auto lin = linearize<F>(before, grid, dim_budget);
    if (rec.reason == PeelReason::bottom) {
      const auto phi = bottom_idempotent(lin, rec.generator);
      const auto [rest, bottom] = split(lin.module, phi);
      if (auto bad = detail::interval_mismatch(bottom, rec.support); !bad.empty()) return {false, bad};
      return {true, "bottom interval splits off"};
    }
    if (!rec.root) return {false, "record has no root"};
    const auto phi = idempotent_from_peel(lin, rec.generator, *rec.root);
    const auto [interval, rest] = split(lin.module, phi);
    if (auto bad = detail::interval_mismatch(interval, rec.support); !bad.empty()) return {false, bad};
    const auto after = linearize<F>(restrict(before, rec.generator, *rec.root), grid, dim_budget);
    if (rest.dims != after.module.dims) return {false, "complement does not match the restricted view"};
    return {true, "interval splits off"};
  } catch (const ConsistencyError& e) {
    return {false, e.what()};
  } catch (const PreconditionError& e) {
    return {false, e.what()};
  }
}

// Checks every record of a trace in order; a trace that does not replay fails
// at the offending record and the remaining records are reported as skipped.
template <class F = Rational>
std::vector<RecordCheck> check_trace(std::shared_ptr<const LeveledMergeForest> forest,
                                     const GradeGrid& grid, const std::vector<PeelRecord>& records,
                                     std::size_t dim_budget = kDefaultDimBudget) {
  std::vector<RecordCheck> out;
  PeelView view(std::move(forest));
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& rec = records[i];
    std::string problem;
    try {
      if (rec.reason == PeelReason::bottom) {
        if (i + 1 != records.size()) problem = "bottom record is not last";
        else if (view.forest().rank_of(rec.generator) != 0) problem = "bottom record is not the oldest point";
        else if (rec.support != whole_module_support(view.forest(), rec.generator))
          problem = "bottom support is not the whole module";
      } else if (!rec.root) {
        problem = "record has no root";
      } else if (!view.survives(rec.generator) || !is_valid_root(view, rec.generator, *rec.root)) {
        problem = "generator is not rooted at the named root";
      } else if (interval_support(view, rec.generator, *rec.root) != rec.support) {
        problem = "support does not match the view";
      }
    } catch (const QueryError& e) {
      problem = e.what();
    }
    if (!problem.empty()) {
      out.push_back({false, problem});
      for (++i; i < records.size(); ++i) out.push_back({false, "skipped"});
      break;
    }
    out.push_back(check_record<F>(view, grid, rec, dim_budget));
    if (rec.root) view = restrict(view, rec.generator, *rec.root);
  }
  return out;
}

}  // namespace rootpeel::linalg
