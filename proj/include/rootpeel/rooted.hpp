#pragma once

#include <algorithm>
#include <cstddef>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rootpeel/error.hpp"
#include "rootpeel/kdtree.hpp"
#include "rootpeel/pset.hpp"
#include "rootpeel/space.hpp"

namespace rootpeel {

/// Staircase region of grades: (eps, sigma) belongs to it iff sigma reaches the
/// birth level and eps < theta of the largest density level <= sigma.
struct IntervalSupport {
  double birth_sigma = 0.0;
  // (density level, exclusive eps threshold), one entry per level >= birth.
  std::vector<std::pair<double, double>> thresholds;

  bool contains(double eps, double sigma) const {
    if (thresholds.empty() || sigma < birth_sigma) return false;
    auto it = std::upper_bound(thresholds.begin(), thresholds.end(), sigma,
                               [](double s, const auto& t) { return s < t.first; });
    if (it == thresholds.begin()) return false;
    return eps < std::prev(it)->second;
  }

  bool empty() const { return thresholds.empty() || !(thresholds.front().second > 0.0); }

  bool is_staircase() const {
    for (std::size_t i = 1; i < thresholds.size(); ++i)
      if (thresholds[i].second > thresholds[i - 1].second) return false;
    return true;
  }

  friend bool operator==(const IntervalSupport&, const IntervalSupport&) = default;
};

// ---------------------------------------------------------------------------
// Nearest neighbors

struct NNGraph {
  std::vector<std::size_t> nn;
  std::vector<std::pair<std::size_t, std::size_t>> mutual_pairs;  // first < second
};

namespace detail {

inline NNGraph finish_nn_graph(std::vector<std::size_t> nn) {
  NNGraph g;
  g.nn = std::move(nn);
  for (std::size_t x = 0; x < g.nn.size(); ++x)
    if (x < g.nn[x] && g.nn[g.nn[x]] == x) g.mutual_pairs.emplace_back(x, g.nn[x]);
  return g;
}

inline void require_pair(const AugmentedMetricSpace& space) {
  if (space.size() < 2) throw PreconditionError("nearest neighbors need at least two points");
}

}  // namespace detail

// O(n^2) scan; ties go to the point earliest in the canonical order.
inline NNGraph nn_graph_brute_force(const AugmentedMetricSpace& space) {
  detail::require_pair(space);
  const std::size_t n = space.size();
  const auto ranks = space.ranks();
  std::vector<std::size_t> nn(n);
  for (std::size_t x = 0; x < n; ++x) {
    std::size_t best = x == 0 ? 1 : 0;
    double best_d = space.distance_unchecked(x, best);
    for (std::size_t y = 0; y < n; ++y) {
      if (y == x) continue;
      const double d = space.distance_unchecked(x, y);
      if (d < best_d || (d == best_d && ranks[y] < ranks[best])) {
        best = y;
        best_d = d;
      }
    }
    nn[x] = best;
  }
  return detail::finish_nn_graph(std::move(nn));
}

inline NNGraph nn_graph_kdtree(const AugmentedMetricSpace& space) {
  detail::require_pair(space);
  if (!space.has_coordinates()) throw PreconditionError("kd-tree search needs coordinates");
  const KdTree tree(space);
  std::vector<std::size_t> nn(space.size());
  for (std::size_t x = 0; x < nn.size(); ++x) nn[x] = tree.nearest_other(x);
  return detail::finish_nn_graph(std::move(nn));
}

inline NNGraph nn_graph(const AugmentedMetricSpace& space) {
  return space.has_coordinates() ? nn_graph_kdtree(space) : nn_graph_brute_force(space);
}

// Points whose nearest neighbor precedes them in the canonical order.
inline std::vector<std::size_t> neighborly_rooted(const AugmentedMetricSpace& space,
                                                  const NNGraph& graph) {
  std::vector<std::size_t> out;
  for (std::size_t x = 0; x < space.size(); ++x)
    if (space.precedes(graph.nn[x], x)) out.push_back(x);
  return out;
}

inline std::vector<std::size_t> neighborly_rooted(const AugmentedMetricSpace& space) {
  return neighborly_rooted(space, nn_graph(space));
}

// ---------------------------------------------------------------------------
// Rootedness

/// Root of the surviving generator x in the view, if x is rooted.
///
/// A root is an older survivor y that belongs to x's cluster whenever x shares
/// its cluster with any other survivor. Candidates are the survivors in x's
/// first cluster at its own birth level; they are filtered level by level and
/// the earliest in canonical order is returned.
inline std::optional<std::size_t> is_rooted_generator(const PeelView& view, std::size_t x) {
  const auto& f = view.forest();
  const std::size_t r = detail::surviving_rank(view, x);
  const std::size_t birth = f.birth_level(r);
  const auto first = view.first_merge_node(birth, r);
  if (!first) return std::nullopt;

  std::vector<std::size_t> candidates;
  for (std::size_t q : f.leaves(birth, first->first))
    if (q < r && view.survives_rank(q)) candidates.push_back(q);

  for (std::size_t level = f.level_count(); level-- > birth + 1 && !candidates.empty();) {
    const auto hit = view.first_merge_node(level, r);
    if (!hit) return std::nullopt;
    std::erase_if(candidates, [&](std::size_t q) { return !view.below(level, q, hit->first); });
  }
  if (candidates.empty()) return std::nullopt;
  return f.point_of_rank(candidates.front());
}

/// Root of a set A of survivors, if A is rooted.
///
/// Checks every grade: each member of A either shares y's cluster or its whole
/// surviving cluster lies inside A. Candidates precede every member of A and
/// are tried in canonical order.
inline std::optional<std::size_t> is_rooted_subset(const PeelView& view,
                                                   const std::vector<std::size_t>& subset) {
  if (subset.empty()) throw PreconditionError("rooted-subset check needs a nonempty set");
  const auto& f = view.forest();
  std::vector<char> in_a(f.size(), 0);
  std::size_t min_rank = f.size();
  std::size_t min_birth = f.level_count();
  for (std::size_t x : subset) {
    const std::size_t r = detail::surviving_rank(view, x);
    in_a[r] = 1;
    min_rank = std::min(min_rank, r);
    min_birth = std::min(min_birth, f.birth_level(r));
  }

  const auto works = [&](std::size_t yr) {
    for (std::size_t level = min_birth; level < f.level_count(); ++level) {
      const std::size_t m = f.active(level);
      std::vector<double> scales{0.0};
      for (std::size_t k = 0; k + 1 < m; ++k)
        scales.push_back(f.height(level, static_cast<std::int32_t>(m + k)));
      scales.erase(std::unique(scales.begin(), scales.end()), scales.end());
      for (double eps : scales) {
        for (std::size_t xr = 0; xr < m; ++xr) {
          if (!in_a[xr]) continue;
          const std::int32_t node = f.cluster_node(level, xr, eps);
          if (view.below(level, yr, node) || (f.is_leaf(level, node) && yr == xr)) continue;
          for (std::size_t q : f.leaves(level, node))
            if (view.survives_rank(q) && !in_a[q]) return false;
        }
      }
    }
    return true;
  };

  for (std::size_t yr = 0; yr < min_rank; ++yr)
    if (view.survives_rank(yr) && works(yr)) return f.point_of_rank(yr);
  return std::nullopt;
}

// Support of the interval split off by peeling x onto root: for each level,
// the grades where x has not yet joined root's cluster.
inline IntervalSupport interval_support(const PeelView& view, std::size_t x, std::size_t root) {
  if (!is_valid_root(view, x, root))
    throw PreconditionError("point " + std::to_string(x) + " is not rooted at " +
                            std::to_string(root));
  const auto& f = view.forest();
  const std::size_t r = f.rank_of(x);
  const std::size_t rr = f.rank_of(root);
  IntervalSupport s;
  s.birth_sigma = f.density(x);
  for (std::size_t level = f.birth_level(r); level < f.level_count(); ++level)
    s.thresholds.emplace_back(f.sigma(level), f.lca_height(level, r, rr));
  return s;
}

inline IntervalSupport whole_module_support(const LeveledMergeForest& forest, std::size_t x) {
  IntervalSupport s;
  s.birth_sigma = forest.density(x);
  for (std::size_t level = forest.birth_level(forest.rank_of(x)); level < forest.level_count();
       ++level)
    s.thresholds.emplace_back(forest.sigma(level), kInfinity);
  return s;
}

// ---------------------------------------------------------------------------
// Peeling

enum class PeelReason { neighborly, general_rooted, bottom };

inline std::string_view to_string(PeelReason r) {
  switch (r) {
    case PeelReason::neighborly:
      return "neighborly";
    case PeelReason::general_rooted:
      return "general-rooted";
    case PeelReason::bottom:
      return "bottom";
  }
  return "?";
}

inline PeelReason peel_reason_from_string(std::string_view s) {
  if (s == "neighborly") return PeelReason::neighborly;
  if (s == "general-rooted") return PeelReason::general_rooted;
  if (s == "bottom") return PeelReason::bottom;
  throw ParseError("unknown peel reason '" + std::string(s) + "'");
}

struct PeelRecord {
  std::size_t generator = 0;
  std::optional<std::size_t> root;  // empty for the bottom record
  PeelReason reason = PeelReason::general_rooted;
  IntervalSupport support;
  bool zero_interval = false;  // duplicate point already merged with its root at birth
};

struct PeelTrace {
  std::vector<PeelRecord> records;
  PeelView final_view;

  std::size_t size() const noexcept { return records.size(); }
  std::size_t nonzero_count() const {
    return static_cast<std::size_t>(std::count_if(
        records.begin(), records.end(), [](const PeelRecord& r) { return !r.zero_interval; }));
  }
};

/// Greedy peeling of interval summands.
///
/// First a pass over neighborly-rooted points (nearest neighbor older and
/// still present), then repeated canonical-order passes of the general
/// rootedness test until a pass peels nothing. The oldest point is never
/// peeled; its whole-module interval is appended as the final record.
inline PeelTrace peel_all(std::shared_ptr<const LeveledMergeForest> forest,
                          const std::optional<NNGraph>& graph) {
  PeelView view(std::move(forest));
  const auto& f = view.forest();
  const std::size_t n = f.size();
  std::vector<PeelRecord> records;

  const auto peel = [&](std::size_t x, std::size_t root, PeelReason reason) {
    PeelRecord rec;
    rec.generator = x;
    rec.root = root;
    rec.reason = reason;
    rec.support.birth_sigma = f.density(x);
    const std::size_t r = f.rank_of(x);
    const std::size_t rr = f.rank_of(root);
    for (std::size_t level = f.birth_level(r); level < f.level_count(); ++level)
      rec.support.thresholds.emplace_back(f.sigma(level), f.lca_height(level, r, rr));
    rec.zero_interval = rec.support.empty();
    records.push_back(std::move(rec));
    view.remove_unchecked(x, root);
  };

  if (graph) {
    for (std::size_t r = 1; r < n; ++r) {
      const std::size_t x = f.point_of_rank(r);
      const std::size_t y = graph->nn[x];
      if (f.rank_of(y) < r && view.survives(y)) peel(x, y, PeelReason::neighborly);
    }
  }
  for (bool progress = true; progress;) {
    progress = false;
    for (std::size_t r = 1; r < n; ++r) {
      if (!view.survives_rank(r)) continue;
      const std::size_t x = f.point_of_rank(r);
      if (const auto root = is_rooted_generator(view, x)) {
        peel(x, *root, PeelReason::general_rooted);
        progress = true;
      }
    }
  }

  PeelRecord bottom;
  bottom.generator = f.point_of_rank(0);
  bottom.reason = PeelReason::bottom;
  bottom.support = whole_module_support(f, bottom.generator);
  records.push_back(std::move(bottom));
  return {std::move(records), std::move(view)};
}

inline PeelTrace peel_all(const AugmentedMetricSpace& space) {
  auto forest = std::make_shared<const LeveledMergeForest>(space);
  std::optional<NNGraph> graph;
  if (space.size() >= 2) graph = nn_graph(space);
  return peel_all(std::move(forest), graph);
}

/// Replays the records of a trace against a fresh view of the forest,
/// re-checking every root and support. Returns the views before each record
/// (so views.size() == records.size()), with the final restricted view last
/// for the bottom record.
inline std::vector<PeelView> replay(std::shared_ptr<const LeveledMergeForest> forest,
                                    const std::vector<PeelRecord>& records) {
  std::vector<PeelView> views;
  PeelView view(std::move(forest));
  for (std::size_t i = 0; i < records.size(); ++i) {
    const PeelRecord& rec = records[i];
    views.push_back(view);
    if (rec.reason == PeelReason::bottom) {
      if (i + 1 != records.size()) throw ConsistencyError("bottom record must come last");
      if (view.forest().rank_of(rec.generator) != 0)
        throw ConsistencyError("bottom record does not name the oldest point");
      if (rec.support != whole_module_support(view.forest(), rec.generator))
        throw ConsistencyError("bottom record support is not the whole module");
      continue;
    }
    if (!rec.root) throw ConsistencyError("record without a root");
    if (!view.survives(rec.generator))
      throw ConsistencyError("record " + std::to_string(i) + " peels a removed point");
    if (interval_support(view, rec.generator, *rec.root) != rec.support)
      throw ConsistencyError("record " + std::to_string(i) + " support does not replay");
    view = restrict(view, rec.generator, *rec.root);
  }
  return views;
}

// ---------------------------------------------------------------------------
// One-parameter elder rule

/// A one-parameter persistent set: vertices with birth values and edges whose
/// effective appearance value is max(value, birth of both endpoints).
struct OneParameterFiltration {
  struct Edge {
    double value;
    std::size_t a;
    std::size_t b;
  };
  std::vector<double> birth;
  std::vector<Edge> edges;
};

struct Bar {
  double birth;
  double death;  // +inf for essential bars
  friend bool operator==(const Bar&, const Bar&) = default;
  friend auto operator<=>(const Bar&, const Bar&) = default;
};

/// Barcode of a one-parameter persistent set obtained by peeling maximal
/// generators: the latest-born survivor (ties: largest index) dies when its
/// cluster first contains another survivor, and is then peeled. One bar per
/// vertex, sorted.
inline std::vector<Bar> elder_barcode_1d(const OneParameterFiltration& filt) {
  const std::size_t n = filt.birth.size();
  if (n == 0) return {};
  std::vector<OneParameterFiltration::Edge> edges = filt.edges;
  for (auto& e : edges) {
    if (e.a >= n || e.b >= n) throw PreconditionError("edge endpoint out of range");
    e.value = std::max({e.value, filt.birth[e.a], filt.birth[e.b]});
  }
  std::stable_sort(edges.begin(), edges.end(),
                   [](const auto& l, const auto& r) { return l.value < r.value; });

  // Dendrogram: leaves 0..n-1, merge nodes appended with nondecreasing height.
  std::vector<std::int64_t> parent(n, -1);
  std::vector<double> height(n, 0.0);
  std::vector<std::size_t> count(n, 1);
  std::vector<std::size_t> top(n);
  std::iota(top.begin(), top.end(), std::size_t{0});
  UnionFind uf(n);
  for (const auto& e : edges) {
    const std::uint32_t ra = uf.find(static_cast<std::uint32_t>(e.a));
    const std::uint32_t rb = uf.find(static_cast<std::uint32_t>(e.b));
    if (ra == rb) continue;
    const std::size_t node = parent.size();
    parent.push_back(-1);
    height.push_back(e.value);
    count.push_back(count[top[ra]] + count[top[rb]]);
    parent[top[ra]] = static_cast<std::int64_t>(node);
    parent[top[rb]] = static_cast<std::int64_t>(node);
    top[*uf.unite(ra, rb)] = node;
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (filt.birth[a] != filt.birth[b]) return filt.birth[a] > filt.birth[b];
    return a > b;
  });

  std::vector<Bar> bars;
  bars.reserve(n);
  for (std::size_t x : order) {
    double death = kInfinity;
    for (std::int64_t v = parent[x]; v >= 0; v = parent[static_cast<std::size_t>(v)]) {
      if (count[static_cast<std::size_t>(v)] >= 2) {
        death = height[static_cast<std::size_t>(v)];
        break;
      }
    }
    for (std::int64_t v = parent[x]; v >= 0; v = parent[static_cast<std::size_t>(v)])
      --count[static_cast<std::size_t>(v)];
    bars.push_back({filt.birth[x], death});
  }
  std::sort(bars.begin(), bars.end());
  return bars;
}

// The scale filtration of M_sigma: every present point born at 0, one edge per
// pair at its distance. Vertices are the present points in canonical order.
inline OneParameterFiltration scale_filtration(const AugmentedMetricSpace& space, double sigma) {
  if (!space.has_density()) throw PreconditionError("density has not been attached");
  std::vector<std::size_t> present;
  for (std::size_t x : space.order())
    if (space.density(x) <= sigma) present.push_back(x);
  OneParameterFiltration filt;
  filt.birth.assign(present.size(), 0.0);
  for (std::size_t i = 0; i < present.size(); ++i)
    for (std::size_t j = i + 1; j < present.size(); ++j)
      filt.edges.push_back({space.distance_unchecked(present[i], present[j]), i, j});
  return filt;
}

// The density filtration of G_eps(M): points born at f, edges of length <= eps.
inline OneParameterFiltration density_filtration(const AugmentedMetricSpace& space, double eps) {
  if (!space.has_density()) throw PreconditionError("density has not been attached");
  OneParameterFiltration filt;
  const std::size_t n = space.size();
  filt.birth.assign(space.density().begin(), space.density().end());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (space.distance_unchecked(i, j) <= eps)
        filt.edges.push_back({std::max(filt.birth[i], filt.birth[j]), i, j});
  return filt;
}

// ---------------------------------------------------------------------------
// Staircodes and conquerors

/// Per-level thresholds of the grades where x is strictly the oldest point of
/// its cluster. Requires an injective density.
inline IntervalSupport staircode(const LeveledMergeForest& forest, std::size_t x) {
  const std::size_t r = forest.rank_of(x);
  for (std::size_t q = 1; q < forest.size(); ++q)
    if (forest.density(forest.point_of_rank(q)) == forest.density(forest.point_of_rank(q - 1)))
      throw PreconditionError("staircode needs an injective density");
  IntervalSupport s;
  s.birth_sigma = forest.density(x);
  for (std::size_t level = forest.birth_level(r); level < forest.level_count(); ++level) {
    const std::size_t m = forest.active(level);
    // Oldest rank below each node; merges are stored bottom-up.
    std::vector<std::size_t> oldest(2 * m - 1);
    std::iota(oldest.begin(), oldest.begin() + static_cast<std::ptrdiff_t>(m), std::size_t{0});
    for (std::size_t k = 0; k + 1 < m; ++k) {
      const auto [a, b] = forest.children(level, static_cast<std::int32_t>(m + k));
      oldest[m + k] = std::min(oldest[static_cast<std::size_t>(a)], oldest[static_cast<std::size_t>(b)]);
    }
    double theta = kInfinity;
    for (std::int32_t v = forest.parent(level, static_cast<std::int32_t>(r));
         v != LeveledMergeForest::kNoParent; v = forest.parent(level, v)) {
      if (oldest[static_cast<std::size_t>(v)] < r) {
        theta = forest.height(level, v);
        break;
      }
    }
    s.thresholds.emplace_back(forest.sigma(level), theta);
  }
  return s;
}

inline IntervalSupport staircode(const AugmentedMetricSpace& space, std::size_t x) {
  return staircode(LeveledMergeForest(space), x);
}

/// A single older point x' that minimizes the ultrametric distance to x among
/// all points older than x, simultaneously at every level where x exists.
/// The oldest point is its own constant conqueror.
inline std::optional<std::size_t> constant_conqueror(const LeveledMergeForest& forest,
                                                     std::size_t x) {
  const std::size_t r = forest.rank_of(x);
  if (r == 0) return x;
  std::vector<std::size_t> candidates(r);
  std::iota(candidates.begin(), candidates.end(), std::size_t{0});
  for (std::size_t level = forest.birth_level(r); level < forest.level_count(); ++level) {
    std::vector<double> u(r);
    double best = kInfinity;
    for (std::size_t q = 0; q < r; ++q) {
      u[q] = forest.lca_height(level, r, q);
      best = std::min(best, u[q]);
    }
    std::erase_if(candidates, [&](std::size_t q) { return u[q] != best; });
    if (candidates.empty()) return std::nullopt;
  }
  return forest.point_of_rank(candidates.front());
}

inline std::optional<std::size_t> constant_conqueror(const AugmentedMetricSpace& space,
                                                     std::size_t x) {
  return constant_conqueror(LeveledMergeForest(space), x);
}

}  // namespace rootpeel
