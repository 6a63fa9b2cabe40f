#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

#include "rootpeel/error.hpp"
#include "rootpeel/space.hpp"

namespace rootpeel {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// The finite grid D x T of scales and density levels.
struct GradeGrid {
  std::vector<double> eps_values;    // distinct pairwise distances, always starts at 0
  std::vector<double> sigma_values;  // distinct density values

  std::size_t size() const noexcept { return eps_values.size() * sigma_values.size(); }
};

inline GradeGrid grade_grid(const AugmentedMetricSpace& space) {
  if (!space.has_density()) throw PreconditionError("density has not been attached");
  GradeGrid grid;
  const std::size_t n = space.size();
  grid.eps_values.reserve(n * (n - 1) / 2 + 1);
  grid.eps_values.push_back(0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) grid.eps_values.push_back(space.distance_unchecked(i, j));
  std::sort(grid.eps_values.begin(), grid.eps_values.end());
  grid.eps_values.erase(std::unique(grid.eps_values.begin(), grid.eps_values.end()),
                        grid.eps_values.end());
  grid.sigma_values.assign(space.density().begin(), space.density().end());
  std::sort(grid.sigma_values.begin(), grid.sigma_values.end());
  grid.sigma_values.erase(std::unique(grid.sigma_values.begin(), grid.sigma_values.end()),
                          grid.sigma_values.end());
  return grid;
}

// Union-find with path halving and union by size.
class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), std::uint32_t{0});
  }

  std::uint32_t find(std::uint32_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  // Returns the new representative, or nullopt if already joined.
  std::optional<std::uint32_t> unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return std::nullopt;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    return a;
  }

 private:
  std::vector<std::uint32_t> parent_;
  std::vector<std::uint32_t> size_;
};

struct MergeEvent {
  double eps;
  std::size_t a;  // oldest point (canonical order) of one merged cluster
  std::size_t b;  // oldest point of the other
};

/// Single-linkage merge trees of every sublevel set M_sigma.
///
/// Internally everything lives in rank space: rank r is the r-th point of the
/// canonical order, so level L holds exactly the ranks [0, active(L)). Each
/// level is a binary dendrogram. Node ids 0..m-1 are leaves (ranks), ids
/// m..2m-2 are merges in nondecreasing height, so a parent always has a larger
/// id than its children. Merge trees are built incrementally: the minimum
/// spanning tree of level L+1 is contained in the tree of level L plus the
/// edges incident to the newly added points.
class LeveledMergeForest {
 public:
  static constexpr std::int32_t kNoParent = -1;

  explicit LeveledMergeForest(const AugmentedMetricSpace& space) {
    if (!space.has_density()) throw PreconditionError("density has not been attached");
    n_ = space.size();
    order_ = space.order();
    rank_.assign(space.ranks().begin(), space.ranks().end());
    density_.assign(space.density().begin(), space.density().end());
    build(space);
  }

  std::size_t size() const noexcept { return n_; }
  std::size_t level_count() const noexcept { return sigma_.size(); }
  double sigma(std::size_t level) const { return sigma_.at(level); }
  const std::vector<double>& sigma_values() const noexcept { return sigma_; }
  std::size_t active(std::size_t level) const { return active_.at(level); }

  std::size_t point_of_rank(std::size_t r) const { return order_.at(r); }
  std::size_t rank_of(std::size_t x) const {
    if (x >= n_) throw QueryError("point index " + std::to_string(x) + " out of range");
    return rank_[x];
  }
  double density(std::size_t x) const { return density_.at(x); }

  // First level at which rank r is present.
  std::size_t birth_level(std::size_t r) const { return birth_level_.at(r); }

  // Largest level whose sigma is <= the given value, or nullopt if none.
  std::optional<std::size_t> level_at(double sigma) const {
    const auto it = std::upper_bound(sigma_.begin(), sigma_.end(), sigma);
    if (it == sigma_.begin()) return std::nullopt;
    return static_cast<std::size_t>(it - sigma_.begin()) - 1;
  }

  // ---- rank-space dendrogram access --------------------------------------

  std::int32_t parent(std::size_t level, std::int32_t node) const {
    return parent_[node_offset_[level] + static_cast<std::size_t>(node)];
  }
  // Height of a node; leaves have height 0.
  double height(std::size_t level, std::int32_t node) const {
    const auto m = static_cast<std::int32_t>(active_[level]);
    return node < m ? 0.0 : height_[merge_offset_[level] + static_cast<std::size_t>(node - m)];
  }
  std::pair<std::int32_t, std::int32_t> children(std::size_t level, std::int32_t node) const {
    const auto m = static_cast<std::int32_t>(active_[level]);
    const std::size_t k = merge_offset_[level] + static_cast<std::size_t>(node - m);
    return {left_[k], right_[k]};
  }
  bool is_leaf(std::size_t level, std::int32_t node) const {
    return node < static_cast<std::int32_t>(active_[level]);
  }
  std::size_t node_count(std::size_t level) const { return 2 * active_[level] - 1; }

  // Top node of rank r's cluster at scale eps.
  std::int32_t cluster_node(std::size_t level, std::size_t r, double eps) const {
    auto node = static_cast<std::int32_t>(r);
    for (;;) {
      const std::int32_t p = parent(level, node);
      if (p == kNoParent || height(level, p) > eps) return node;
      node = p;
    }
  }

  // Height of the lowest common ancestor: the single-linkage ultrametric.
  double lca_height(std::size_t level, std::size_t ra, std::size_t rb) const {
    auto a = static_cast<std::int32_t>(ra);
    auto b = static_cast<std::int32_t>(rb);
    while (a != b) {
      if (a < b) {
        a = parent(level, a);
      } else {
        b = parent(level, b);
      }
      if (a == kNoParent || b == kNoParent) return kInfinity;
    }
    return height(level, a);
  }

  // Ranks below a node, ascending.
  std::vector<std::size_t> leaves(std::size_t level, std::int32_t node) const {
    std::vector<std::size_t> out;
    std::vector<std::int32_t> stack{node};
    while (!stack.empty()) {
      const std::int32_t v = stack.back();
      stack.pop_back();
      if (is_leaf(level, v)) {
        out.push_back(static_cast<std::size_t>(v));
      } else {
        const auto [l, r] = children(level, v);
        stack.push_back(l);
        stack.push_back(r);
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  // Merge events of one level in order of scale; each names the oldest point
  // of the two clusters being joined.
  std::vector<MergeEvent> events(std::size_t level) const {
    const std::size_t m = active_.at(level);
    std::vector<std::size_t> oldest(2 * m - 1);
    for (std::size_t r = 0; r < m; ++r) oldest[r] = r;
    std::vector<MergeEvent> out;
    out.reserve(m - 1);
    for (std::size_t k = 0; k + 1 < m; ++k) {
      const auto node = static_cast<std::int32_t>(m + k);
      const auto [l, r] = children(level, node);
      oldest[m + k] = std::min(oldest[l], oldest[r]);
      out.push_back({height(level, node), order_[oldest[l]], order_[oldest[r]]});
    }
    return out;
  }

 private:
  struct Edge {
    double w;
    std::uint32_t a;
    std::uint32_t b;
    bool operator<(const Edge& o) const noexcept {
      if (w != o.w) return w < o.w;
      if (a != o.a) return a < o.a;
      return b < o.b;
    }
  };

  void build(const AugmentedMetricSpace& space) {
    birth_level_.resize(n_);
    for (std::size_t r = 0; r < n_;) {
      const double s = density_[order_[r]];
      std::size_t end = r;
      while (end < n_ && density_[order_[end]] == s) ++end;
      for (std::size_t q = r; q < end; ++q) birth_level_[q] = sigma_.size();
      sigma_.push_back(s);
      active_.push_back(end);
      r = end;
    }

    std::size_t nodes = 0, merges = 0;
    for (std::size_t m : active_) {
      node_offset_.push_back(nodes);
      merge_offset_.push_back(merges);
      nodes += 2 * m - 1;
      merges += m - 1;
    }
    parent_.assign(nodes, kNoParent);
    height_.resize(merges);
    left_.resize(merges);
    right_.resize(merges);

    std::vector<Edge> mst;
    std::vector<Edge> fresh;
    std::vector<Edge> merged;
    std::size_t prev = 0;
    for (std::size_t level = 0; level < active_.size(); ++level) {
      const std::size_t m = active_[level];
      fresh.clear();
      for (std::size_t r = prev; r < m; ++r) {
        const std::size_t x = order_[r];
        for (std::size_t q = 0; q < r; ++q)
          fresh.push_back({space.distance_unchecked(order_[q], x), static_cast<std::uint32_t>(q),
                           static_cast<std::uint32_t>(r)});
      }
      std::sort(fresh.begin(), fresh.end());
      merged.clear();
      merged.reserve(mst.size() + fresh.size());
      std::merge(mst.begin(), mst.end(), fresh.begin(), fresh.end(), std::back_inserter(merged));

      mst.clear();
      UnionFind uf(m);
      std::vector<std::int32_t> top(m);
      std::iota(top.begin(), top.end(), 0);
      const std::size_t noff = node_offset_[level];
      const std::size_t moff = merge_offset_[level];
      std::size_t k = 0;
      for (const Edge& e : merged) {
        const std::uint32_t ra = uf.find(e.a);
        const std::uint32_t rb = uf.find(e.b);
        if (ra == rb) continue;
        const auto node = static_cast<std::int32_t>(m + k);
        parent_[noff + static_cast<std::size_t>(top[ra])] = node;
        parent_[noff + static_cast<std::size_t>(top[rb])] = node;
        height_[moff + k] = e.w;
        left_[moff + k] = top[ra];
        right_[moff + k] = top[rb];
        const std::uint32_t rep = *uf.unite(ra, rb);
        top[rep] = node;
        mst.push_back(e);
        if (++k + 1 == m) break;
      }
      prev = m;
    }
  }

  std::size_t n_ = 0;
  std::vector<std::size_t> order_;
  std::vector<std::size_t> rank_;
  std::vector<double> density_;
  std::vector<double> sigma_;
  std::vector<std::size_t> active_;
  std::vector<std::size_t> birth_level_;
  std::vector<std::size_t> node_offset_;
  std::vector<std::size_t> merge_offset_;
  std::vector<std::int32_t> parent_;
  std::vector<double> height_;
  std::vector<std::int32_t> left_;
  std::vector<std::int32_t> right_;
};

/// The persistent-set side of iterated peeling: the image of the composite
/// idempotent, presented as the original forest with some generators removed.
///
/// Clusters are the original clusters intersected with the surviving points;
/// connectivity may pass through removed points. Survivor counts per merge
/// node are kept up to date so "does x share a cluster with another
/// survivor" is a walk up the tree.
class PeelView {
 public:
  explicit PeelView(std::shared_ptr<const LeveledMergeForest> forest)
      : forest_(std::move(forest)) {
    const auto& f = *forest_;
    removed_.assign(f.size(), 0);
    root_of_.assign(f.size(), std::nullopt);
    count_offset_.resize(f.level_count());
    std::size_t total = 0;
    for (std::size_t level = 0; level < f.level_count(); ++level) {
      count_offset_[level] = total;
      total += f.active(level) - 1;
    }
    counts_.resize(total);
    for (std::size_t level = 0; level < f.level_count(); ++level) {
      const std::size_t m = f.active(level);
      for (std::size_t k = 0; k + 1 < m; ++k) {
        const auto [l, r] = f.children(level, static_cast<std::int32_t>(m + k));
        counts_[count_offset_[level] + k] = survivors_below(level, l) + survivors_below(level, r);
      }
    }
  }

  explicit PeelView(const AugmentedMetricSpace& space)
      : PeelView(std::make_shared<const LeveledMergeForest>(space)) {}

  const LeveledMergeForest& forest() const noexcept { return *forest_; }
  std::shared_ptr<const LeveledMergeForest> forest_ptr() const noexcept { return forest_; }

  std::size_t size() const noexcept { return forest_->size(); }
  bool survives(std::size_t x) const { return !removed_.at(forest_->rank_of(x)); }
  bool survives_rank(std::size_t r) const noexcept { return !removed_[r]; }
  std::optional<std::size_t> root_of(std::size_t x) const {
    forest_->rank_of(x);
    return root_of_[x];
  }
  // Removed points in peel order.
  const std::vector<std::size_t>& removed() const noexcept { return removal_order_; }
  std::size_t survivor_count() const noexcept { return size() - removal_order_.size(); }

  // Surviving points (indices) below a node.
  std::int32_t survivors_below(std::size_t level, std::int32_t node) const {
    if (forest_->is_leaf(level, node)) return removed_[static_cast<std::size_t>(node)] ? 0 : 1;
    const std::size_t m = forest_->active(level);
    return counts_[count_offset_[level] + static_cast<std::size_t>(node) - m];
  }

  // Node and height at which surviving rank r first shares its cluster with
  // another survivor at the given level, or nullopt if it never does. The node
  // is the top of the cluster at that height.
  std::optional<std::pair<std::int32_t, double>> first_merge_node(std::size_t level,
                                                                  std::size_t r) const {
    const auto& f = *forest_;
    auto node = static_cast<std::int32_t>(r);
    for (;;) {
      const std::int32_t p = f.parent(level, node);
      if (p == LeveledMergeForest::kNoParent) return std::nullopt;
      node = p;
      if (survivors_below(level, node) >= 2) break;
    }
    const double h = f.height(level, node);
    for (std::int32_t p = f.parent(level, node);
         p != LeveledMergeForest::kNoParent && f.height(level, p) <= h; p = f.parent(level, p))
      node = p;
    return std::make_pair(node, h);
  }

  // Whether rank r lies below the given node at the given level.
  bool below(std::size_t level, std::size_t r, std::int32_t node) const {
    const auto& f = *forest_;
    const double h = f.height(level, node);
    auto v = static_cast<std::int32_t>(r);
    while (v < node) {
      const std::int32_t p = f.parent(level, v);
      if (p == LeveledMergeForest::kNoParent || f.height(level, p) > h) return false;
      v = p;
    }
    return v == node;
  }

  // Surviving points of a node's subtree, as point indices in canonical order.
  std::vector<std::size_t> surviving_points(std::size_t level, std::int32_t node) const {
    std::vector<std::size_t> out;
    for (std::size_t r : forest_->leaves(level, node))
      if (!removed_[r]) out.push_back(forest_->point_of_rank(r));
    return out;
  }

  // Records x as peeled onto root without re-checking rootedness.
  void remove_unchecked(std::size_t x, std::size_t root) {
    const auto& f = *forest_;
    const std::size_t r = f.rank_of(x);
    if (removed_[r]) throw QueryError("point " + std::to_string(x) + " is already removed");
    removed_[r] = 1;
    root_of_[x] = root;
    removal_order_.push_back(x);
    for (std::size_t level = f.birth_level(r); level < f.level_count(); ++level) {
      const std::size_t m = f.active(level);
      for (std::int32_t p = f.parent(level, static_cast<std::int32_t>(r));
           p != LeveledMergeForest::kNoParent; p = f.parent(level, p))
        --counts_[count_offset_[level] + static_cast<std::size_t>(p) - m];
    }
  }

 private:
  std::shared_ptr<const LeveledMergeForest> forest_;
  std::vector<char> removed_;  // by rank
  std::vector<std::optional<std::size_t>> root_of_;  // by point
  std::vector<std::size_t> removal_order_;
  std::vector<std::size_t> count_offset_;
  std::vector<std::int32_t> counts_;
};

// ---------------------------------------------------------------------------
// Queries

inline std::pair<GradeGrid, LeveledMergeForest> build(const AugmentedMetricSpace& space) {
  return {grade_grid(space), LeveledMergeForest(space)};
}

namespace detail {

inline std::size_t query_level(const LeveledMergeForest& f, double sigma, std::size_t x) {
  const std::size_t r = f.rank_of(x);
  const auto level = f.level_at(sigma);
  if (!level || *level < f.birth_level(r))
    throw QueryError("point " + std::to_string(x) + " is not present at density level " +
                     std::to_string(sigma));
  return *level;
}

inline std::size_t surviving_rank(const PeelView& view, std::size_t x) {
  const std::size_t r = view.forest().rank_of(x);
  if (!view.survives_rank(r)) throw QueryError("point " + std::to_string(x) + " has been peeled");
  return r;
}

}  // namespace detail

// Surviving points in x's connected component of G_eps(M_sigma), sorted by index.
inline std::vector<std::size_t> cluster_at(const PeelView& view, double eps, double sigma,
                                           std::size_t x) {
  const auto& f = view.forest();
  const std::size_t r = detail::surviving_rank(view, x);
  const std::size_t level = detail::query_level(f, sigma, x);
  auto out = view.surviving_points(level, f.cluster_node(level, r, eps));
  std::sort(out.begin(), out.end());
  return out;
}

inline double ultrametric(const LeveledMergeForest& forest, double sigma, std::size_t x,
                          std::size_t y) {
  const std::size_t lx = detail::query_level(forest, sigma, x);
  detail::query_level(forest, sigma, y);
  return forest.lca_height(lx, forest.rank_of(x), forest.rank_of(y));
}

struct FirstMerge {
  double eps = kInfinity;
  std::vector<std::size_t> cluster;  // surviving points, sorted by index
};

inline FirstMerge first_merge_scale(const PeelView& view, double sigma, std::size_t x) {
  const std::size_t r = detail::surviving_rank(view, x);
  const std::size_t level = detail::query_level(view.forest(), sigma, x);
  const auto hit = view.first_merge_node(level, r);
  if (!hit) return {};
  FirstMerge out{hit->second, view.surviving_points(level, hit->first)};
  std::sort(out.cluster.begin(), out.cluster.end());
  return out;
}


// Whether root can serve as the root of the surviving generator x: root is an
// older survivor lying in x's cluster whenever that cluster holds another
// survivor, at every density level where x exists.
inline bool is_valid_root(const PeelView& view, std::size_t x, std::size_t root) {
  const auto& f = view.forest();
  const std::size_t r = detail::surviving_rank(view, x);
  const std::size_t rr = f.rank_of(root);
  if (!view.survives_rank(rr) || rr >= r) return false;
  for (std::size_t level = f.level_count(); level-- > f.birth_level(r);) {
    const auto hit = view.first_merge_node(level, r);
    if (!hit || !view.below(level, rr, hit->first)) return false;
  }
  return true;
}

inline PeelView restrict_unchecked(const PeelView& view, std::size_t x, std::size_t root) {
  PeelView out = view;
  out.remove_unchecked(x, root);
  return out;
}

// The view with x peeled onto root; throws unless (x, root) is rooted.
inline PeelView restrict(const PeelView& view, std::size_t x, std::size_t root) {
  if (!is_valid_root(view, x, root))
    throw PreconditionError("point " + std::to_string(x) + " is not rooted at " +
                            std::to_string(root) + " in this view");
  return restrict_unchecked(view, x, root);
}

}  // namespace rootpeel
