#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "rootpeel/space.hpp"

namespace rootpeel {

/// Static kd-tree over the points of a coordinate space, answering
/// all-nearest-neighbor queries.
///
/// Candidates are compared by (distance, canonical rank), with distances taken
/// from AugmentedMetricSpace::distance_unchecked so results are bit-identical
/// to a brute-force scan.
class KdTree {
 public:
  explicit KdTree(const AugmentedMetricSpace& space, std::size_t leaf_size = 8)
      : space_(space), leaf_size_(std::max<std::size_t>(leaf_size, 1)) {
    idx_.resize(space.size());
    std::iota(idx_.begin(), idx_.end(), std::size_t{0});
    nodes_.reserve(2 * space.size() / leaf_size_ + 2);
    build(0, idx_.size());
  }

  // Nearest neighbor of point q other than q itself; requires n >= 2.
  std::size_t nearest_other(std::size_t q) const {
    Best best{std::numeric_limits<double>::infinity(), std::numeric_limits<std::size_t>::max(), q};
    search(0, q, best);
    return best.point;
  }

 private:
  struct Node {
    std::size_t begin, end;
    std::size_t dim = 0;
    double split = 0.0;
    std::int64_t left = -1, right = -1;
  };

  struct Best {
    double dist;
    std::size_t rank;
    std::size_t point;
  };

  std::size_t build(std::size_t begin, std::size_t end) {
    const std::size_t id = nodes_.size();
    nodes_.push_back({begin, end});
    if (end - begin <= leaf_size_) return id;
    const std::size_t d = space_.dimension();
    std::size_t best_dim = 0;
    double best_spread = -1.0;
    for (std::size_t k = 0; k < d; ++k) {
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      for (std::size_t i = begin; i < end; ++i) {
        const double v = space_.point(idx_[i])[k];
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      if (hi - lo > best_spread) {
        best_spread = hi - lo;
        best_dim = k;
      }
    }
    if (best_spread <= 0.0) return id;  // all points coincide
    const std::size_t mid = begin + (end - begin) / 2;
    std::nth_element(idx_.begin() + static_cast<std::ptrdiff_t>(begin),
                     idx_.begin() + static_cast<std::ptrdiff_t>(mid),
                     idx_.begin() + static_cast<std::ptrdiff_t>(end),
                     [&](std::size_t a, std::size_t b) {
                       return space_.point(a)[best_dim] < space_.point(b)[best_dim];
                     });
    nodes_[id].dim = best_dim;
    nodes_[id].split = space_.point(idx_[mid])[best_dim];
    const auto left = static_cast<std::int64_t>(build(begin, mid));
    const auto right = static_cast<std::int64_t>(build(mid, end));
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
  }

  void consider(std::size_t q, std::size_t p, Best& best) const {
    if (p == q) return;
    const double dist = space_.distance_unchecked(q, p);
    const std::size_t rank = space_.ranks()[p];
    if (dist < best.dist || (dist == best.dist && rank < best.rank)) best = {dist, rank, p};
  }

  void search(std::size_t id, std::size_t q, Best& best) const {
    const Node& node = nodes_[id];
    if (node.left < 0) {
      for (std::size_t i = node.begin; i < node.end; ++i) consider(q, idx_[i], best);
      return;
    }
    const double gap = space_.point(q)[node.dim] - node.split;
    const auto near = static_cast<std::size_t>(gap < 0.0 ? node.left : node.right);
    const auto far = static_cast<std::size_t>(gap < 0.0 ? node.right : node.left);
    search(near, q, best);
    // Small slack: a rounded sqrt can fall one ulp below |gap|, and ties matter.
    if (std::abs(gap) <= best.dist * (1.0 + 1e-12)) search(far, q, best);
  }

  const AugmentedMetricSpace& space_;
  std::size_t leaf_size_;
  std::vector<std::size_t> idx_;
  std::vector<Node> nodes_;
};

}  // namespace rootpeel
