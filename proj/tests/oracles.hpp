#pragma once

// Brute-force reference implementations used only by the tests. They work
// straight from the definitions (graph searches over all pairs) and share no
// code with the library beyond the space type.

#include <algorithm>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <queue>
#include <set>
#include <vector>

#include "rootpeel/rng.hpp"
#include "rootpeel/rooted.hpp"
#include "rootpeel/space.hpp"

namespace oracle {

using rootpeel::AugmentedMetricSpace;

inline constexpr double inf = std::numeric_limits<double>::infinity();

// Connected component of x in the graph on {f <= sigma} with edges d <= eps.
inline std::vector<std::size_t> bfs_cluster(const AugmentedMetricSpace& s, double eps, double sigma,
                                            std::size_t x) {
  const std::size_t n = s.size();
  std::vector<char> seen(n, 0);
  std::vector<std::size_t> out;
  if (s.density(x) > sigma) return out;
  std::queue<std::size_t> q;
  q.push(x);
  seen[x] = 1;
  while (!q.empty()) {
    const std::size_t u = q.front();
    q.pop();
    out.push_back(u);
    for (std::size_t v = 0; v < n; ++v)
      if (!seen[v] && s.density(v) <= sigma && s.distance(u, v) <= eps) {
        seen[v] = 1;
        q.push(v);
      }
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<double> distinct_distances(const AugmentedMetricSpace& s) {
  std::set<double> d{0.0};
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = i + 1; j < s.size(); ++j) d.insert(s.distance(i, j));
  return {d.begin(), d.end()};
}

inline std::vector<double> distinct_densities(const AugmentedMetricSpace& s) {
  std::set<double> t(s.density().begin(), s.density().end());
  return {t.begin(), t.end()};
}

// Smallest eps (a pairwise distance) joining x and y inside {f <= sigma}.
inline double ultrametric(const AugmentedMetricSpace& s, double sigma, std::size_t x, std::size_t y) {
  for (double e : distinct_distances(s)) {
    const auto c = bfs_cluster(s, e, sigma, x);
    if (std::binary_search(c.begin(), c.end(), y)) return e;
  }
  return inf;
}

inline bool before(const AugmentedMetricSpace& s, std::size_t a, std::size_t b) {
  return s.density(a) < s.density(b) || (s.density(a) == s.density(b) && a < b);
}

// Nearest other point; ties go to the point first in (f, index) order.
inline std::size_t nearest(const AugmentedMetricSpace& s, std::size_t x) {
  std::optional<std::size_t> best;
  for (std::size_t y = 0; y < s.size(); ++y) {
    if (y == x) continue;
    if (!best) {
      best = y;
      continue;
    }
    const double dy = s.distance(x, y), db = s.distance(x, *best);
    if (dy < db || (dy == db && before(s, y, *best))) best = y;
  }
  return *best;
}

// y roots x among the survivors: y precedes x, survives, and sits in x's
// cluster at every grade above x's birth where that cluster contains another
// survivor. Clusters are taken in the full space; removed points still connect.
inline bool roots(const AugmentedMetricSpace& s, const std::vector<char>& alive, std::size_t x,
                  std::size_t y) {
  if (!alive[y] || !before(s, y, x)) return false;
  for (double sigma : distinct_densities(s)) {
    if (sigma < s.density(x)) continue;
    for (double e : distinct_distances(s)) {
      const auto c = bfs_cluster(s, e, sigma, x);
      std::size_t others = 0;
      bool has_y = false;
      for (std::size_t z : c) {
        if (z != x && alive[z]) ++others;
        if (z == y) has_y = true;
      }
      if (others > 0 && !has_y) return false;
    }
  }
  return true;
}

inline std::optional<std::size_t> some_root(const AugmentedMetricSpace& s, const std::vector<char>& alive,
                                            std::size_t x) {
  for (std::size_t y = 0; y < s.size(); ++y)
    if (roots(s, alive, x, y)) return y;
  return std::nullopt;
}

// Union-find elder rule: at a merge the component whose oldest vertex is
// younger (later birth, then larger index) dies.
inline std::vector<rootpeel::Bar> union_find_barcode(const rootpeel::OneParameterFiltration& filt) {
  const std::size_t n = filt.birth.size();
  std::vector<std::size_t> parent(n), oldest(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::iota(oldest.begin(), oldest.end(), 0);
  const auto find = [&](std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  const auto older = [&](std::size_t a, std::size_t b) {
    return filt.birth[a] < filt.birth[b] || (filt.birth[a] == filt.birth[b] && a < b);
  };
  struct E {
    double t;
    std::size_t a, b;
  };
  std::vector<E> edges;
  for (const auto& e : filt.edges)
    edges.push_back({std::max({e.value, filt.birth[e.a], filt.birth[e.b]}), e.a, e.b});
  std::stable_sort(edges.begin(), edges.end(), [](const E& l, const E& r) { return l.t < r.t; });
  std::vector<rootpeel::Bar> bars;
  for (const auto& e : edges) {
    std::size_t ra = find(e.a), rb = find(e.b);
    if (ra == rb) continue;
    if (older(oldest[rb], oldest[ra])) std::swap(ra, rb);
    bars.push_back({filt.birth[oldest[rb]], e.t});
    parent[rb] = ra;
  }
  for (std::size_t v = 0; v < n; ++v)
    if (find(v) == v) bars.push_back({filt.birth[oldest[v]], inf});
  std::sort(bars.begin(), bars.end());
  return bars;
}

// Random test spaces: uniform, with exact duplicates, or collinear on a
// coarse lattice so that distances tie. Densities come from a small set so
// ties occur too.
enum class Shape { uniform, duplicates, collinear };

inline AugmentedMetricSpace random_space(rootpeel::Rng& rng, std::size_t n, Shape shape, int d = 2,
                                         bool tied_density = true) {
  std::vector<double> coords;
  for (std::size_t i = 0; i < n; ++i) {
    if (shape == Shape::duplicates && i > 0 && rng.below(3) == 0) {
      const std::size_t j = rng.below(i);
      for (int k = 0; k < d; ++k) coords.push_back(coords[j * d + k]);
      continue;
    }
    for (int k = 0; k < d; ++k) {
      if (shape == Shape::collinear) coords.push_back(k == 0 ? static_cast<double>(rng.below(10)) : 0.0);
      else coords.push_back(rng.uniform());
    }
  }
  std::vector<double> f(n);
  for (auto& v : f) v = tied_density ? static_cast<double>(rng.below(n)) : rng.uniform();
  return AugmentedMetricSpace::from_coordinates(std::move(coords), static_cast<std::size_t>(d))
      .with_density(std::move(f));
}

}  // namespace oracle
