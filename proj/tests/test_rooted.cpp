#include <gtest/gtest.h>

#include <set>

#include "oracles.hpp"
#include "rootpeel/rooted.hpp"

using namespace rootpeel;

namespace {

AugmentedMetricSpace four_points() {
  return AugmentedMetricSpace::from_coordinates({0, 7.5, 3, 5}, 1).with_density({0, 1, 2, 3});
}

using V = std::vector<std::size_t>;
using oracle::Shape;

std::vector<char> alive_mask(const PeelView& view) {
  std::vector<char> alive(view.size());
  for (std::size_t x = 0; x < view.size(); ++x) alive[x] = view.survives(x);
  return alive;
}

}  // namespace

TEST(Rooted, FourPointGenerators) {
  PeelView view(four_points());
  EXPECT_EQ(is_rooted_generator(view, 3), std::optional<std::size_t>(2));
  EXPECT_EQ(is_rooted_generator(view, 1), std::nullopt);
  EXPECT_EQ(is_rooted_generator(view, 2), std::nullopt);
  const auto after = restrict(view, 3, 2);
  EXPECT_EQ(is_rooted_generator(after, 1), std::nullopt);
  EXPECT_EQ(is_rooted_generator(after, 2), std::nullopt);
  EXPECT_THROW(is_rooted_generator(after, 3), QueryError);
}

TEST(Rooted, FourPointSubsets) {
  PeelView view(four_points());
  EXPECT_EQ(is_rooted_subset(view, {1, 2, 3}), std::optional<std::size_t>(0));
  EXPECT_EQ(is_rooted_subset(view, {1}), std::nullopt);
  EXPECT_EQ(is_rooted_subset(view, {3}), std::optional<std::size_t>(2));
  EXPECT_THROW(is_rooted_subset(view, {}), PreconditionError);
}

TEST(Rooted, SingletonSubsetsAgreeWithGenerators) {
  Rng rng(41);
  for (int t = 0; t < 40; ++t) {
    const auto s = oracle::random_space(rng, 2 + rng.below(8), static_cast<Shape>(t % 3));
    PeelView view(s);
    for (std::size_t x = 0; x < s.size(); ++x) {
      const auto g = is_rooted_generator(view, x);
      const auto a = is_rooted_subset(view, {x});
      EXPECT_EQ(g.has_value(), a.has_value());
      if (a) EXPECT_TRUE(is_valid_root(view, x, *a));
    }
  }
}

TEST(Rooted, FourPointNearestNeighbors) {
  const auto s = four_points();
  const auto g = nn_graph(s);
  EXPECT_EQ(g.nn, (V{2, 3, 3, 2}));
  ASSERT_EQ(g.mutual_pairs.size(), 1u);
  EXPECT_EQ(g.mutual_pairs[0], (std::pair<std::size_t, std::size_t>{2, 3}));
  EXPECT_EQ(neighborly_rooted(s), (V{3}));
}

TEST(Rooted, TwoPoints) {
  const auto pts = AugmentedMetricSpace::from_coordinates({0, 1}, 1);
  EXPECT_EQ(neighborly_rooted(pts.with_density({0.5, 0.2})), (V{0}));
  EXPECT_EQ(neighborly_rooted(pts.with_density({0.2, 0.5})), (V{1}));
  EXPECT_EQ(neighborly_rooted(pts.with_density({0.3, 0.3})), (V{1}));
  EXPECT_EQ(nn_graph(pts.with_density({0, 0})).mutual_pairs.size(), 1u);
  EXPECT_THROW(nn_graph(AugmentedMetricSpace::from_coordinates({0}, 1).with_density({0})),
               PreconditionError);
}

TEST(Rooted, RectangleHasTwoMutualPairs) {
  const auto s =
      AugmentedMetricSpace::from_points({{0, 0}, {1, 0}, {0, 2}, {1, 2}}).with_density({0, 1, 2, 3});
  const auto g = nn_graph(s);
  EXPECT_EQ(g.mutual_pairs, (std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}, {2, 3}}));
}

TEST(Rooted, KdTreeMatchesBruteForce) {
  Rng rng(7);
  for (int t = 0; t < 200; ++t) {
    const int d = 1 + static_cast<int>(rng.below(4));
    const auto s = oracle::random_space(rng, 2 + rng.below(80), static_cast<Shape>(t % 3), d);
    const auto a = nn_graph_kdtree(s);
    const auto b = nn_graph_brute_force(s);
    ASSERT_EQ(a.nn, b.nn);
    ASSERT_EQ(a.mutual_pairs, b.mutual_pairs);
    for (std::size_t x = 0; x < s.size(); ++x) ASSERT_EQ(b.nn[x], oracle::nearest(s, x));
  }
}

TEST(Rooted, MatrixInputUsesBruteForce) {
  const auto m = AugmentedMetricSpace::from_matrix({0, 1, 4, 1, 0, 2, 4, 2, 0}, 3).with_density({0, 1, 2});
  const auto g = nn_graph(m);
  EXPECT_EQ(g.nn, (V{1, 0, 1}));
}

// Each weakly connected component of the NN graph holds exactly one 2-cycle.
TEST(Rooted, OneMutualPairPerComponent) {
  Rng rng(8);
  for (int t = 0; t < 50; ++t) {
    const auto s = oracle::random_space(rng, 2 + rng.below(60), Shape::uniform, 2, false);
    const auto g = nn_graph(s);
    std::vector<std::size_t> comp(s.size());
    std::iota(comp.begin(), comp.end(), 0);
    const auto find = [&](std::size_t a) {
      while (comp[a] != a) a = comp[a];
      return a;
    };
    for (std::size_t x = 0; x < s.size(); ++x) comp[find(x)] = find(g.nn[x]);
    std::set<std::size_t> roots;
    for (std::size_t x = 0; x < s.size(); ++x) roots.insert(find(x));
    EXPECT_EQ(roots.size(), g.mutual_pairs.size());
  }
}

TEST(Rooted, TopPointIsNeighborly) {
  Rng rng(9);
  for (int t = 0; t < 50; ++t) {
    const auto s = oracle::random_space(rng, 2 + rng.below(30), static_cast<Shape>(t % 3));
    const auto nb = neighborly_rooted(s);
    EXPECT_TRUE(std::find(nb.begin(), nb.end(), s.order().back()) != nb.end());
  }
}

// Rootedness decisions agree with the definition checked by brute force on
// every grade, in every intermediate peel state.
TEST(Rooted, MatchesBruteForceDefinition) {
  Rng rng(13);
  for (int t = 0; t < 80; ++t) {
    const auto s = oracle::random_space(rng, 2 + rng.below(7), static_cast<Shape>(t % 3));
    const auto trace = peel_all(s);
    const auto views = replay(trace.final_view.forest_ptr(), trace.records);
    for (const auto& view : views) {
      const auto alive = alive_mask(view);
      for (std::size_t x = 0; x < s.size(); ++x) {
        if (!alive[x] || s.rank(x) == 0) continue;
        const auto got = is_rooted_generator(view, x);
        const auto want = oracle::some_root(s, alive, x);
        ASSERT_EQ(got.has_value(), want.has_value()) << "trial " << t << " point " << x;
        if (got) {
          EXPECT_TRUE(oracle::roots(s, alive, x, *got));
          for (std::size_t y = 0; y < s.size(); ++y)
            if (oracle::roots(s, alive, x, y)) EXPECT_LE(s.rank(*got), s.rank(y));
        }
      }
    }
  }
}

TEST(Rooted, NeighborlyImpliesRooted) {
  Rng rng(14);
  for (int t = 0; t < 60; ++t) {
    const auto s = oracle::random_space(rng, 2 + rng.below(12), static_cast<Shape>(t % 3));
    PeelView view(s);
    for (std::size_t x : neighborly_rooted(s)) EXPECT_TRUE(is_rooted_generator(view, x).has_value());
  }
}

TEST(Peel, FourPointTrace) {
  const auto trace = peel_all(four_points());
  ASSERT_EQ(trace.size(), 2u);
  const auto& a = trace.records[0];
  EXPECT_EQ(a.generator, 3u);
  EXPECT_EQ(a.root, std::optional<std::size_t>(2));
  EXPECT_EQ(a.reason, PeelReason::neighborly);
  EXPECT_FALSE(a.zero_interval);
  EXPECT_EQ(a.support.thresholds, (std::vector<std::pair<double, double>>{{3.0, 2.0}}));
  EXPECT_TRUE(a.support.contains(0, 3));
  EXPECT_FALSE(a.support.contains(2, 3));
  EXPECT_FALSE(a.support.contains(0, 2));
  const auto& b = trace.records[1];
  EXPECT_EQ(b.generator, 0u);
  EXPECT_EQ(b.reason, PeelReason::bottom);
  EXPECT_FALSE(b.root.has_value());
  EXPECT_TRUE(b.support.contains(1e9, 0));
  EXPECT_EQ(trace.final_view.removed(), (V{3}));
}

TEST(Peel, SinglePoint) {
  const auto trace = peel_all(AugmentedMetricSpace::from_coordinates({4.0}, 1).with_density({0}));
  ASSERT_EQ(trace.size(), 1u);
  EXPECT_EQ(trace.records[0].reason, PeelReason::bottom);
}

TEST(Peel, DoublingChainPeelsEverything) {
  std::vector<double> xs, f;
  for (int i = 0; i < 12; ++i) {
    xs.push_back(std::pow(2.0, i));
    f.push_back(i);
  }
  const auto trace = peel_all(AugmentedMetricSpace::from_coordinates(xs, 1).with_density(f));
  EXPECT_EQ(trace.size(), 12u);
  EXPECT_EQ(trace.final_view.survivor_count(), 1u);
}

TEST(Peel, DuplicatePointGivesZeroInterval) {
  const auto s = AugmentedMetricSpace::from_coordinates({0, 0}, 1).with_density({0, 1});
  const auto trace = peel_all(s);
  ASSERT_EQ(trace.size(), 2u);
  EXPECT_TRUE(trace.records[0].zero_interval);
  EXPECT_TRUE(trace.records[0].support.empty());
  EXPECT_EQ(trace.nonzero_count(), 1u);
}

TEST(Peel, SupportMatchesBreadthFirstSearch) {
  Rng rng(19);
  for (int t = 0; t < 60; ++t) {
    const auto s = oracle::random_space(rng, 2 + rng.below(9), static_cast<Shape>(t % 3));
    const auto g = grade_grid(s);
    const auto trace = peel_all(s);
    for (const auto& rec : trace.records) {
      EXPECT_TRUE(rec.support.is_staircase());
      if (!rec.root) continue;
      if (!rec.zero_interval) EXPECT_TRUE(rec.support.contains(0, s.density(rec.generator)));
      for (double sigma : g.sigma_values)
        for (double eps : g.eps_values) {
          bool want = false;
          if (sigma >= s.density(rec.generator)) {
            const auto c = oracle::bfs_cluster(s, eps, sigma, rec.generator);
            want = !std::binary_search(c.begin(), c.end(), *rec.root);
          }
          ASSERT_EQ(rec.support.contains(eps, sigma), want);
        }
    }
  }
}

TEST(Peel, InvariantsAndDeterminism) {
  Rng rng(21);
  for (int t = 0; t < 100; ++t) {
    const auto s = oracle::random_space(rng, 2 + rng.below(40), static_cast<Shape>(t % 3));
    const auto a = peel_all(s);
    const auto b = peel_all(s);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(a.records[i].generator, b.records[i].generator);
      EXPECT_EQ(a.records[i].support, b.records[i].support);
    }
    const auto pairs = nn_graph(s).mutual_pairs.size();
    EXPECT_GE(a.size(), pairs + 1);
    EXPECT_GE(a.size(), 2u);
    EXPECT_LE(a.size(), s.size());
    EXPECT_EQ(a.records.back().reason, PeelReason::bottom);
    EXPECT_EQ(a.records.back().generator, s.order().front());
    EXPECT_NO_THROW(replay(a.final_view.forest_ptr(), a.records));
  }
}

TEST(Peel, ReplayRejectsTamperedTraces) {
  const auto s = four_points();
  auto trace = peel_all(s);
  auto forest = trace.final_view.forest_ptr();
  auto bad = trace.records;
  bad[0].support.thresholds[0].second = 2.5;
  EXPECT_THROW(replay(forest, bad), ConsistencyError);
  bad = trace.records;
  bad[0].root = 0;  // x3 is not rooted at x0
  EXPECT_THROW(replay(forest, bad), PreconditionError);
  bad = trace.records;
  std::swap(bad[0], bad[1]);
  EXPECT_THROW(replay(forest, bad), ConsistencyError);
}

TEST(Elder, FourPointTopRow) {
  const auto bars = elder_barcode_1d(scale_filtration(four_points(), 3));
  EXPECT_EQ(bars, (std::vector<Bar>{{0, 2}, {0, 2.5}, {0, 3}, {0, kInfinity}}));
  const auto one = elder_barcode_1d(scale_filtration(four_points(), 0));
  EXPECT_EQ(one, (std::vector<Bar>{{0, kInfinity}}));
}

TEST(Elder, MatchesUnionFind) {
  Rng rng(31);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 1 + rng.below(50);
    const auto s = oracle::random_space(rng, n, t % 2 ? Shape::collinear : Shape::uniform, 1);
    const auto a = scale_filtration(s, s.density(s.order().back()));
    EXPECT_EQ(elder_barcode_1d(a), oracle::union_find_barcode(a));
    const auto b = density_filtration(s, rng.uniform() * 3);
    EXPECT_EQ(elder_barcode_1d(b), oracle::union_find_barcode(b));
    // Arbitrary births and edge values, including ties.
    OneParameterFiltration c;
    for (std::size_t i = 0; i < n; ++i) c.birth.push_back(static_cast<double>(rng.below(5)));
    for (std::size_t e = 0; e < 2 * n; ++e)
      c.edges.push_back({static_cast<double>(rng.below(8)), rng.below(n), rng.below(n)});
    EXPECT_EQ(elder_barcode_1d(c), oracle::union_find_barcode(c));
  }
}

TEST(Staircode, FourPoint) {
  const auto s = four_points();
  const auto x0 = staircode(s, 0);
  for (const auto& [sigma, theta] : x0.thresholds) EXPECT_TRUE(std::isinf(theta));
  EXPECT_EQ(x0.thresholds.size(), 4u);
  const auto x1 = staircode(s, 1);
  EXPECT_DOUBLE_EQ(x1.thresholds.front().second, 7.5);
  const auto x3 = staircode(s, 3);
  EXPECT_EQ(x3.thresholds, (std::vector<std::pair<double, double>>{{3.0, 2.0}}));
  EXPECT_THROW(staircode(AugmentedMetricSpace::from_coordinates({0, 1}, 1).with_density({1, 1}), 0),
               PreconditionError);
}

TEST(Conqueror, FourPoint) {
  const auto s = four_points();
  EXPECT_EQ(constant_conqueror(s, 1), std::optional<std::size_t>(0));
  EXPECT_EQ(constant_conqueror(s, 0), std::optional<std::size_t>(0));
  // The counterexample: a constant conqueror without rootedness.
  EXPECT_FALSE(is_rooted_generator(PeelView(s), 1).has_value());
}

TEST(Conqueror, MatchesBruteForce) {
  Rng rng(37);
  for (int t = 0; t < 40; ++t) {
    const auto s = oracle::random_space(rng, 2 + rng.below(8), static_cast<Shape>(t % 3));
    for (std::size_t x = 0; x < s.size(); ++x) {
      if (s.rank(x) == 0) continue;
      std::optional<std::size_t> want;
      for (std::size_t c : s.order()) {
        if (s.rank(c) >= s.rank(x)) break;
        bool ok = true;
        for (double sigma : oracle::distinct_densities(s)) {
          if (sigma < s.density(x)) continue;
          const double uc = oracle::ultrametric(s, sigma, x, c);
          for (std::size_t o : s.order()) {
            if (s.rank(o) >= s.rank(x)) break;
            if (oracle::ultrametric(s, sigma, x, o) < uc) ok = false;
          }
        }
        if (ok) {
          want = c;
          break;
        }
      }
      EXPECT_EQ(constant_conqueror(s, x), want);
    }
  }
}
