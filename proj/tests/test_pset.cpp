#include <gtest/gtest.h>

#include "oracles.hpp"
#include "rootpeel/pset.hpp"
#include "rootpeel/rooted.hpp"

using namespace rootpeel;

namespace {

AugmentedMetricSpace four_points() {
  return AugmentedMetricSpace::from_coordinates({0, 7.5, 3, 5}, 1).with_density({0, 1, 2, 3});
}

using V = std::vector<std::size_t>;

}  // namespace

TEST(Grid, FourPoint) {
  const auto g = grade_grid(four_points());
  EXPECT_EQ(g.eps_values, (std::vector<double>{0, 2, 2.5, 3, 4.5, 5, 7.5}));
  EXPECT_EQ(g.sigma_values, (std::vector<double>{0, 1, 2, 3}));
  EXPECT_EQ(g.size(), 28u);
}

TEST(Grid, TiesCollapse) {
  const auto s = AugmentedMetricSpace::from_coordinates({0, 0, 1}, 1).with_density({1, 1, 0});
  const auto g = grade_grid(s);
  EXPECT_EQ(g.eps_values, (std::vector<double>{0, 1}));
  EXPECT_EQ(g.sigma_values, (std::vector<double>{0, 1}));
}

TEST(Forest, FourPointClusters) {
  PeelView view(four_points());
  EXPECT_EQ(cluster_at(view, 2, 3, 3), (V{2, 3}));
  EXPECT_EQ(cluster_at(view, 2, 3, 0), (V{0}));
  EXPECT_EQ(cluster_at(view, 2, 3, 1), (V{1}));
  EXPECT_EQ(cluster_at(view, 2.5, 3, 1), (V{1, 2, 3}));
  for (double e : {0.0, 2.0, 7.5}) EXPECT_EQ(cluster_at(view, e, 0, 0), (V{0}));
  EXPECT_EQ(view.forest().events(0).size(), 0u);
  EXPECT_EQ(view.forest().events(3).size(), 3u);
  EXPECT_THROW(cluster_at(view, 0, 2, 3), QueryError);  // x3 absent below f = 3
}

TEST(Forest, ConnectivityThroughRemovedPoints) {
  PeelView view(four_points());
  const auto peeled = restrict(view, 3, 2);
  EXPECT_EQ(cluster_at(peeled, 2.5, 3, 1), (V{1, 2}));
  EXPECT_THROW(cluster_at(peeled, 2.5, 3, 3), QueryError);
  EXPECT_EQ(peeled.removed(), (V{3}));
  EXPECT_EQ(peeled.root_of(3), std::optional<std::size_t>(2));
}

TEST(Forest, FourPointUltrametric) {
  const LeveledMergeForest f(four_points());
  EXPECT_DOUBLE_EQ(ultrametric(f, 3, 0, 3), 3.0);
  EXPECT_DOUBLE_EQ(ultrametric(f, 1, 0, 1), 7.5);
  EXPECT_DOUBLE_EQ(ultrametric(f, 3, 2, 2), 0.0);
  EXPECT_THROW(ultrametric(f, 1, 0, 2), QueryError);
}

TEST(Forest, FirstMergeScale) {
  PeelView view(four_points());
  const auto a = first_merge_scale(view, 3, 3);
  EXPECT_DOUBLE_EQ(a.eps, 2.0);
  EXPECT_EQ(a.cluster, (V{2, 3}));
  const auto b = first_merge_scale(view, 1, 1);
  EXPECT_DOUBLE_EQ(b.eps, 7.5);
  EXPECT_EQ(b.cluster, (V{0, 1}));
  PeelView single(AugmentedMetricSpace::from_coordinates({1.0}, 1).with_density({0}));
  EXPECT_TRUE(std::isinf(first_merge_scale(single, 0, 0).eps));
}

TEST(Forest, SingletonHasNoEvents) {
  const LeveledMergeForest f(AugmentedMetricSpace::from_coordinates({1.0, 2.0}, 2).with_density({0}));
  EXPECT_EQ(f.level_count(), 1u);
  EXPECT_TRUE(f.events(0).empty());
}

TEST(Forest, RestrictChecksRootedness) {
  PeelView view(four_points());
  EXPECT_NO_THROW(restrict(view, 3, 2));
  EXPECT_THROW(restrict(view, 1, 0), PreconditionError);
  const auto once = restrict(view, 3, 2);
  EXPECT_THROW(restrict(once, 3, 2), QueryError);
}

TEST(Forest, StructuralInvariants) {
  Rng rng(5);
  for (int t = 0; t < 60; ++t) {
    const auto s = oracle::random_space(rng, 1 + rng.below(15), static_cast<oracle::Shape>(t % 3));
    const LeveledMergeForest f(s);
    for (std::size_t level = 0; level < f.level_count(); ++level) {
      const std::size_t m = f.active(level);
      for (std::int32_t v = 0; v + 1 < static_cast<std::int32_t>(2 * m - 1); ++v) {
        const auto p = f.parent(level, v);
        ASSERT_NE(p, LeveledMergeForest::kNoParent);
        EXPECT_GT(p, v);
        EXPECT_GE(f.height(level, p), f.height(level, v));
      }
      EXPECT_EQ(f.parent(level, static_cast<std::int32_t>(2 * m - 2)), LeveledMergeForest::kNoParent);
      // One merge per point beyond the first; finite spaces always connect.
      EXPECT_EQ(f.events(level).size(), m - 1);
    }
  }
}

// Every cluster query at every grade agrees with breadth-first search on the
// explicit geometric graph.
TEST(Forest, MatchesBreadthFirstSearch) {
  Rng rng(17);
  for (int t = 0; t < 60; ++t) {
    const auto s = oracle::random_space(rng, 1 + rng.below(12), static_cast<oracle::Shape>(t % 3));
    PeelView view(s);
    const auto g = grade_grid(s);
    for (double sigma : g.sigma_values)
      for (double eps : g.eps_values)
        for (std::size_t x = 0; x < s.size(); ++x) {
          if (s.density(x) > sigma) continue;
          ASSERT_EQ(cluster_at(view, eps, sigma, x), oracle::bfs_cluster(s, eps, sigma, x));
        }
    for (double sigma : g.sigma_values)
      for (std::size_t x = 0; x < s.size(); ++x)
        for (std::size_t y = 0; y < s.size(); ++y)
          if (s.density(x) <= sigma && s.density(y) <= sigma)
            ASSERT_EQ(ultrametric(view.forest(), sigma, x, y), oracle::ultrametric(s, sigma, x, y));
  }
}

TEST(Forest, NestingAndStrongTriangle) {
  Rng rng(23);
  for (int t = 0; t < 30; ++t) {
    const auto s = oracle::random_space(rng, 2 + rng.below(10), static_cast<oracle::Shape>(t % 3));
    PeelView view(s);
    const auto g = grade_grid(s);
    for (std::size_t x = 0; x < s.size(); ++x)
      for (std::size_t j = 0; j < g.sigma_values.size(); ++j) {
        if (s.density(x) > g.sigma_values[j]) continue;
        for (std::size_t i = 0; i < g.eps_values.size(); ++i) {
          const auto c = cluster_at(view, g.eps_values[i], g.sigma_values[j], x);
          const auto check_sub = [&](const V& bigger) {
            EXPECT_TRUE(std::includes(bigger.begin(), bigger.end(), c.begin(), c.end()));
          };
          if (i + 1 < g.eps_values.size())
            check_sub(cluster_at(view, g.eps_values[i + 1], g.sigma_values[j], x));
          if (j + 1 < g.sigma_values.size())
            check_sub(cluster_at(view, g.eps_values[i], g.sigma_values[j + 1], x));
        }
      }
    const double top = g.sigma_values.back();
    for (std::size_t x = 0; x < s.size(); ++x)
      for (std::size_t y = 0; y < s.size(); ++y)
        for (std::size_t z = 0; z < s.size(); ++z)
          EXPECT_LE(ultrametric(view.forest(), top, x, z),
                    std::max(ultrametric(view.forest(), top, x, y), ultrametric(view.forest(), top, y, z)));
  }
}

// Peeling never changes which survivors share a cluster.
TEST(Forest, RestrictPreservesSurvivorConnectivity) {
  Rng rng(29);
  for (int t = 0; t < 40; ++t) {
    const auto s = oracle::random_space(rng, 2 + rng.below(10), static_cast<oracle::Shape>(t % 3));
    const auto trace = peel_all(s);
    const PeelView full(s);
    const auto& view = trace.final_view;
    const auto g = grade_grid(s);
    for (std::size_t x = 0; x < s.size(); ++x) {
      if (!view.survives(x)) continue;
      for (double sigma : g.sigma_values) {
        if (s.density(x) > sigma) continue;
        for (double eps : g.eps_values) {
          V expected;
          for (std::size_t y : cluster_at(full, eps, sigma, x))
            if (view.survives(y)) expected.push_back(y);
          EXPECT_EQ(cluster_at(view, eps, sigma, x), expected);
        }
      }
    }
  }
}
