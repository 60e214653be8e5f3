#include "sprig/baseline.hpp"

#include <gtest/gtest.h>

#include <set>

namespace sprig {
namespace {

std::multiset<std::uint64_t> id_set(const std::vector<Point>& pts) {
  std::multiset<std::uint64_t> ids;
  for (const Point& p : pts) ids.insert(p.id);
  return ids;
}

TEST(BruteRange, FullDomainWindow) {
  const Dataset d = generate_synthetic(1000, Distribution::kUniform, 1);
  const RangeQuery q{Point{d.bounds.x_min, d.bounds.y_min, 0},
                     Point{d.bounds.x_max, d.bounds.y_max, 0}};
  EXPECT_EQ(brute_range(d, q).size(), d.size());
  EXPECT_EQ(brute_count_range(d, q), d.size());
}

TEST(BruteRange, EmptyRegion) {
  const Dataset d = generate_synthetic(1000, Distribution::kUniform, 1);
  const RangeQuery q{Point{2.0, 2.0, 0}, Point{3.0, 3.0, 0}};
  EXPECT_TRUE(brute_range(d, q).empty());
}

TEST(BruteKnn, SelfMatch) {
  const Dataset d = generate_synthetic(500, Distribution::kUniform, 2);
  const KnnResult r = brute_knn(d, KnnQuery{d.points[42], 1});
  ASSERT_EQ(r.size(), 1u);
  EXPECT_DOUBLE_EQ(r[0].dist, 0.0);
  EXPECT_EQ(r[0].point.id, 42u);
}

TEST(BruteKnn, FullSortWhenKEqualsSize) {
  const Dataset d = generate_synthetic(300, Distribution::kUniform, 3);
  const KnnQuery q{Point{0.3, 0.3, 0}, d.size()};
  const KnnResult r = brute_knn(d, q);
  ASSERT_EQ(r.size(), d.size());
  for (std::size_t i = 1; i < r.size(); ++i) {
    EXPECT_GE(r[i].dist, r[i - 1].dist);
  }
}

TEST(BruteKnn, AgreesWithIndependentFullSort) {
  const Dataset d = generate_synthetic(5000, Distribution::kGaussianClusters, 4);
  Rng rng(9);
  for (int i = 0; i < 100; ++i) {
    const Point q{rng.uniform(0, 1), rng.uniform(0, 1), 0};
    const std::size_t k = 1 + rng.index(32);
    const KnnResult got = brute_knn(d, KnnQuery{q, k});

    std::vector<std::pair<double, std::uint64_t>> all;
    for (const Point& p : d.points) all.emplace_back(distance(p, q), p.id);
    std::sort(all.begin(), all.end());
    ASSERT_EQ(got.size(), k);
    for (std::size_t j = 0; j < k; ++j) {
      EXPECT_DOUBLE_EQ(got[j].dist, all[j].first);
      EXPECT_EQ(got[j].point.id, all[j].second);
    }
  }
}

TEST(BruteKnn, KOutOfRangeThrows) {
  const Dataset d = generate_synthetic(10, Distribution::kUniform, 5);
  EXPECT_THROW(brute_knn(d, KnnQuery{Point{0, 0, 0}, 11}), std::invalid_argument);
}

TEST(KdTreeTest, SingleLeafDegeneratesToScan) {
  const Dataset d = generate_synthetic(200, Distribution::kUniform, 6);
  const KdTree tree(d, d.size());
  EXPECT_EQ(tree.node_count(), 1u);
  const RangeQuery q{Point{0.2, 0.2, 0}, Point{0.8, 0.8, 0}};
  EXPECT_EQ(id_set(tree.range(q)), id_set(brute_range(d, q)));
}

TEST(KdTreeTest, RangeMatchesBruteOnRandomWindows) {
  const Dataset d = generate_synthetic(100000, Distribution::kGaussianClusters, 7);
  const KdTree tree(d, 16);
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    const double cx = rng.uniform(d.bounds.x_min, d.bounds.x_max);
    const double cy = rng.uniform(d.bounds.y_min, d.bounds.y_max);
    const double hx = rng.uniform(0.001, 0.1) * d.bounds.width();
    const double hy = rng.uniform(0.001, 0.1) * d.bounds.height();
    const RangeQuery q{Point{cx - hx, cy - hy, 0}, Point{cx + hx, cy + hy, 0}};
    EXPECT_EQ(id_set(tree.range(q)), id_set(brute_range(d, q)));
    EXPECT_EQ(tree.count_range(q), brute_count_range(d, q));
  }
}

TEST(KdTreeTest, KnnMatchesBruteDistanceMultisets) {
  const Dataset d = generate_synthetic(50000, Distribution::kGaussianClusters, 8);
  const KdTree tree(d, 12);
  Rng rng(4);
  for (std::size_t k : {1u, 4u, 16u, 64u}) {
    for (int i = 0; i < 25; ++i) {
      const Point q{rng.uniform(d.bounds.x_min, d.bounds.x_max),
                    rng.uniform(d.bounds.y_min, d.bounds.y_max), 0};
      const KnnResult got = tree.knn(KnnQuery{q, k});
      const KnnResult expected = brute_knn(d, KnnQuery{q, k});
      ASSERT_EQ(got.size(), k);
      for (std::size_t j = 0; j < k; ++j) {
        EXPECT_DOUBLE_EQ(got[j].dist, expected[j].dist);
        EXPECT_EQ(got[j].point.id, expected[j].point.id);
      }
    }
  }
}

TEST(KdTreeTest, StorageAccountingMatchesTraversal) {
  const Dataset d = generate_synthetic(40000, Distribution::kUniform, 9);
  const KdTree tree(d, 16);
  EXPECT_EQ(tree.storage_bytes(), tree.node_count() * tree.node_byte_size());
  // Balanced median splits: roughly 2N/cap nodes.
  EXPECT_GT(tree.node_count(), d.size() / 16);
  EXPECT_LT(tree.node_count(), 4 * d.size() / 16);
}

TEST(KdTreeTest, EmptyDatasetThrows) {
  std::vector<Point> pts{Point{0, 0, 0}};
  Dataset d = Dataset::from_points(pts);
  d.points.clear();
  EXPECT_THROW(KdTree(d, 4), std::invalid_argument);
}

}  // namespace
}  // namespace sprig
