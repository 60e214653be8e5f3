#include "sprig/io.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "sprig/baseline.hpp"

namespace sprig {
namespace {

class TempPath {
 public:
  TempPath() {
    path_ = std::filesystem::temp_directory_path() /
            ("sprig_io_test_" + std::to_string(counter_++));
  }
  ~TempPath() { std::filesystem::remove(path_); }
  std::string str() const { return path_.string(); }

 private:
  static inline int counter_ = 0;
  std::filesystem::path path_;
};

TEST(IndexDump, RoundTripsGridTableAndGuarantee) {
  const Dataset d = generate_synthetic(20000, Distribution::kGaussianClusters, 3);
  SprigIndex index = build_index(d, 12, 9, ModelKind::kBilinear);
  Rng rng(5);
  std::vector<Point> workload;
  for (int i = 0; i < 200; ++i) {
    workload.push_back(Point{rng.uniform(d.bounds.x_min, d.bounds.x_max),
                             rng.uniform(d.bounds.y_min, d.bounds.y_max), 0});
  }
  index.eg = train_error_guarantee(index.model, index.grid, workload);

  TempPath path;
  save_index(index, ModelOptions{}, path.str());
  const LoadedIndex loaded = load_index(path.str());

  EXPECT_EQ(loaded.index.grid.bx, index.grid.bx);
  EXPECT_EQ(loaded.index.grid.by, index.grid.by);
  ASSERT_EQ(loaded.index.table.data.size(), index.table.data.size());
  for (std::size_t i = 0; i < index.table.data.size(); ++i) {
    EXPECT_EQ(loaded.index.table.data[i].id, index.table.data[i].id);
    EXPECT_DOUBLE_EQ(loaded.index.table.data[i].x, index.table.data[i].x);
  }
  ASSERT_EQ(loaded.index.table.blocks.size(), index.table.blocks.size());
  for (std::size_t i = 0; i < index.table.blocks.size(); ++i) {
    const CellBlock& a = loaded.index.table.blocks[i];
    const CellBlock& b = index.table.blocks[i];
    EXPECT_EQ(a.cell_id, b.cell_id);
    EXPECT_EQ(a.first_offset, b.first_offset);
    EXPECT_EQ(a.size, b.size);
    EXPECT_DOUBLE_EQ(a.pivot.x, b.pivot.x);
    EXPECT_EQ(a.pivot_dists, b.pivot_dists);
  }
  EXPECT_EQ(loaded.index.model.kind(), index.model.kind());
  EXPECT_DOUBLE_EQ(loaded.index.eg.eg, index.eg.eg);
  EXPECT_EQ(loaded.index.eg.eg_x, index.eg.eg_x);
  EXPECT_EQ(loaded.index.eg.eg_y, index.eg.eg_y);

  // The refit model answers identically.
  for (int i = 0; i < 500; ++i) {
    const Point p{rng.uniform(d.bounds.x_min, d.bounds.x_max),
                  rng.uniform(d.bounds.y_min, d.bounds.y_max), 0};
    EXPECT_DOUBLE_EQ(loaded.index.model.predict(p), index.model.predict(p));
  }

  // And the loaded index queries exactly.
  const RangeQuery q{Point{0.3, 0.3, 0}, Point{0.5, 0.5, 0}};
  EXPECT_EQ(range_query(loaded.index, q).size(), brute_range(d, q).size());
}

TEST(IndexDump, RejectsForeignFiles) {
  TempPath path;
  std::ofstream out(path.str(), std::ios::binary);
  out << "definitely not an index";
  out.close();
  EXPECT_THROW(load_index(path.str()), std::runtime_error);
}

TEST(QueryFiles, RangeRoundTrip) {
  std::vector<RangeQuery> queries;
  Rng rng(6);
  for (int i = 0; i < 50; ++i) {
    const double x = rng.uniform(-10, 10), y = rng.uniform(-10, 10);
    queries.push_back(
        RangeQuery{Point{x, y, 0}, Point{x + rng.uniform(0, 5), y + rng.uniform(0, 5), 0}});
  }
  TempPath path;
  write_range_queries(queries, path.str());
  const auto reloaded = read_range_queries(path.str());
  ASSERT_EQ(reloaded.size(), queries.size());
  for (std::size_t i = 0; i < queries.size(); ++i) {
    EXPECT_DOUBLE_EQ(reloaded[i].q_b.x, queries[i].q_b.x);
    EXPECT_DOUBLE_EQ(reloaded[i].q_t.y, queries[i].q_t.y);
  }
}

TEST(QueryFiles, KnnRoundTripAndValidation) {
  std::vector<KnnQuery> queries{KnnQuery{Point{1.5, 2.5, 0}, 8},
                                KnnQuery{Point{-3, 4, 0}, 64}};
  TempPath path;
  write_knn_queries(queries, path.str());
  const auto reloaded = read_knn_queries(path.str());
  ASSERT_EQ(reloaded.size(), 2u);
  EXPECT_EQ(reloaded[0].k, 8u);
  EXPECT_EQ(reloaded[1].k, 64u);
  EXPECT_DOUBLE_EQ(reloaded[1].q_k.x, -3.0);
}

TEST(QueryFiles, MalformedLineThrows) {
  TempPath path;
  {
    std::ofstream out(path.str());
    out << "1,2,3\n";
  }
  EXPECT_THROW(read_range_queries(path.str()), std::runtime_error);
}

TEST(Checksum, OrderInsensitiveOverIds) {
  EXPECT_EQ(checksum_ids({3, 1, 2}), checksum_ids({1, 2, 3}));
  EXPECT_NE(checksum_ids({1, 2, 3}), checksum_ids({1, 2, 4}));
  EXPECT_NE(checksum_ids({}), checksum_ids({0}));
}

TEST(Checksum, PointsFoldTheirIds) {
  const std::vector<Point> pts{Point{0, 0, 5}, Point{1, 1, 2}};
  EXPECT_EQ(checksum_points(pts), checksum_ids({2, 5}));
}

TEST(ResultFile, WritesHeaderAndHexChecksums) {
  TempPath path;
  write_query_results({QueryResultLine{0, 2, 0xabcdef}, QueryResultLine{1, 0, 0}},
                      path.str());
  std::ifstream in(path.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "query_index,result_count,checksum");
  std::getline(in, line);
  EXPECT_EQ(line, "0,2,0000000000abcdef");
}

}  // namespace
}  // namespace sprig
