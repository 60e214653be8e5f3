#pragma once

#include <cstdint>
#include <vector>

#include "sprig/core.hpp"
#include "sprig/query.hpp"

namespace sprig {

// Definitional oracles.
std::vector<Point> brute_range(const Dataset& dataset, const RangeQuery& q);
std::size_t brute_count_range(const Dataset& dataset, const RangeQuery& q);
KnnResult brute_knn(const Dataset& dataset, const KnnQuery& q);

// Median-split k-d tree with alternating split dimension and per-node
// bounding boxes. Subtree point ranges are contiguous, so fully covered
// subtrees bulk-emit without per-point tests. Immutable after build.
class KdTree {
 public:
  KdTree(const Dataset& dataset, std::size_t leaf_capacity);

  std::vector<Point> range(const RangeQuery& q) const;
  std::size_t count_range(const RangeQuery& q) const;
  KnnResult knn(const KnnQuery& q) const;

  std::size_t size() const { return points_.size(); }
  std::size_t leaf_capacity() const { return leaf_capacity_; }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t node_byte_size() const;
  // node count x node byte size; excludes the point data itself.
  std::size_t storage_bytes() const;

 private:
  struct Node {
    double bbox[4];  // x_min, x_max, y_min, y_max of the subtree's points
    double split = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::uint8_t dim = 0;

    bool leaf() const { return left < 0; }
  };

  std::int32_t build(std::size_t begin, std::size_t end, int depth);
  void range_collect(std::int32_t node, const RangeQuery& q,
                     std::vector<Point>& out) const;
  std::size_t range_count(std::int32_t node, const RangeQuery& q) const;

  std::vector<Point> points_;
  std::vector<Node> nodes_;
  std::size_t leaf_capacity_;
};

}  // namespace sprig
