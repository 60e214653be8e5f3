#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sprig/core.hpp"
#include "sprig/grid.hpp"
#include "sprig/model.hpp"

namespace sprig {

// The queryable unit: grid + cell directory + learned locator + trained
// error guarantee. Immutable once built; queries are pure and may run
// concurrently.
struct SprigIndex {
  GridLayout grid;
  CellTable table;
  LearnedModel model;
  ErrorGuarantee eg;

  std::size_t cols() const { return grid.cols(); }
  std::size_t rows() const { return grid.rows(); }
};

// Builds grid, cell table, pivots, and model. eg starts zeroed; train it on
// the query workload (train_error_guarantee) before timing anything — the
// widening search keeps results exact either way.
SprigIndex build_index(const Dataset& dataset, std::size_t n, std::size_t m,
                       ModelKind kind = ModelKind::kBilinear,
                       const ModelOptions& options = {});

struct Located {
  std::size_t rid = 0;
  std::size_t l_rx = 0;
  std::size_t l_ry = 0;
};

// Predict + refine; exact for every point.
Located locate(const SprigIndex& index, const Point& p);

struct CellClasses {
  std::vector<std::size_t> intersected;
  std::vector<std::size_t> contained;
};

// Splits the cell rectangle spanned by rid_b..rid_t into border cells (on the
// corner cells' rows/columns, must be scanned) and interior cells (fully
// covered, bulk-emitted).
CellClasses classify_cells(const GridLayout& grid, std::size_t rid_b,
                           std::size_t rid_t);

struct QueryOptions {
  bool closest_point_pruning = true;
  bool pivot_filtering = true;
};

struct QueryStats {
  std::size_t cells_visited = 0;
  std::size_t cells_pruned = 0;
  std::size_t candidates_scanned = 0;
  std::size_t layers = 0;
};

std::vector<Point> range_query(const SprigIndex& index, const RangeQuery& q,
                               QueryStats* stats = nullptr);

// Candidate index range [begin, end) within the block whose pivot distances
// cover [d(q, pivot) - radius, d(q, pivot) + radius]. Every block record
// within `radius` of q lies inside the range.
struct CandidateRange {
  std::size_t begin = 0;
  std::size_t end = 0;
};
CandidateRange pivot_filter(const CellBlock& block, const Point& q,
                            double radius);

// q clamped into the cell rectangle; minimizes distance(q, .) over the cell.
Point closest_point_of_cell(const GridLayout& grid, std::size_t col,
                            std::size_t row, const Point& q);

struct Neighbor {
  Point point;
  double dist = 0.0;
};
// Ascending by (distance, id).
using KnnResult = std::vector<Neighbor>;

KnnResult knn_query(const SprigIndex& index, const KnnQuery& q,
                    const QueryOptions& options = {},
                    QueryStats* stats = nullptr);

}  // namespace sprig
