#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sprig/core.hpp"

namespace sprig {

// Adaptive n x m layout. Boundaries are strictly increasing and bracketed by
// the dataset min/max; cells are half-open except the global max edge, which
// closes into the last column/row.
struct GridLayout {
  std::vector<double> bx;  // size n+1
  std::vector<double> by;  // size m+1

  std::size_t cols() const { return bx.size() - 1; }
  std::size_t rows() const { return by.size() - 1; }
  std::size_t cell_count() const { return cols() * rows(); }
  Bounds bounds() const { return Bounds{bx.front(), bx.back(), by.front(), by.back()}; }
};

// Ordered (key, count) pairs for one dimension, keys strictly ascending.
struct FrequencyTable {
  std::vector<std::pair<double, std::size_t>> entries;
};

FrequencyTable build_frequency_table(std::span<const double> values);

// Per-dimension tables plus bounds, reusable across layouts of one dataset.
struct DatasetProfile {
  FrequencyTable freq_x;
  FrequencyTable freq_y;
  Bounds bounds;
  std::size_t size = 0;
};

DatasetProfile profile_dataset(const Dataset& dataset);

// Equal-frequency boundary placement. Walks keys in ascending order with a
// running count; emits (key+pre)/2 when a single key alone exceeds avg
// (advancing pre to that key) or when the running count exceeds avg. May
// emit fewer boundaries than requested on concentrated data.
GridLayout build_grid(const Dataset& dataset, std::size_t n, std::size_t m);
GridLayout build_grid(const DatasetProfile& profile, std::size_t n, std::size_t m);

// Ground-truth locators: plain binary search, clamping to grid bounds.
std::size_t column_of(const GridLayout& grid, double x);
std::size_t row_of(const GridLayout& grid, double y);
std::size_t cell_id_of(const GridLayout& grid, const Point& p);

struct CellBlock {
  std::size_t cell_id = 0;
  std::size_t first_offset = 0;  // index into CellTable::data
  std::size_t size = 0;
  Point pivot;                      // cell centroid
  std::vector<double> pivot_dists;  // ascending; parallel to the block records
};

// Records reordered cell-contiguously plus the per-cell directory. Blocks are
// sorted by cell id; empty cells carry no block.
struct CellTable {
  std::vector<Point> data;
  std::vector<CellBlock> blocks;

  const CellBlock* find_block(std::size_t cell_id) const;
  std::span<const Point> block_points(const CellBlock& block) const {
    return std::span<const Point>(data).subspan(block.first_offset, block.size);
  }
};

// Stable reorder of the dataset by ascending cell id. Pivots are not filled;
// call compute_pivots for that.
CellTable build_cell_table(const GridLayout& grid, const Dataset& dataset);

// Sets each block's pivot to the centroid of its records, reorders the
// records ascending by distance to the pivot, and stores those distances.
void compute_pivots(CellTable& table);

}  // namespace sprig
