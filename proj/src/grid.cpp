#include "sprig/grid.hpp"

#include <algorithm>
#include <cassert>

namespace sprig {

FrequencyTable build_frequency_table(std::span<const double> values) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  FrequencyTable table;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    table.entries.emplace_back(sorted[i], j - i);
    i = j;
  }
  return table;
}

DatasetProfile profile_dataset(const Dataset& dataset) {
  std::vector<double> xs(dataset.size()), ys(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    xs[i] = dataset.points[i].x;
    ys[i] = dataset.points[i].y;
  }
  return DatasetProfile{build_frequency_table(xs), build_frequency_table(ys),
                        dataset.bounds, dataset.size()};
}

namespace {

std::vector<double> get_boundary(const FrequencyTable& map, double avg,
                                 double min, double max) {
  std::vector<double> interior;
  double cnt = 0.0;
  double pre = 0.0;
  for (const auto& [key, value] : map.entries) {
    const double single_cnt = static_cast<double>(value);
    if (single_cnt > avg) {
      interior.push_back((key + pre) / 2.0);
      pre = key;
      cnt = 0.0;
      continue;
    }
    cnt += single_cnt;
    if (cnt > avg) {
      interior.push_back((key + pre) / 2.0);
      cnt = 0.0;
    } else {
      pre = key;
    }
  }
  // Keep only boundaries strictly inside (min, max) and deduplicate, so the
  // bracketed sequence is strictly increasing. The effective column count is
  // re-derived from what survives.
  std::sort(interior.begin(), interior.end());
  std::vector<double> b;
  b.push_back(min);
  for (double v : interior) {
    if (v > b.back() && v < max) b.push_back(v);
  }
  b.push_back(max);
  return b;
}

}  // namespace

GridLayout build_grid(const DatasetProfile& profile, std::size_t n, std::size_t m) {
  if (profile.size == 0) {
    throw std::invalid_argument("cannot build a grid over an empty dataset");
  }
  if (n < 1 || m < 1) {
    throw std::invalid_argument("grid requires n >= 1 and m >= 1");
  }
  const double size = static_cast<double>(profile.size);
  GridLayout grid;
  grid.bx = get_boundary(profile.freq_x, size / static_cast<double>(n),
                         profile.bounds.x_min, profile.bounds.x_max);
  grid.by = get_boundary(profile.freq_y, size / static_cast<double>(m),
                         profile.bounds.y_min, profile.bounds.y_max);
  // Degenerate dimension (all keys equal): min == max leaves a single
  // repeated boundary; widen to a zero-measure-safe single cell.
  if (grid.bx.size() == 2 && grid.bx[0] == grid.bx[1]) grid.bx[1] = grid.bx[0] + 1.0;
  if (grid.by.size() == 2 && grid.by[0] == grid.by[1]) grid.by[1] = grid.by[0] + 1.0;
  return grid;
}

GridLayout build_grid(const Dataset& dataset, std::size_t n, std::size_t m) {
  return build_grid(profile_dataset(dataset), n, m);
}

namespace {

std::size_t locate_interval(const std::vector<double>& b, double v) {
  // Clamp, then find i with b[i] <= v < b[i+1]; v == b.back() maps to the
  // last interval.
  if (v <= b.front()) return 0;
  if (v >= b.back()) return b.size() - 2;
  const auto it = std::upper_bound(b.begin(), b.end(), v);
  return static_cast<std::size_t>(it - b.begin()) - 1;
}

}  // namespace

std::size_t column_of(const GridLayout& grid, double x) {
  return locate_interval(grid.bx, x);
}

std::size_t row_of(const GridLayout& grid, double y) {
  return locate_interval(grid.by, y);
}

std::size_t cell_id_of(const GridLayout& grid, const Point& p) {
  return row_of(grid, p.y) * grid.cols() + column_of(grid, p.x);
}

const CellBlock* CellTable::find_block(std::size_t cell_id) const {
  auto it = std::lower_bound(
      blocks.begin(), blocks.end(), cell_id,
      [](const CellBlock& b, std::size_t id) { return b.cell_id < id; });
  if (it == blocks.end() || it->cell_id != cell_id) return nullptr;
  return &*it;
}

CellTable build_cell_table(const GridLayout& grid, const Dataset& dataset) {
  const std::size_t cell_count = grid.cell_count();
  std::vector<std::size_t> cids(dataset.size());
  std::vector<std::size_t> counts(cell_count, 0);
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    cids[i] = cell_id_of(grid, dataset.points[i]);
    ++counts[cids[i]];
  }

  CellTable table;
  table.data.resize(dataset.size());
  std::vector<std::size_t> offsets(cell_count, 0);
  std::size_t running = 0;
  for (std::size_t c = 0; c < cell_count; ++c) {
    offsets[c] = running;
    if (counts[c] > 0) {
      CellBlock block;
      block.cell_id = c;
      block.first_offset = running;
      block.size = counts[c];
      table.blocks.push_back(std::move(block));
    }
    running += counts[c];
  }
  // Stable: file order is preserved within each cell.
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    table.data[offsets[cids[i]]++] = dataset.points[i];
  }
  return table;
}

void compute_pivots(CellTable& table) {
  std::vector<std::size_t> order;
  std::vector<Point> scratch;
  for (CellBlock& block : table.blocks) {
    Point* pts = table.data.data() + block.first_offset;
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < block.size; ++i) {
      sx += pts[i].x;
      sy += pts[i].y;
    }
    block.pivot = Point{sx / static_cast<double>(block.size),
                        sy / static_cast<double>(block.size), 0};

    block.pivot_dists.resize(block.size);
    order.resize(block.size);
    for (std::size_t i = 0; i < block.size; ++i) {
      block.pivot_dists[i] = distance(pts[i], block.pivot);
      order[i] = i;
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return block.pivot_dists[a] < block.pivot_dists[b];
    });
    scratch.assign(pts, pts + block.size);
    std::vector<double> dists(block.size);
    for (std::size_t i = 0; i < block.size; ++i) {
      pts[i] = scratch[order[i]];
      dists[i] = block.pivot_dists[order[i]];
    }
    block.pivot_dists = std::move(dists);
  }
}

}  // namespace sprig
