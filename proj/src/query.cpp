#include "sprig/query.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>

namespace sprig {

SprigIndex build_index(const Dataset& dataset, std::size_t n, std::size_t m,
                       ModelKind kind, const ModelOptions& options) {
  SprigIndex index;
  index.grid = build_grid(dataset, n, m);
  index.table = build_cell_table(index.grid, dataset);
  compute_pivots(index.table);
  index.model = fit_model(index.grid, kind, options);
  return index;
}

Located locate(const SprigIndex& index, const Point& p) {
  const std::size_t pid = index.model.predict_cell_id(p);
  const std::size_t rid = get_real_cell_id(p, index.grid, pid, index.eg);
  const std::size_t n = index.cols();
  return Located{rid, rid % n, rid / n};
}

CellClasses classify_cells(const GridLayout& grid, std::size_t rid_b,
                           std::size_t rid_t) {
  const std::size_t n = grid.cols();
  const std::size_t col_b = rid_b % n, row_b = rid_b / n;
  const std::size_t col_t = rid_t % n, row_t = rid_t / n;
  assert(col_b <= col_t && row_b <= row_t);

  CellClasses out;
  for (std::size_t row = row_b; row <= row_t; ++row) {
    for (std::size_t col = col_b; col <= col_t; ++col) {
      const std::size_t id = row * n + col;
      if (row == row_b || row == row_t || col == col_b || col == col_t) {
        out.intersected.push_back(id);
      } else {
        out.contained.push_back(id);
      }
    }
  }
  return out;
}

std::vector<Point> range_query(const SprigIndex& index, const RangeQuery& q,
                               QueryStats* stats) {
  const Bounds b = index.grid.bounds();
  const Point lo{std::clamp(q.q_b.x, b.x_min, b.x_max),
                 std::clamp(q.q_b.y, b.y_min, b.y_max), 0};
  const Point hi{std::clamp(q.q_t.x, b.x_min, b.x_max),
                 std::clamp(q.q_t.y, b.y_min, b.y_max), 0};
  const std::size_t rid_b = locate(index, lo).rid;
  const std::size_t rid_t = locate(index, hi).rid;
  const CellClasses classes = classify_cells(index.grid, rid_b, rid_t);

  QueryStats local;
  std::vector<Point> result;
  for (std::size_t cell : classes.intersected) {
    const CellBlock* block = index.table.find_block(cell);
    ++local.cells_visited;
    if (!block) continue;
    for (const Point& p : index.table.block_points(*block)) {
      ++local.candidates_scanned;
      if (q.contains(p)) result.push_back(p);
    }
  }
  for (std::size_t cell : classes.contained) {
    const CellBlock* block = index.table.find_block(cell);
    ++local.cells_visited;
    if (!block) continue;
    const auto pts = index.table.block_points(*block);
    result.insert(result.end(), pts.begin(), pts.end());
  }
  if (stats) *stats = local;
  return result;
}

CandidateRange pivot_filter(const CellBlock& block, const Point& q,
                            double radius) {
  if (std::isinf(radius)) {
    return CandidateRange{0, block.size};
  }
  const double dq = distance(q, block.pivot);
  const auto lo = std::lower_bound(block.pivot_dists.begin(),
                                   block.pivot_dists.end(), dq - radius);
  const auto hi = std::upper_bound(block.pivot_dists.begin(),
                                   block.pivot_dists.end(), dq + radius);
  return CandidateRange{
      static_cast<std::size_t>(lo - block.pivot_dists.begin()),
      static_cast<std::size_t>(hi - block.pivot_dists.begin())};
}

Point closest_point_of_cell(const GridLayout& grid, std::size_t col,
                            std::size_t row, const Point& q) {
  return Point{std::clamp(q.x, grid.bx[col], grid.bx[col + 1]),
               std::clamp(q.y, grid.by[row], grid.by[row + 1]), 0};
}

namespace {

struct NeighborLess {
  bool operator()(const Neighbor& a, const Neighbor& b) const {
    if (a.dist != b.dist) return a.dist < b.dist;
    return a.point.id < b.point.id;
  }
};

// Bounded max-heap over (distance, id): top is the worst of the best k.
class NeighborQueue {
 public:
  explicit NeighborQueue(std::size_t k) : k_(k) { heap_.reserve(k); }

  bool full() const { return heap_.size() == k_; }
  double worst_dist() const { return heap_.front().dist; }

  // Insert while below capacity, else replace the top when the candidate is
  // better under (dist, id) order.
  void offer(const Point& p, double dist) {
    const Neighbor cand{p, dist};
    if (heap_.size() < k_) {
      heap_.push_back(cand);
      std::push_heap(heap_.begin(), heap_.end(), NeighborLess{});
    } else if (NeighborLess{}(cand, heap_.front())) {
      std::pop_heap(heap_.begin(), heap_.end(), NeighborLess{});
      heap_.back() = cand;
      std::push_heap(heap_.begin(), heap_.end(), NeighborLess{});
    }
  }

  // Entries confirmed by the layer radius.
  std::size_t count_within(double r) const {
    std::size_t c = 0;
    for (const Neighbor& nb : heap_) {
      if (nb.dist <= r) ++c;
    }
    return c;
  }

  KnnResult sorted() && {
    std::sort(heap_.begin(), heap_.end(), NeighborLess{});
    return std::move(heap_);
  }

 private:
  std::size_t k_;
  std::vector<Neighbor> heap_;
};

}  // namespace

KnnResult knn_query(const SprigIndex& index, const KnnQuery& q,
                    const QueryOptions& options, QueryStats* stats) {
  const std::size_t total = index.table.data.size();
  if (q.k == 0 || q.k > total) {
    throw std::invalid_argument("knn requires 1 <= k <= dataset size");
  }
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const GridLayout& grid = index.grid;
  const std::size_t n = grid.cols();
  const std::size_t m = grid.rows();
  const Point& qk = q.q_k;

  const Bounds b = grid.bounds();
  const Point clamped{std::clamp(qk.x, b.x_min, b.x_max),
                      std::clamp(qk.y, b.y_min, b.y_max), 0};
  const Located home = locate(index, clamped);
  const std::ptrdiff_t hx = static_cast<std::ptrdiff_t>(home.l_rx);
  const std::ptrdiff_t hy = static_cast<std::ptrdiff_t>(home.l_ry);

  NeighborQueue queue(q.k);
  QueryStats local;

  auto scan_block = [&](const CellBlock& block) {
    const double sigma = queue.full() ? queue.worst_dist() : kInf;
    CandidateRange range = options.pivot_filtering
                               ? pivot_filter(block, qk, sigma)
                               : CandidateRange{0, block.size};
    const auto pts = index.table.block_points(block);
    for (std::size_t i = range.begin; i < range.end; ++i) {
      ++local.candidates_scanned;
      queue.offer(pts[i], distance(qk, pts[i]));
    }
  };

  auto visit_cell = [&](std::ptrdiff_t col, std::ptrdiff_t row) {
    const std::size_t cell =
        static_cast<std::size_t>(row) * n + static_cast<std::size_t>(col);
    const CellBlock* block = index.table.find_block(cell);
    ++local.cells_visited;
    if (!block) return;
    if (options.closest_point_pruning && queue.full()) {
      const Point pc = closest_point_of_cell(grid, static_cast<std::size_t>(col),
                                             static_cast<std::size_t>(row), qk);
      if (distance(qk, pc) >= queue.worst_dist()) {
        ++local.cells_pruned;
        return;
      }
    }
    scan_block(*block);
  };

  std::size_t k_cnt = 0;
  for (std::ptrdiff_t layer = 0; k_cnt < q.k; ++layer) {
    // Confirmed radius: distance to the current search rectangle's borders,
    // infinite past the domain edge (nothing exists beyond it).
    const std::ptrdiff_t bot = hy - layer, top = hy + 1 + layer;
    const std::ptrdiff_t left = hx - layer, right = hx + 1 + layer;
    const double c_b = bot >= 0 ? qk.y - grid.by[static_cast<std::size_t>(bot)] : kInf;
    const double c_t = top <= static_cast<std::ptrdiff_t>(m)
                           ? grid.by[static_cast<std::size_t>(top)] - qk.y
                           : kInf;
    const double c_l = left >= 0 ? qk.x - grid.bx[static_cast<std::size_t>(left)] : kInf;
    const double c_r = right <= static_cast<std::ptrdiff_t>(n)
                           ? grid.bx[static_cast<std::size_t>(right)] - qk.x
                           : kInf;
    const double r = std::min(std::min(c_b, c_t), std::min(c_l, c_r));

    if (layer == 0) {
      const CellBlock* block = index.table.find_block(home.rid);
      ++local.cells_visited;
      if (block) scan_block(*block);
    } else {
      // Chebyshev ring at distance `layer` around the home cell.
      const std::ptrdiff_t cmin = std::max<std::ptrdiff_t>(0, hx - layer);
      const std::ptrdiff_t cmax =
          std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(n) - 1, hx + layer);
      const std::ptrdiff_t rmin = std::max<std::ptrdiff_t>(0, hy - layer);
      const std::ptrdiff_t rmax =
          std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(m) - 1, hy + layer);
      if (hy - layer >= 0) {
        for (std::ptrdiff_t col = cmin; col <= cmax; ++col) visit_cell(col, hy - layer);
      }
      if (hy + layer < static_cast<std::ptrdiff_t>(m)) {
        for (std::ptrdiff_t col = cmin; col <= cmax; ++col) visit_cell(col, hy + layer);
      }
      const std::ptrdiff_t inner_lo = std::max(rmin, hy - layer + 1);
      const std::ptrdiff_t inner_hi = std::min(rmax, hy + layer - 1);
      for (std::ptrdiff_t row = inner_lo; row <= inner_hi; ++row) {
        if (hx - layer >= 0) visit_cell(hx - layer, row);
        if (hx + layer < static_cast<std::ptrdiff_t>(n)) visit_cell(hx + layer, row);
      }
    }

    local.layers = static_cast<std::size_t>(layer) + 1;
    k_cnt = queue.count_within(r);
    // Once every border is past the domain edge the whole grid has been
    // scanned and r is infinite, so the loop is guaranteed to exit.
  }

  if (stats) *stats = local;
  return std::move(queue).sorted();
}

}  // namespace sprig
