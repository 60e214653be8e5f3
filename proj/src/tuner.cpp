#include "sprig/tuner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace sprig {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Keeps the compiler from discarding the measured loop bodies.
inline void sink(std::uint64_t v) { asm volatile("" : : "r"(v)); }
inline void sink(double v) { asm volatile("" : : "x"(v)); }

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

}  // namespace

CalibrationReport calibrate(const Dataset& dataset,
                            const CalibrateOptions& options) {
  if (dataset.size() == 0) {
    throw std::invalid_argument("calibration needs a non-empty dataset");
  }
  // Representative structures: a moderate grid over (a slice of) the dataset.
  const std::size_t side = std::max<std::size_t>(
      2, std::min<std::size_t>(64, static_cast<std::size_t>(
                                       std::sqrt(static_cast<double>(dataset.size())))));
  const GridLayout grid = build_grid(dataset, side, side);
  const CellTable table = build_cell_table(grid, dataset);
  const std::size_t cell_count = grid.cell_count();

  const Bounds b = dataset.bounds;
  const RangeQuery window{
      Point{b.x_min + 0.25 * b.width(), b.y_min + 0.25 * b.height(), 0},
      Point{b.x_min + 0.75 * b.width(), b.y_min + 0.75 * b.height(), 0}};
  const std::span<const Point> pts(table.data.data(),
                                   std::min<std::size_t>(table.data.size(), 1 << 16));

  CalibrationReport report;

  auto timed_runs = [&](auto&& body, std::size_t ops_per_pass,
                        std::vector<double>& medians, std::size_t& iters_out) {
    std::size_t passes =
        std::max<std::size_t>(1, options.min_iterations / std::max<std::size_t>(1, ops_per_pass));
    for (;;) {
      const auto start = Clock::now();
      for (std::size_t p = 0; p < passes; ++p) body();
      const double elapsed = seconds_since(start);
      if (elapsed >= options.min_elapsed_seconds) break;
      passes *= 2;  // timer resolution guard
    }
    medians.clear();
    for (std::size_t run = 0; run < options.runs; ++run) {
      const auto start = Clock::now();
      for (std::size_t p = 0; p < passes; ++p) body();
      const double elapsed = seconds_since(start);
      medians.push_back(elapsed / static_cast<double>(passes * ops_per_pass));
    }
    iters_out = passes * ops_per_pass * options.runs;
    return median(medians);
  };

  // Cell retrieval: directory lookup plus touching the block header.
  std::uint64_t acc = 0;
  std::size_t probe = 0;
  auto retrieve_body = [&] {
    for (std::size_t i = 0; i < 1024; ++i) {
      probe = (probe * 2654435761u + 1) % cell_count;
      const CellBlock* block = table.find_block(probe);
      if (block) acc += block->size;
    }
  };
  report.params.t_retrieve = timed_runs(retrieve_body, 1024,
                                        report.retrieve_run_medians,
                                        report.retrieve_iterations);
  sink(acc);

  // Point scan: the closed-window predicate over a contiguous block.
  std::uint64_t hits = 0;
  auto scan_body = [&] {
    for (const Point& p : pts) {
      if (window.contains(p)) ++hits;
    }
  };
  report.params.t_scan =
      timed_runs(scan_body, pts.size(), report.scan_run_medians,
                 report.scan_iterations);
  sink(hits);

  return report;
}

namespace {

struct IntersectionCounts {
  double n_i = 0.0;
  double n_c = 0.0;
  double n_p = 0.0;
};

// Exact per-query counts; interior cells counted arithmetically, border
// blocks walked for their sizes.
IntersectionCounts count_query(const GridLayout& grid, const CellTable& table,
                               const LearnedModel& model, const ErrorGuarantee& eg,
                               const RangeQuery& q) {
  const Bounds b = grid.bounds();
  const Point lo{std::clamp(q.q_b.x, b.x_min, b.x_max),
                 std::clamp(q.q_b.y, b.y_min, b.y_max), 0};
  const Point hi{std::clamp(q.q_t.x, b.x_min, b.x_max),
                 std::clamp(q.q_t.y, b.y_min, b.y_max), 0};
  const std::size_t n = grid.cols();
  const std::size_t rid_b = get_real_cell_id(lo, grid, model.predict_cell_id(lo), eg);
  const std::size_t rid_t = get_real_cell_id(hi, grid, model.predict_cell_id(hi), eg);
  const std::size_t col_b = rid_b % n, row_b = rid_b / n;
  const std::size_t col_t = rid_t % n, row_t = rid_t / n;
  const std::size_t w = col_t - col_b + 1;
  const std::size_t h = row_t - row_b + 1;

  IntersectionCounts counts;
  const std::size_t interior = (w > 2 && h > 2) ? (w - 2) * (h - 2) : 0;
  counts.n_c = static_cast<double>(interior);
  counts.n_i = static_cast<double>(w * h - interior);

  auto add_block = [&](std::size_t col, std::size_t row) {
    const CellBlock* block = table.find_block(row * n + col);
    if (block) counts.n_p += static_cast<double>(block->size);
  };
  for (std::size_t col = col_b; col <= col_t; ++col) {
    add_block(col, row_b);
    if (row_t != row_b) add_block(col, row_t);
  }
  for (std::size_t row = row_b + 1; row < row_t; ++row) {
    add_block(col_b, row);
    if (col_t != col_b) add_block(col_t, row);
  }
  return counts;
}

}  // namespace

CostEstimate estimate_cost(const CostParams& params, const DatasetProfile& profile,
                           const Dataset& dataset, LayoutSpec layout,
                           std::span<const RangeQuery> workload, ModelKind kind,
                           const ModelOptions& options) {
  if (workload.empty()) {
    throw std::invalid_argument("cost estimation needs a non-empty workload");
  }
  const GridLayout grid = build_grid(profile, layout.n, layout.m);
  // Pivots are irrelevant to the cost terms, so the plain table suffices.
  const CellTable table = build_cell_table(grid, dataset);
  const LearnedModel model = fit_model(grid, kind, options);

  // Train on the workload corners: those are exactly the points the range
  // path predicts.
  std::vector<Point> corners;
  corners.reserve(workload.size() * 2);
  for (const RangeQuery& q : workload) {
    corners.push_back(q.q_b);
    corners.push_back(q.q_t);
  }
  const ErrorGuarantee eg = train_error_guarantee(model, grid, corners);

  CostEstimate est;
  est.requested = layout;
  est.effective = LayoutSpec{grid.cols(), grid.rows()};

  // Mean prediction time per query (two corner predictions).
  const auto t0 = Clock::now();
  double acc = 0.0;
  std::size_t reps = 0;
  do {
    for (const RangeQuery& q : workload) {
      acc += model.predict(q.q_b) + model.predict(q.q_t);
    }
    ++reps;
  } while (seconds_since(t0) < 0.005);
  sink(acc);
  est.t_predict = seconds_since(t0) / static_cast<double>(reps * workload.size());

  // Mean bounded-search time per query (two refinements).
  const auto t1 = Clock::now();
  std::uint64_t racc = 0;
  reps = 0;
  do {
    for (const RangeQuery& q : workload) {
      racc += get_real_cell_id(q.q_b, grid, model.predict_cell_id(q.q_b), eg);
      racc += get_real_cell_id(q.q_t, grid, model.predict_cell_id(q.q_t), eg);
    }
    ++reps;
  } while (seconds_since(t1) < 0.005);
  sink(racc);
  est.t_search = seconds_since(t1) / static_cast<double>(reps * workload.size());

  for (const RangeQuery& q : workload) {
    const IntersectionCounts c = count_query(grid, table, model, eg, q);
    est.n_intersected += c.n_i;
    est.n_contained += c.n_c;
    est.n_scanned_points += c.n_p;
  }
  const double w = static_cast<double>(workload.size());
  est.n_intersected /= w;
  est.n_contained /= w;
  est.n_scanned_points /= w;

  est.total = combine_cost(params, est.t_predict, est.t_search,
                           est.n_intersected, est.n_contained,
                           est.n_scanned_points);
  return est;
}

double combine_cost(const CostParams& params, double t_predict, double t_search,
                    double n_intersected, double n_contained,
                    double n_scanned_points) {
  return t_predict + t_search + params.t_retrieve * (n_intersected + n_contained) +
         params.t_scan * n_scanned_points;
}

TuneResult tune_layout(const Dataset& dataset,
                       std::span<const RangeQuery> workload,
                       std::span<const LayoutSpec> candidates, ModelKind kind,
                       const ModelOptions& options, const CostParams* params) {
  if (candidates.empty()) {
    throw std::invalid_argument("tuning needs at least one candidate layout");
  }
  CostParams measured;
  if (params) {
    measured = *params;
  } else {
    measured = calibrate(dataset).params;
  }
  const DatasetProfile profile = profile_dataset(dataset);

  TuneResult result;
  for (const LayoutSpec& layout : candidates) {
    result.table.push_back(
        estimate_cost(measured, profile, dataset, layout, workload, kind, options));
  }
  std::stable_sort(result.table.begin(), result.table.end(),
                   [](const CostEstimate& a, const CostEstimate& b) {
                     return a.total < b.total;
                   });
  result.best = result.table.front().requested;
  return result;
}

std::vector<LayoutSpec> default_candidate_ladder(std::size_t dataset_size) {
  const double root = std::sqrt(static_cast<double>(std::max<std::size_t>(dataset_size, 4)));
  const auto max_exp = static_cast<std::size_t>(std::ceil(std::log2(root)));
  std::vector<std::size_t> sides;
  for (std::size_t e = 1; e <= max_exp; ++e) {
    const std::size_t side = std::size_t{1} << e;
    if (side > 4096) break;
    sides.push_back(side);
  }
  std::vector<LayoutSpec> ladder;
  for (std::size_t n : sides) {
    for (std::size_t m : sides) {
      ladder.push_back(LayoutSpec{n, m});
    }
  }
  return ladder;
}

}  // namespace sprig
