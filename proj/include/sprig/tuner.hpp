#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sprig/core.hpp"
#include "sprig/grid.hpp"
#include "sprig/model.hpp"

namespace sprig {

struct CostParams {
  double t_retrieve = 0.0;  // seconds per cell retrieval
  double t_scan = 0.0;      // seconds per point scan
};

struct CalibrationReport {
  CostParams params;
  std::size_t retrieve_iterations = 0;
  std::size_t scan_iterations = 0;
  std::vector<double> retrieve_run_medians;  // seconds/op per run
  std::vector<double> scan_run_medians;
};

struct CalibrateOptions {
  std::size_t min_iterations = 1'000'000;
  double min_elapsed_seconds = 0.1;  // loop count auto-scales up to this
  std::size_t runs = 5;
};

// Micro-measures cell retrieval and point scanning on this machine. Values
// are machine-dependent; the procedure is deterministic.
CalibrationReport calibrate(const Dataset& dataset,
                            const CalibrateOptions& options = {});

struct LayoutSpec {
  std::size_t n = 1;
  std::size_t m = 1;
};

struct CostEstimate {
  LayoutSpec requested;
  LayoutSpec effective;
  double t_predict = 0.0;        // seconds, mean per query
  double t_search = 0.0;         // seconds, mean per query
  double n_intersected = 0.0;    // mean cells per query
  double n_contained = 0.0;
  double n_scanned_points = 0.0;
  double total = 0.0;            // the four-term cost formula
};

// total = t_predict + t_search + t_retrieve*(N_i + N_c) + t_scan*N_p
double combine_cost(const CostParams& params, double t_predict, double t_search,
                    double n_intersected, double n_contained,
                    double n_scanned_points);

// Builds the layout (sans pivots), measures the model/search terms over the
// workload, counts exact per-query cell and point cardinalities, and combines
// them per the cost formula.
CostEstimate estimate_cost(const CostParams& params, const DatasetProfile& profile,
                           const Dataset& dataset, LayoutSpec layout,
                           std::span<const RangeQuery> workload, ModelKind kind,
                           const ModelOptions& options = {});

struct TuneResult {
  LayoutSpec best;
  std::vector<CostEstimate> table;  // ascending by total, argmin first
};

TuneResult tune_layout(const Dataset& dataset,
                       std::span<const RangeQuery> workload,
                       std::span<const LayoutSpec> candidates, ModelKind kind,
                       const ModelOptions& options = {},
                       const CostParams* params = nullptr);

// Geometric ladder {2, 4, ..., 2^ceil(log2 sqrt(N))} crossed over both
// dimensions, capped at 4096 per dimension.
std::vector<LayoutSpec> default_candidate_ladder(std::size_t dataset_size);

}  // namespace sprig
