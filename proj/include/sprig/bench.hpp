#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sprig/baseline.hpp"
#include "sprig/core.hpp"
#include "sprig/model.hpp"
#include "sprig/query.hpp"
#include "sprig/tuner.hpp"

namespace sprig {

struct RangeWorkload {
  std::vector<RangeQuery> queries;
  std::vector<double> selectivity_of;  // parallel to queries
  std::vector<double> selectivities;
  std::uint64_t seed = 0;
};

struct KnnWorkload {
  std::vector<KnnQuery> queries;
  std::vector<std::size_t> ks;
  std::uint64_t seed = 0;
};

// Windows centered on dataset-sampled points (preserving skew); each window's
// side scale is binary-searched until the exact hit count lands within +-10%
// of selectivity * |D|. Deterministic per (dataset, seed, params).
RangeWorkload generate_range_workload(const Dataset& dataset,
                                      std::span<const double> selectivities,
                                      std::size_t count_per_selectivity,
                                      std::uint64_t seed);

// Query points sampled from the dataset with small in-bounds jitter.
KnnWorkload generate_knn_workload(const Dataset& dataset,
                                  std::span<const std::size_t> ks,
                                  std::size_t count_per_k, std::uint64_t seed);

struct AccuracyRow {
  LayoutSpec requested;
  LayoutSpec effective;
  ModelKind kind = ModelKind::kBilinear;
  bool ok = false;
  std::string error;  // resource errors recorded, not fatal
  double fit_seconds = 0.0;
  double predict_seconds = 0.0;  // mean per call
  ErrorGuarantee eg;
};

std::vector<AccuracyRow> measure_model_accuracy(
    const Dataset& dataset, std::span<const LayoutSpec> layouts,
    std::span<const ModelKind> kinds, std::span<const Point> workload,
    const ModelOptions& options = {});

std::string accuracy_table_csv(const std::vector<AccuracyRow>& rows);

enum class Engine {
  kSprig,
  kKdTree,
  kBrute,
};
Engine parse_engine(const std::string& name);
std::string to_string(Engine engine);

struct LatencyStats {
  double mean = 0.0;
  double median = 0.0;
  double p99 = 0.0;
};

struct StorageBreakdown {
  std::size_t boundary_bytes = 0;
  std::size_t table_bytes = 0;       // per-block (cell id, offset, size, pivot)
  std::size_t pivot_dist_bytes = 0;  // auxiliary distance sequences
  std::size_t model_bytes = 0;       // kind-specific coefficients

  std::size_t total_without_pivot_dists() const {
    return boundary_bytes + table_bytes + model_bytes;
  }
  std::size_t total_with_pivot_dists() const {
    return total_without_pivot_dists() + pivot_dist_bytes;
  }
};

StorageBreakdown index_storage_bytes(const SprigIndex& index);

struct BenchConfig {
  std::vector<Engine> engines{Engine::kSprig, Engine::kBrute};
  // Explicit layout, or nullopt to tune over the default ladder.
  std::optional<LayoutSpec> layout;
  ModelKind model = ModelKind::kBilinear;
  ModelOptions model_options;
  std::size_t kd_leaf_capacity = 16;
  std::size_t repetitions = 3;  // timed passes after one warm-up
};

struct BenchRow {
  Engine engine = Engine::kBrute;
  std::string workload;  // e.g. "range sel=0.001" or "knn k=8"
  std::size_t queries = 0;
  LatencyStats latency;
  std::uint64_t checksum = 0;
  std::size_t result_count = 0;     // summed over the group
  std::size_t candidates_scanned = 0;  // SPRIG only; 0 elsewhere
  std::size_t storage_bytes = 0;           // excluding pivot-distance arrays
  std::size_t storage_bytes_with_aux = 0;  // including them (SPRIG only)
  double build_seconds = 0.0;
};

struct BenchReport {
  std::vector<BenchRow> rows;
  LayoutSpec layout;  // the layout SPRIG ran with
};

// Executes every engine over every workload group; aborts with
// ChecksumMismatchError before reporting latencies if any group's result
// checksums disagree across engines.
BenchReport run_benchmark(const Dataset& dataset, const RangeWorkload& workload,
                          const BenchConfig& config);
BenchReport run_benchmark(const Dataset& dataset, const KnnWorkload& workload,
                          const BenchConfig& config);

std::string bench_report_csv(const BenchReport& report);

}  // namespace sprig
