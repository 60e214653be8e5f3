#include "sprig/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "sprig/io.hpp"

namespace sprig {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

RangeWorkload generate_range_workload(const Dataset& dataset,
                                      std::span<const double> selectivities,
                                      std::size_t count_per_selectivity,
                                      std::uint64_t seed) {
  for (double s : selectivities) {
    if (!(s > 0.0) || s > 1.0) {
      throw std::invalid_argument("selectivity must lie in (0, 1]");
    }
  }
  const double total = static_cast<double>(dataset.size());
  const Bounds b = dataset.bounds;
  // Exact counting via the k-d tree keeps generation fast on large inputs.
  const KdTree counter(dataset, 32);

  RangeWorkload workload;
  workload.seed = seed;
  workload.selectivities.assign(selectivities.begin(), selectivities.end());
  Rng rng(seed);

  for (double s : selectivities) {
    const double target = s * total;
    if (1.1 * target < 1.0) {
      throw std::runtime_error("selectivity unattainable: dataset too small");
    }
    for (std::size_t i = 0; i < count_per_selectivity; ++i) {
      if (s >= 1.0) {
        workload.queries.push_back(RangeQuery{Point{b.x_min, b.y_min, 0},
                                              Point{b.x_max, b.y_max, 0}});
        workload.selectivity_of.push_back(s);
        continue;
      }
      const Point center = dataset.points[rng.index(dataset.size())];
      auto window_at = [&](double scale) {
        const double hx = 0.5 * scale * b.width();
        const double hy = 0.5 * scale * b.height();
        return RangeQuery{Point{center.x - hx, center.y - hy, 0},
                          Point{center.x + hx, center.y + hy, 0}};
      };
      double lo = 0.0, hi = 2.0;  // a 2x-domain window covers everything
      bool found = false;
      for (int iter = 0; iter < 200 && !found; ++iter) {
        const double mid = 0.5 * (lo + hi);
        const auto count =
            static_cast<double>(counter.count_range(window_at(mid)));
        if (count < 0.9 * target) {
          lo = mid;
        } else if (count > 1.1 * target) {
          hi = mid;
        } else {
          workload.queries.push_back(window_at(mid));
          workload.selectivity_of.push_back(s);
          found = true;
        }
      }
      if (!found) {
        throw std::runtime_error(
            "selectivity unattainable: no window within +-10% of target");
      }
    }
  }
  return workload;
}

KnnWorkload generate_knn_workload(const Dataset& dataset,
                                  std::span<const std::size_t> ks,
                                  std::size_t count_per_k, std::uint64_t seed) {
  for (std::size_t k : ks) {
    if (k == 0 || k > dataset.size()) {
      throw std::invalid_argument("k out of range for this dataset");
    }
  }
  const Bounds b = dataset.bounds;
  const double jx = 0.005 * b.width();
  const double jy = 0.005 * b.height();

  KnnWorkload workload;
  workload.seed = seed;
  workload.ks.assign(ks.begin(), ks.end());
  Rng rng(seed);
  for (std::size_t k : ks) {
    for (std::size_t i = 0; i < count_per_k; ++i) {
      const Point base = dataset.points[rng.index(dataset.size())];
      Point q{std::clamp(base.x + rng.uniform(-jx, jx), b.x_min, b.x_max),
              std::clamp(base.y + rng.uniform(-jy, jy), b.y_min, b.y_max), 0};
      workload.queries.push_back(KnnQuery{q, k});
    }
  }
  return workload;
}

std::vector<AccuracyRow> measure_model_accuracy(
    const Dataset& dataset, std::span<const LayoutSpec> layouts,
    std::span<const ModelKind> kinds, std::span<const Point> workload,
    const ModelOptions& options) {
  const DatasetProfile profile = profile_dataset(dataset);
  std::vector<AccuracyRow> rows;
  for (const LayoutSpec& layout : layouts) {
    const GridLayout grid = build_grid(profile, layout.n, layout.m);
    for (ModelKind kind : kinds) {
      AccuracyRow row;
      row.requested = layout;
      row.effective = LayoutSpec{grid.cols(), grid.rows()};
      row.kind = kind;
      try {
        const auto fit_start = Clock::now();
        const LearnedModel model = fit_model(grid, kind, options);
        row.fit_seconds = seconds_since(fit_start);

        const auto predict_start = Clock::now();
        double acc = 0.0;
        for (const Point& q : workload) acc += model.predict(q);
        row.predict_seconds =
            seconds_since(predict_start) / static_cast<double>(workload.size());
        asm volatile("" : : "x"(acc));

        row.eg = train_error_guarantee(model, grid, workload);
        row.ok = true;
      } catch (const ResourceError& e) {
        row.ok = false;
        row.error = e.what();
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string accuracy_table_csv(const std::vector<AccuracyRow>& rows) {
  std::ostringstream out;
  out << "n,m,effective_n,effective_m,model,status,fit_seconds,"
         "predict_seconds,eg,eg_x,eg_y,error\n";
  char buf[160];
  for (const AccuracyRow& r : rows) {
    out << r.requested.n << ',' << r.requested.m << ',' << r.effective.n << ','
        << r.effective.m << ',' << to_string(r.kind) << ','
        << (r.ok ? "ok" : "resource_error") << ',';
    std::snprintf(buf, sizeof(buf), "%.3e,%.3e,", r.fit_seconds,
                  r.predict_seconds);
    out << buf;
    if (r.ok) {
      out << r.eg.eg << ',' << r.eg.eg_x << ',' << r.eg.eg_y << ',';
    } else {
      out << ",,,";
    }
    // Commas inside error messages would break the table.
    std::string msg = r.error;
    std::replace(msg.begin(), msg.end(), ',', ';');
    out << msg << '\n';
  }
  return out.str();
}

Engine parse_engine(const std::string& name) {
  if (name == "sprig") return Engine::kSprig;
  if (name == "kdtree") return Engine::kKdTree;
  if (name == "brute") return Engine::kBrute;
  throw std::invalid_argument("unknown engine: " + name);
}

std::string to_string(Engine engine) {
  switch (engine) {
    case Engine::kSprig:
      return "sprig";
    case Engine::kKdTree:
      return "kdtree";
    case Engine::kBrute:
      return "brute";
  }
  return "?";
}

StorageBreakdown index_storage_bytes(const SprigIndex& index) {
  StorageBreakdown s;
  s.boundary_bytes = (index.grid.bx.size() + index.grid.by.size()) * sizeof(double);
  // Per block: cell id, first offset, size, pivot point.
  s.table_bytes = index.table.blocks.size() * (3 * sizeof(std::uint64_t) + 2 * sizeof(double));
  for (const CellBlock& b : index.table.blocks) {
    s.pivot_dist_bytes += b.pivot_dists.size() * sizeof(double);
  }
  s.model_bytes = index.model.coefficient_bytes();
  return s;
}

namespace {

LatencyStats summarize(std::vector<double> samples) {
  LatencyStats stats;
  if (samples.empty()) return stats;
  double sum = 0.0;
  for (double s : samples) sum += s;
  stats.mean = sum / static_cast<double>(samples.size());
  std::sort(samples.begin(), samples.end());
  stats.median = samples[samples.size() / 2];
  const std::size_t idx = static_cast<std::size_t>(
      std::ceil(0.99 * static_cast<double>(samples.size())));
  stats.p99 = samples[std::min(samples.size() - 1, idx == 0 ? 0 : idx - 1)];
  return stats;
}

struct GroupOutcome {
  std::uint64_t checksum = 0;
  std::size_t result_count = 0;
  std::size_t candidates_scanned = 0;
};

// One pass over a query group; returns the fold of per-query checksums in
// query order. When `times` is non-null each query's latency is appended.
template <typename RunQuery>
GroupOutcome run_group(std::span<const std::size_t> query_ids, RunQuery&& run,
                       std::vector<double>* times) {
  GroupOutcome out;
  std::vector<std::uint64_t> fold;
  fold.reserve(query_ids.size());
  for (std::size_t qi : query_ids) {
    const auto start = Clock::now();
    auto [count, checksum, scanned] = run(qi);
    if (times) times->push_back(seconds_since(start));
    out.result_count += count;
    out.candidates_scanned += scanned;
    fold.push_back(checksum);
  }
  // Order-sensitive fold: engines must agree query by query.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint64_t c : fold) {
    for (int byte = 0; byte < 8; ++byte) {
      h ^= (c >> (byte * 8)) & 0xffULL;
      h *= 0x00000100000001b3ULL;
    }
  }
  out.checksum = h;
  return out;
}

struct Engines {
  std::optional<SprigIndex> sprig;
  std::optional<KdTree> kdtree;
  double sprig_build_seconds = 0.0;
  double kdtree_build_seconds = 0.0;
  StorageBreakdown sprig_storage;
};

bool uses(const BenchConfig& config, Engine engine) {
  return std::find(config.engines.begin(), config.engines.end(), engine) !=
         config.engines.end();
}

template <typename TrainPoints>
Engines build_engines(const Dataset& dataset, const BenchConfig& config,
                      LayoutSpec layout, const TrainPoints& train_points) {
  Engines engines;
  if (uses(config, Engine::kSprig)) {
    const auto start = Clock::now();
    SprigIndex index = build_index(dataset, layout.n, layout.m, config.model,
                                   config.model_options);
    index.eg = train_error_guarantee(index.model, index.grid, train_points);
    engines.sprig_build_seconds = seconds_since(start);
    engines.sprig_storage = index_storage_bytes(index);
    engines.sprig.emplace(std::move(index));
  }
  if (uses(config, Engine::kKdTree)) {
    const auto start = Clock::now();
    engines.kdtree.emplace(dataset, config.kd_leaf_capacity);
    engines.kdtree_build_seconds = seconds_since(start);
  }
  return engines;
}

template <typename GroupKey, typename DescribeGroup, typename MakeRunner>
BenchReport run_benchmark_impl(const Dataset& dataset,
                               std::span<const GroupKey> group_keys,
                               const std::vector<std::vector<std::size_t>>& groups,
                               const BenchConfig& config, LayoutSpec layout,
                               Engines& engines, DescribeGroup&& describe,
                               MakeRunner&& make_runner) {
  BenchReport report;
  if (engines.sprig) {
    report.layout = LayoutSpec{engines.sprig->cols(), engines.sprig->rows()};
  } else {
    report.layout = layout;
  }

  for (std::size_t g = 0; g < groups.size(); ++g) {
    const std::span<const std::size_t> ids(groups[g]);
    const std::string label = describe(group_keys[g]);

    // Correctness pass: checksums must agree before any latency is reported.
    std::vector<Engine> order;
    std::vector<GroupOutcome> outcomes;
    for (Engine engine : config.engines) {
      auto runner = make_runner(engine);
      outcomes.push_back(run_group(ids, runner, nullptr));
      order.push_back(engine);
    }
    for (std::size_t e = 1; e < outcomes.size(); ++e) {
      if (outcomes[e].checksum != outcomes[0].checksum) {
        throw ChecksumMismatchError(
            "engine " + to_string(order[e]) + " disagrees with " +
            to_string(order[0]) + " on workload '" + label +
            "' (counts " + std::to_string(outcomes[e].result_count) + " vs " +
            std::to_string(outcomes[0].result_count) + ")");
      }
    }

    for (std::size_t e = 0; e < order.size(); ++e) {
      auto runner = make_runner(order[e]);
      std::vector<double> times;
      times.reserve(ids.size() * config.repetitions);
      for (std::size_t rep = 0; rep < config.repetitions; ++rep) {
        run_group(ids, runner, &times);
      }
      BenchRow row;
      row.engine = order[e];
      row.workload = label;
      row.queries = ids.size();
      row.latency = summarize(std::move(times));
      row.checksum = outcomes[e].checksum;
      row.result_count = outcomes[e].result_count;
      row.candidates_scanned = outcomes[e].candidates_scanned;
      switch (order[e]) {
        case Engine::kSprig:
          row.storage_bytes = engines.sprig_storage.total_without_pivot_dists();
          row.storage_bytes_with_aux = engines.sprig_storage.total_with_pivot_dists();
          row.build_seconds = engines.sprig_build_seconds;
          break;
        case Engine::kKdTree:
          row.storage_bytes = engines.kdtree->storage_bytes();
          row.storage_bytes_with_aux = engines.kdtree->storage_bytes();
          row.build_seconds = engines.kdtree_build_seconds;
          break;
        case Engine::kBrute:
          break;
      }
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

}  // namespace

BenchReport run_benchmark(const Dataset& dataset, const RangeWorkload& workload,
                          const BenchConfig& config) {
  if (workload.queries.empty()) {
    throw std::invalid_argument("benchmark needs a non-empty workload");
  }
  LayoutSpec layout;
  if (config.layout) {
    layout = *config.layout;
  } else {
    const auto ladder = default_candidate_ladder(dataset.size());
    layout = tune_layout(dataset, workload.queries, ladder, config.model,
                         config.model_options)
                 .best;
  }

  std::vector<Point> corners;
  corners.reserve(workload.queries.size() * 2);
  for (const RangeQuery& q : workload.queries) {
    corners.push_back(q.q_b);
    corners.push_back(q.q_t);
  }
  Engines engines = build_engines(dataset, config, layout, corners);

  // Group query indices by selectivity, preserving declaration order.
  std::vector<std::vector<std::size_t>> groups(workload.selectivities.size());
  for (std::size_t i = 0; i < workload.queries.size(); ++i) {
    const auto it = std::find(workload.selectivities.begin(),
                              workload.selectivities.end(),
                              workload.selectivity_of[i]);
    groups[static_cast<std::size_t>(it - workload.selectivities.begin())]
        .push_back(i);
  }

  auto describe = [](double s) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "range sel=%g", s);
    return std::string(buf);
  };
  auto make_runner = [&](Engine engine) {
    return [&, engine](std::size_t qi)
               -> std::tuple<std::size_t, std::uint64_t, std::size_t> {
      const RangeQuery& q = workload.queries[qi];
      switch (engine) {
        case Engine::kSprig: {
          QueryStats stats;
          const auto result = range_query(*engines.sprig, q, &stats);
          return {result.size(), checksum_points(result), stats.candidates_scanned};
        }
        case Engine::kKdTree: {
          const auto result = engines.kdtree->range(q);
          return {result.size(), checksum_points(result), 0};
        }
        case Engine::kBrute: {
          const auto result = brute_range(dataset, q);
          return {result.size(), checksum_points(result), 0};
        }
      }
      return {0, 0, 0};
    };
  };
  return run_benchmark_impl(dataset,
                            std::span<const double>(workload.selectivities),
                            groups, config, layout, engines, describe,
                            make_runner);
}

BenchReport run_benchmark(const Dataset& dataset, const KnnWorkload& workload,
                          const BenchConfig& config) {
  if (workload.queries.empty()) {
    throw std::invalid_argument("benchmark needs a non-empty workload");
  }
  LayoutSpec layout{64, 64};
  if (config.layout) {
    layout = *config.layout;
  } else {
    // The cost model covers range queries only; kNN layouts are tuned
    // empirically over the ladder with a workload subsample.
    const auto ladder = default_candidate_ladder(dataset.size());
    const std::size_t sample =
        std::min<std::size_t>(workload.queries.size(), 32);
    double best_time = std::numeric_limits<double>::infinity();
    for (const LayoutSpec& cand : ladder) {
      SprigIndex index = build_index(dataset, cand.n, cand.m, config.model,
                                     config.model_options);
      std::vector<Point> train;
      for (const KnnQuery& q : workload.queries) train.push_back(q.q_k);
      index.eg = train_error_guarantee(index.model, index.grid, train);
      const auto start = Clock::now();
      for (std::size_t i = 0; i < sample; ++i) {
        // Stride across the workload so every k group participates.
        const std::size_t qi = i * workload.queries.size() / sample;
        const auto result = knn_query(index, workload.queries[qi]);
        asm volatile("" : : "r"(result.size()));
      }
      const double elapsed = seconds_since(start);
      if (elapsed < best_time) {
        best_time = elapsed;
        layout = cand;
      }
    }
  }

  std::vector<Point> train;
  train.reserve(workload.queries.size());
  for (const KnnQuery& q : workload.queries) train.push_back(q.q_k);
  Engines engines = build_engines(dataset, config, layout, train);

  std::vector<std::vector<std::size_t>> groups(workload.ks.size());
  for (std::size_t i = 0; i < workload.queries.size(); ++i) {
    const auto it = std::find(workload.ks.begin(), workload.ks.end(),
                              workload.queries[i].k);
    groups[static_cast<std::size_t>(it - workload.ks.begin())].push_back(i);
  }

  auto describe = [](std::size_t k) {
    return "knn k=" + std::to_string(k);
  };
  auto make_runner = [&](Engine engine) {
    return [&, engine](std::size_t qi)
               -> std::tuple<std::size_t, std::uint64_t, std::size_t> {
      const KnnQuery& q = workload.queries[qi];
      auto ids_of = [](const KnnResult& result) {
        std::vector<std::uint64_t> ids;
        ids.reserve(result.size());
        for (const Neighbor& nb : result) ids.push_back(nb.point.id);
        return ids;
      };
      switch (engine) {
        case Engine::kSprig: {
          QueryStats stats;
          const auto result = knn_query(*engines.sprig, q, {}, &stats);
          return {result.size(), checksum_ids(ids_of(result)),
                  stats.candidates_scanned};
        }
        case Engine::kKdTree: {
          const auto result = engines.kdtree->knn(q);
          return {result.size(), checksum_ids(ids_of(result)), 0};
        }
        case Engine::kBrute: {
          const auto result = brute_knn(dataset, q);
          return {result.size(), checksum_ids(ids_of(result)), 0};
        }
      }
      return {0, 0, 0};
    };
  };
  return run_benchmark_impl(dataset,
                            std::span<const std::size_t>(workload.ks), groups,
                            config, layout, engines, describe, make_runner);
}

std::string bench_report_csv(const BenchReport& report) {
  std::ostringstream out;
  out << "engine,workload,queries,mean_seconds,median_seconds,p99_seconds,"
         "checksum,result_count,candidates_scanned,storage_bytes,"
         "storage_bytes_with_aux,build_seconds\n";
  char buf[256];
  for (const BenchRow& r : report.rows) {
    std::snprintf(buf, sizeof(buf),
                  "%s,%s,%zu,%.6e,%.6e,%.6e,%016llx,%zu,%zu,%zu,%zu,%.3f\n",
                  to_string(r.engine).c_str(), r.workload.c_str(), r.queries,
                  r.latency.mean, r.latency.median, r.latency.p99,
                  static_cast<unsigned long long>(r.checksum), r.result_count,
                  r.candidates_scanned, r.storage_bytes,
                  r.storage_bytes_with_aux, r.build_seconds);
    out << buf;
  }
  return out.str();
}

}  // namespace sprig
