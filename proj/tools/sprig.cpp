// Command-line front end: dataset/workload generation, index building,
// query execution, cost-model tuning, model accuracy studies, and the
// multi-engine benchmark.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "sprig/bench.hpp"
#include "sprig/io.hpp"

namespace {

using namespace sprig;

struct DataArgs {
  std::string path;
  std::size_t synthetic_n = 0;
  std::string dist = "uniform";
  std::uint64_t seed = 1;
  std::size_t limit = 0;
};

void add_data_options(CLI::App* cmd, DataArgs* args) {
  cmd->add_option("--data", args->path, "point file (x<sep>y per line)");
  cmd->add_option("--synthetic-n", args->synthetic_n,
                  "generate a synthetic dataset of this size instead");
  cmd->add_option("--dist", args->dist, "synthetic distribution")
      ->check(CLI::IsMember({"uniform", "gaussian-clusters"}));
  cmd->add_option("--seed", args->seed, "random seed");
  cmd->add_option("--limit", args->limit, "read at most this many points");
}

Dataset load_or_generate(const DataArgs& args) {
  if (!args.path.empty()) {
    LoadStats stats;
    std::optional<std::size_t> limit;
    if (args.limit > 0) limit = args.limit;
    Dataset d = load_points(args.path, limit, &stats);
    if (stats.rejected > 0) {
      std::fprintf(stderr, "warning: %zu malformed line(s) skipped\n",
                   stats.rejected);
    }
    return d;
  }
  if (args.synthetic_n == 0) {
    throw std::runtime_error("provide --data FILE or --synthetic-n N");
  }
  return generate_synthetic(args.synthetic_n, parse_distribution(args.dist),
                            args.seed);
}

struct ModelArgs {
  std::string kind = "bilinear";
  double shepard_power = 2.0;
  double rbf_width = 0.0;
  std::size_t rbf_mem_budget = std::size_t{1} << 30;
};

void add_model_options(CLI::App* cmd, ModelArgs* args) {
  cmd->add_option("--model", args->kind, "interpolation family")
      ->check(CLI::IsMember({"bilinear", "bicubic", "pbicubic", "shepard", "rbf"}));
  cmd->add_option("--shepard-power", args->shepard_power, "IDW power");
  cmd->add_option("--rbf-width", args->rbf_width,
                  "gaussian kernel width (0 = mean knot spacing)");
  cmd->add_option("--rbf-mem-budget", args->rbf_mem_budget,
                  "bytes allowed for the rbf kernel matrix");
}

ModelOptions model_options(const ModelArgs& args) {
  ModelOptions options;
  options.shepard_power = args.shepard_power;
  options.rbf_width = args.rbf_width;
  options.rbf_mem_budget = args.rbf_mem_budget;
  return options;
}

LayoutSpec parse_layout(const std::string& text) {
  const auto x = text.find('x');
  if (x == std::string::npos) {
    throw std::runtime_error("layout must look like 64x64: " + text);
  }
  return LayoutSpec{std::stoull(text.substr(0, x)),
                    std::stoull(text.substr(x + 1))};
}

std::vector<LayoutSpec> parse_layout_list(const std::string& text) {
  std::vector<LayoutSpec> layouts;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t comma = text.find(',', start);
    if (comma == std::string::npos) comma = text.size();
    layouts.push_back(parse_layout(text.substr(start, comma - start)));
    start = comma + 1;
  }
  if (layouts.empty()) throw std::runtime_error("empty layout list");
  return layouts;
}

void write_text(const std::string& path, const std::string& contents) {
  if (path.empty() || path == "-") {
    std::fputs(contents.c_str(), stdout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << contents;
}

std::vector<Point> training_points_from_ranges(const std::vector<RangeQuery>& qs) {
  std::vector<Point> pts;
  pts.reserve(qs.size() * 2);
  for (const RangeQuery& q : qs) {
    pts.push_back(q.q_b);
    pts.push_back(q.q_t);
  }
  return pts;
}

int run(int argc, char** argv) {
  CLI::App app{"SPRIG: spatial-interpolation learned grid index toolkit"};
  app.require_subcommand(1);

  // gen-data
  auto* gen_data = app.add_subcommand("gen-data", "generate a synthetic point file");
  std::size_t gd_n = 100000;
  std::string gd_dist = "uniform";
  std::uint64_t gd_seed = 1;
  std::size_t gd_clusters = 10;
  double gd_stddev = 0.02;
  std::string gd_out;
  gen_data->add_option("--n", gd_n, "point count")->required();
  gen_data->add_option("--dist", gd_dist, "distribution")
      ->check(CLI::IsMember({"uniform", "gaussian-clusters"}));
  gen_data->add_option("--seed", gd_seed, "random seed");
  gen_data->add_option("--clusters", gd_clusters, "cluster count");
  gen_data->add_option("--stddev", gd_stddev, "cluster standard deviation");
  gen_data->add_option("--out", gd_out, "output point file")->required();

  // gen-workload
  auto* gen_wl = app.add_subcommand("gen-workload", "generate a query workload file");
  DataArgs gw_data;
  add_data_options(gen_wl, &gw_data);
  std::string gw_kind = "range";
  std::vector<double> gw_selectivities{0.001, 0.005, 0.01, 0.015, 0.02};
  std::vector<std::size_t> gw_ks{4, 8, 16, 32, 64};
  std::size_t gw_count = 100;
  std::uint64_t gw_wseed = 7;
  std::string gw_out;
  gen_wl->add_option("--kind", gw_kind, "workload kind")
      ->check(CLI::IsMember({"range", "knn"}));
  gen_wl->add_option("--selectivities", gw_selectivities,
                     "range selectivities in (0,1]");
  gen_wl->add_option("--ks", gw_ks, "kNN k values");
  gen_wl->add_option("--count", gw_count, "queries per selectivity or per k");
  gen_wl->add_option("--workload-seed", gw_wseed, "workload seed");
  gen_wl->add_option("--out", gw_out, "output query file")->required();

  // build
  auto* build = app.add_subcommand("build", "build and save a SPRIG index");
  DataArgs b_data;
  ModelArgs b_model;
  add_data_options(build, &b_data);
  add_model_options(build, &b_model);
  std::string b_layout = "64x64";
  std::string b_train;
  std::string b_train_kind = "range";
  std::string b_out;
  build->add_option("--layout", b_layout, "grid layout NxM");
  build->add_option("--train-workload", b_train,
                    "query file used to train the error guarantee");
  build->add_option("--train-kind", b_train_kind, "train workload kind")
      ->check(CLI::IsMember({"range", "knn"}));
  build->add_option("--out", b_out, "output index file")->required();

  // query
  auto* query = app.add_subcommand("query", "execute a query file");
  DataArgs q_data;
  ModelArgs q_model;
  add_data_options(query, &q_data);
  add_model_options(query, &q_model);
  std::string q_engine = "sprig";
  std::string q_kind = "range";
  std::string q_index;
  std::string q_layout = "64x64";
  std::string q_queries;
  std::string q_out;
  std::size_t q_leaf = 16;
  bool q_no_pruning = false;
  bool q_no_pivot = false;
  query->add_option("--engine", q_engine, "execution engine")
      ->check(CLI::IsMember({"sprig", "kdtree", "brute"}));
  query->add_option("--kind", q_kind, "query kind")
      ->check(CLI::IsMember({"range", "knn"}));
  query->add_option("--index", q_index, "saved index file (sprig engine)");
  query->add_option("--layout", q_layout, "grid layout NxM when building ad hoc");
  query->add_option("--queries", q_queries, "query file")->required();
  query->add_option("--leaf-capacity", q_leaf, "k-d tree leaf capacity");
  query->add_flag("--no-pruning", q_no_pruning, "disable closest-point pruning");
  query->add_flag("--no-pivot-filter", q_no_pivot, "disable pivot filtering");
  query->add_option("--out", q_out, "results file (default stdout)");

  // tune
  auto* tune = app.add_subcommand("tune", "pick the best layout by the cost model");
  DataArgs t_data;
  ModelArgs t_model;
  add_data_options(tune, &t_data);
  add_model_options(tune, &t_model);
  std::string t_workload;
  std::string t_candidates;
  std::string t_out;
  tune->add_option("--workload", t_workload, "range query file")->required();
  tune->add_option("--candidates", t_candidates,
                   "comma-separated layouts (default: geometric ladder)");
  tune->add_option("--out", t_out, "output table (default stdout)");

  // accuracy
  auto* accuracy = app.add_subcommand(
      "accuracy", "model comparison table over layouts");
  DataArgs a_data;
  ModelArgs a_model;
  add_data_options(accuracy, &a_data);
  add_model_options(accuracy, &a_model);
  std::string a_layouts = "10x10,20x20,50x50,100x100,200x200";
  std::string a_models = "bilinear,bicubic,pbicubic,shepard,rbf";
  std::size_t a_probes = 10000;
  std::uint64_t a_probe_seed = 17;
  std::string a_out;
  accuracy->add_option("--layouts", a_layouts, "comma-separated layouts");
  accuracy->add_option("--models", a_models, "comma-separated model kinds");
  accuracy->add_option("--probes", a_probes, "workload probe count");
  accuracy->add_option("--probe-seed", a_probe_seed, "probe seed");
  accuracy->add_option("--out", a_out, "output table (default stdout)");

  // bench
  auto* bench = app.add_subcommand("bench", "multi-engine benchmark");
  DataArgs be_data;
  ModelArgs be_model;
  add_data_options(bench, &be_data);
  add_model_options(bench, &be_model);
  std::string be_workload;
  std::string be_kind = "range";
  std::vector<std::string> be_engines{"sprig", "kdtree", "brute"};
  std::string be_layout = "tune";
  std::size_t be_leaf = 16;
  std::size_t be_reps = 3;
  std::string be_out;
  bench->add_option("--workload", be_workload, "query file")->required();
  bench->add_option("--kind", be_kind, "workload kind")
      ->check(CLI::IsMember({"range", "knn"}));
  bench->add_option("--engines", be_engines, "engines to compare");
  bench->add_option("--layout", be_layout, "NxM, or 'tune' for the cost model");
  bench->add_option("--leaf-capacity", be_leaf, "k-d tree leaf capacity");
  bench->add_option("--reps", be_reps, "timed repetitions");
  bench->add_option("--out", be_out, "report file (default stdout)");

  CLI11_PARSE(app, argc, argv);

  if (gen_data->parsed()) {
    SyntheticOptions options;
    options.clusters = gd_clusters;
    options.cluster_stddev = gd_stddev;
    const Dataset d =
        generate_synthetic(gd_n, parse_distribution(gd_dist), gd_seed, options);
    write_points(d, gd_out);
    std::printf("wrote %zu points to %s\n", d.size(), gd_out.c_str());
    return 0;
  }

  if (gen_wl->parsed()) {
    const Dataset d = load_or_generate(gw_data);
    if (gw_kind == "range") {
      const RangeWorkload w =
          generate_range_workload(d, gw_selectivities, gw_count, gw_wseed);
      write_range_queries(w.queries, gw_out);
      std::printf("wrote %zu range queries to %s\n", w.queries.size(),
                  gw_out.c_str());
    } else {
      const KnnWorkload w = generate_knn_workload(d, gw_ks, gw_count, gw_wseed);
      write_knn_queries(w.queries, gw_out);
      std::printf("wrote %zu knn queries to %s\n", w.queries.size(),
                  gw_out.c_str());
    }
    return 0;
  }

  if (build->parsed()) {
    const Dataset d = load_or_generate(b_data);
    const LayoutSpec layout = parse_layout(b_layout);
    SprigIndex index = build_index(d, layout.n, layout.m,
                                   parse_model_kind(b_model.kind),
                                   model_options(b_model));
    if (!b_train.empty()) {
      std::vector<Point> train;
      if (b_train_kind == "range") {
        train = training_points_from_ranges(read_range_queries(b_train));
      } else {
        for (const KnnQuery& q : read_knn_queries(b_train)) train.push_back(q.q_k);
      }
      index.eg = train_error_guarantee(index.model, index.grid, train);
    }
    save_index(index, model_options(b_model), b_out);
    const StorageBreakdown s = index_storage_bytes(index);
    std::printf("built %zux%zu index over %zu points; eg=(%g,%zu,%zu); "
                "%zu bytes (+%zu pivot-distance bytes)\n",
                index.cols(), index.rows(), d.size(), index.eg.eg,
                index.eg.eg_x, index.eg.eg_y, s.total_without_pivot_dists(),
                s.pivot_dist_bytes);
    return 0;
  }

  if (query->parsed()) {
    const Engine engine = parse_engine(q_engine);
    std::vector<QueryResultLine> lines;
    QueryOptions qopts;
    qopts.closest_point_pruning = !q_no_pruning;
    qopts.pivot_filtering = !q_no_pivot;

    std::optional<Dataset> dataset;
    std::optional<SprigIndex> sprig_index;
    std::optional<KdTree> kdtree;
    if (engine == Engine::kSprig && !q_index.empty()) {
      sprig_index = load_index(q_index).index;
    } else {
      dataset = load_or_generate(q_data);
      if (engine == Engine::kSprig) {
        const LayoutSpec layout = parse_layout(q_layout);
        sprig_index = build_index(*dataset, layout.n, layout.m,
                                  parse_model_kind(q_model.kind),
                                  model_options(q_model));
      } else if (engine == Engine::kKdTree) {
        kdtree.emplace(*dataset, q_leaf);
      }
    }

    if (q_kind == "range") {
      const auto queries = read_range_queries(q_queries);
      if (sprig_index) {
        // Train on the workload itself, as the build pipeline does.
        sprig_index->eg = train_error_guarantee(
            sprig_index->model, sprig_index->grid,
            training_points_from_ranges(queries));
      }
      for (std::size_t i = 0; i < queries.size(); ++i) {
        std::vector<Point> result;
        switch (engine) {
          case Engine::kSprig:
            result = range_query(*sprig_index, queries[i]);
            break;
          case Engine::kKdTree:
            result = kdtree->range(queries[i]);
            break;
          case Engine::kBrute:
            result = brute_range(*dataset, queries[i]);
            break;
        }
        lines.push_back(QueryResultLine{i, result.size(), checksum_points(result)});
      }
    } else {
      const auto queries = read_knn_queries(q_queries);
      if (sprig_index) {
        std::vector<Point> train;
        for (const KnnQuery& q : queries) train.push_back(q.q_k);
        sprig_index->eg = train_error_guarantee(sprig_index->model,
                                                sprig_index->grid, train);
      }
      for (std::size_t i = 0; i < queries.size(); ++i) {
        KnnResult result;
        switch (engine) {
          case Engine::kSprig:
            result = knn_query(*sprig_index, queries[i], qopts);
            break;
          case Engine::kKdTree:
            result = kdtree->knn(queries[i]);
            break;
          case Engine::kBrute:
            result = brute_knn(*dataset, queries[i]);
            break;
        }
        std::vector<std::uint64_t> ids;
        for (const Neighbor& nb : result) ids.push_back(nb.point.id);
        lines.push_back(QueryResultLine{i, result.size(), checksum_ids(std::move(ids))});
      }
    }
    if (q_out.empty()) {
      std::printf("query_index,result_count,checksum\n");
      for (const QueryResultLine& l : lines) {
        std::printf("%zu,%zu,%016llx\n", l.query_index, l.result_count,
                    static_cast<unsigned long long>(l.checksum));
      }
    } else {
      write_query_results(lines, q_out);
    }
    return 0;
  }

  if (tune->parsed()) {
    const Dataset d = load_or_generate(t_data);
    const auto workload = read_range_queries(t_workload);
    const std::vector<LayoutSpec> candidates =
        t_candidates.empty() ? default_candidate_ladder(d.size())
                             : parse_layout_list(t_candidates);
    const TuneResult result =
        tune_layout(d, workload, candidates, parse_model_kind(t_model.kind),
                    model_options(t_model));
    std::ostringstream out;
    out << "n,m,effective_n,effective_m,t_predict,t_search,n_intersected,"
           "n_contained,n_scanned_points,total\n";
    char buf[224];
    for (const CostEstimate& e : result.table) {
      std::snprintf(buf, sizeof(buf), "%zu,%zu,%zu,%zu,%.4e,%.4e,%.2f,%.2f,%.2f,%.6e\n",
                    e.requested.n, e.requested.m, e.effective.n, e.effective.m,
                    e.t_predict, e.t_search, e.n_intersected, e.n_contained,
                    e.n_scanned_points, e.total);
      out << buf;
    }
    write_text(t_out, out.str());
    std::fprintf(stderr, "best layout: %zux%zu\n", result.best.n, result.best.m);
    return 0;
  }

  if (accuracy->parsed()) {
    const Dataset d = load_or_generate(a_data);
    const std::vector<LayoutSpec> layouts = parse_layout_list(a_layouts);
    std::vector<ModelKind> kinds;
    std::size_t start = 0;
    while (start < a_models.size()) {
      std::size_t comma = a_models.find(',', start);
      if (comma == std::string::npos) comma = a_models.size();
      kinds.push_back(parse_model_kind(a_models.substr(start, comma - start)));
      start = comma + 1;
    }
    Rng rng(a_probe_seed);
    std::vector<Point> probes;
    probes.reserve(a_probes);
    for (std::size_t i = 0; i < a_probes; ++i) {
      probes.push_back(Point{rng.uniform(d.bounds.x_min, d.bounds.x_max),
                             rng.uniform(d.bounds.y_min, d.bounds.y_max), 0});
    }
    const auto rows =
        measure_model_accuracy(d, layouts, kinds, probes, model_options(a_model));
    write_text(a_out, accuracy_table_csv(rows));
    return 0;
  }

  if (bench->parsed()) {
    const Dataset d = load_or_generate(be_data);
    BenchConfig config;
    config.engines.clear();
    for (const std::string& name : be_engines) {
      config.engines.push_back(parse_engine(name));
    }
    config.model = parse_model_kind(be_model.kind);
    config.model_options = model_options(be_model);
    config.kd_leaf_capacity = be_leaf;
    config.repetitions = be_reps;
    if (be_layout != "tune") config.layout = parse_layout(be_layout);

    BenchReport report;
    if (be_kind == "range") {
      const auto queries = read_range_queries(be_workload);
      RangeWorkload w;
      w.queries = queries;
      // Group by rounded result scale is unavailable here; treat the file as
      // one group.
      w.selectivities = {0.0};
      w.selectivity_of.assign(queries.size(), 0.0);
      report = run_benchmark(d, w, config);
    } else {
      const auto queries = read_knn_queries(be_workload);
      KnnWorkload w;
      w.queries = queries;
      std::vector<std::size_t> ks;
      for (const KnnQuery& q : queries) {
        if (std::find(ks.begin(), ks.end(), q.k) == ks.end()) ks.push_back(q.k);
      }
      w.ks = ks;
      report = run_benchmark(d, w, config);
    }
    write_text(be_out, bench_report_csv(report));
    std::fprintf(stderr, "sprig layout: %zux%zu\n", report.layout.n,
                 report.layout.m);
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ChecksumMismatchError& e) {
    std::fprintf(stderr, "checksum mismatch: %s\n", e.what());
    return 2;
  } catch (const ResourceError& e) {
    std::fprintf(stderr, "resource error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
