#include "sprig/model.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace sprig {
namespace {

GridLayout unit_cell_grid() {
  GridLayout g;
  g.bx = {0.0, 1.0, 2.0};
  g.by = {0.0, 1.0};
  return g;
}

GridLayout hand_grid_5x4() {
  GridLayout g;
  g.bx = {0, 1, 2, 3, 4, 5};
  g.by = {0, 1, 2, 3, 4};
  return g;
}

const ModelKind kInterpolatingKinds[] = {
    ModelKind::kBilinear, ModelKind::kBicubic, ModelKind::kPiecewiseBicubic,
    ModelKind::kRbf};

TEST(FitModel, BilinearUnitCellCenter) {
  const LearnedModel model = fit_model(unit_cell_grid(), ModelKind::kBilinear);
  // x-fraction + y-fraction * n on the first rectangle.
  EXPECT_DOUBLE_EQ(model.predict(Point{0.5, 0.5, 0}), 1.5);
}

TEST(FitModel, InterpolatingKindsPassThroughKnots) {
  const Dataset d = generate_synthetic(5000, Distribution::kUniform, 21);
  for (auto layout : {std::pair<std::size_t, std::size_t>{4, 3},
                      std::pair<std::size_t, std::size_t>{10, 10},
                      std::pair<std::size_t, std::size_t>{20, 20}}) {
    const GridLayout g = build_grid(d, layout.first, layout.second);
    for (ModelKind kind : kInterpolatingKinds) {
      const LearnedModel model = fit_model(g, kind);
      for (std::size_t j = 0; j < g.by.size(); ++j) {
        for (std::size_t i = 0; i < g.bx.size(); ++i) {
          const double expected = model.knot_value(i, j);
          const double got = model.predict(Point{g.bx[i], g.by[j], 0});
          EXPECT_NEAR(got, expected, 1e-9 * std::max(1.0, std::abs(expected)))
              << to_string(kind) << " at knot (" << i << "," << j << ")";
        }
      }
    }
  }
}

TEST(FitModel, BottomLeftCornerPredictsZero) {
  const Dataset d = generate_synthetic(2000, Distribution::kUniform, 33);
  const GridLayout g = build_grid(d, 6, 5);
  for (ModelKind kind : kInterpolatingKinds) {
    const LearnedModel model = fit_model(g, kind);
    EXPECT_NEAR(model.predict(Point{g.bx.front(), g.by.front(), 0}), 0.0, 1e-9)
        << to_string(kind);
  }
}

TEST(FitModel, ShepardMatchesDirectInverseDistanceFormula) {
  const GridLayout g = unit_cell_grid();
  const LearnedModel model = fit_model(g, ModelKind::kShepard);
  const double qx = 0.5, qy = 0.5;
  double wsum = 0.0, vsum = 0.0;
  for (std::size_t j = 0; j < g.by.size(); ++j) {
    for (std::size_t i = 0; i < g.bx.size(); ++i) {
      const double dx = qx - g.bx[i];
      const double dy = qy - g.by[j];
      const double w = 1.0 / (dx * dx + dy * dy);  // power 2
      wsum += w;
      vsum += w * static_cast<double>(j * g.cols() + i);
    }
  }
  EXPECT_NEAR(model.predict(Point{qx, qy, 0}), vsum / wsum, 1e-12);
}

TEST(FitModel, ShepardAtKnotReturnsKnotValue) {
  const GridLayout g = unit_cell_grid();
  const LearnedModel model = fit_model(g, ModelKind::kShepard);
  EXPECT_DOUBLE_EQ(model.predict(Point{1.0, 1.0, 0}), 3.0);
}

TEST(FitModel, RbfBudgetExceededThrows) {
  const Dataset d = generate_synthetic(2000, Distribution::kUniform, 5);
  const GridLayout g = build_grid(d, 50, 50);
  ModelOptions options;
  options.rbf_mem_budget = 1 << 20;  // 51*51 knots need ~54 MB
  EXPECT_THROW(fit_model(g, ModelKind::kRbf, options), ResourceError);
}

TEST(Predict, BilinearWithinPaperBound) {
  const Dataset d = generate_synthetic(20000, Distribution::kGaussianClusters, 8);
  const GridLayout g = build_grid(d, 12, 10);
  const LearnedModel model = fit_model(g, ModelKind::kBilinear);
  const auto n = static_cast<double>(g.cols());
  Rng rng(99);
  for (int i = 0; i < 1000; ++i) {
    const Point p{rng.uniform(d.bounds.x_min, d.bounds.x_max),
                  rng.uniform(d.bounds.y_min, d.bounds.y_max), 0};
    const double predicted = model.predict(p);
    const auto true_id = static_cast<double>(cell_id_of(g, p));
    EXPECT_GE(predicted - true_id, 0.0);
    EXPECT_LE(predicted - true_id, n + 1.0);
    // Integer prediction lands within the same window.
    const double floored = std::floor(predicted);
    EXPECT_GE(floored - true_id, 0.0);
    EXPECT_LE(floored - true_id, n + 1.0);
  }
}

TEST(Predict, BilinearMonotoneInX) {
  const Dataset d = generate_synthetic(5000, Distribution::kGaussianClusters, 17);
  const GridLayout g = build_grid(d, 9, 7);
  const LearnedModel model = fit_model(g, ModelKind::kBilinear);
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const double y = rng.uniform(d.bounds.y_min, d.bounds.y_max);
    double prev = -1.0;
    for (int s = 0; s <= 50; ++s) {
      const double x = d.bounds.x_min + d.bounds.width() * s / 50.0;
      const double v = model.predict(Point{x, y, 0});
      EXPECT_GE(v, prev - 1e-12);
      prev = v;
    }
  }
}

TEST(Predict, ClampsOutOfBoundsPoints) {
  const GridLayout g = unit_cell_grid();
  const LearnedModel model = fit_model(g, ModelKind::kBilinear);
  EXPECT_DOUBLE_EQ(model.predict(Point{-10, -10, 0}), 0.0);
  EXPECT_DOUBLE_EQ(model.predict(Point{10, 10, 0}),
                   model.predict(Point{2.0, 1.0, 0}));
}

TEST(TrainErrorGuarantee, PerfectPredictorGivesZero) {
  const Dataset d = generate_synthetic(3000, Distribution::kUniform, 4);
  const GridLayout g = build_grid(d, 7, 6);
  Rng rng(12);
  std::vector<Point> workload;
  for (int i = 0; i < 500; ++i) {
    workload.push_back(Point{rng.uniform(d.bounds.x_min, d.bounds.x_max),
                             rng.uniform(d.bounds.y_min, d.bounds.y_max), 0});
  }
  const ErrorGuarantee eg = train_error_guarantee(
      [&](const Point& q) { return static_cast<double>(cell_id_of(g, q)); }, g,
      workload);
  EXPECT_EQ(eg.eg_x, 0u);
  EXPECT_EQ(eg.eg_y, 0u);
  EXPECT_DOUBLE_EQ(eg.eg, 0.0);
}

TEST(TrainErrorGuarantee, BilinearBoundedByNPlusOne) {
  const Dataset d = generate_synthetic(30000, Distribution::kGaussianClusters, 6);
  for (std::size_t n : {5u, 12u, 20u}) {
    const GridLayout g = build_grid(d, n, n);
    const LearnedModel model = fit_model(g, ModelKind::kBilinear);
    Rng rng(1);
    std::vector<Point> workload;
    for (int i = 0; i < 2000; ++i) {
      workload.push_back(Point{rng.uniform(d.bounds.x_min, d.bounds.x_max),
                               rng.uniform(d.bounds.y_min, d.bounds.y_max), 0});
    }
    const ErrorGuarantee eg = train_error_guarantee(model, g, workload);
    EXPECT_LE(eg.eg, static_cast<double>(g.cols()) + 1.0);
  }
}

TEST(TrainErrorGuarantee, ShepardProjectionsMatchBruteForceRecomputation) {
  const Dataset d = generate_synthetic(4000, Distribution::kUniform, 10);
  const GridLayout g = build_grid(d, 5, 5);
  const LearnedModel model = fit_model(g, ModelKind::kShepard);
  Rng rng(77);
  std::vector<Point> workload;
  for (int i = 0; i < 200; ++i) {
    workload.push_back(Point{rng.uniform(d.bounds.x_min, d.bounds.x_max),
                             rng.uniform(d.bounds.y_min, d.bounds.y_max), 0});
  }
  const ErrorGuarantee eg = train_error_guarantee(model, g, workload);

  const std::size_t n = g.cols();
  std::size_t egx = 0, egy = 0;
  double raw = 0.0;
  for (const Point& q : workload) {
    const double fp = model.predict(q);
    auto pid = static_cast<long long>(std::floor(fp));
    pid = std::max<long long>(0, std::min<long long>(pid, static_cast<long long>(n * g.rows()) - 1));
    const long long lpx = pid % static_cast<long long>(n);
    const long long lpy = pid / static_cast<long long>(n);
    const auto rid = static_cast<long long>(cell_id_of(g, q));
    const long long lrx = rid % static_cast<long long>(n);
    const long long lry = rid / static_cast<long long>(n);
    egx = std::max<std::size_t>(egx, static_cast<std::size_t>(std::llabs(lpx - lrx)));
    egy = std::max<std::size_t>(egy, static_cast<std::size_t>(std::llabs(lpy - lry)));
    raw = std::max(raw, std::abs(fp - static_cast<double>(rid)));
  }
  EXPECT_EQ(eg.eg_x, egx);
  EXPECT_EQ(eg.eg_y, egy);
  EXPECT_DOUBLE_EQ(eg.eg, std::ceil(raw));
}

TEST(TrainErrorGuarantee, EmptyWorkloadThrows) {
  const GridLayout g = unit_cell_grid();
  const LearnedModel model = fit_model(g, ModelKind::kBilinear);
  EXPECT_THROW(train_error_guarantee(model, g, {}), std::invalid_argument);
}

TEST(GetRealCellId, PredictedLocationDecomposition) {
  // pid=17 on n=5: l_px=2, l_py=3; with a wide-enough window the search
  // lands on the true cell.
  const GridLayout g = hand_grid_5x4();
  const Point p{2.5, 3.5, 0};  // true cell (2,3) = 17
  EXPECT_EQ(get_real_cell_id(p, g, 17, ErrorGuarantee{0, 0, 0}), 17u);
}

TEST(GetRealCellId, HandTracedWindowSearch) {
  const GridLayout g = hand_grid_5x4();
  const Point p{1.5, 3.5, 0};  // true cell (1,3) = 16
  EXPECT_EQ(get_real_cell_id(p, g, 17, ErrorGuarantee{0, 2, 1}), 16u);
}

TEST(GetRealCellId, ZeroWindowExactPrediction) {
  const GridLayout g = hand_grid_5x4();
  const Point p{0.5, 0.5, 0};
  EXPECT_EQ(get_real_cell_id(p, g, 0, ErrorGuarantee{0, 0, 0}), 0u);
}

TEST(GetRealCellId, WideningRecoversFromBadPrediction) {
  const GridLayout g = hand_grid_5x4();
  // Prediction points at the far corner; the zero window must widen out.
  const Point p{0.5, 0.5, 0};
  EXPECT_EQ(get_real_cell_id(p, g, 19, ErrorGuarantee{0, 0, 0}), 0u);
  const Point q{4.5, 3.5, 0};
  EXPECT_EQ(get_real_cell_id(q, g, 0, ErrorGuarantee{0, 0, 0}), 19u);
}

TEST(GetRealCellId, RefinementEqualsGroundTruthForAllModels) {
  const Dataset d = generate_synthetic(20000, Distribution::kGaussianClusters, 14);
  const GridLayout g = build_grid(d, 15, 11);
  Rng rng(8);
  for (ModelKind kind :
       {ModelKind::kBilinear, ModelKind::kShepard, ModelKind::kPiecewiseBicubic}) {
    const LearnedModel model = fit_model(g, kind);
    std::vector<Point> train;
    for (int i = 0; i < 300; ++i) {
      train.push_back(Point{rng.uniform(d.bounds.x_min, d.bounds.x_max),
                            rng.uniform(d.bounds.y_min, d.bounds.y_max), 0});
    }
    const ErrorGuarantee eg = train_error_guarantee(model, g, train);
    for (int i = 0; i < 2000; ++i) {
      const Point p{rng.uniform(d.bounds.x_min, d.bounds.x_max),
                    rng.uniform(d.bounds.y_min, d.bounds.y_max), 0};
      const std::size_t rid =
          get_real_cell_id(p, g, model.predict_cell_id(p), eg);
      EXPECT_EQ(rid, cell_id_of(g, p)) << to_string(kind);
    }
  }
}

TEST(ModelKindNames, RoundTrip) {
  for (ModelKind kind : {ModelKind::kBilinear, ModelKind::kBicubic,
                         ModelKind::kPiecewiseBicubic, ModelKind::kShepard,
                         ModelKind::kRbf}) {
    EXPECT_EQ(parse_model_kind(to_string(kind)), kind);
  }
  EXPECT_THROW(parse_model_kind("quadratic"), std::invalid_argument);
}

}  // namespace
}  // namespace sprig
