#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sprig/core.hpp"
#include "sprig/grid.hpp"

namespace sprig {

enum class ModelKind {
  kBilinear,
  kBicubic,
  kPiecewiseBicubic,
  kShepard,
  kRbf,
};

ModelKind parse_model_kind(const std::string& name);
std::string to_string(ModelKind kind);

struct ModelOptions {
  double shepard_power = 2.0;
  // 0 means auto: mean knot spacing averaged over both dimensions.
  double rbf_width = 0.0;
  std::size_t rbf_mem_budget = std::size_t{1} << 30;
};

// A fitted interpolation surface over the (n+1) x (m+1) boundary knots with
// knot values j*n+i. Immutable after fitting; predict is pure.
class LearnedModel {
 public:
  ModelKind kind() const { return kind_; }
  std::size_t cols() const { return knots_x_.size() - 1; }
  std::size_t rows() const { return knots_y_.size() - 1; }
  const std::vector<double>& knots_x() const { return knots_x_; }
  const std::vector<double>& knots_y() const { return knots_y_; }

  double knot_value(std::size_t i, std::size_t j) const {
    return static_cast<double>(j * cols() + i);
  }

  // F_in(p.x, p.y) with p clamped to the knot bounds.
  double predict(const Point& p) const;

  // floor(predict) clamped to [0, n*m-1].
  std::size_t predict_cell_id(const Point& p) const;

  double shepard_power() const { return shepard_power_; }
  double rbf_width() const { return rbf_width_; }
  double rbf_residual() const { return rbf_residual_; }

  // Bytes of kind-specific coefficients beyond the shared boundaries.
  std::size_t coefficient_bytes() const;

 private:
  friend LearnedModel fit_model(const GridLayout&, ModelKind, const ModelOptions&);

  double predict_clamped(double x, double y) const;

  ModelKind kind_ = ModelKind::kBilinear;
  std::vector<double> knots_x_;
  std::vector<double> knots_y_;
  double shepard_power_ = 2.0;
  // bicubic: second derivatives of each knot row's spline, row-major (m+1) x (n+1).
  std::vector<double> row_d2_;
  // rbf
  std::vector<double> rbf_coeffs_;
  double rbf_width_ = 0.0;
  double rbf_residual_ = 0.0;
};

// Fits the requested family over the grid's boundary knots. RBF fitting
// throws ResourceError when the dense system would exceed
// options.rbf_mem_budget or cannot be solved to finite coefficients.
LearnedModel fit_model(const GridLayout& grid, ModelKind kind,
                       const ModelOptions& options = {});

struct ErrorGuarantee {
  // ceil(max |F_in(q) - f(q)|) over the training workload.
  double eg = 0.0;
  // Max projected column/row index deviations.
  std::size_t eg_x = 0;
  std::size_t eg_y = 0;
};

ErrorGuarantee train_error_guarantee(const LearnedModel& model,
                                     const GridLayout& grid,
                                     std::span<const Point> workload);

// Same training loop over an arbitrary predictor (used by tests).
ErrorGuarantee train_error_guarantee(
    const std::function<double(const Point&)>& predictor,
    const GridLayout& grid, std::span<const Point> workload);

// Alg. 1: bounded binary searches around the predicted location. When the key
// falls outside the trained window the window doubles until found, so the
// result always equals cell_id_of.
std::size_t get_real_cell_id(const Point& p, const GridLayout& grid,
                             std::size_t pid, const ErrorGuarantee& eg);

}  // namespace sprig
