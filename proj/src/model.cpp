#include "sprig/model.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cassert>
#include <cmath>

namespace sprig {

ModelKind parse_model_kind(const std::string& name) {
  if (name == "bilinear") return ModelKind::kBilinear;
  if (name == "bicubic") return ModelKind::kBicubic;
  if (name == "pbicubic") return ModelKind::kPiecewiseBicubic;
  if (name == "shepard") return ModelKind::kShepard;
  if (name == "rbf") return ModelKind::kRbf;
  throw std::invalid_argument("unknown model kind: " + name);
}

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kBilinear:
      return "bilinear";
    case ModelKind::kBicubic:
      return "bicubic";
    case ModelKind::kPiecewiseBicubic:
      return "pbicubic";
    case ModelKind::kShepard:
      return "shepard";
    case ModelKind::kRbf:
      return "rbf";
  }
  return "?";
}

namespace {

double clamp(double v, double lo, double hi) {
  return v < lo ? lo : (v > hi ? hi : v);
}

// Interval index for interpolation: i with knots[i] <= v < knots[i+1],
// the top knot mapping to the last interval.
std::size_t interval_of(const std::vector<double>& knots, double v) {
  if (v <= knots.front()) return 0;
  if (v >= knots.back()) return knots.size() - 2;
  const auto it = std::upper_bound(knots.begin(), knots.end(), v);
  return static_cast<std::size_t>(it - knots.begin()) - 1;
}

// Natural cubic spline second derivatives through (xs[i], ys(i)).
template <typename F>
void spline_second_derivs(const std::vector<double>& xs, F&& ys,
                          std::vector<double>& d2, std::vector<double>& u) {
  const std::size_t k = xs.size();
  d2.assign(k, 0.0);
  if (k < 3) return;
  u.assign(k, 0.0);
  for (std::size_t i = 1; i + 1 < k; ++i) {
    const double sig = (xs[i] - xs[i - 1]) / (xs[i + 1] - xs[i - 1]);
    const double p = sig * d2[i - 1] + 2.0;
    d2[i] = (sig - 1.0) / p;
    const double dy1 = (ys(i + 1) - ys(i)) / (xs[i + 1] - xs[i]);
    const double dy0 = (ys(i) - ys(i - 1)) / (xs[i] - xs[i - 1]);
    u[i] = (6.0 * (dy1 - dy0) / (xs[i + 1] - xs[i - 1]) - sig * u[i - 1]) / p;
  }
  d2[k - 1] = 0.0;
  for (std::size_t i = k - 1; i-- > 0;) {
    d2[i] = d2[i] * d2[i + 1] + u[i];
  }
}

template <typename F>
double spline_eval(const std::vector<double>& xs, F&& ys, const double* d2,
                   double x) {
  const std::size_t i = interval_of(xs, x);
  const double h = xs[i + 1] - xs[i];
  const double a = (xs[i + 1] - x) / h;
  const double b = (x - xs[i]) / h;
  return a * ys(i) + b * ys(i + 1) +
         ((a * a * a - a) * d2[i] + (b * b * b - b) * d2[i + 1]) * (h * h) / 6.0;
}

// Cubic Lagrange interpolation through the (up to) 4 knots around interval i;
// degrades gracefully when fewer knots exist.
template <typename F>
double local_cubic(const double* xs, std::size_t k, F&& ys, std::size_t i,
                   double x) {
  const std::size_t span = std::min<std::size_t>(4, k);
  std::size_t start = (i == 0) ? 0 : i - 1;
  if (start + span > k) start = k - span;
  double result = 0.0;
  for (std::size_t a = 0; a < span; ++a) {
    double term = ys(start + a);
    for (std::size_t b = 0; b < span; ++b) {
      if (a == b) continue;
      term *= (x - xs[start + b]) / (xs[start + a] - xs[start + b]);
    }
    result += term;
  }
  return result;
}

}  // namespace

double LearnedModel::predict_clamped(double x, double y) const {
  const std::size_t n = cols();
  switch (kind_) {
    case ModelKind::kBilinear: {
      const std::size_t i = interval_of(knots_x_, x);
      const std::size_t j = interval_of(knots_y_, y);
      const double tx = (x - knots_x_[i]) / (knots_x_[i + 1] - knots_x_[i]);
      const double ty = (y - knots_y_[j]) / (knots_y_[j + 1] - knots_y_[j]);
      // Corner values are j*n+i plus 1 rightward and n upward, so the patch
      // reduces to base + tx + n*ty.
      return knot_value(i, j) + tx + static_cast<double>(n) * ty;
    }
    case ModelKind::kBicubic: {
      // Evaluate each knot row's x-spline at x, then spline the column.
      const std::size_t rows_k = knots_y_.size();
      const std::size_t cols_k = knots_x_.size();
      std::vector<double> g(rows_k);
      for (std::size_t j = 0; j < rows_k; ++j) {
        const double* d2_row = row_d2_.data() + j * cols_k;
        g[j] = spline_eval(
            knots_x_, [&](std::size_t i) { return knot_value(i, j); }, d2_row, x);
      }
      std::vector<double> d2col, scratch;
      auto gy = [&](std::size_t j) { return g[j]; };
      spline_second_derivs(knots_y_, gy, d2col, scratch);
      return spline_eval(knots_y_, gy, d2col.data(), y);
    }
    case ModelKind::kPiecewiseBicubic: {
      const std::size_t i = interval_of(knots_x_, x);
      const std::size_t j = interval_of(knots_y_, y);
      const std::size_t rows_k = knots_y_.size();
      const std::size_t span = std::min<std::size_t>(4, rows_k);
      std::size_t jstart = (j == 0) ? 0 : j - 1;
      if (jstart + span > rows_k) jstart = rows_k - span;
      double gy[4];
      for (std::size_t a = 0; a < span; ++a) {
        gy[a] = local_cubic(
            knots_x_.data(), knots_x_.size(),
            [&](std::size_t col) { return knot_value(col, jstart + a); }, i, x);
      }
      // All `span` rows participate, so the y pass is a plain Lagrange fit
      // over the sub-window.
      return local_cubic(
          knots_y_.data() + jstart, span, [&](std::size_t a) { return gy[a]; },
          0, y);
    }
    case ModelKind::kShepard: {
      double wsum = 0.0;
      double vsum = 0.0;
      for (std::size_t j = 0; j < knots_y_.size(); ++j) {
        for (std::size_t i = 0; i < knots_x_.size(); ++i) {
          const double dx = x - knots_x_[i];
          const double dy = y - knots_y_[j];
          const double d = std::sqrt(dx * dx + dy * dy);
          if (d == 0.0) return knot_value(i, j);
          const double w = 1.0 / std::pow(d, shepard_power_);
          wsum += w;
          vsum += w * knot_value(i, j);
        }
      }
      return vsum / wsum;
    }
    case ModelKind::kRbf: {
      const double inv_w = 1.0 / rbf_width_;
      double sum = 0.0;
      std::size_t k = 0;
      for (std::size_t j = 0; j < knots_y_.size(); ++j) {
        const double dy = (y - knots_y_[j]) * inv_w;
        const double dy2 = dy * dy;
        for (std::size_t i = 0; i < knots_x_.size(); ++i, ++k) {
          const double dx = (x - knots_x_[i]) * inv_w;
          sum += rbf_coeffs_[k] * std::exp(-(dx * dx + dy2));
        }
      }
      return sum;
    }
  }
  return 0.0;
}

double LearnedModel::predict(const Point& p) const {
  const double x = clamp(p.x, knots_x_.front(), knots_x_.back());
  const double y = clamp(p.y, knots_y_.front(), knots_y_.back());
  return predict_clamped(x, y);
}

std::size_t LearnedModel::predict_cell_id(const Point& p) const {
  const double v = std::floor(predict(p));
  const double top = static_cast<double>(cols() * rows() - 1);
  return static_cast<std::size_t>(clamp(v, 0.0, top));
}

std::size_t LearnedModel::coefficient_bytes() const {
  switch (kind_) {
    case ModelKind::kBilinear:
    case ModelKind::kPiecewiseBicubic:
      return 0;
    case ModelKind::kShepard:
      return sizeof(double);  // power
    case ModelKind::kBicubic:
      return row_d2_.size() * sizeof(double);
    case ModelKind::kRbf:
      return rbf_coeffs_.size() * sizeof(double) + sizeof(double);  // + width
  }
  return 0;
}

namespace {

struct RbfFit {
  std::vector<double> coeffs;
  double width = 0.0;
  double residual = 0.0;
};

RbfFit fit_rbf(const std::vector<double>& kx, const std::vector<double>& ky,
               std::size_t n_cols, const ModelOptions& options) {
  const std::size_t nk = kx.size() * ky.size();
  const std::size_t bytes = nk * nk * sizeof(double);
  if (bytes > options.rbf_mem_budget) {
    throw ResourceError("rbf kernel matrix (" + std::to_string(bytes) +
                        " bytes) exceeds memory budget (" +
                        std::to_string(options.rbf_mem_budget) + " bytes)");
  }

  double width = options.rbf_width;
  if (width <= 0.0) {
    width = ((kx.back() - kx.front()) / static_cast<double>(kx.size() - 1) +
             (ky.back() - ky.front()) / static_cast<double>(ky.size() - 1)) /
            2.0;
  }
  if (width <= 0.0) width = 1.0;

  std::vector<double> cx(nk), cy(nk);
  Eigen::VectorXd v(nk);
  std::size_t k = 0;
  for (std::size_t j = 0; j < ky.size(); ++j) {
    for (std::size_t i = 0; i < kx.size(); ++i, ++k) {
      cx[k] = kx[i];
      cy[k] = ky[j];
      v(static_cast<Eigen::Index>(k)) = static_cast<double>(j * n_cols + i);
    }
  }

  Eigen::MatrixXd a(nk, nk);
  const double inv_w = 1.0 / width;
  for (std::size_t r = 0; r < nk; ++r) {
    for (std::size_t c = r; c < nk; ++c) {
      const double dx = (cx[r] - cx[c]) * inv_w;
      const double dy = (cy[r] - cy[c]) * inv_w;
      const double e = std::exp(-(dx * dx + dy * dy));
      a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = e;
      a(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(r)) = e;
    }
  }

  Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
  Eigen::VectorXd coeffs = ldlt.solve(v);
  // Iterative refinement pushes the knot-value residual toward machine eps.
  double residual = 0.0;
  for (int step = 0; step < 4; ++step) {
    Eigen::VectorXd r = v - a * coeffs;
    residual = r.lpNorm<Eigen::Infinity>();
    if (residual <= 1e-10 * std::max(1.0, v.lpNorm<Eigen::Infinity>())) break;
    coeffs += ldlt.solve(r);
  }
  if (!coeffs.allFinite()) {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
    coeffs = lu.solve(v);
    Eigen::VectorXd r = v - a * coeffs;
    residual = r.lpNorm<Eigen::Infinity>();
    if (!coeffs.allFinite()) {
      throw ResourceError("rbf system is singular at this layout");
    }
  }

  RbfFit fit;
  fit.width = width;
  fit.residual = residual;
  fit.coeffs.assign(coeffs.data(), coeffs.data() + nk);
  return fit;
}

}  // namespace

LearnedModel fit_model(const GridLayout& grid, ModelKind kind,
                       const ModelOptions& options) {
  LearnedModel model;
  model.kind_ = kind;
  model.knots_x_ = grid.bx;
  model.knots_y_ = grid.by;
  model.shepard_power_ = options.shepard_power;

  if (kind == ModelKind::kBicubic) {
    const std::size_t cols_k = model.knots_x_.size();
    const std::size_t rows_k = model.knots_y_.size();
    model.row_d2_.resize(cols_k * rows_k);
    std::vector<double> d2, scratch;
    for (std::size_t j = 0; j < rows_k; ++j) {
      spline_second_derivs(
          model.knots_x_, [&](std::size_t i) { return model.knot_value(i, j); },
          d2, scratch);
      std::copy(d2.begin(), d2.end(),
                model.row_d2_.begin() + static_cast<std::ptrdiff_t>(j * cols_k));
    }
  } else if (kind == ModelKind::kRbf) {
    RbfFit fit = fit_rbf(model.knots_x_, model.knots_y_, model.cols(), options);
    model.rbf_coeffs_ = std::move(fit.coeffs);
    model.rbf_width_ = fit.width;
    model.rbf_residual_ = fit.residual;
  }
  return model;
}

ErrorGuarantee train_error_guarantee(
    const std::function<double(const Point&)>& predictor,
    const GridLayout& grid, std::span<const Point> workload) {
  if (workload.empty()) {
    throw std::invalid_argument("error-guarantee training needs a non-empty workload");
  }
  const std::size_t n = grid.cols();
  const std::size_t m = grid.rows();
  double raw = 0.0;
  std::size_t egx = 0, egy = 0;
  for (const Point& q : workload) {
    const double fp = predictor(q);
    const double top = static_cast<double>(n * m - 1);
    const auto pid =
        static_cast<std::size_t>(std::clamp(std::floor(fp), 0.0, top));
    const std::size_t lpx = pid % n;
    const std::size_t lpy = pid / n;
    const std::size_t rid = cell_id_of(grid, q);
    const std::size_t lrx = rid % n;
    const std::size_t lry = rid / n;
    egx = std::max(egx, lpx > lrx ? lpx - lrx : lrx - lpx);
    egy = std::max(egy, lpy > lry ? lpy - lry : lry - lpy);
    raw = std::max(raw, std::abs(fp - static_cast<double>(rid)));
  }
  return ErrorGuarantee{std::ceil(raw), egx, egy};
}

ErrorGuarantee train_error_guarantee(const LearnedModel& model,
                                     const GridLayout& grid,
                                     std::span<const Point> workload) {
  return train_error_guarantee(
      [&](const Point& q) { return model.predict(q); }, grid, workload);
}

namespace {

constexpr std::size_t kNotFound = static_cast<std::size_t>(-1);

// Interval search restricted to columns [lo, hi]; kNotFound when the key
// lies outside the window. The top edge closes only at the global max.
std::size_t window_interval(const std::vector<double>& b, double v,
                            std::size_t lo, std::size_t hi) {
  const std::size_t last = b.size() - 2;
  if (v < b[lo]) return kNotFound;
  if (v >= b[hi + 1]) {
    if (hi == last && v == b[hi + 1]) return last;
    return kNotFound;
  }
  const auto first = b.begin() + static_cast<std::ptrdiff_t>(lo);
  const auto end = b.begin() + static_cast<std::ptrdiff_t>(hi + 2);
  const auto it = std::upper_bound(first, end, v);
  return static_cast<std::size_t>(it - b.begin()) - 1;
}

std::size_t widening_search(const std::vector<double>& b, double v,
                            std::size_t center, std::size_t eg) {
  const std::size_t last = b.size() - 2;
  std::size_t radius = eg;
  for (;;) {
    const std::size_t lo = center >= radius ? center - radius : 0;
    const std::size_t hi = std::min(center + radius, last);
    const std::size_t found = window_interval(b, v, lo, hi);
    if (found != kNotFound) return found;
    if (lo == 0 && hi == last) return kNotFound;  // unreachable: v is clamped
    radius = radius == 0 ? 1 : radius * 2;
  }
}

}  // namespace

std::size_t get_real_cell_id(const Point& p, const GridLayout& grid,
                             std::size_t pid, const ErrorGuarantee& eg) {
  const std::size_t n = grid.cols();
  const double x = clamp(p.x, grid.bx.front(), grid.bx.back());
  const double y = clamp(p.y, grid.by.front(), grid.by.back());
  const std::size_t lpx = pid % n;
  const std::size_t lpy = pid / n;
  const std::size_t lrx = widening_search(grid.bx, x, lpx, eg.eg_x);
  const std::size_t lry = widening_search(grid.by, y, lpy, eg.eg_y);
  return lry * n + lrx;
}

}  // namespace sprig
