#include "sprig/core.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <limits>

namespace sprig {

Dataset Dataset::from_points(std::vector<Point> pts) {
  if (pts.empty()) {
    throw std::invalid_argument("dataset must contain at least one point");
  }
  Bounds b{pts[0].x, pts[0].x, pts[0].y, pts[0].y};
  for (const Point& p : pts) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw std::invalid_argument("non-finite coordinate in dataset");
    }
    b.x_min = std::min(b.x_min, p.x);
    b.x_max = std::max(b.x_max, p.x);
    b.y_min = std::min(b.y_min, p.y);
    b.y_max = std::max(b.y_max, p.y);
  }
  return Dataset{std::move(pts), b};
}

namespace {

// Parses "a<sep>b" where <sep> is a comma or any run of spaces/tabs.
bool parse_line(const std::string& line, double* x, double* y) {
  const char* p = line.c_str();
  const char* end = p + line.size();
  auto skip_ws = [&] {
    while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
  };
  skip_ws();
  auto r1 = std::from_chars(p, end, *x);
  if (r1.ec != std::errc{}) return false;
  p = r1.ptr;
  skip_ws();
  if (p < end && *p == ',') {
    ++p;
    skip_ws();
  }
  auto r2 = std::from_chars(p, end, *y);
  if (r2.ec != std::errc{}) return false;
  p = r2.ptr;
  skip_ws();
  return p == end;
}

}  // namespace

Dataset load_points(const std::string& path, std::optional<std::size_t> limit,
                    LoadStats* stats) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open point file: " + path);
  }
  std::vector<Point> pts;
  LoadStats local;
  std::string line;
  while (std::getline(in, line)) {
    if (limit && pts.size() >= *limit) break;
    // Skip blank and comment lines without counting them as rejects.
    std::size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    double x = 0.0, y = 0.0;
    if (!parse_line(line, &x, &y) || !std::isfinite(x) || !std::isfinite(y)) {
      ++local.rejected;
      continue;
    }
    pts.push_back(Point{x, y, static_cast<std::uint64_t>(pts.size())});
    ++local.accepted;
  }
  if (stats) *stats = local;
  if (pts.empty()) {
    throw std::runtime_error("no valid points in file: " + path);
  }
  return Dataset::from_points(std::move(pts));
}

void write_points(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open file for writing: " + path);
  }
  char buf[80];
  for (const Point& p : dataset.points) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", p.x, p.y);
    out << buf;
  }
  if (!out) {
    throw std::runtime_error("write failed: " + path);
  }
}

Distribution parse_distribution(const std::string& name) {
  if (name == "uniform") return Distribution::kUniform;
  if (name == "gaussian-clusters") return Distribution::kGaussianClusters;
  throw std::invalid_argument("unknown distribution: " + name);
}

std::string to_string(Distribution d) {
  switch (d) {
    case Distribution::kUniform:
      return "uniform";
    case Distribution::kGaussianClusters:
      return "gaussian-clusters";
  }
  return "?";
}

std::uint64_t Rng::next_u64() {
  // splitmix64
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Rng::next_unit() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = next_unit();
  double u2 = next_unit();
  while (u1 <= 0.0) u1 = next_unit();
  const double mag = std::sqrt(-2.0 * std::log(u1));
  constexpr double kTwoPi = 6.283185307179586476925286766559;
  spare_ = mag * std::sin(kTwoPi * u2);
  have_spare_ = true;
  return mag * std::cos(kTwoPi * u2);
}

Dataset generate_synthetic(std::size_t n, Distribution distribution,
                           std::uint64_t seed, const SyntheticOptions& options) {
  if (n == 0) {
    throw std::invalid_argument("cannot generate an empty dataset");
  }
  Rng rng(seed);
  std::vector<Point> pts;
  pts.reserve(n);
  switch (distribution) {
    case Distribution::kUniform: {
      for (std::size_t i = 0; i < n; ++i) {
        pts.push_back(Point{rng.next_unit(), rng.next_unit(), i});
      }
      break;
    }
    case Distribution::kGaussianClusters: {
      const std::size_t k = std::max<std::size_t>(1, options.clusters);
      std::vector<Point> centers(k);
      for (auto& c : centers) {
        c.x = rng.uniform(0.1, 0.9);
        c.y = rng.uniform(0.1, 0.9);
      }
      for (std::size_t i = 0; i < n; ++i) {
        const Point& c = centers[rng.index(k)];
        pts.push_back(Point{c.x + options.cluster_stddev * rng.normal(),
                            c.y + options.cluster_stddev * rng.normal(), i});
      }
      break;
    }
  }
  return Dataset::from_points(std::move(pts));
}

}  // namespace sprig
