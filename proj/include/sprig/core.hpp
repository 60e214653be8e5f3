#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sprig {

struct Point {
  double x = 0.0;
  double y = 0.0;
  std::uint64_t id = 0;
};

struct Bounds {
  double x_min = 0.0;
  double x_max = 0.0;
  double y_min = 0.0;
  double y_max = 0.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  bool contains(double x, double y) const {
    return x >= x_min && x <= x_max && y >= y_min && y <= y_max;
  }
};

// Immutable after construction; safe for concurrent reads.
struct Dataset {
  std::vector<Point> points;
  Bounds bounds;

  std::size_t size() const { return points.size(); }

  // Computes exact bounds; throws on empty input or non-finite coordinates.
  static Dataset from_points(std::vector<Point> pts);
};

// Axis-aligned query window, closed on all four edges.
struct RangeQuery {
  Point q_b;  // bottom-left
  Point q_t;  // top-right

  bool contains(const Point& p) const {
    return p.x >= q_b.x && p.x <= q_t.x && p.y >= q_b.y && p.y <= q_t.y;
  }
  bool valid() const { return q_b.x <= q_t.x && q_b.y <= q_t.y; }
};

struct KnnQuery {
  Point q_k;
  std::size_t k = 1;
};

inline double distance(const Point& a, const Point& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

struct LoadStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
};

// One point per line, "x<sep>y" with <sep> a comma or whitespace; '#' starts a
// comment line. Malformed or non-finite lines are counted in stats->rejected
// and skipped. Ids are assigned 0..N-1 in file order.
Dataset load_points(const std::string& path,
                    std::optional<std::size_t> limit = std::nullopt,
                    LoadStats* stats = nullptr);

// Writes "x,y" per line with enough digits to round-trip doubles exactly.
void write_points(const Dataset& dataset, const std::string& path);

enum class Distribution {
  kUniform,
  kGaussianClusters,
};

Distribution parse_distribution(const std::string& name);
std::string to_string(Distribution d);

struct SyntheticOptions {
  std::size_t clusters = 10;
  double cluster_stddev = 0.02;
};

// Deterministic for a fixed seed regardless of platform (hand-rolled
// uniform/normal transforms over a splitmix64 stream).
Dataset generate_synthetic(std::size_t n, Distribution distribution,
                           std::uint64_t seed,
                           const SyntheticOptions& options = {});

// Deterministic uniform/normal draws used by the generators and workloads.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}

  std::uint64_t next_u64();
  // Uniform in [0, 1).
  double next_unit();
  double uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }
  // Standard normal via Box-Muller.
  double normal();
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(next_u64() % n); }

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ChecksumMismatchError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace sprig
