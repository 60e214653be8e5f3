#include "sprig/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace sprig {

std::vector<Point> brute_range(const Dataset& dataset, const RangeQuery& q) {
  std::vector<Point> out;
  for (const Point& p : dataset.points) {
    if (q.contains(p)) out.push_back(p);
  }
  return out;
}

std::size_t brute_count_range(const Dataset& dataset, const RangeQuery& q) {
  std::size_t c = 0;
  for (const Point& p : dataset.points) {
    if (q.contains(p)) ++c;
  }
  return c;
}

KnnResult brute_knn(const Dataset& dataset, const KnnQuery& q) {
  if (q.k == 0 || q.k > dataset.size()) {
    throw std::invalid_argument("knn requires 1 <= k <= dataset size");
  }
  KnnResult all;
  all.reserve(dataset.size());
  for (const Point& p : dataset.points) {
    all.push_back(Neighbor{p, distance(p, q.q_k)});
  }
  auto less = [](const Neighbor& a, const Neighbor& b) {
    if (a.dist != b.dist) return a.dist < b.dist;
    return a.point.id < b.point.id;
  };
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(q.k),
                    all.end(), less);
  all.resize(q.k);
  return all;
}

namespace {

double coord(const Point& p, int dim) { return dim == 0 ? p.x : p.y; }

bool bbox_inside(const double bbox[4], const RangeQuery& q) {
  return bbox[0] >= q.q_b.x && bbox[1] <= q.q_t.x && bbox[2] >= q.q_b.y &&
         bbox[3] <= q.q_t.y;
}

bool bbox_disjoint(const double bbox[4], const RangeQuery& q) {
  return bbox[1] < q.q_b.x || bbox[0] > q.q_t.x || bbox[3] < q.q_b.y ||
         bbox[2] > q.q_t.y;
}

double bbox_min_dist(const double bbox[4], const Point& p) {
  const double dx = p.x < bbox[0] ? bbox[0] - p.x : (p.x > bbox[1] ? p.x - bbox[1] : 0.0);
  const double dy = p.y < bbox[2] ? bbox[2] - p.y : (p.y > bbox[3] ? p.y - bbox[3] : 0.0);
  return std::sqrt(dx * dx + dy * dy);
}

}  // namespace

KdTree::KdTree(const Dataset& dataset, std::size_t leaf_capacity)
    : points_(dataset.points),
      leaf_capacity_(std::max<std::size_t>(1, leaf_capacity)) {
  if (points_.empty()) {
    throw std::invalid_argument("kd-tree requires a non-empty dataset");
  }
  nodes_.reserve(2 * (points_.size() / leaf_capacity_ + 1));
  build(0, points_.size(), 0);
}

std::int32_t KdTree::build(std::size_t begin, std::size_t end, int depth) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.emplace_back();
  {
    Node& node = nodes_.back();
    node.begin = static_cast<std::uint32_t>(begin);
    node.end = static_cast<std::uint32_t>(end);
    node.bbox[0] = node.bbox[2] = std::numeric_limits<double>::infinity();
    node.bbox[1] = node.bbox[3] = -std::numeric_limits<double>::infinity();
    for (std::size_t i = begin; i < end; ++i) {
      node.bbox[0] = std::min(node.bbox[0], points_[i].x);
      node.bbox[1] = std::max(node.bbox[1], points_[i].x);
      node.bbox[2] = std::min(node.bbox[2], points_[i].y);
      node.bbox[3] = std::max(node.bbox[3], points_[i].y);
    }
    node.dim = static_cast<std::uint8_t>(depth % 2);
  }
  if (end - begin <= leaf_capacity_) {
    return id;
  }
  const int dim = depth % 2;
  const std::size_t mid = begin + (end - begin) / 2;
  std::nth_element(points_.begin() + static_cast<std::ptrdiff_t>(begin),
                   points_.begin() + static_cast<std::ptrdiff_t>(mid),
                   points_.begin() + static_cast<std::ptrdiff_t>(end),
                   [dim](const Point& a, const Point& b) {
                     const double ca = coord(a, dim), cb = coord(b, dim);
                     if (ca != cb) return ca < cb;
                     return a.id < b.id;
                   });
  const double split = coord(points_[mid], dim);
  const std::int32_t left = build(begin, mid, depth + 1);
  const std::int32_t right = build(mid, end, depth + 1);
  Node& node = nodes_[static_cast<std::size_t>(id)];
  node.split = split;
  node.left = left;
  node.right = right;
  return id;
}

void KdTree::range_collect(std::int32_t id, const RangeQuery& q,
                           std::vector<Point>& out) const {
  const Node& node = nodes_[static_cast<std::size_t>(id)];
  if (bbox_disjoint(node.bbox, q)) return;
  if (bbox_inside(node.bbox, q)) {
    out.insert(out.end(), points_.begin() + node.begin, points_.begin() + node.end);
    return;
  }
  if (node.leaf()) {
    for (std::size_t i = node.begin; i < node.end; ++i) {
      if (q.contains(points_[i])) out.push_back(points_[i]);
    }
    return;
  }
  range_collect(node.left, q, out);
  range_collect(node.right, q, out);
}

std::vector<Point> KdTree::range(const RangeQuery& q) const {
  std::vector<Point> out;
  range_collect(0, q, out);
  return out;
}

std::size_t KdTree::range_count(std::int32_t id, const RangeQuery& q) const {
  const Node& node = nodes_[static_cast<std::size_t>(id)];
  if (bbox_disjoint(node.bbox, q)) return 0;
  if (bbox_inside(node.bbox, q)) return node.end - node.begin;
  if (node.leaf()) {
    std::size_t c = 0;
    for (std::size_t i = node.begin; i < node.end; ++i) {
      if (q.contains(points_[i])) ++c;
    }
    return c;
  }
  return range_count(node.left, q) + range_count(node.right, q);
}

std::size_t KdTree::count_range(const RangeQuery& q) const {
  return range_count(0, q);
}

KnnResult KdTree::knn(const KnnQuery& q) const {
  if (q.k == 0 || q.k > points_.size()) {
    throw std::invalid_argument("knn requires 1 <= k <= dataset size");
  }
  auto less = [](const Neighbor& a, const Neighbor& b) {
    if (a.dist != b.dist) return a.dist < b.dist;
    return a.point.id < b.point.id;
  };
  std::vector<Neighbor> heap;
  heap.reserve(q.k);
  auto offer = [&](const Point& p) {
    const Neighbor cand{p, distance(p, q.q_k)};
    if (heap.size() < q.k) {
      heap.push_back(cand);
      std::push_heap(heap.begin(), heap.end(), less);
    } else if (less(cand, heap.front())) {
      std::pop_heap(heap.begin(), heap.end(), less);
      heap.back() = cand;
      std::push_heap(heap.begin(), heap.end(), less);
    }
  };

  // Best-first descent over nodes keyed by min distance to the bounding box.
  using Entry = std::pair<double, std::int32_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> frontier;
  frontier.emplace(bbox_min_dist(nodes_[0].bbox, q.q_k), 0);
  while (!frontier.empty()) {
    const auto [dist, id] = frontier.top();
    frontier.pop();
    if (heap.size() == q.k && dist > heap.front().dist) break;
    const Node& node = nodes_[static_cast<std::size_t>(id)];
    if (node.leaf()) {
      for (std::size_t i = node.begin; i < node.end; ++i) offer(points_[i]);
      continue;
    }
    frontier.emplace(bbox_min_dist(nodes_[static_cast<std::size_t>(node.left)].bbox, q.q_k),
                     node.left);
    frontier.emplace(bbox_min_dist(nodes_[static_cast<std::size_t>(node.right)].bbox, q.q_k),
                     node.right);
  }
  std::sort(heap.begin(), heap.end(), less);
  return heap;
}

std::size_t KdTree::node_byte_size() const { return sizeof(Node); }

std::size_t KdTree::storage_bytes() const {
  return nodes_.size() * sizeof(Node);
}

}  // namespace sprig
