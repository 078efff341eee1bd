#include "bridgegraph/kdtree.hpp"

#include <algorithm>
#include <numeric>
#include <queue>

namespace bridgegraph {
namespace {

inline double coord(const PlanarCoord& p, int dim) { return dim == 0 ? p.x : p.y; }

struct Cand {
  double d2;
  int idx;
  // priority_queue keeps the worst candidate on top
  bool operator<(const Cand& o) const {
    if (d2 != o.d2) return d2 < o.d2;
    return idx < o.idx;
  }
};

}  // namespace

struct SpatialIndex::KnnState {
  std::priority_queue<Cand> heap;
  std::size_t k = 0;

  bool full() const { return heap.size() >= k; }
  double worst_d2() const { return heap.top().d2; }
  void offer(double d2, int idx) {
    if (heap.size() < k) {
      heap.push({d2, idx});
    } else {
      const Cand& top = heap.top();
      if (d2 < top.d2 || (d2 == top.d2 && idx < top.idx)) {
        heap.pop();
        heap.push({d2, idx});
      }
    }
  }
};

SpatialIndex::SpatialIndex(std::vector<PlanarCoord> points, int leaf_capacity)
    : pts_(std::move(points)), leaf_capacity_(std::max(1, leaf_capacity)) {
  order_.resize(pts_.size());
  std::iota(order_.begin(), order_.end(), 0);
  if (!pts_.empty()) build(0, int(pts_.size()), 0);
}

int SpatialIndex::build(int begin, int end, int depth) {
  const int id = int(nodes_.size());
  nodes_.push_back({});
  Node node;
  node.begin = begin;
  node.end = end;
  if (end - begin <= leaf_capacity_) {
    // Keep leaf contents in index order so traversal output is canonical.
    std::sort(order_.begin() + begin, order_.begin() + end);
    nodes_[std::size_t(id)] = node;
    return id;
  }
  const int dim = depth % 2;
  const int mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](int a, int b) {
                     const double ca = coord(pts_[std::size_t(a)], dim);
                     const double cb = coord(pts_[std::size_t(b)], dim);
                     if (ca != cb) return ca < cb;
                     return a < b;  // deterministic partition under ties
                   });
  node.dim = dim;
  node.split = coord(pts_[std::size_t(order_[std::size_t(mid)])], dim);
  node.left = build(begin, mid, depth + 1);
  node.right = build(mid, end, depth + 1);
  nodes_[std::size_t(id)] = node;
  return id;
}

void SpatialIndex::knn_walk(int node_id, PlanarCoord q, int k, KnnState& st) const {
  const Node& node = nodes_[std::size_t(node_id)];
  if (node.left < 0) {
    for (int i = node.begin; i < node.end; ++i) {
      const int idx = order_[std::size_t(i)];
      st.offer(planar_distance_sq(q, pts_[std::size_t(idx)]), idx);
    }
    return;
  }
  const double qd = coord(q, node.dim);
  const int near = qd <= node.split ? node.left : node.right;
  const int far = near == node.left ? node.right : node.left;
  knn_walk(near, q, k, st);
  const double gap = qd - node.split;
  const double gap2 = gap * gap;
  // Descend the far side unless it provably cannot improve the result; on an
  // exact tie it may still hold an equal-distance point with a smaller index.
  if (!st.full() || gap2 <= st.worst_d2()) knn_walk(far, q, k, st);
}

std::vector<std::pair<int, double>> SpatialIndex::knn(PlanarCoord query, int k) const {
  std::vector<std::pair<int, double>> out;
  if (k <= 0 || pts_.empty()) return out;
  KnnState st;
  st.k = std::size_t(std::min<std::size_t>(std::size_t(k), pts_.size()));
  knn_walk(0, query, k, st);
  out.resize(st.heap.size());
  for (std::size_t i = st.heap.size(); i-- > 0;) {
    const Cand c = st.heap.top();
    st.heap.pop();
    out[i] = {c.idx, std::sqrt(c.d2)};
  }
  return out;
}

void SpatialIndex::within_walk(int node_id, PlanarCoord q, double r2,
                               std::vector<int>& out) const {
  const Node& node = nodes_[std::size_t(node_id)];
  if (node.left < 0) {
    for (int i = node.begin; i < node.end; ++i) {
      const int idx = order_[std::size_t(i)];
      if (planar_distance_sq(q, pts_[std::size_t(idx)]) <= r2) out.push_back(idx);
    }
    return;
  }
  const double gap = coord(q, node.dim) - node.split;
  const double gap2 = gap * gap;
  if (gap <= 0.0 || gap2 <= r2) within_walk(node.left, q, r2, out);
  if (gap >= 0.0 || gap2 <= r2) within_walk(node.right, q, r2, out);
}

std::vector<int> SpatialIndex::within(PlanarCoord query, double radius) const {
  std::vector<int> out;
  if (pts_.empty() || radius < 0.0) return out;
  within_walk(0, query, radius * radius, out);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace bridgegraph
