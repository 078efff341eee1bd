#pragma once

#include <utility>
#include <vector>

#include "bridgegraph/geo.hpp"

namespace bridgegraph {

// Static 2-d kd-tree over planar points. Exact queries only: results agree
// with a brute-force scan including tie order (equal distances break toward
// the smaller point index).
class SpatialIndex {
 public:
  struct Node {
    int left = -1;   // child node ids; -1 on leaves
    int right = -1;
    int dim = 0;     // split dimension (0 = x, 1 = y)
    double split = 0.0;
    int begin = 0;   // leaf: range into ordering()
    int end = 0;
  };

  SpatialIndex() = default;
  explicit SpatialIndex(std::vector<PlanarCoord> points, int leaf_capacity = 16);

  std::size_t size() const { return pts_.size(); }
  const PlanarCoord& point(int i) const { return pts_[std::size_t(i)]; }

  // k nearest points as (index, distance), distance ascending. k <= 0 yields
  // an empty result; k >= size() yields every point.
  std::vector<std::pair<int, double>> knn(PlanarCoord query, int k) const;

  // All point indices with distance(query, p) <= radius, ascending index.
  // radius 0 matches exactly coincident points.
  std::vector<int> within(PlanarCoord query, double radius) const;

  // Structure accessors for determinism checks.
  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<int>& ordering() const { return order_; }

 private:
  std::vector<PlanarCoord> pts_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
  int leaf_capacity_ = 16;

  int build(int begin, int end, int depth);

  struct KnnState;
  void knn_walk(int node, PlanarCoord q, int k, KnnState& st) const;
  void within_walk(int node, PlanarCoord q, double r2, std::vector<int>& out) const;
};

}  // namespace bridgegraph
