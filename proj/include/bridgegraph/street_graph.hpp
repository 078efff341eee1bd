#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "bridgegraph/geo.hpp"
#include "bridgegraph/osm.hpp"

namespace bridgegraph {

struct StreetEdge {
  int u = -1;
  int v = -1;
  double length_m = 0.0;
  std::int64_t way_id = -1;  // provenance: OSM way the segment came from
};

// Undirected weighted street network with dense node ids. Parallel edges
// collapse to the shortest representative; self loops are dropped.
class StreetGraph {
 public:
  int add_node(PlanarCoord xy, std::int64_t osm_node_id = -1);
  // Returns the edge index, or -1 when the edge was rejected (self loop /
  // non-positive length) or collapsed into an existing shorter parallel.
  int add_edge(int u, int v, double length_m, std::int64_t way_id);

  int node_count() const { return int(xy_.size()); }
  int edge_count() const { return int(edges_.size()); }
  const std::vector<StreetEdge>& edges() const { return edges_; }
  const StreetEdge& edge(int e) const { return edges_[std::size_t(e)]; }
  PlanarCoord node_xy(int v) const { return xy_[std::size_t(v)]; }
  const std::vector<PlanarCoord>& node_coords() const { return xy_; }
  std::int64_t node_osm_id(int v) const { return osm_ids_[std::size_t(v)]; }
  int find_node(std::int64_t osm_node_id) const;

  // (neighbor, edge index) pairs.
  const std::vector<std::pair<int, int>>& neighbors(int v) const {
    return adj_[std::size_t(v)];
  }

  void mark_highway_node(int v) { on_primary_[std::size_t(v)] = 1; }
  bool is_highway_node(int v) const { return on_primary_[std::size_t(v)] != 0; }
  std::vector<int> highway_nodes() const;

 private:
  std::vector<PlanarCoord> xy_;
  std::vector<std::int64_t> osm_ids_;
  std::vector<char> on_primary_;
  std::vector<StreetEdge> edges_;
  std::vector<std::vector<std::pair<int, int>>> adj_;
  std::unordered_map<std::int64_t, int> osm_to_idx_;
  std::unordered_map<std::uint64_t, int> edge_slot_;  // pair key -> edge index
};

struct StreetBuildStats {
  int degenerate_ways = 0;   // fewer than two usable vertices
  int zero_length_segments = 0;
};

// Consecutive way vertices become edges with projected segment lengths.
// Nodes are deduplicated by OSM node id (falling back to exact coordinates
// when ids are absent), so shared vertices become junctions. Ways tagged
// highway=primary or highway=trunk mark their nodes as arterial targets for
// the supply indicator.
StreetGraph build_street_graph(const std::vector<RawOsmElement>& street_ways,
                               const TransverseMercator& projection,
                               StreetBuildStats* stats = nullptr);

// Dijkstra from `source` with early termination once every target is
// settled. Returns distances aligned with `targets` (infinity when
// unreachable). `blocked_edge`, when given, is an edge-indexed bitmap of
// closed edges to skip.
std::vector<double> shortest_dists(const StreetGraph& g, int source,
                                   const std::vector<int>& targets,
                                   const std::vector<char>* blocked_edge = nullptr);

// Component id per node; ids are assigned in order of each component's
// smallest node index, starting at 0.
std::vector<int> connected_components(const StreetGraph& g,
                                      const std::vector<char>* blocked_edge = nullptr);

// Normalized betweenness centrality: the (estimated) fraction of unordered
// shortest-path pairs passing through each node. Runs weighted Brandes from
// min(sample_sources, n) sources; when sampling, per-source sums are
// rescaled by n / sample_sources. Normalizer is (n-1)(n-2)/2 pairs.
std::vector<double> betweenness_centrality(const StreetGraph& g, int sample_sources,
                                           std::uint64_t seed);

// Text dump/load for fixture authoring: nodes as "id x y", edges as
// "u v length_m way_id".
void write_street_graph(const StreetGraph& g, const std::string& nodes_path,
                        const std::string& edges_path);
StreetGraph read_street_graph(const std::string& nodes_path, const std::string& edges_path);

}  // namespace bridgegraph
