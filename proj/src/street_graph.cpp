#include "bridgegraph/street_graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <queue>
#include <sstream>
#include <stdexcept>

#include "bridgegraph/util.hpp"

namespace bridgegraph {
namespace {

std::uint64_t pair_key(int u, int v) {
  if (u > v) std::swap(u, v);
  return (std::uint64_t(std::uint32_t(u)) << 32) | std::uint64_t(std::uint32_t(v));
}

struct PQEntry {
  double dist;
  int node;
  bool operator>(const PQEntry& o) const {
    if (dist != o.dist) return dist > o.dist;
    return node > o.node;
  }
};

using MinHeap = std::priority_queue<PQEntry, std::vector<PQEntry>, std::greater<PQEntry>>;

}  // namespace

int StreetGraph::add_node(PlanarCoord xy, std::int64_t osm_node_id) {
  const int idx = int(xy_.size());
  xy_.push_back(xy);
  osm_ids_.push_back(osm_node_id);
  on_primary_.push_back(0);
  adj_.emplace_back();
  if (osm_node_id >= 0) osm_to_idx_.emplace(osm_node_id, idx);
  return idx;
}

int StreetGraph::find_node(std::int64_t osm_node_id) const {
  auto it = osm_to_idx_.find(osm_node_id);
  return it == osm_to_idx_.end() ? -1 : it->second;
}

int StreetGraph::add_edge(int u, int v, double length_m, std::int64_t way_id) {
  if (u == v) return -1;
  if (!(length_m > 0.0)) return -1;
  const std::uint64_t key = pair_key(u, v);
  auto it = edge_slot_.find(key);
  if (it != edge_slot_.end()) {
    // Parallel edge: keep the shorter length, original provenance wins ties.
    StreetEdge& e = edges_[std::size_t(it->second)];
    if (length_m < e.length_m) {
      e.length_m = length_m;
      e.way_id = way_id;
    }
    return -1;
  }
  const int idx = int(edges_.size());
  edges_.push_back({u, v, length_m, way_id});
  adj_[std::size_t(u)].emplace_back(v, idx);
  adj_[std::size_t(v)].emplace_back(u, idx);
  edge_slot_.emplace(key, idx);
  return idx;
}

std::vector<int> StreetGraph::highway_nodes() const {
  std::vector<int> out;
  for (int v = 0; v < node_count(); ++v)
    if (on_primary_[std::size_t(v)]) out.push_back(v);
  return out;
}

StreetGraph build_street_graph(const std::vector<RawOsmElement>& street_ways,
                               const TransverseMercator& projection,
                               StreetBuildStats* stats) {
  StreetGraph g;
  // Coordinate-keyed fallback ids for ways that arrived without node refs.
  std::unordered_map<std::uint64_t, int> by_coord;

  auto node_for = [&](const GeoCoord& geo, std::int64_t osm_node_id) -> int {
    if (osm_node_id >= 0) {
      int existing = g.find_node(osm_node_id);
      if (existing >= 0) return existing;
      return g.add_node(projection.project(geo), osm_node_id);
    }
    // Hash the exact coordinate bits; identical vertices collapse.
    std::uint64_t latbits, lonbits;
    static_assert(sizeof(double) == sizeof(std::uint64_t));
    std::memcpy(&latbits, &geo.lat, 8);
    std::memcpy(&lonbits, &geo.lon, 8);
    const std::uint64_t key = latbits * 1000003u ^ lonbits;
    auto it = by_coord.find(key);
    if (it != by_coord.end()) return it->second;
    const int idx = g.add_node(projection.project(geo), -1);
    by_coord.emplace(key, idx);
    return idx;
  };

  for (const auto& way : street_ways) {
    if (way.kind != OsmKind::Way) continue;
    if (way.geometry.size() < 2) {
      if (stats) stats->degenerate_ways++;
      continue;
    }
    const bool has_refs = way.node_refs.size() == way.geometry.size();

    std::vector<int> nodes;
    nodes.reserve(way.geometry.size());
    for (std::size_t i = 0; i < way.geometry.size(); ++i) {
      nodes.push_back(node_for(way.geometry[i], has_refs ? way.node_refs[i] : -1));
    }

    bool any_edge = false;
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
      const int u = nodes[i], v = nodes[i + 1];
      const double len = planar_distance(g.node_xy(u), g.node_xy(v));
      if (u == v || !(len > 0.0)) {
        if (stats) stats->zero_length_segments++;
        continue;
      }
      g.add_edge(u, v, len, way.osm_id);
      any_edge = true;
    }
    if (!any_edge && stats) stats->degenerate_ways++;

    const auto highway = way.tags.find("highway");
    if (highway != way.tags.end() &&
        (highway->second == "primary" || highway->second == "trunk")) {
      for (int v : nodes) g.mark_highway_node(v);
    }
  }
  return g;
}

std::vector<double> shortest_dists(const StreetGraph& g, int source,
                                   const std::vector<int>& targets,
                                   const std::vector<char>* blocked_edge) {
  std::vector<double> out(targets.size(), kInf);
  if (source < 0 || source >= g.node_count()) return out;

  std::vector<char> is_target(std::size_t(g.node_count()), 0);
  int remaining = 0;
  for (int t : targets) {
    if (t >= 0 && t < g.node_count() && !is_target[std::size_t(t)]) {
      is_target[std::size_t(t)] = 1;
      remaining++;
    }
  }

  std::vector<double> dist(std::size_t(g.node_count()), kInf);
  std::vector<char> settled(std::size_t(g.node_count()), 0);
  MinHeap heap;
  dist[std::size_t(source)] = 0.0;
  heap.push({0.0, source});

  while (!heap.empty() && remaining > 0) {
    const PQEntry top = heap.top();
    heap.pop();
    if (settled[std::size_t(top.node)]) continue;
    settled[std::size_t(top.node)] = 1;
    if (is_target[std::size_t(top.node)]) remaining--;

    for (const auto& [w, eidx] : g.neighbors(top.node)) {
      if (blocked_edge && (*blocked_edge)[std::size_t(eidx)]) continue;
      const double nd = top.dist + g.edge(eidx).length_m;
      if (nd < dist[std::size_t(w)]) {
        dist[std::size_t(w)] = nd;
        heap.push({nd, w});
      }
    }
  }

  for (std::size_t i = 0; i < targets.size(); ++i) {
    const int t = targets[i];
    if (t >= 0 && t < g.node_count()) out[i] = dist[std::size_t(t)];
  }
  return out;
}

std::vector<int> connected_components(const StreetGraph& g,
                                      const std::vector<char>* blocked_edge) {
  std::vector<int> comp(std::size_t(g.node_count()), -1);
  int next = 0;
  std::vector<int> stack;
  for (int start = 0; start < g.node_count(); ++start) {
    if (comp[std::size_t(start)] >= 0) continue;
    const int id = next++;
    comp[std::size_t(start)] = id;
    stack.assign(1, start);
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (const auto& [w, eidx] : g.neighbors(v)) {
        if (blocked_edge && (*blocked_edge)[std::size_t(eidx)]) continue;
        if (comp[std::size_t(w)] < 0) {
          comp[std::size_t(w)] = id;
          stack.push_back(w);
        }
      }
    }
  }
  return comp;
}

std::vector<double> betweenness_centrality(const StreetGraph& g, int sample_sources,
                                           std::uint64_t seed) {
  const int n = g.node_count();
  std::vector<double> centrality(std::size_t(n), 0.0);
  if (n < 3) return centrality;

  std::vector<int> sources;
  if (sample_sources >= n) {
    sources.resize(std::size_t(n));
    for (int i = 0; i < n; ++i) sources[std::size_t(i)] = i;
  } else {
    Rng rng(seed);
    for (std::size_t s : rng.sample_indices(std::size_t(n), std::size_t(sample_sources)))
      sources.push_back(int(s));
  }

  const std::size_t nn = std::size_t(n);
  std::vector<double> dist(nn);
  std::vector<double> sigma(nn);
  std::vector<double> delta(nn);
  std::vector<char> settled(nn);
  std::vector<std::vector<int>> preds(nn);
  std::vector<int> order;
  order.reserve(nn);

  for (int s : sources) {
    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(sigma.begin(), sigma.end(), 0.0);
    std::fill(delta.begin(), delta.end(), 0.0);
    std::fill(settled.begin(), settled.end(), 0);
    for (auto& p : preds) p.clear();
    order.clear();

    dist[std::size_t(s)] = 0.0;
    sigma[std::size_t(s)] = 1.0;
    MinHeap heap;
    heap.push({0.0, s});
    while (!heap.empty()) {
      const PQEntry top = heap.top();
      heap.pop();
      if (settled[std::size_t(top.node)]) continue;
      settled[std::size_t(top.node)] = 1;
      order.push_back(top.node);
      for (const auto& [w, eidx] : g.neighbors(top.node)) {
        const double nd = top.dist + g.edge(eidx).length_m;
        if (nd < dist[std::size_t(w)]) {
          dist[std::size_t(w)] = nd;
          sigma[std::size_t(w)] = sigma[std::size_t(top.node)];
          preds[std::size_t(w)].assign(1, top.node);
          heap.push({nd, w});
        } else if (nd == dist[std::size_t(w)] && !settled[std::size_t(w)]) {
          sigma[std::size_t(w)] += sigma[std::size_t(top.node)];
          preds[std::size_t(w)].push_back(top.node);
        }
      }
    }

    for (std::size_t i = order.size(); i-- > 0;) {
      const int w = order[i];
      for (int v : preds[std::size_t(w)]) {
        delta[std::size_t(v)] +=
            sigma[std::size_t(v)] / sigma[std::size_t(w)] * (1.0 + delta[std::size_t(w)]);
      }
      if (w != s) centrality[std::size_t(w)] += delta[std::size_t(w)];
    }
  }

  // Each unordered pair is seen from both endpoints under full accumulation,
  // so halve, rescale for sampling, and normalize by the pair count.
  const double scale = double(n) / double(sources.size());
  const double pairs = double(n - 1) * double(n - 2) / 2.0;
  for (double& c : centrality) c = c * scale * 0.5 / pairs;
  return centrality;
}

void write_street_graph(const StreetGraph& g, const std::string& nodes_path,
                        const std::string& edges_path) {
  std::ostringstream nodes;
  for (int v = 0; v < g.node_count(); ++v) {
    nodes << g.node_osm_id(v) << ' ' << fmt_g17(g.node_xy(v).x) << ' '
          << fmt_g17(g.node_xy(v).y) << '\n';
  }
  atomic_write_file(nodes_path, nodes.str());

  std::ostringstream edges;
  for (const auto& e : g.edges()) {
    edges << e.u << ' ' << e.v << ' ' << fmt_g17(e.length_m) << ' ' << e.way_id << '\n';
  }
  atomic_write_file(edges_path, edges.str());
}

StreetGraph read_street_graph(const std::string& nodes_path, const std::string& edges_path) {
  auto nodes_body = read_file(nodes_path);
  auto edges_body = read_file(edges_path);
  if (!nodes_body) throw std::runtime_error("missing node table: " + nodes_path);
  if (!edges_body) throw std::runtime_error("missing edge list: " + edges_path);

  StreetGraph g;
  {
    std::istringstream in(*nodes_body);
    std::int64_t id;
    double x, y;
    while (in >> id >> x >> y) g.add_node({x, y}, id);
  }
  {
    std::istringstream in(*edges_body);
    int u, v;
    double len;
    std::int64_t way;
    while (in >> u >> v >> len >> way) {
      if (u < 0 || v < 0 || u >= g.node_count() || v >= g.node_count())
        throw std::runtime_error("edge references unknown node in " + edges_path);
      g.add_edge(u, v, len, way);
    }
  }
  return g;
}

}  // namespace bridgegraph
