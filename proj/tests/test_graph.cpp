#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <numeric>
#include <set>

#include "bridgegraph/geo.hpp"
#include "bridgegraph/hetero.hpp"
#include "bridgegraph/street_graph.hpp"
#include "bridgegraph/util.hpp"

using namespace bridgegraph;

namespace {

// Reference shortest paths: Bellman-Ford over the same undirected edges.
std::vector<double> bellman_ford(const StreetGraph& g, int source,
                                 const std::vector<char>* blocked = nullptr) {
  std::vector<double> dist(std::size_t(g.node_count()), kInf);
  dist[std::size_t(source)] = 0.0;
  for (int pass = 0; pass < g.node_count(); ++pass) {
    bool changed = false;
    for (int e = 0; e < g.edge_count(); ++e) {
      if (blocked && (*blocked)[std::size_t(e)]) continue;
      const auto& ed = g.edge(e);
      if (dist[std::size_t(ed.u)] + ed.length_m < dist[std::size_t(ed.v)]) {
        dist[std::size_t(ed.v)] = dist[std::size_t(ed.u)] + ed.length_m;
        changed = true;
      }
      if (dist[std::size_t(ed.v)] + ed.length_m < dist[std::size_t(ed.u)]) {
        dist[std::size_t(ed.u)] = dist[std::size_t(ed.v)] + ed.length_m;
        changed = true;
      }
    }
    if (!changed) break;
  }
  return dist;
}

// Reference components: union-find.
struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(std::size_t(n)) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) { return parent[std::size_t(x)] == x ? x : parent[std::size_t(x)] = find(parent[std::size_t(x)]); }
  void unite(int a, int b) { parent[std::size_t(find(a))] = find(b); }
};

std::vector<int> oracle_components(const StreetGraph& g, const std::vector<char>* blocked) {
  UnionFind uf(g.node_count());
  for (int e = 0; e < g.edge_count(); ++e) {
    if (blocked && (*blocked)[std::size_t(e)]) continue;
    uf.unite(g.edge(e).u, g.edge(e).v);
  }
  // Renumber by smallest node index per component.
  std::vector<int> label(std::size_t(g.node_count()), -1);
  int next = 0;
  for (int v = 0; v < g.node_count(); ++v) {
    const int root = uf.find(v);
    if (label[std::size_t(root)] < 0) label[std::size_t(root)] = next++;
  }
  std::vector<int> out(std::size_t(g.node_count()));
  for (int v = 0; v < g.node_count(); ++v) out[std::size_t(v)] = label[std::size_t(uf.find(v))];
  return out;
}

StreetGraph random_graph(Rng& rng, int n, double edge_prob, double max_len = 100.0) {
  StreetGraph g;
  for (int i = 0; i < n; ++i)
    g.add_node({rng.uniform_range(0, 1000), rng.uniform_range(0, 1000)}, i);
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      if (rng.uniform() < edge_prob) {
        // Integer lengths provoke exact shortest-path ties.
        g.add_edge(u, v, double(1 + rng.uniform_index(std::size_t(max_len))), 1000 + u);
      }
    }
  }
  return g;
}

RawOsmElement street_way(std::int64_t id, std::vector<std::int64_t> refs,
                         std::vector<GeoCoord> geom,
                         std::map<std::string, std::string> tags = {{"highway", "residential"}}) {
  RawOsmElement e;
  e.osm_id = id;
  e.kind = OsmKind::Way;
  e.tags = std::move(tags);
  e.node_refs = std::move(refs);
  e.geometry = std::move(geom);
  return e;
}

}  // namespace

TEST_CASE("a three-vertex way becomes two edges with segment lengths") {
  TransverseMercator tm;
  // ~100 m of latitude per step; the local meridian arc varies with
  // latitude, so only hold the length to half a percent here. Projection
  // accuracy itself is pinned elsewhere.
  const double dlat = 100.0 / 111194.9;
  std::vector<RawOsmElement> ways = {
      street_way(1, {10, 11, 12},
                 {{35.60, 139.40}, {35.60 + dlat, 139.40}, {35.60 + 2 * dlat, 139.40}})};
  StreetGraph g = build_street_graph(ways, tm);
  CHECK(g.node_count() == 3);
  REQUIRE(g.edge_count() == 2);
  CHECK(g.edge(0).length_m == doctest::Approx(100.0).epsilon(0.005));
  CHECK(g.edge(1).length_m == doctest::Approx(100.0).epsilon(0.005));
  CHECK(g.edge(0).way_id == 1);
}

TEST_CASE("ways sharing a node meet at a junction") {
  TransverseMercator tm;
  const double d = 0.001;
  std::vector<RawOsmElement> ways = {
      street_way(1, {10, 11}, {{35.60, 139.40}, {35.60 + d, 139.40}}),
      street_way(2, {11, 12}, {{35.60 + d, 139.40}, {35.60 + d, 139.40 + d}}),
      street_way(3, {11, 13}, {{35.60 + d, 139.40}, {35.60 + 2 * d, 139.40}}),
  };
  StreetGraph g = build_street_graph(ways, tm);
  CHECK(g.node_count() == 4);
  CHECK(g.edge_count() == 3);
  const int hub = g.find_node(11);
  REQUIRE(hub >= 0);
  CHECK(g.neighbors(hub).size() == 3);
}

TEST_CASE("degenerate ways are skipped and counted") {
  TransverseMercator tm;
  std::vector<RawOsmElement> ways = {
      street_way(1, {10}, {{35.60, 139.40}}),                         // single vertex
      street_way(2, {11, 11}, {{35.61, 139.40}, {35.61, 139.40}}),    // identical points
      street_way(3, {12, 13}, {{35.62, 139.40}, {35.625, 139.40}}),   // fine
  };
  StreetBuildStats stats;
  StreetGraph g = build_street_graph(ways, tm, &stats);
  CHECK(g.edge_count() == 1);
  CHECK(stats.degenerate_ways == 2);
}

TEST_CASE("parallel edges collapse to the minimum length") {
  StreetGraph g;
  g.add_node({0, 0});
  g.add_node({100, 0});
  g.add_edge(0, 1, 120.0, 1);
  g.add_edge(0, 1, 80.0, 2);   // shorter parallel wins
  g.add_edge(1, 0, 200.0, 3);  // longer parallel ignored
  g.add_edge(0, 0, 10.0, 4);   // self loop rejected
  REQUIRE(g.edge_count() == 1);
  CHECK(g.edge(0).length_m == 80.0);
  CHECK(g.edge(0).way_id == 2);
}

TEST_CASE("shortest path on a line and under a block") {
  StreetGraph g;
  for (int i = 0; i < 3; ++i) g.add_node({double(i), 0});
  const int e01 = g.add_edge(0, 1, 100.0, 1);
  g.add_edge(1, 2, 100.0, 2);
  (void)e01;

  auto d = shortest_dists(g, 0, {0, 1, 2});
  CHECK(d[0] == 0.0);
  CHECK(d[1] == 100.0);
  CHECK(d[2] == 200.0);

  std::vector<char> blocked(std::size_t(g.edge_count()), 0);
  blocked[1] = 1;  // cut 1-2
  auto db = shortest_dists(g, 0, {2}, &blocked);
  CHECK(db[0] == kInf);
}

TEST_CASE("dijkstra matches Bellman-Ford on random graphs, masked and not") {
  Rng rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + int(rng.uniform_index(60));
    StreetGraph g = random_graph(rng, n, 0.15);
    std::vector<char> blocked(std::size_t(g.edge_count()), 0);
    for (std::size_t e = 0; e < blocked.size(); ++e)
      if (rng.uniform() < 0.2) blocked[e] = 1;

    const int source = int(rng.uniform_index(std::size_t(n)));
    std::vector<int> targets(std::size_t(n), 0);
    std::iota(targets.begin(), targets.end(), 0);

    auto got = shortest_dists(g, source, targets);
    auto want = bellman_ford(g, source);
    auto got_masked = shortest_dists(g, source, targets, &blocked);
    auto want_masked = bellman_ford(g, source, &blocked);
    for (int v = 0; v < n; ++v) {
      if (want[std::size_t(v)] == kInf) CHECK(got[std::size_t(v)] == kInf);
      else CHECK(got[std::size_t(v)] == doctest::Approx(want[std::size_t(v)]).epsilon(1e-12));
      if (want_masked[std::size_t(v)] == kInf) CHECK(got_masked[std::size_t(v)] == kInf);
      else CHECK(got_masked[std::size_t(v)] ==
                 doctest::Approx(want_masked[std::size_t(v)]).epsilon(1e-12));
    }
  }
}

TEST_CASE("masked shortest paths equal paths on an edge-deleted copy") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 4 + int(rng.uniform_index(30));
    StreetGraph g = random_graph(rng, n, 0.25);
    std::vector<char> blocked(std::size_t(g.edge_count()), 0);
    for (std::size_t e = 0; e < blocked.size(); ++e)
      if (rng.uniform() < 0.3) blocked[e] = 1;

    StreetGraph copy;
    for (int v = 0; v < n; ++v) copy.add_node(g.node_xy(v), v);
    for (int e = 0; e < g.edge_count(); ++e) {
      if (!blocked[std::size_t(e)])
        copy.add_edge(g.edge(e).u, g.edge(e).v, g.edge(e).length_m, g.edge(e).way_id);
    }

    std::vector<int> targets(std::size_t(n), 0);
    std::iota(targets.begin(), targets.end(), 0);
    const int source = int(rng.uniform_index(std::size_t(n)));
    auto masked = shortest_dists(g, source, targets, &blocked);
    auto deleted = shortest_dists(copy, source, targets);
    for (int v = 0; v < n; ++v) {
      if (deleted[std::size_t(v)] == kInf) CHECK(masked[std::size_t(v)] == kInf);
      else CHECK(masked[std::size_t(v)] == deleted[std::size_t(v)]);
    }
  }
}

TEST_CASE("components match the union-find oracle and number by smallest node") {
  Rng rng(5150);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + int(rng.uniform_index(80));
    StreetGraph g = random_graph(rng, n, 0.04);
    std::vector<char> blocked(std::size_t(g.edge_count()), 0);
    for (std::size_t e = 0; e < blocked.size(); ++e)
      if (rng.uniform() < 0.25) blocked[e] = 1;

    CHECK(connected_components(g) == oracle_components(g, nullptr));
    CHECK(connected_components(g, &blocked) == oracle_components(g, &blocked));
  }
  // Numbering convention: component 0 contains node 0.
  StreetGraph g;
  for (int i = 0; i < 4; ++i) g.add_node({double(i), 0});
  g.add_edge(2, 3, 1.0, 1);
  auto comp = connected_components(g);
  CHECK(comp == std::vector<int>{0, 1, 2, 2});
}

TEST_CASE("betweenness: the middle of a path carries all pairs") {
  StreetGraph g;
  for (int i = 0; i < 3; ++i) g.add_node({double(i), 0});
  g.add_edge(0, 1, 1.0, 1);
  g.add_edge(1, 2, 1.0, 2);
  auto bc = betweenness_centrality(g, 3, 0);
  CHECK(bc[0] == doctest::Approx(0.0));
  CHECK(bc[1] == doctest::Approx(1.0));
  CHECK(bc[2] == doctest::Approx(0.0));
}

TEST_CASE("betweenness: a star center carries all pairs") {
  StreetGraph g;
  g.add_node({0, 0});
  for (int i = 1; i <= 5; ++i) {
    g.add_node({double(i), 1});
    g.add_edge(0, i, 1.0, i);
  }
  auto bc = betweenness_centrality(g, g.node_count(), 0);
  CHECK(bc[0] == doctest::Approx(1.0));
  for (int i = 1; i <= 5; ++i) CHECK(bc[std::size_t(i)] == doctest::Approx(0.0));
}

TEST_CASE("exact betweenness on a path matches pair enumeration") {
  for (int n : {4, 7, 12, 20}) {
    StreetGraph g;
    for (int i = 0; i < n; ++i) g.add_node({double(i), 0});
    for (int i = 0; i + 1 < n; ++i) g.add_edge(i, i + 1, 1.0, i);
    auto bc = betweenness_centrality(g, n, 0);
    const double pairs = double(n - 1) * double(n - 2) / 2.0;
    for (int v = 0; v < n; ++v) {
      // Node v lies strictly between pairs (s, t) with s < v < t.
      const double through = double(v) * double(n - 1 - v);
      CHECK(bc[std::size_t(v)] == doctest::Approx(through / pairs).epsilon(1e-12));
    }
  }
}

TEST_CASE("betweenness handles equal-length path ties by splitting counts") {
  // Square: two equal shortest paths between opposite corners.
  StreetGraph g;
  for (int i = 0; i < 4; ++i) g.add_node({double(i % 2), double(i / 2)});
  g.add_edge(0, 1, 1.0, 1);
  g.add_edge(1, 3, 1.0, 2);
  g.add_edge(0, 2, 1.0, 3);
  g.add_edge(2, 3, 1.0, 4);
  auto bc = betweenness_centrality(g, 4, 0);
  // Pair (0,3) splits across 1 and 2; pair (1,2) splits across 0 and 3.
  const double pairs = 3.0;  // (n-1)(n-2)/2
  for (int v = 0; v < 4; ++v) CHECK(bc[std::size_t(v)] == doctest::Approx(0.5 / pairs));
}

TEST_CASE("sampled betweenness is non-negative and unbiased-ish on a grid") {
  StreetGraph g;
  const int side = 8;
  for (int r = 0; r < side; ++r)
    for (int c = 0; c < side; ++c) g.add_node({double(c), double(r)});
  for (int r = 0; r < side; ++r) {
    for (int c = 0; c < side; ++c) {
      const int v = r * side + c;
      if (c + 1 < side) g.add_edge(v, v + 1, 1.0, 1);
      if (r + 1 < side) g.add_edge(v, v + side, 1.0, 2);
    }
  }
  auto exact = betweenness_centrality(g, g.node_count(), 0);
  auto sampled = betweenness_centrality(g, 24, 99);
  double err = 0, mass = 0;
  for (std::size_t v = 0; v < exact.size(); ++v) {
    CHECK(sampled[v] >= 0.0);
    err += std::fabs(sampled[v] - exact[v]);
    mass += exact[v];
  }
  CHECK(err / mass < 0.6);  // crude agreement, deterministic via fixed seed
}

TEST_CASE("street graph dump and reload round-trips") {
  Rng rng(31);
  StreetGraph g = random_graph(rng, 25, 0.2);
  auto dir = std::filesystem::temp_directory_path() / "bg_graph_io";
  std::filesystem::create_directories(dir);
  const std::string nodes = (dir / "nodes.txt").string();
  const std::string edges = (dir / "edges.txt").string();
  write_street_graph(g, nodes, edges);
  StreetGraph back = read_street_graph(nodes, edges);
  REQUIRE(back.node_count() == g.node_count());
  REQUIRE(back.edge_count() == g.edge_count());
  for (int e = 0; e < g.edge_count(); ++e) {
    CHECK(back.edge(e).u == g.edge(e).u);
    CHECK(back.edge(e).v == g.edge(e).v);
    CHECK(back.edge(e).length_m == g.edge(e).length_m);
    CHECK(back.edge(e).way_id == g.edge(e).way_id);
  }
}

// ---- heterogeneous graph ----

namespace {

// Tiny city: a street block plus a named bridge way contributing two
// street edges, a second bridge too far to snap, facilities and buildings.
// The block has 40 m sides so the bridge point at (20, 10) sits within the
// 30 m snap radius of exactly two corners (sqrt(500) ~ 22.4 m) while the
// far corners miss it (sqrt(1300) ~ 36.1 m).
HeteroGraph toy_hetero() {
  StreetGraph streets;
  streets.add_node({0, 0}, 100);
  streets.add_node({40, 0}, 101);
  streets.add_node({0, 40}, 102);
  streets.add_node({40, 40}, 103);
  streets.add_node({5000, 5000}, 104);
  streets.add_edge(0, 1, 40, 7001);  // bridge way: two segments
  streets.add_edge(1, 3, 40, 7001);
  streets.add_edge(0, 2, 40, 7002);
  streets.add_edge(2, 3, 40, 7003);

  HeteroGraph h;
  h.streets = std::move(streets);

  BridgeRecord b1;
  b1.osm_id = 7001;
  b1.name = "Block Bridge";
  BridgeRecord b2;
  b2.osm_id = 9999;
  b2.name = "Far Bridge";
  h.bridges = {b1, b2};
  h.bridge_xy = {{20, 10}, {9000, 9000}};  // b1 near nodes 0 and 1; b2 nowhere

  FacilityRecord hosp;
  hosp.osm_id = 1;
  hosp.category = FacilityCategory::Hospital;
  h.facilities = {hosp};
  h.facility_xy = {{36, 36}};

  BuildingRecord res;
  res.osm_id = 2;
  res.is_residential = true;
  res.population_estimate = 2.5;
  h.buildings = {res};
  h.building_xy = {{4, 36}};

  h.finalize();
  return h;
}

}  // namespace

TEST_CASE("bridges snap to street nodes within 30 m, nearest first") {
  HeteroGraph h = toy_hetero();
  REQUIRE(h.bridges.size() == 2);
  CHECK(!h.snap_failed[0]);
  CHECK(h.snap_failed[1]);
  CHECK(h.snap_failure_count() == 1);

  REQUIRE(h.bridge_snaps[0].size() == 2);  // two corners in range, two out
  const double want = std::sqrt(500.0);
  for (int s : h.bridge_snaps[0]) {
    const SnapEdge& e = h.snap_edges[std::size_t(s)];
    CHECK(e.bridge == 0);
    CHECK((e.node == 0 || e.node == 1));
    CHECK(e.length_m == doctest::Approx(want));
  }
  CHECK(h.bridge_snaps[1].empty());
}

TEST_CASE("snap keeps at most three nodes even when more are in range") {
  HeteroGraph h;
  StreetGraph streets;
  // Five nodes all within 30 m of the origin.
  for (int i = 0; i < 5; ++i) streets.add_node({double(i) * 5.0, 0.0}, 200 + i);
  streets.add_edge(0, 1, 5, 1);
  streets.add_edge(1, 2, 5, 1);
  streets.add_edge(2, 3, 5, 1);
  streets.add_edge(3, 4, 5, 1);
  h.streets = std::move(streets);
  BridgeRecord b;
  b.osm_id = 55;
  b.name = "Crowded Bridge";
  h.bridges = {b};
  h.bridge_xy = {{0, 0}};
  h.finalize();

  REQUIRE(h.bridge_snaps[0].size() == 3);
  // Nearest three by distance: nodes 0 (0 m), 1 (5 m), 2 (10 m).
  std::set<int> nodes;
  for (int s : h.bridge_snaps[0]) nodes.insert(h.snap_edges[std::size_t(s)].node);
  CHECK(nodes == std::set<int>{0, 1, 2});
}

TEST_CASE("closure mask blocks way edges plus snap edges") {
  HeteroGraph h = toy_hetero();
  ClosureMask mask = make_closure_mask(h, 0);
  // Way 7001 contributed 2 street edges; snap edges come on top.
  CHECK(mask.blocked_street_edges.size() == 2);
  CHECK(mask.blocked_snap_edges.size() == h.bridge_snaps[0].size());
  CHECK(mask.blocked_edge_count() ==
        mask.blocked_street_edges.size() + mask.blocked_snap_edges.size());

  // Disjointness: street edges and snap edges are different id spaces, and
  // street ids must reference way 7001 only.
  for (int e : mask.blocked_street_edges) CHECK(h.streets.edge(e).way_id == 7001);

  // A snap-failed bridge blocks nothing.
  ClosureMask far = make_closure_mask(h, 1);
  CHECK(far.blocked_edge_count() == 0);

  auto bitmap = street_block_bitmap(h, mask);
  int set = 0;
  for (char c : bitmap) set += c;
  CHECK(set == 2);
}

TEST_CASE("nearest street nodes are cached for buildings and facilities") {
  HeteroGraph h = toy_hetero();
  REQUIRE(h.building_node.size() == 1);
  REQUIRE(h.facility_node.size() == 1);
  CHECK(h.building_node[0] == 2);  // (10,90) is nearest node 2 at (0,100)
  CHECK(h.facility_node[0] == 3);  // (90,90) is nearest node 3 at (100,100)
}

TEST_CASE("proximity edges list facilities within a kilometer") {
  HeteroGraph h = toy_hetero();
  REQUIRE(h.proximity.size() == 2);
  REQUIRE(h.proximity[0].size() == 1);
  CHECK(h.proximity[0][0].facility == 0);
  CHECK(h.proximity[0][0].distance_m ==
        doctest::Approx(planar_distance({20, 10}, {36, 36})));
  CHECK(h.proximity[1].empty());
}
