#pragma once

#include <cstdint>
#include <vector>

#include "bridgegraph/elevation.hpp"
#include "bridgegraph/kdtree.hpp"
#include "bridgegraph/osm.hpp"
#include "bridgegraph/street_graph.hpp"

namespace bridgegraph {

inline constexpr double kSnapMaxDistance = 30.0;  // meters
inline constexpr int kSnapK = 3;
inline constexpr double kProximityRadius = 1000.0;  // bridge-facility edges

struct SnapEdge {
  int bridge = -1;  // bridge index
  int node = -1;    // street node
  double length_m = 0.0;
};

// Which edges a single bridge closure removes: the street edges built from
// the bridge's own OSM way plus the bridge's snap edges.
struct ClosureMask {
  int bridge = -1;
  std::vector<int> blocked_street_edges;  // sorted edge indices
  std::vector<int> blocked_snap_edges;    // indices into HeteroGraph::snap_edges
  std::size_t blocked_edge_count() const {
    return blocked_street_edges.size() + blocked_snap_edges.size();
  }
};

struct ProximityEdge {
  int facility = -1;
  double distance_m = 0.0;
};

// Street network plus bridges, facilities, and buildings with their planar
// coordinates, snap edges, and cached nearest-street-node assignments.
struct HeteroGraph {
  StreetGraph streets;

  std::vector<BridgeRecord> bridges;
  std::vector<PlanarCoord> bridge_xy;
  std::vector<char> snap_failed;
  std::vector<std::vector<int>> bridge_snaps;  // per bridge: snap edge ids
  std::vector<SnapEdge> snap_edges;

  std::vector<FacilityRecord> facilities;
  std::vector<PlanarCoord> facility_xy;
  std::vector<int> facility_node;  // nearest street node per facility

  std::vector<BuildingRecord> buildings;
  std::vector<PlanarCoord> building_xy;
  std::vector<int> building_node;  // nearest street node per building

  std::vector<double> node_elevation;  // per street node; NaN where DEM is silent

  std::vector<std::vector<ProximityEdge>> proximity;  // per bridge, within 1 km

  int snap_failure_count() const;

  // Rebuild the derived members (snaps, nearest nodes, proximity lists) from
  // the primary ones. Tests that assemble graphs by hand call this too.
  void finalize(const ElevationRaster* raster = nullptr);
};

// Full assembly used by the pipeline: projects every entity, snaps bridges
// to up to kSnapK street nodes within kSnapMaxDistance meters, caches
// nearest street nodes for buildings and facilities, samples elevations.
HeteroGraph assemble_hetero_graph(StreetGraph streets, std::vector<BridgeRecord> bridges,
                                  std::vector<FacilityRecord> facilities,
                                  std::vector<BuildingRecord> buildings,
                                  const TransverseMercator& projection,
                                  const ElevationRaster* raster);

ClosureMask make_closure_mask(const HeteroGraph& h, int bridge);

// Edge-indexed bitmap over street edges for the Dijkstra calls.
std::vector<char> street_block_bitmap(const HeteroGraph& h, const ClosureMask& mask);

}  // namespace bridgegraph
