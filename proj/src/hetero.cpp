#include "bridgegraph/hetero.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace bridgegraph {

int HeteroGraph::snap_failure_count() const {
  int n = 0;
  for (char f : snap_failed) n += f ? 1 : 0;
  return n;
}

void HeteroGraph::finalize(const ElevationRaster* raster) {
  const int nb = int(bridges.size());
  snap_failed.assign(std::size_t(nb), 0);
  bridge_snaps.assign(std::size_t(nb), {});
  snap_edges.clear();
  proximity.assign(std::size_t(nb), {});

  SpatialIndex street_index(streets.node_coords());

  for (int b = 0; b < nb; ++b) {
    auto near = street_index.knn(bridge_xy[std::size_t(b)], kSnapK);
    for (const auto& [node, dist] : near) {
      if (dist > kSnapMaxDistance) continue;
      const int id = int(snap_edges.size());
      snap_edges.push_back({b, node, dist});
      bridge_snaps[std::size_t(b)].push_back(id);
    }
    if (bridge_snaps[std::size_t(b)].empty()) snap_failed[std::size_t(b)] = 1;
  }

  facility_node.assign(facilities.size(), -1);
  if (!facilities.empty() && streets.node_count() > 0) {
    for (std::size_t f = 0; f < facilities.size(); ++f) {
      facility_node[f] = street_index.knn(facility_xy[f], 1)[0].first;
    }
  }

  building_node.assign(buildings.size(), -1);
  if (!buildings.empty() && streets.node_count() > 0) {
    for (std::size_t r = 0; r < buildings.size(); ++r) {
      building_node[r] = street_index.knn(building_xy[r], 1)[0].first;
    }
  }

  if (raster) {
    node_elevation.assign(std::size_t(streets.node_count()), std::nan(""));
    for (int v = 0; v < streets.node_count(); ++v) {
      const double e = raster->sample(streets.node_xy(v));
      if (!raster->is_nodata(e)) node_elevation[std::size_t(v)] = e;
    }
    // Building elevation keyed to its own centroid, not its street node.
    for (std::size_t i = 0; i < buildings.size(); ++i) {
      const double e = raster->sample(building_xy[i]);
      buildings[i].elevation_m = raster->is_nodata(e) ? std::nan("") : e;
    }
  } else if (node_elevation.size() != std::size_t(streets.node_count())) {
    node_elevation.assign(std::size_t(streets.node_count()), std::nan(""));
  }

  if (!facilities.empty()) {
    SpatialIndex facility_index(facility_xy);
    for (int b = 0; b < nb; ++b) {
      for (int f : facility_index.within(bridge_xy[std::size_t(b)], kProximityRadius)) {
        proximity[std::size_t(b)].push_back(
            {f, planar_distance(bridge_xy[std::size_t(b)], facility_xy[std::size_t(f)])});
      }
    }
  }
}

HeteroGraph assemble_hetero_graph(StreetGraph streets, std::vector<BridgeRecord> bridges,
                                  std::vector<FacilityRecord> facilities,
                                  std::vector<BuildingRecord> buildings,
                                  const TransverseMercator& projection,
                                  const ElevationRaster* raster) {
  HeteroGraph h;
  h.streets = std::move(streets);
  h.bridges = std::move(bridges);
  h.facilities = std::move(facilities);
  h.buildings = std::move(buildings);

  h.bridge_xy.reserve(h.bridges.size());
  for (const auto& b : h.bridges) h.bridge_xy.push_back(projection.project(b.centroid));
  h.facility_xy.reserve(h.facilities.size());
  for (const auto& f : h.facilities) h.facility_xy.push_back(projection.project(f.location));
  h.building_xy.reserve(h.buildings.size());
  for (const auto& r : h.buildings) h.building_xy.push_back(projection.project(r.centroid));

  h.finalize(raster);
  return h;
}

ClosureMask make_closure_mask(const HeteroGraph& h, int bridge) {
  ClosureMask mask;
  mask.bridge = bridge;
  if (bridge < 0 || bridge >= int(h.bridges.size())) return mask;
  if (h.snap_failed[std::size_t(bridge)]) return mask;  // unscored bridges block nothing

  const std::int64_t way = h.bridges[std::size_t(bridge)].osm_id;
  for (int e = 0; e < h.streets.edge_count(); ++e) {
    if (h.streets.edge(e).way_id == way) mask.blocked_street_edges.push_back(e);
  }
  mask.blocked_snap_edges = h.bridge_snaps[std::size_t(bridge)];
  return mask;
}

std::vector<char> street_block_bitmap(const HeteroGraph& h, const ClosureMask& mask) {
  std::vector<char> bitmap(std::size_t(h.streets.edge_count()), 0);
  for (int e : mask.blocked_street_edges) bitmap[std::size_t(e)] = 1;
  return bitmap;
}

}  // namespace bridgegraph
