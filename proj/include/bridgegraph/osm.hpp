#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bridgegraph/geo.hpp"

namespace bridgegraph {

enum class OsmKind { Node, Way, Relation };

// One element from an Overpass response, geometry already flattened to
// lat/lon vertices. node_refs carries the way's OSM node ids so shared
// junction nodes can be identified when building the street graph.
struct RawOsmElement {
  std::int64_t osm_id = 0;
  OsmKind kind = OsmKind::Node;
  std::map<std::string, std::string> tags;
  std::vector<GeoCoord> geometry;
  std::vector<std::int64_t> node_refs;
};

enum class BridgeSource { ManMadeTag, BridgeTag };

struct BridgeRecord {
  std::int64_t osm_id = 0;
  std::string name;
  GeoCoord centroid;
  std::map<std::string, std::string> tags;
  BridgeSource source_pattern = BridgeSource::BridgeTag;
  std::string city;  // provenance label; fills the per-city composition stats
};

enum class FacilityCategory { Hospital, BusStop, Park, Shop, School, HighwayNode };

std::string facility_category_name(FacilityCategory c);

struct FacilityRecord {
  std::int64_t osm_id = 0;
  FacilityCategory category = FacilityCategory::Shop;
  std::string subcategory;  // e.g. the shop= value
  GeoCoord location;
};

struct BuildingRecord {
  std::int64_t osm_id = 0;
  GeoCoord centroid;
  bool is_residential = false;
  double population_estimate = 0.0;
  double elevation_m = 0.0;   // NaN when the DEM had no data at the centroid
};

// Keeps elements whose trimmed name tag is non-empty, merges duplicates by
// osm_id (man_made=bridge tags win conflicts), computes vertex-mean
// centroids, and sorts by osm_id. `city` is stamped on every record.
std::vector<BridgeRecord> filter_named_bridges(
    const std::vector<RawOsmElement>& man_made_elements,
    const std::vector<RawOsmElement>& bridge_tag_elements, const std::string& city);

// Categorizes hospital / bus stop / park / shop / school elements; anything
// else in the input is ignored. Sorted by (category, osm_id).
std::vector<FacilityRecord> extract_facilities(const std::vector<RawOsmElement>& elements);

// Classifies residential buildings and assigns the per-residence population
// constant. Elevation is sampled later, once planar coordinates exist.
std::vector<BuildingRecord> extract_buildings(const std::vector<RawOsmElement>& elements,
                                              double population_per_residence);

// Mean of the element's vertices (for relations the parse already kept the
// outer ring), which is how every centroid in the pipeline is defined.
GeoCoord vertex_mean_centroid(const RawOsmElement& e);

bool is_food_shop(const std::string& shop_value);

}  // namespace bridgegraph
