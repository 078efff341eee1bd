#include "bridgegraph/osm.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "bridgegraph/util.hpp"

namespace bridgegraph {

std::string facility_category_name(FacilityCategory c) {
  switch (c) {
    case FacilityCategory::Hospital: return "hospital";
    case FacilityCategory::BusStop: return "bus_stop";
    case FacilityCategory::Park: return "park";
    case FacilityCategory::Shop: return "shop";
    case FacilityCategory::School: return "school";
    case FacilityCategory::HighwayNode: return "highway_node";
  }
  return "unknown";
}

GeoCoord vertex_mean_centroid(const RawOsmElement& e) {
  GeoCoord c;
  if (e.geometry.empty()) return c;
  for (const auto& g : e.geometry) {
    c.lat += g.lat;
    c.lon += g.lon;
  }
  c.lat /= double(e.geometry.size());
  c.lon /= double(e.geometry.size());
  return c;
}

std::vector<BridgeRecord> filter_named_bridges(
    const std::vector<RawOsmElement>& man_made_elements,
    const std::vector<RawOsmElement>& bridge_tag_elements, const std::string& city) {
  std::map<std::int64_t, BridgeRecord> by_id;

  auto ingest = [&](const std::vector<RawOsmElement>& elems, BridgeSource source) {
    for (const auto& e : elems) {
      auto it = e.tags.find("name");
      if (it == e.tags.end()) continue;
      const std::string name = trim(it->second);
      if (name.empty()) continue;

      auto [slot, inserted] = by_id.try_emplace(e.osm_id);
      BridgeRecord& rec = slot->second;
      if (inserted) {
        rec.osm_id = e.osm_id;
        rec.name = name;
        rec.centroid = vertex_mean_centroid(e);
        rec.tags = e.tags;
        rec.source_pattern = source;
        rec.city = city;
      } else if (source == BridgeSource::ManMadeTag) {
        // Same structure matched by both patterns: man_made tags win.
        for (const auto& [k, v] : e.tags) rec.tags[k] = v;
        rec.name = name;
        rec.centroid = vertex_mean_centroid(e);
        rec.source_pattern = BridgeSource::ManMadeTag;
      } else {
        for (const auto& [k, v] : e.tags) rec.tags.try_emplace(k, v);
      }
    }
  };

  // bridge=* first so that a later man_made pass overwrites on conflict.
  ingest(bridge_tag_elements, BridgeSource::BridgeTag);
  ingest(man_made_elements, BridgeSource::ManMadeTag);

  std::vector<BridgeRecord> out;
  out.reserve(by_id.size());
  for (auto& [id, rec] : by_id) out.push_back(std::move(rec));
  return out;  // std::map iteration is already ascending by osm_id
}

std::vector<FacilityRecord> extract_facilities(const std::vector<RawOsmElement>& elements) {
  std::vector<FacilityRecord> out;
  for (const auto& e : elements) {
    FacilityRecord f;
    f.osm_id = e.osm_id;
    f.location = vertex_mean_centroid(e);

    const auto amenity = e.tags.find("amenity");
    const auto highway = e.tags.find("highway");
    const auto leisure = e.tags.find("leisure");
    const auto shop = e.tags.find("shop");

    if (amenity != e.tags.end() && amenity->second == "hospital") {
      f.category = FacilityCategory::Hospital;
    } else if (amenity != e.tags.end() && amenity->second == "school") {
      f.category = FacilityCategory::School;
    } else if (highway != e.tags.end() && highway->second == "bus_stop") {
      f.category = FacilityCategory::BusStop;
    } else if (leisure != e.tags.end() &&
               (leisure->second == "park" || leisure->second == "nature_reserve")) {
      f.category = FacilityCategory::Park;
      f.subcategory = leisure->second;
    } else if (shop != e.tags.end()) {
      f.category = FacilityCategory::Shop;
      f.subcategory = shop->second;
    } else {
      continue;
    }
    out.push_back(std::move(f));
  }
  std::sort(out.begin(), out.end(), [](const FacilityRecord& a, const FacilityRecord& b) {
    if (a.category != b.category) return int(a.category) < int(b.category);
    return a.osm_id < b.osm_id;
  });
  return out;
}

namespace {

const std::set<std::string> kResidentialValues = {"residential", "house", "apartments",
                                                  "detached", "terrace"};
// Tag keys that mark a building=yes structure as non-residential.
const std::set<std::string> kCommercialKeys = {"shop", "amenity", "office",
                                               "craft", "tourism", "industrial"};

bool is_residential(const std::map<std::string, std::string>& tags) {
  auto b = tags.find("building");
  if (b == tags.end()) return false;
  if (kResidentialValues.count(b->second)) return true;
  if (b->second != "yes") return false;
  for (const auto& key : kCommercialKeys)
    if (tags.count(key)) return false;
  return true;
}

}  // namespace

std::vector<BuildingRecord> extract_buildings(const std::vector<RawOsmElement>& elements,
                                              double population_per_residence) {
  std::vector<BuildingRecord> out;
  out.reserve(elements.size());
  for (const auto& e : elements) {
    if (!e.tags.count("building")) continue;
    if (e.geometry.empty()) continue;
    BuildingRecord b;
    b.osm_id = e.osm_id;
    b.centroid = vertex_mean_centroid(e);
    b.is_residential = is_residential(e.tags);
    b.population_estimate = b.is_residential ? population_per_residence : 0.0;
    b.elevation_m = std::nan("");
    out.push_back(b);
  }
  std::sort(out.begin(), out.end(),
            [](const BuildingRecord& a, const BuildingRecord& b) { return a.osm_id < b.osm_id; });
  return out;
}

bool is_food_shop(const std::string& shop_value) {
  // Food and daily-necessity retail, weighted higher in the supply indicator.
  static const std::set<std::string> kFood = {
      "supermarket", "convenience", "grocery", "greengrocer", "bakery", "butcher",
      "seafood",     "deli",        "food",    "general",     "chemist", "drugstore"};
  return kFood.count(shop_value) > 0;
}

}  // namespace bridgegraph
