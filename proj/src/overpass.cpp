#include <httplib.h>  // CPPHTTPLIB_OPENSSL_SUPPORT comes from the build

#include "bridgegraph/overpass.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>

#include "bridgegraph/http_util.hpp"
#include "bridgegraph/util.hpp"

namespace bridgegraph {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string bbox_text(const BBox& b) {
  // Overpass order: south, west, north, east.
  return fmt_fixed(b.min_lat, 7) + "," + fmt_fixed(b.min_lon, 7) + "," +
         fmt_fixed(b.max_lat, 7) + "," + fmt_fixed(b.max_lon, 7);
}

OverpassQuery make_query(std::string name, const std::string& middle, const BBox& bbox) {
  OverpassQuery q;
  q.name = std::move(name);
  std::string body = "[out:json][timeout:180];\n(\n" + middle + ");\nout tags geom;\n";
  // Substitute every {{bbox}} placeholder.
  const std::string needle = "{{bbox}}";
  const std::string bb = bbox_text(bbox);
  std::size_t pos = 0;
  while ((pos = body.find(needle, pos)) != std::string::npos) {
    body.replace(pos, needle.size(), bb);
    pos += bb.size();
  }
  q.body = std::move(body);
  return q;
}

}  // namespace

OverpassQuery query_bridges_man_made(const BBox& bbox) {
  return make_query("bridges_man_made",
                    "  way[\"man_made\"=\"bridge\"]({{bbox}});\n"
                    "  relation[\"man_made\"=\"bridge\"]({{bbox}});\n",
                    bbox);
}

OverpassQuery query_bridges_tagged(const BBox& bbox) {
  return make_query("bridges_tagged",
                    "  way[\"bridge\"][\"bridge\"!=\"no\"]({{bbox}});\n", bbox);
}

OverpassQuery query_streets(const BBox& bbox) {
  return make_query(
      "streets",
      "  way[\"highway\"~\"^(motorway|trunk|primary|secondary|tertiary|unclassified|"
      "residential|living_street|service|motorway_link|trunk_link|primary_link|"
      "secondary_link|tertiary_link)$\"]({{bbox}});\n",
      bbox);
}

OverpassQuery query_buildings(const BBox& bbox) {
  return make_query("buildings",
                    "  way[\"building\"]({{bbox}});\n"
                    "  relation[\"building\"]({{bbox}});\n",
                    bbox);
}

OverpassQuery query_facilities(const BBox& bbox) {
  return make_query("facilities",
                    "  node[\"amenity\"=\"hospital\"]({{bbox}});\n"
                    "  way[\"amenity\"=\"hospital\"]({{bbox}});\n"
                    "  node[\"amenity\"=\"school\"]({{bbox}});\n"
                    "  way[\"amenity\"=\"school\"]({{bbox}});\n"
                    "  node[\"highway\"=\"bus_stop\"]({{bbox}});\n"
                    "  node[\"leisure\"~\"^(park|nature_reserve)$\"]({{bbox}});\n"
                    "  way[\"leisure\"~\"^(park|nature_reserve)$\"]({{bbox}});\n"
                    "  node[\"shop\"]({{bbox}});\n"
                    "  way[\"shop\"]({{bbox}});\n",
                    bbox);
}

OverpassQuery query_waterways(const BBox& bbox) {
  return make_query("waterways",
                    "  way[\"waterway\"~\"^(river|canal|stream)$\"]({{bbox}});\n"
                    "  way[\"natural\"=\"coastline\"]({{bbox}});\n",
                    bbox);
}

std::string overpass_cache_filename(const OverpassQuery& q, const BBox& bbox) {
  const std::uint64_t h = fnv1a64(q.body + "|" + bbox_text(bbox));
  return "overpass_" + hex64(h) + ".json";
}

std::string fetch_overpass_raw(const PipelineConfig& cfg, const OverpassQuery& q,
                               FetchStats* stats) {
  const fs::path cache_dir = cfg.resolve(cfg.cache_dir);
  const fs::path cache_path = cache_dir / overpass_cache_filename(q, cfg.bbox);

  if (auto cached = read_file(cache_path.string())) {
    if (stats) stats->cache_hits++;
    return *cached;
  }

  ParsedUrl url = parse_url(cfg.overpass_url);
  httplib::Result res;
  {
    // Scoped so the connection is gone before we touch the filesystem.
    httplib::Client client(url.origin());
    client.set_connection_timeout(30, 0);
    client.set_read_timeout(180, 0);
    if (stats) stats->http_requests++;
    res = client.Post(url.path, q.body, "text/plain; charset=utf-8");
  }
  if (!res) {
    throw NetworkError("overpass fetch failed for query '" + q.name +
                       "': " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw NetworkError("overpass returned HTTP " + std::to_string(res->status) +
                       " for query '" + q.name + "'");
  }

  fs::create_directories(cache_dir);
  atomic_write_file(cache_path.string(), res->body);
  return res->body;
}

std::vector<RawOsmElement> parse_overpass_json(const std::string& body) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::exception& e) {
    throw OverpassParseError(std::string("overpass body is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("elements") || !doc["elements"].is_array()) {
    throw OverpassParseError("overpass body lacks an 'elements' array");
  }

  std::vector<RawOsmElement> out;
  out.reserve(doc["elements"].size());
  for (const auto& el : doc["elements"]) {
    if (!el.is_object() || !el.contains("type") || !el.contains("id")) continue;
    RawOsmElement e;
    e.osm_id = el["id"].get<std::int64_t>();
    const std::string type = el["type"].get<std::string>();
    if (type == "node") e.kind = OsmKind::Node;
    else if (type == "way") e.kind = OsmKind::Way;
    else if (type == "relation") e.kind = OsmKind::Relation;
    else continue;

    if (el.contains("tags") && el["tags"].is_object()) {
      for (const auto& [k, v] : el["tags"].items()) {
        if (v.is_string()) e.tags[k] = v.get<std::string>();
      }
    }

    switch (e.kind) {
      case OsmKind::Node:
        if (el.contains("lat") && el.contains("lon")) {
          e.geometry.push_back({el["lat"].get<double>(), el["lon"].get<double>()});
        }
        break;
      case OsmKind::Way:
        if (el.contains("geometry") && el["geometry"].is_array()) {
          for (const auto& g : el["geometry"]) {
            if (g.is_object() && g.contains("lat") && g.contains("lon"))
              e.geometry.push_back({g["lat"].get<double>(), g["lon"].get<double>()});
          }
        }
        if (el.contains("nodes") && el["nodes"].is_array()) {
          for (const auto& n : el["nodes"]) {
            if (n.is_number_integer()) e.node_refs.push_back(n.get<std::int64_t>());
          }
        }
        break;
      case OsmKind::Relation:
        if (el.contains("members") && el["members"].is_array()) {
          // Prefer outer-ring members; fall back to everything with geometry.
          bool has_outer = false;
          for (const auto& m : el["members"]) {
            if (m.is_object() && m.value("role", "") == "outer" && m.contains("geometry")) {
              has_outer = true;
              break;
            }
          }
          for (const auto& m : el["members"]) {
            if (!m.is_object() || !m.contains("geometry") || !m["geometry"].is_array()) continue;
            if (has_outer && m.value("role", "") != "outer") continue;
            for (const auto& g : m["geometry"]) {
              if (g.is_object() && g.contains("lat") && g.contains("lon"))
                e.geometry.push_back({g["lat"].get<double>(), g["lon"].get<double>()});
            }
          }
        }
        break;
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<RawOsmElement> fetch_overpass(const PipelineConfig& cfg, const OverpassQuery& q,
                                          FetchStats* stats) {
  return parse_overpass_json(fetch_overpass_raw(cfg, q, stats));
}

}  // namespace bridgegraph
