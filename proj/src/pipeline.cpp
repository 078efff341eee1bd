#include "bridgegraph/pipeline.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "bridgegraph/cluster.hpp"
#include "bridgegraph/elevation.hpp"
#include "bridgegraph/features.hpp"
#include "bridgegraph/hetero.hpp"
#include "bridgegraph/http_util.hpp"
#include "bridgegraph/interpret.hpp"
#include "bridgegraph/osm.hpp"
#include "bridgegraph/overpass.hpp"
#include "bridgegraph/plots.hpp"
#include "bridgegraph/scoring.hpp"
#include "bridgegraph/street_graph.hpp"
#include "bridgegraph/util.hpp"

namespace bridgegraph {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// NaN cannot ride through JSON; elevation gaps become nulls.
json num_or_null(double v) { return std::isnan(v) ? json(nullptr) : json(v); }
double num_from(const json& j) { return j.is_null() ? std::nan("") : j.get<double>(); }

json coord_json(const GeoCoord& g) { return json::array({g.lat, g.lon}); }
GeoCoord coord_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

json xy_json(const PlanarCoord& p) { return json::array({p.x, p.y}); }
PlanarCoord xy_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

struct Ctx {
  PipelineConfig cfg;
  std::uint64_t seed = 0;
  bool sweep = false;
  fs::path out;

  fs::path artifact(const char* name) const { return out / name; }
  std::string apath(const char* name) const { return (out / name).string(); }
};

void require_artifact(const fs::path& p, const char* producer) {
  if (!fs::exists(p)) throw MissingArtifactError(p.string(), producer);
}

json load_json_artifact(const fs::path& p, const char* producer) {
  require_artifact(p, producer);
  const auto text = read_file(p.string());
  if (!text) throw MissingArtifactError(p.string(), producer);
  try {
    return json::parse(*text);
  } catch (const json::exception& e) {
    throw PipelineError("corrupt artifact " + p.string() + ": " + e.what());
  }
}

void write_json_artifact(const fs::path& p, const json& doc) {
  atomic_write_file(p.string(), doc.dump(1) + "\n");
}

ElevationRaster load_raster(const PipelineConfig& cfg) {
  const std::string path = cfg.resolve(cfg.elevation_path);
  if (!fs::exists(path)) throw ConfigError("elevation file not found: " + path);
  return ElevationRaster::load(path);
}

// ---------------------------------------------------------------- ingest --

const char* bridge_source_name(BridgeSource s) {
  return s == BridgeSource::ManMadeTag ? "man_made" : "bridge_tag";
}

json raw_element_json(const RawOsmElement& e) {
  json g = json::array();
  for (const auto& c : e.geometry) g.push_back(coord_json(c));
  json el{{"id", e.osm_id}, {"geometry", std::move(g)}};
  if (!e.tags.empty()) el["tags"] = e.tags;
  if (!e.node_refs.empty()) el["nodes"] = e.node_refs;
  return el;
}

RawOsmElement raw_element_from(const json& el) {
  RawOsmElement e;
  e.osm_id = el.at("id").get<std::int64_t>();
  e.kind = OsmKind::Way;
  if (el.contains("tags")) {
    for (const auto& [k, v] : el["tags"].items()) e.tags[k] = v.get<std::string>();
  }
  for (const auto& c : el.at("geometry")) e.geometry.push_back(coord_from(c));
  if (el.contains("nodes")) {
    for (const auto& n : el["nodes"]) e.node_refs.push_back(n.get<std::int64_t>());
  }
  return e;
}

StageRecord stage_ingest(const Ctx& ctx) {
  StageRecord rec;
  rec.name = stage_name(Stage::Ingest);
  rec.inputs.push_back(ctx.cfg.resolve(ctx.cfg.city + ".yaml"));

  const OverpassQuery queries[] = {
      query_bridges_man_made(ctx.cfg.bbox), query_bridges_tagged(ctx.cfg.bbox),
      query_streets(ctx.cfg.bbox),          query_buildings(ctx.cfg.bbox),
      query_facilities(ctx.cfg.bbox),       query_waterways(ctx.cfg.bbox)};
  const fs::path cache_dir = ctx.cfg.resolve(ctx.cfg.cache_dir);
  for (const auto& q : queries) {
    rec.inputs.push_back((cache_dir / overpass_cache_filename(q, ctx.cfg.bbox)).string());
  }

  FetchStats stats;
  const auto man_made = fetch_overpass(ctx.cfg, queries[0], &stats);
  const auto tagged = fetch_overpass(ctx.cfg, queries[1], &stats);
  const auto street_raw = fetch_overpass(ctx.cfg, queries[2], &stats);
  const auto building_raw = fetch_overpass(ctx.cfg, queries[3], &stats);
  const auto facility_raw = fetch_overpass(ctx.cfg, queries[4], &stats);
  const auto water_raw = fetch_overpass(ctx.cfg, queries[5], &stats);

  const auto bridges = filter_named_bridges(man_made, tagged, ctx.cfg.city);
  const auto facilities = extract_facilities(facility_raw);
  const auto buildings = extract_buildings(building_raw, ctx.cfg.params.population_per_residence);

  json jbridges = json::array();
  for (const auto& b : bridges) {
    jbridges.push_back(json{{"id", b.osm_id},
                            {"name", b.name},
                            {"centroid", coord_json(b.centroid)},
                            {"tags", b.tags},
                            {"source", bridge_source_name(b.source_pattern)},
                            {"city", b.city}});
  }
  json jways = json::array();
  for (const auto& e : street_raw) {
    if (e.kind != OsmKind::Way) continue;
    jways.push_back(raw_element_json(e));
  }
  json jfac = json::array();
  for (const auto& f : facilities) {
    jfac.push_back(json{{"id", f.osm_id},
                        {"category", facility_category_name(f.category)},
                        {"subcategory", f.subcategory},
                        {"location", coord_json(f.location)}});
  }
  json jbld = json::array();
  for (const auto& b : buildings) {
    jbld.push_back(json{{"id", b.osm_id},
                        {"centroid", coord_json(b.centroid)},
                        {"residential", b.is_residential},
                        {"population", b.population_estimate}});
  }
  json jwater = json::array();
  for (const auto& e : water_raw) {
    for (const auto& c : e.geometry) jwater.push_back(coord_json(c));
  }

  json doc{{"city", ctx.cfg.city},
           {"bridges", std::move(jbridges)},
           {"street_ways", std::move(jways)},
           {"facilities", std::move(jfac)},
           {"buildings", std::move(jbld)},
           {"water_vertices", std::move(jwater)},
           {"fetch", json{{"http_requests", stats.http_requests}, {"cache_hits", stats.cache_hits}}}};
  write_json_artifact(ctx.artifact("ingest.json"), doc);
  rec.outputs.push_back(ctx.apath("ingest.json"));
  return rec;
}

FacilityCategory facility_category_from(const std::string& name) {
  if (name == "hospital") return FacilityCategory::Hospital;
  if (name == "school") return FacilityCategory::School;
  if (name == "bus_stop") return FacilityCategory::BusStop;
  if (name == "park") return FacilityCategory::Park;
  if (name == "shop") return FacilityCategory::Shop;
  if (name == "highway_node") return FacilityCategory::HighwayNode;
  throw PipelineError("unknown facility category '" + name + "' in artifact");
}

// ----------------------------------------------------------------- graph --

StageRecord stage_graph(const Ctx& ctx) {
  StageRecord rec;
  rec.name = stage_name(Stage::Graph);
  const fs::path in_path = ctx.artifact("ingest.json");
  rec.inputs.push_back(in_path.string());
  rec.inputs.push_back(ctx.cfg.resolve(ctx.cfg.elevation_path));
  const json doc = load_json_artifact(in_path, "ingest");

  std::vector<RawOsmElement> street_ways;
  for (const auto& el : doc.at("street_ways")) street_ways.push_back(raw_element_from(el));

  std::vector<BridgeRecord> bridges;
  for (const auto& el : doc.at("bridges")) {
    BridgeRecord b;
    b.osm_id = el.at("id").get<std::int64_t>();
    b.name = el.at("name").get<std::string>();
    b.centroid = coord_from(el.at("centroid"));
    for (const auto& [k, v] : el.at("tags").items()) b.tags[k] = v.get<std::string>();
    b.source_pattern = el.at("source").get<std::string>() == "man_made"
                           ? BridgeSource::ManMadeTag
                           : BridgeSource::BridgeTag;
    b.city = el.at("city").get<std::string>();
    bridges.push_back(std::move(b));
  }
  std::vector<FacilityRecord> facilities;
  for (const auto& el : doc.at("facilities")) {
    FacilityRecord f;
    f.osm_id = el.at("id").get<std::int64_t>();
    f.category = facility_category_from(el.at("category").get<std::string>());
    f.subcategory = el.at("subcategory").get<std::string>();
    f.location = coord_from(el.at("location"));
    facilities.push_back(std::move(f));
  }
  std::vector<BuildingRecord> buildings;
  for (const auto& el : doc.at("buildings")) {
    BuildingRecord b;
    b.osm_id = el.at("id").get<std::int64_t>();
    b.centroid = coord_from(el.at("centroid"));
    b.is_residential = el.at("residential").get<bool>();
    b.population_estimate = el.at("population").get<double>();
    b.elevation_m = std::nan("");
    buildings.push_back(b);
  }

  const TransverseMercator tm(ctx.cfg.projection);
  const ElevationRaster raster = load_raster(ctx.cfg);

  StreetBuildStats build_stats;
  StreetGraph streets = build_street_graph(street_ways, tm, &build_stats);
  HeteroGraph h = assemble_hetero_graph(std::move(streets), std::move(bridges),
                                        std::move(facilities), std::move(buildings), tm, &raster);

  json jnodes = json::array();
  for (int v = 0; v < h.streets.node_count(); ++v) {
    const PlanarCoord p = h.streets.node_xy(v);
    jnodes.push_back(json{{"osm", h.streets.node_osm_id(v)},
                          {"x", p.x},
                          {"y", p.y},
                          {"hw", h.streets.is_highway_node(v)}});
  }
  json jedges = json::array();
  for (const StreetEdge& e : h.streets.edges()) {
    jedges.push_back(json{{"u", e.u}, {"v", e.v}, {"len", e.length_m}, {"way", e.way_id}});
  }
  json jbridges = json::array();
  for (std::size_t i = 0; i < h.bridges.size(); ++i) {
    const BridgeRecord& b = h.bridges[i];
    jbridges.push_back(json{{"id", b.osm_id},
                            {"name", b.name},
                            {"centroid", coord_json(b.centroid)},
                            {"tags", b.tags},
                            {"source", bridge_source_name(b.source_pattern)},
                            {"city", b.city},
                            {"xy", xy_json(h.bridge_xy[i])},
                            {"snap_failed", h.snap_failed[i] != 0},
                            {"snaps", h.bridge_snaps[i]}});
  }
  json jsnaps = json::array();
  for (const SnapEdge& s : h.snap_edges) {
    jsnaps.push_back(json{{"bridge", s.bridge}, {"node", s.node}, {"len", s.length_m}});
  }
  json jfac = json::array();
  for (std::size_t i = 0; i < h.facilities.size(); ++i) {
    const FacilityRecord& f = h.facilities[i];
    jfac.push_back(json{{"id", f.osm_id},
                        {"category", facility_category_name(f.category)},
                        {"subcategory", f.subcategory},
                        {"location", coord_json(f.location)},
                        {"xy", xy_json(h.facility_xy[i])},
                        {"node", h.facility_node[i]}});
  }
  json jbld = json::array();
  for (std::size_t i = 0; i < h.buildings.size(); ++i) {
    const BuildingRecord& b = h.buildings[i];
    jbld.push_back(json{{"id", b.osm_id},
                        {"centroid", coord_json(b.centroid)},
                        {"residential", b.is_residential},
                        {"population", b.population_estimate},
                        {"elev", num_or_null(b.elevation_m)},
                        {"xy", xy_json(h.building_xy[i])},
                        {"node", h.building_node[i]}});
  }
  json jelev = json::array();
  for (double v : h.node_elevation) jelev.push_back(num_or_null(v));
  json jprox = json::array();
  for (const auto& list : h.proximity) {
    json row = json::array();
    for (const ProximityEdge& p : list) row.push_back(json{{"f", p.facility}, {"d", p.distance_m}});
    jprox.push_back(std::move(row));
  }
  json jwater = json::array();
  for (const auto& c : doc.at("water_vertices")) {
    jwater.push_back(xy_json(tm.project(coord_from(c))));
  }

  json out{{"city", ctx.cfg.city},
           {"nodes", std::move(jnodes)},
           {"edges", std::move(jedges)},
           {"bridges", std::move(jbridges)},
           {"snap_edges", std::move(jsnaps)},
           {"facilities", std::move(jfac)},
           {"buildings", std::move(jbld)},
           {"node_elevation", std::move(jelev)},
           {"proximity", std::move(jprox)},
           {"water_xy", std::move(jwater)},
           {"build_stats", json{{"degenerate_ways", build_stats.degenerate_ways},
                                {"zero_length_segments", build_stats.zero_length_segments}}}};
  write_json_artifact(ctx.artifact("graph.json"), out);
  rec.outputs.push_back(ctx.apath("graph.json"));
  return rec;
}

// Reloads the hetero graph exactly as assembled: derived members come from
// the artifact verbatim, no re-finalize, so edge and snap indices survive.
struct LoadedGraph {
  HeteroGraph h;
  std::vector<PlanarCoord> water_xy;
};

LoadedGraph load_graph(const Ctx& ctx) {
  const json doc = load_json_artifact(ctx.artifact("graph.json"), "graph");
  LoadedGraph lg;
  HeteroGraph& h = lg.h;

  for (const auto& el : doc.at("nodes")) {
    const int v = h.streets.add_node({el.at("x").get<double>(), el.at("y").get<double>()},
                                     el.at("osm").get<std::int64_t>());
    if (el.at("hw").get<bool>()) h.streets.mark_highway_node(v);
  }
  for (const auto& el : doc.at("edges")) {
    h.streets.add_edge(el.at("u").get<int>(), el.at("v").get<int>(), el.at("len").get<double>(),
                       el.at("way").get<std::int64_t>());
  }
  for (const auto& el : doc.at("bridges")) {
    BridgeRecord b;
    b.osm_id = el.at("id").get<std::int64_t>();
    b.name = el.at("name").get<std::string>();
    b.centroid = coord_from(el.at("centroid"));
    for (const auto& [k, v] : el.at("tags").items()) b.tags[k] = v.get<std::string>();
    b.source_pattern = el.at("source").get<std::string>() == "man_made"
                           ? BridgeSource::ManMadeTag
                           : BridgeSource::BridgeTag;
    b.city = el.at("city").get<std::string>();
    h.bridges.push_back(std::move(b));
    h.bridge_xy.push_back(xy_from(el.at("xy")));
    h.snap_failed.push_back(el.at("snap_failed").get<bool>() ? 1 : 0);
    h.bridge_snaps.push_back(el.at("snaps").get<std::vector<int>>());
  }
  for (const auto& el : doc.at("snap_edges")) {
    h.snap_edges.push_back(
        {el.at("bridge").get<int>(), el.at("node").get<int>(), el.at("len").get<double>()});
  }
  for (const auto& el : doc.at("facilities")) {
    FacilityRecord f;
    f.osm_id = el.at("id").get<std::int64_t>();
    f.category = facility_category_from(el.at("category").get<std::string>());
    f.subcategory = el.at("subcategory").get<std::string>();
    f.location = coord_from(el.at("location"));
    h.facilities.push_back(std::move(f));
    h.facility_xy.push_back(xy_from(el.at("xy")));
    h.facility_node.push_back(el.at("node").get<int>());
  }
  for (const auto& el : doc.at("buildings")) {
    BuildingRecord b;
    b.osm_id = el.at("id").get<std::int64_t>();
    b.centroid = coord_from(el.at("centroid"));
    b.is_residential = el.at("residential").get<bool>();
    b.population_estimate = el.at("population").get<double>();
    b.elevation_m = num_from(el.at("elev"));
    h.buildings.push_back(b);
    h.building_xy.push_back(xy_from(el.at("xy")));
    h.building_node.push_back(el.at("node").get<int>());
  }
  for (const auto& v : doc.at("node_elevation")) h.node_elevation.push_back(num_from(v));
  for (const auto& list : doc.at("proximity")) {
    std::vector<ProximityEdge> row;
    for (const auto& p : list) row.push_back({p.at("f").get<int>(), p.at("d").get<double>()});
    h.proximity.push_back(std::move(row));
  }
  for (const auto& c : doc.at("water_xy")) lg.water_xy.push_back(xy_from(c));
  return lg;
}

// ----------------------------------------------------------------- score --

StageRecord stage_score(const Ctx& ctx) {
  StageRecord rec;
  rec.name = stage_name(Stage::Score);
  rec.inputs.push_back(ctx.apath("graph.json"));
  const LoadedGraph lg = load_graph(ctx);

  const ScoreReport report = score_all(lg.h, ctx.cfg.params, ctx.cfg.weights, ctx.seed);

  json jcards = json::array();
  for (const ScoreCard& c : report.cards) {
    jcards.push_back(json{{"id", c.bridge_osm_id},
                          {"transit", c.transit},
                          {"hospital", c.hospital},
                          {"isolation", c.isolation},
                          {"supply", c.supply},
                          {"green", c.green},
                          {"composite", c.composite},
                          {"snap_failed", c.snap_failed}});
  }
  json doc{{"seed", ctx.seed},
           {"cards", std::move(jcards)},
           {"warnings", report.warnings},
           {"timings", json{{"transit_s", report.timings.transit_s},
                            {"hospital_s", report.timings.hospital_s},
                            {"isolation_s", report.timings.isolation_s},
                            {"supply_s", report.timings.supply_s},
                            {"green_s", report.timings.green_s}}}};
  write_json_artifact(ctx.artifact("scores.json"), doc);
  write_scores_csv(lg.h.bridges, report.cards, ctx.apath("bridges_scored.csv"));
  rec.outputs.push_back(ctx.apath("scores.json"));
  rec.outputs.push_back(ctx.apath("bridges_scored.csv"));
  return rec;
}

std::vector<ScoreCard> load_cards(const Ctx& ctx) {
  const json doc = load_json_artifact(ctx.artifact("scores.json"), "score");
  std::vector<ScoreCard> cards;
  for (const auto& el : doc.at("cards")) {
    ScoreCard c;
    c.bridge_osm_id = el.at("id").get<std::int64_t>();
    c.transit = el.at("transit").get<double>();
    c.hospital = el.at("hospital").get<double>();
    c.isolation = el.at("isolation").get<double>();
    c.supply = el.at("supply").get<double>();
    c.green = el.at("green").get<double>();
    c.composite = el.at("composite").get<double>();
    c.snap_failed = el.at("snap_failed").get<bool>();
    cards.push_back(c);
  }
  return cards;
}

// -------------------------------------------------------------- features --

StageRecord stage_features(const Ctx& ctx) {
  StageRecord rec;
  rec.name = stage_name(Stage::Features);
  rec.inputs.push_back(ctx.apath("graph.json"));
  rec.inputs.push_back(ctx.apath("scores.json"));
  const LoadedGraph lg = load_graph(ctx);
  const std::vector<ScoreCard> cards = load_cards(ctx);
  if (cards.size() != lg.h.bridges.size()) {
    throw PipelineError("scores.json and graph.json disagree on bridge count");
  }
  const ElevationRaster raster = load_raster(ctx.cfg);

  // Exact betweenness below 2000 nodes, 256 sampled sources above.
  const int n = lg.h.streets.node_count();
  const int sources = n < 2000 ? n : 256;
  const std::vector<double> betweenness =
      betweenness_centrality(lg.h.streets, sources, ctx.seed);

  FeatureInputs inputs{lg.h, cards, betweenness, lg.water_xy, &raster};
  FeatureMatrix m = assemble_features(inputs, default_feature_registry());
  drop_zero_variance(m);

  // Raw values go to disk before normalization so the cluster stage can
  // rebuild identical per-cluster statistics from the artifact alone.
  write_features_csv(m, ctx.apath("features_raw.csv"));
  write_feature_stats_csv(m, ctx.apath("feature_stats.csv"));

  zscore_normalize(m);
  write_features_csv(m, ctx.apath("features.csv"));

  const std::vector<char> outliers = flag_outliers(m);
  std::ostringstream out;
  out << "bridge_id,outlier\n";
  for (std::size_t i = 0; i < m.rows(); ++i) {
    out << m.bridge_ids[i] << ',' << (outliers[i] ? "true" : "false") << '\n';
  }
  atomic_write_file(ctx.apath("outliers.csv"), out.str());

  rec.outputs = {ctx.apath("features_raw.csv"), ctx.apath("feature_stats.csv"),
                 ctx.apath("features.csv"), ctx.apath("outliers.csv")};
  return rec;
}

// --------------------------------------------------------------- cluster --

StageRecord stage_cluster(const Ctx& ctx) {
  StageRecord rec;
  rec.name = stage_name(Stage::Cluster);
  const fs::path feat_path = ctx.artifact("features.csv");
  const fs::path raw_path = ctx.artifact("features_raw.csv");
  require_artifact(feat_path, "features");
  require_artifact(raw_path, "features");
  rec.inputs = {feat_path.string(), raw_path.string(), ctx.apath("graph.json")};

  const FeatureMatrix norm = read_features_csv(feat_path.string());
  FeatureMatrix raw = read_features_csv(raw_path.string());
  // The raw file holds only variance-filtered columns; recomputing the stats
  // on the reload reproduces the stage-one numbers bit for bit.
  drop_zero_variance(raw);

  const LoadedGraph lg = load_graph(ctx);
  if (norm.rows() != lg.h.bridges.size()) {
    throw PipelineError("features.csv and graph.json disagree on bridge count");
  }
  std::vector<std::string> bridge_city;
  for (const auto& b : lg.h.bridges) bridge_city.push_back(b.city);

  UmapParams up;
  up.seed = ctx.seed;
  const Embedding emb = umap_embed(norm.values, norm.rows(), norm.cols(), up);
  const ClusterAssignment assign = hdbscan_fit(emb.xy, std::size_t(emb.n), HdbscanParams{});

  write_embedding_csv(emb, assign, norm.bridge_ids, ctx.apath("umap_embedding.csv"));
  const ClusterProfileTable table = profile_clusters(assign, raw, bridge_city);
  write_cluster_statistics_csv(table, ctx.apath("cluster_statistics.csv"));

  rec.outputs = {ctx.apath("umap_embedding.csv"), ctx.apath("cluster_statistics.csv")};
  return rec;
}

// ------------------------------------------------------------- interpret --

StageRecord stage_interpret(const Ctx& ctx) {
  StageRecord rec;
  rec.name = stage_name(Stage::Interpret);
  const fs::path stats_path = ctx.artifact("cluster_statistics.csv");
  require_artifact(stats_path, "cluster");
  rec.inputs.push_back(stats_path.string());

  const ClusterProfileTable table = read_cluster_statistics_csv(stats_path.string());
  const fs::path report_dir = ctx.out / "reports";
  fs::create_directories(report_dir);

  std::vector<TemperatureRun> runs;
  if (!table.rows.empty()) {
    // Reports always come from the configured temperature; sweep runs only
    // feed extra quality rows.
    const std::vector<InterpretationReport> reports = interpret_clusters(ctx.cfg.llm, table);
    std::size_t valid = 0;
    for (const auto& r : reports) valid += r.valid ? 1 : 0;
    if (valid == 0) {
      throw NetworkError("interpretation failed for all " + std::to_string(reports.size()) +
                         " clusters against " + ctx.cfg.llm.endpoint);
    }
    for (const auto& r : reports) {
      const std::string name = "cluster_" + std::to_string(r.cluster_id) + ".md";
      write_report_md(r, (report_dir / name).string());
      rec.outputs.push_back((report_dir / name).string());
    }
    if (ctx.sweep) {
      for (double t : temperature_sweep()) {
        LlmConfig swept = ctx.cfg.llm;
        swept.temperature = t;
        const auto swept_reports = interpret_clusters(swept, table);
        std::size_t swept_valid = 0;
        for (const auto& r : swept_reports) swept_valid += r.valid ? 1 : 0;
        if (swept_valid == 0) {
          throw NetworkError("temperature sweep " + fmt_fixed(t, 2) +
                             " failed for every cluster against " + ctx.cfg.llm.endpoint);
        }
        runs.push_back({t, quality_metrics(swept_reports)});
      }
    } else {
      runs.push_back({ctx.cfg.llm.temperature, quality_metrics(reports)});
    }
  }
  write_quality_metrics_csv(runs, ctx.apath("quality_metrics.csv"));
  rec.outputs.push_back(ctx.apath("quality_metrics.csv"));
  return rec;
}

// ---------------------------------------------------------------- report --

struct EmbeddingRows {
  std::vector<std::int64_t> bridge_ids;
  std::vector<double> xy;
  std::vector<int> labels;
};

EmbeddingRows load_embedding_csv(const fs::path& path) {
  const auto text = read_file(path.string());
  if (!text) throw MissingArtifactError(path.string(), "cluster");
  std::istringstream in(*text);
  std::string line;
  if (!std::getline(in, line) || csv_split(line) != std::vector<std::string>{"bridge_id", "x", "y",
                                                                             "cluster"}) {
    throw PipelineError("unexpected header in " + path.string());
  }
  EmbeddingRows rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = csv_split(line);
    if (cells.size() != 4) throw PipelineError("ragged row in " + path.string());
    rows.bridge_ids.push_back(std::strtoll(cells[0].c_str(), nullptr, 10));
    rows.xy.push_back(std::strtod(cells[1].c_str(), nullptr));
    rows.xy.push_back(std::strtod(cells[2].c_str(), nullptr));
    rows.labels.push_back(int(std::strtol(cells[3].c_str(), nullptr, 10)));
  }
  return rows;
}

StageRecord stage_report(const Ctx& ctx) {
  StageRecord rec;
  rec.name = stage_name(Stage::Report);
  const fs::path emb_path = ctx.artifact("umap_embedding.csv");
  const fs::path stats_path = ctx.artifact("cluster_statistics.csv");
  require_artifact(emb_path, "cluster");
  require_artifact(stats_path, "cluster");
  rec.inputs = {ctx.apath("graph.json"), ctx.apath("scores.json"), emb_path.string(),
                stats_path.string()};

  const LoadedGraph lg = load_graph(ctx);
  const std::vector<ScoreCard> cards = load_cards(ctx);
  const EmbeddingRows emb = load_embedding_csv(emb_path);
  const ClusterProfileTable table = read_cluster_statistics_csv(stats_path.string());

  atomic_write_file(ctx.apath("bridges_scored.geojson"), geojson_scores(lg.h.bridges, cards));
  rec.outputs.push_back(ctx.apath("bridges_scored.geojson"));

  const fs::path plot_dir = ctx.out / "plots";
  fs::create_directories(plot_dir);
  auto emit = [&rec](const std::string& path, const std::string& svg) {
    atomic_write_file(path, svg);
    rec.outputs.push_back(path);
  };

  ScoreMapData map_data;
  map_data.streets = &lg.h.streets;
  map_data.points = lg.h.bridge_xy;
  for (std::size_t i = 0; i < cards.size(); ++i) {
    map_data.scores.push_back(cards[i].composite);
    map_data.snap_failed.push_back(lg.h.snap_failed[i]);
    map_data.names.push_back(lg.h.bridges[i].name);
  }
  emit((plot_dir / "score_map.svg").string(), svg_score_map(map_data));

  // Scatter colored by cluster, then by city of origin.
  ScatterData by_cluster;
  by_cluster.xy = emb.xy;
  by_cluster.labels = emb.labels;
  int max_label = -1;
  for (int l : emb.labels) max_label = std::max(max_label, l);
  for (int l = 0; l <= max_label; ++l) by_cluster.legend.push_back("cluster " + std::to_string(l));
  emit((plot_dir / "umap_scatter_cluster.svg").string(),
       svg_umap_scatter(by_cluster, ColorKey::Cluster));

  std::vector<std::string> cities;
  ScatterData by_city;
  by_city.xy = emb.xy;
  for (const auto& b : lg.h.bridges) {
    int idx = -1;
    for (std::size_t i = 0; i < cities.size(); ++i) {
      if (cities[i] == b.city) idx = int(i);
    }
    if (idx < 0) {
      idx = int(cities.size());
      cities.push_back(b.city);
    }
    by_city.labels.push_back(idx);
  }
  by_city.legend = cities;
  emit((plot_dir / "umap_scatter_city.svg").string(), svg_umap_scatter(by_city, ColorKey::City));

  BarsData bars;
  for (const auto& row : table.rows) {
    bars.cluster_ids.push_back(row.cluster_id);
    bars.sizes.push_back(row.size);
  }
  int clustered = 0;
  for (const auto& row : table.rows) clustered += row.size;
  bars.noise = int(emb.labels.size()) - clustered;
  emit((plot_dir / "cluster_bars.svg").string(), svg_cluster_bars(bars));

  // One radar per cluster over the five closure indicators; indicators that
  // fell to the variance filter sit at z = 0.
  static const char* kSocial[] = {"transit_desert", "hospital_access", "isolation_risk",
                                  "supply_chain", "green_space"};
  for (const auto& row : table.rows) {
    RadarData radar;
    radar.cluster_id = row.cluster_id;
    for (const char* name : kSocial) {
      radar.axes.push_back(name);
      double z = 0.0;
      for (std::size_t c = 0; c < table.feature_names.size(); ++c) {
        if (table.feature_names[c] == name) z = row.z[c];
      }
      radar.z.push_back(z);
    }
    emit((plot_dir / ("radar_cluster_" + std::to_string(row.cluster_id) + ".svg")).string(),
         svg_radar(radar));
  }
  return rec;
}

}  // namespace

const char* stage_name(Stage s) {
  switch (s) {
    case Stage::Ingest: return "ingest";
    case Stage::Graph: return "graph";
    case Stage::Score: return "score";
    case Stage::Features: return "features";
    case Stage::Cluster: return "cluster";
    case Stage::Interpret: return "interpret";
    case Stage::Report: return "report";
  }
  return "unknown";
}

std::vector<Stage> all_stages() {
  std::vector<Stage> out;
  for (int i = 0; i < kStageCount; ++i) out.push_back(Stage(i));
  return out;
}

std::vector<Stage> parse_stages(const std::string& csv) {
  std::set<int> seen;
  std::stringstream in(csv);
  std::string item;
  while (std::getline(in, item, ',')) {
    const std::string name = trim(item);
    if (name.empty()) continue;
    bool found = false;
    for (int i = 0; i < kStageCount; ++i) {
      if (name == stage_name(Stage(i))) {
        seen.insert(i);
        found = true;
        break;
      }
    }
    if (!found) throw ConfigError("unknown stage '" + name + "'");
  }
  if (seen.empty()) throw ConfigError("empty stage list");
  std::vector<Stage> out;
  for (int i : seen) out.push_back(Stage(i));
  return out;
}

RunManifest run_pipeline(const RunOptions& opt) {
  Ctx ctx;
  ctx.cfg = load_config(opt.config_path);
  ctx.seed = opt.seed.value_or(ctx.cfg.rng_seed);
  ctx.sweep = opt.sweep_temperatures;
  ctx.out = opt.out_dir.empty() ? fs::path("out") / ctx.cfg.city : fs::path(opt.out_dir);
  fs::create_directories(ctx.out);

  RunManifest man;
  man.config_path = opt.config_path;
  man.city = ctx.cfg.city;
  man.out_dir = ctx.out.string();
  man.seed = ctx.seed;
  man.sweep_temperatures = ctx.sweep;

  const std::vector<Stage> stages = opt.stages.empty() ? all_stages() : opt.stages;
  for (Stage s : stages) {
    const auto t0 = std::chrono::steady_clock::now();
    StageRecord rec;
    switch (s) {
      case Stage::Ingest: rec = stage_ingest(ctx); break;
      case Stage::Graph: rec = stage_graph(ctx); break;
      case Stage::Score: rec = stage_score(ctx); break;
      case Stage::Features: rec = stage_features(ctx); break;
      case Stage::Cluster: rec = stage_cluster(ctx); break;
      case Stage::Interpret: rec = stage_interpret(ctx); break;
      case Stage::Report: rec = stage_report(ctx); break;
    }
    rec.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    man.stages.push_back(std::move(rec));
  }

  json jstages = json::array();
  for (const StageRecord& r : man.stages) {
    jstages.push_back(json{{"stage", r.name},
                           {"inputs", r.inputs},
                           {"outputs", r.outputs},
                           {"wall_ms", r.wall_ms}});
  }
  json doc{{"config_path", man.config_path},
           {"city", man.city},
           {"out_dir", man.out_dir},
           {"seed", man.seed},
           {"sweep_temperatures", man.sweep_temperatures},
           {"stages", std::move(jstages)}};
  write_json_artifact(ctx.out / "run_manifest.json", doc);
  return man;
}

}  // namespace bridgegraph
