#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "bridgegraph/geo.hpp"
#include "bridgegraph/osm.hpp"
#include "bridgegraph/scoring.hpp"
#include "bridgegraph/street_graph.hpp"

namespace bridgegraph {

struct PlotError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class PlotKind { ScoreMap, UmapScatter, ClusterBars, Radar };

// Color key for the embedding scatter: points tinted by cluster label
// (noise = -1 draws gray) or by city index.
enum class ColorKey { Cluster, City };

// Five-stop gradient over [0, 100], linear RGB interpolation between
// adjacent stops; input clamped. The stops, low to high:
//   0 #2c7bb6, 25 #abd9e9, 50 #ffffbf, 75 #fdae61, 100 #d7191c
// so 0 and 100 hit the endpoint colors exactly.
std::string score_color(double score);

// Categorical palette (ten hues, cycled); label -1 always maps to the noise
// gray #9e9e9e.
std::string class_color(int label);

struct ScoreMapData {
  const StreetGraph* streets = nullptr;  // light underlay; may be null
  std::vector<PlanarCoord> points;       // bridge positions
  std::vector<double> scores;            // composite per bridge, [0, 100]
  std::vector<char> snap_failed;         // gray, dashed outline when set
  std::vector<std::string> names;        // hover titles
};

struct ScatterData {
  std::vector<double> xy;           // n x 2, row-major
  std::vector<int> labels;          // cluster ids (-1 noise) or city indices
  std::vector<std::string> legend;  // text per non-negative label value
};

struct BarsData {
  std::vector<int> cluster_ids;  // aligned with sizes
  std::vector<int> sizes;
  int noise = 0;  // appended as a gray bar when > 0
};

struct RadarData {
  int cluster_id = 0;
  std::vector<std::string> axes;  // indicator names, one spoke each
  std::vector<double> z;          // aligned; clamped to [-3, 3] radially
};

// Each renderer returns a complete self-contained SVG document. All
// coordinates print with two decimals, so identical inputs give identical
// bytes.
std::string svg_score_map(const ScoreMapData& d);
std::string svg_umap_scatter(const ScatterData& d, ColorKey key);
std::string svg_cluster_bars(const BarsData& d);
std::string svg_radar(const RadarData& d);

struct PlotSpec {
  PlotKind kind = PlotKind::ScoreMap;
  ColorKey color_key = ColorKey::Cluster;  // scatter only
  std::string out_path;
};

// Data slots for emit_plot; only the slot matching the spec's kind is read.
struct PlotData {
  const ScoreMapData* score_map = nullptr;
  const ScatterData* scatter = nullptr;
  const BarsData* bars = nullptr;
  const RadarData* radar = nullptr;
};

// Dispatches on spec.kind and writes the SVG to spec.out_path. Throws
// PlotError on an unknown kind or a missing data slot.
void emit_plot(const PlotSpec& spec, const PlotData& data);

// GeoJSON FeatureCollection: one Point feature per bridge in WGS84 lon/lat
// (seven decimals), properties mirroring the bridges_scored.csv columns with
// scores rounded to four decimals and snap_failed as a boolean.
std::string geojson_scores(const std::vector<BridgeRecord>& bridges,
                           const std::vector<ScoreCard>& cards);

}  // namespace bridgegraph
