#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "bridgegraph/elevation.hpp"
#include "bridgegraph/hetero.hpp"
#include "bridgegraph/scoring.hpp"

namespace bridgegraph {

struct FeatureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class FeatureGroup { Social, Topology, Spatial, Facility, Attribute };

std::string feature_group_name(FeatureGroup g);

// One feature column: a display name, its group, and an extractor id that
// assemble_features dispatches on. Extractor grammar:
//   score:<indicator>           ScoreCard field copy
//   topo:<metric>               street-graph metric over the snap nodes
//   spatial:<metric>            coordinates, elevation, water distance
//   fac:count:<category>:<r>    facility count within r meters of the bridge
//   fac:dist_log:<category>     log1p nearest facility distance, -1 if none
//   attr:onehot:<key>:<value>   1 when tag key equals value, else 0
//   attr:flag:<key>             1 when tag key present, else 0
//   attr:num:<key>              leading numeric tag value, -1 when absent
//                               (except layer, whose absence means level 0)
struct FeatureSpec {
  std::string name;
  FeatureGroup group;
  std::string extractor;
};

// The default registry: 5 social, 8 topology, 6 spatial, 15 facility,
// 18 attribute columns, 52 total.
std::vector<FeatureSpec> default_feature_registry();

// Numeric tag columns referenced by some bridge narratives (voltage, gauge,
// frequency, passenger lines). Not part of the default 52; callers can
// append them to a custom registry.
std::vector<FeatureSpec> optional_attribute_features();

struct FeatureMatrix {
  std::vector<std::int64_t> bridge_ids;
  std::vector<std::string> names;
  std::vector<FeatureGroup> groups;
  std::vector<double> values;  // row-major, bridges x features
  std::vector<char> retained;  // per feature, set by drop_zero_variance
  std::vector<double> mean;    // raw-column population stats
  std::vector<double> stddev;
  bool normalized = false;

  std::size_t rows() const { return bridge_ids.size(); }
  std::size_t cols() const { return names.size(); }
  double& at(std::size_t r, std::size_t c) { return values[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols() + c]; }
  std::size_t retained_count() const;
};

// Everything the extractors read. `cards` aligns with h.bridges;
// `betweenness` is per street node; `water_xy` may be empty (the water
// distance column then stays constant and is dropped by variance filtering).
struct FeatureInputs {
  const HeteroGraph& h;
  const std::vector<ScoreCard>& cards;
  const std::vector<double>& betweenness;
  std::vector<PlanarCoord> water_xy;
  const ElevationRaster* raster = nullptr;
};

// Fills one column per registry entry for every bridge. Throws FeatureError
// on an extractor id the dispatcher does not recognize.
FeatureMatrix assemble_features(const FeatureInputs& in,
                                const std::vector<FeatureSpec>& registry);

// Computes raw column stats and clears `retained` where Var <= 1e-6.
void drop_zero_variance(FeatureMatrix& m);

// Transforms every retained column to (x - mean) / stddev using population
// stddev. Requires drop_zero_variance to have run.
void zscore_normalize(FeatureMatrix& m);

// A bridge is an outlier when more than three of its retained normalized
// features sit beyond |z| = 3.
std::vector<char> flag_outliers(const FeatureMatrix& m);

// CSV round-trip. features.csv carries only retained columns; stats list
// every column with its retained flag. Values print with %.17g so re-import
// is bit-exact.
void write_features_csv(const FeatureMatrix& m, const std::string& path);
FeatureMatrix read_features_csv(const std::string& path);
void write_feature_stats_csv(const FeatureMatrix& m, const std::string& path);

}  // namespace bridgegraph
