#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "bridgegraph/geo.hpp"

namespace bridgegraph {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BBox {
  double min_lat = 0.0;
  double min_lon = 0.0;
  double max_lat = 0.0;
  double max_lon = 0.0;
};

struct TransitParams {
  double impact_radius = 5000.0;  // meters around the bridge that can be affected
  int k_bus = 5;                  // candidate stops per residence
  double theta = 500.0;           // detour (m) beyond which a residence counts as affected
  double n_norm = 500.0;          // affected-count normalizer
  int sample_cap = 300;           // residences sampled per bridge
};

struct HospitalParams {
  int k_hosp = 3;
  double d_norm = 1000.0;
  double influence_radius = 5000.0;
};

struct IsolationParams {
  double elev_threshold = 100.0;  // meters; at or above counts as high ground
  double radius = 3000.0;
};

struct SupplyParams {
  int k_highway = 3;
  double d_norm = 1000.0;
  double food_weight = 1.5;
  double base_weight = 1.0;
  double influence_radius = 5000.0;
};

struct GreenParams {
  int k_park = 3;
  double d_norm = 1000.0;
};

struct IndicatorParams {
  TransitParams transit;
  HospitalParams hospital;
  IsolationParams isolation;
  SupplyParams supply;
  GreenParams green;
  double population_per_residence = 2.5;
};

struct WeightVector {
  double transit = 0.2;
  double hospital = 0.2;
  double isolation = 0.2;
  double supply = 0.2;
  double green = 0.2;
  double sum() const { return transit + hospital + isolation + supply + green; }
};

struct LlmConfig {
  std::string endpoint = "http://127.0.0.1:8089/v1/chat/completions";
  std::string model = "local-llm";
  double temperature = 0.3;
  double timeout_s = 30.0;
  int max_retries = 2;
};

struct PipelineConfig {
  BBox bbox;
  ProjectionParams projection;
  std::string elevation_path;
  std::string overpass_url = "https://overpass-api.de/api/interpreter";
  std::string cache_dir = "cache";
  std::uint64_t rng_seed = 42;
  WeightVector weights;
  IndicatorParams params;
  LlmConfig llm;

  // Derived, not part of the file: directory holding the config (anchor for
  // relative paths) and the provenance label (config file stem).
  std::string base_dir;
  std::string city;

  // Resolve a possibly-relative path against base_dir.
  std::string resolve(const std::string& path) const;
};

// Parses and validates the YAML config. Missing optional keys take the
// defaults above; bbox and elevation_path are required. Throws ConfigError
// with the offending key in the message.
PipelineConfig load_config(const std::string& path);

// Validation shared by load_config and programmatic construction.
void validate_config(const PipelineConfig& cfg);

}  // namespace bridgegraph
