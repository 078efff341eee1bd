#include "bridgegraph/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <filesystem>

namespace bridgegraph {
namespace {

namespace fs = std::filesystem;

template <typename T>
T get_or(const YAML::Node& node, const char* key, T fallback) {
  if (!node || !node[key]) return fallback;
  try {
    return node[key].as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(std::string("config key '") + key + "' has the wrong type");
  }
}

double require_double(const YAML::Node& node, const char* section, const char* key) {
  if (!node || !node[key])
    throw ConfigError(std::string("missing required config key '") + section + "." + key + "'");
  try {
    return node[key].as<double>();
  } catch (const YAML::Exception&) {
    throw ConfigError(std::string("config key '") + section + "." + key + "' is not a number");
  }
}

}  // namespace

std::string PipelineConfig::resolve(const std::string& path) const {
  fs::path p(path);
  if (p.is_absolute() || base_dir.empty()) return path;
  return (fs::path(base_dir) / p).lexically_normal().string();
}

PipelineConfig load_config(const std::string& path) {
  if (!fs::exists(path)) throw ConfigError("config file not found: " + path);

  YAML::Node root;
  try {
    root = YAML::LoadFile(path);
  } catch (const YAML::Exception& e) {
    throw ConfigError("config parse failure in " + path + ": " + e.what());
  }

  PipelineConfig cfg;
  cfg.base_dir = fs::absolute(fs::path(path)).parent_path().string();
  cfg.city = fs::path(path).stem().string();

  const YAML::Node bbox = root["bbox"];
  cfg.bbox.min_lat = require_double(bbox, "bbox", "min_lat");
  cfg.bbox.min_lon = require_double(bbox, "bbox", "min_lon");
  cfg.bbox.max_lat = require_double(bbox, "bbox", "max_lat");
  cfg.bbox.max_lon = require_double(bbox, "bbox", "max_lon");

  if (const YAML::Node proj = root["projection"]) {
    cfg.projection.lat0 = get_or(proj, "lat0", cfg.projection.lat0);
    cfg.projection.lon0 = get_or(proj, "lon0", cfg.projection.lon0);
    cfg.projection.k0 = get_or(proj, "k0", cfg.projection.k0);
    cfg.projection.false_easting = get_or(proj, "false_easting", cfg.projection.false_easting);
    cfg.projection.false_northing = get_or(proj, "false_northing", cfg.projection.false_northing);
  }

  if (!root["elevation_path"])
    throw ConfigError("missing required config key 'elevation_path'");
  cfg.elevation_path = root["elevation_path"].as<std::string>();

  cfg.overpass_url = get_or(root, "overpass_url", cfg.overpass_url);
  cfg.cache_dir = get_or(root, "cache_dir", cfg.cache_dir);
  cfg.rng_seed = get_or<std::uint64_t>(root, "rng_seed", cfg.rng_seed);

  if (const YAML::Node w = root["weights"]) {
    cfg.weights.transit = get_or(w, "transit", cfg.weights.transit);
    cfg.weights.hospital = get_or(w, "hospital", cfg.weights.hospital);
    cfg.weights.isolation = get_or(w, "isolation", cfg.weights.isolation);
    cfg.weights.supply = get_or(w, "supply", cfg.weights.supply);
    cfg.weights.green = get_or(w, "green", cfg.weights.green);
  }

  if (const YAML::Node ip = root["indicator_params"]) {
    if (const YAML::Node t = ip["transit"]) {
      cfg.params.transit.impact_radius = get_or(t, "impact_radius", cfg.params.transit.impact_radius);
      cfg.params.transit.k_bus = get_or(t, "k_bus", cfg.params.transit.k_bus);
      cfg.params.transit.theta = get_or(t, "theta", cfg.params.transit.theta);
      cfg.params.transit.n_norm = get_or(t, "n_norm", cfg.params.transit.n_norm);
      cfg.params.transit.sample_cap = get_or(t, "sample_cap", cfg.params.transit.sample_cap);
    }
    if (const YAML::Node h = ip["hospital"]) {
      cfg.params.hospital.k_hosp = get_or(h, "k_hosp", cfg.params.hospital.k_hosp);
      cfg.params.hospital.d_norm = get_or(h, "d_norm", cfg.params.hospital.d_norm);
      cfg.params.hospital.influence_radius =
          get_or(h, "influence_radius", cfg.params.transit.impact_radius);
    } else {
      cfg.params.hospital.influence_radius = cfg.params.transit.impact_radius;
    }
    if (const YAML::Node i = ip["isolation"]) {
      cfg.params.isolation.elev_threshold = get_or(i, "elev_threshold", cfg.params.isolation.elev_threshold);
      cfg.params.isolation.radius = get_or(i, "radius", cfg.params.isolation.radius);
    }
    if (const YAML::Node s = ip["supply"]) {
      cfg.params.supply.k_highway = get_or(s, "k_highway", cfg.params.supply.k_highway);
      cfg.params.supply.d_norm = get_or(s, "d_norm", cfg.params.supply.d_norm);
      cfg.params.supply.food_weight = get_or(s, "food_weight", cfg.params.supply.food_weight);
      cfg.params.supply.base_weight = get_or(s, "base_weight", cfg.params.supply.base_weight);
      cfg.params.supply.influence_radius =
          get_or(s, "influence_radius", cfg.params.transit.impact_radius);
    } else {
      cfg.params.supply.influence_radius = cfg.params.transit.impact_radius;
    }
    if (const YAML::Node g = ip["green"]) {
      cfg.params.green.k_park = get_or(g, "k_park", cfg.params.green.k_park);
      cfg.params.green.d_norm = get_or(g, "d_norm", cfg.params.green.d_norm);
    }
    cfg.params.population_per_residence =
        get_or(ip, "population_per_residence", cfg.params.population_per_residence);
  }

  if (const YAML::Node llm = root["llm"]) {
    cfg.llm.endpoint = get_or(llm, "endpoint", cfg.llm.endpoint);
    cfg.llm.model = get_or(llm, "model", cfg.llm.model);
    cfg.llm.temperature = get_or(llm, "temperature", cfg.llm.temperature);
    cfg.llm.timeout_s = get_or(llm, "timeout_s", cfg.llm.timeout_s);
    cfg.llm.max_retries = get_or(llm, "max_retries", cfg.llm.max_retries);
  }

  validate_config(cfg);
  return cfg;
}

void validate_config(const PipelineConfig& cfg) {
  if (!(cfg.bbox.min_lat < cfg.bbox.max_lat))
    throw ConfigError("bbox.min_lat must be below bbox.max_lat");
  if (!(cfg.bbox.min_lon < cfg.bbox.max_lon))
    throw ConfigError("bbox.min_lon must be below bbox.max_lon");
  if (cfg.elevation_path.empty()) throw ConfigError("elevation_path must not be empty");

  const WeightVector& w = cfg.weights;
  for (double v : {w.transit, w.hospital, w.isolation, w.supply, w.green}) {
    if (!(v >= 0.0)) throw ConfigError("indicator weights must be non-negative");
  }
  if (std::fabs(w.sum() - 1.0) > 1e-9)
    throw ConfigError("indicator weights must sum to 1 (got " + std::to_string(w.sum()) + ")");

  if (!(cfg.projection.k0 > 0.0)) throw ConfigError("projection.k0 must be positive");
  if (cfg.params.transit.k_bus <= 0 || cfg.params.hospital.k_hosp <= 0 ||
      cfg.params.supply.k_highway <= 0 || cfg.params.green.k_park <= 0)
    throw ConfigError("indicator k parameters must be positive");
  if (!(cfg.params.transit.n_norm > 0.0)) throw ConfigError("transit.n_norm must be positive");
  if (!(cfg.params.hospital.d_norm > 0.0) || !(cfg.params.supply.d_norm > 0.0) ||
      !(cfg.params.green.d_norm > 0.0))
    throw ConfigError("indicator d_norm parameters must be positive");
  if (cfg.params.transit.sample_cap <= 0)
    throw ConfigError("transit.sample_cap must be positive");
  if (!(cfg.llm.temperature >= 0.0)) throw ConfigError("llm.temperature must be >= 0");
  if (cfg.llm.max_retries < 0) throw ConfigError("llm.max_retries must be >= 0");
}

}  // namespace bridgegraph
