#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bridgegraph/config.hpp"

namespace bridgegraph {

struct PipelineError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A stage was asked to run but a predecessor's artifact is absent. The
// message names both the file and the stage that produces it.
struct MissingArtifactError : std::runtime_error {
  MissingArtifactError(const std::string& file, const std::string& producer)
      : std::runtime_error("missing artifact " + file + "; run the '" + producer +
                           "' stage first"),
        path(file) {}
  std::string path;
};

// The linear stage chain. Every stage persists its full result, so any
// suffix of the chain can rerun from disk without touching the stages
// before it.
enum class Stage { Ingest, Graph, Score, Features, Cluster, Interpret, Report };
inline constexpr int kStageCount = 7;

const char* stage_name(Stage s);
std::vector<Stage> all_stages();

// Parses a comma-separated stage list ("cluster,interpret"). Unknown names
// throw ConfigError. Duplicates collapse; the result is in chain order.
std::vector<Stage> parse_stages(const std::string& csv);

struct StageRecord {
  std::string name;
  std::vector<std::string> inputs;   // files read (artifacts, config, caches)
  std::vector<std::string> outputs;  // files written
  double wall_ms = 0.0;
};

struct RunManifest {
  std::string config_path;
  std::string city;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool sweep_temperatures = false;
  std::vector<StageRecord> stages;
};

struct RunOptions {
  std::string config_path;
  std::vector<Stage> stages;          // empty = the whole chain
  std::optional<std::uint64_t> seed;  // overrides the config seed
  bool sweep_temperatures = false;    // interpret: quality row per sweep temperature
  std::string out_dir;                // empty = out/<city> under the working directory
};

// Runs the requested stages in chain order against <out_dir> and writes
// run_manifest.json there. All randomness is seeded, every artifact except
// the wall-time fields and the report timestamps is byte-reproducible.
// Throws ConfigError (bad config / stage list), MissingArtifactError,
// NetworkError (overpass or LLM endpoint down), PipelineError.
RunManifest run_pipeline(const RunOptions& opt);

}  // namespace bridgegraph
