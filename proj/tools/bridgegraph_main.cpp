#include <CLI11.hpp>

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <string>
#include <thread>

#include "bridgegraph/config.hpp"
#include "bridgegraph/fixtures.hpp"
#include "bridgegraph/http_util.hpp"
#include "bridgegraph/mock_llm.hpp"
#include "bridgegraph/pipeline.hpp"

namespace {

// Exit codes: 0 success, 2 configuration or usage error, 3 missing
// predecessor artifact, 4 network failure, 1 anything else.
constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitConfig = 2;
constexpr int kExitMissingArtifact = 3;
constexpr int kExitNetwork = 4;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bridge closure impact pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  std::string stages_csv;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool sweep = false;

  CLI::App* run = app.add_subcommand("run", "run pipeline stages for one city config");
  run->add_option("--config", config_path, "pipeline config YAML")->required();
  run->add_option("--stages", stages_csv,
                  "comma-separated subset of "
                  "ingest,graph,score,features,cluster,interpret,report (default: all)");
  CLI::Option* seed_opt = run->add_option("--seed", seed, "override the config RNG seed");
  run->add_flag("--sweep-temperatures", sweep,
                "interpret stage: one quality row per sweep temperature");
  run->add_option("--out", out_dir, "output directory (default: out/<city>)");

  std::string fixture_city = "synthetic-small";
  std::string fixture_out = "fixtures";
  CLI::App* fixtures = app.add_subcommand("fixtures", "synthetic city tooling");
  fixtures->require_subcommand(1);
  CLI::App* gen = fixtures->add_subcommand("gen", "write a synthetic city with a warm cache");
  gen->add_option("--city", fixture_city, "synthetic-small or synthetic-ridge");
  gen->add_option("--out", fixture_out, "directory to write the city under (default: fixtures)");

  int mock_port = 18731;
  CLI::App* mock = app.add_subcommand("mock-llm", "serve the deterministic mock model");
  mock->add_option("--port", mock_port, "listen port on 127.0.0.1 (default: 18731)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (run->parsed()) {
      bridgegraph::RunOptions opt;
      opt.config_path = config_path;
      if (!stages_csv.empty()) opt.stages = bridgegraph::parse_stages(stages_csv);
      if (seed_opt->count() > 0) opt.seed = seed;
      opt.sweep_temperatures = sweep;
      opt.out_dir = out_dir;
      const bridgegraph::RunManifest man = bridgegraph::run_pipeline(opt);
      std::printf("completed %zu stage(s) for %s; manifest at %s/run_manifest.json\n",
                  man.stages.size(), man.city.c_str(), man.out_dir.c_str());
      return kExitOk;
    }
    if (gen->parsed()) {
      const std::string cfg = bridgegraph::generate_fixture_city(fixture_city, fixture_out);
      std::printf("fixture city '%s' written; config at %s\n", fixture_city.c_str(), cfg.c_str());
      return kExitOk;
    }
    if (mock->parsed()) {
      bridgegraph::MockLlmServer server(mock_port);
      std::printf("mock model serving %s\n", server.endpoint().c_str());
      std::fflush(stdout);
      for (;;) std::this_thread::sleep_for(std::chrono::hours(1));
    }
  } catch (const bridgegraph::MissingArtifactError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitMissingArtifact;
  } catch (const bridgegraph::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const bridgegraph::NetworkError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNetwork;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitOther;
  }
  return kExitOk;
}
