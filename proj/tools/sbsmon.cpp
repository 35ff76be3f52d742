// sbsmon: runs one named scenario and writes its artifacts plus a manifest.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include "sbs/scenarios.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Spectrum broadcast structure monitor for the central-spin model"};
  app.set_version_flag("--version", std::string(SBS_VERSION));

  std::string scenario;
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<std::size_t> samples;

  app.add_option("--scenario", scenario, "fig1 | fig2 | timescales | discrimination | verify");
  app.add_option("--config", config_path, "JSON configuration or a previous run's manifest.json");
  app.add_option("--seed", seed, "master seed (overrides the configuration)");
  app.add_option("--out-dir", out_dir, "directory receiving CSV/JSON artifacts")->capture_default_str();
  app.add_option("--threads", threads, "worker threads (overrides the configuration)")->check(CLI::PositiveNumber);
  app.add_option("--samples", samples, "Monte Carlo samples (overrides the configuration)")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : static_cast<int>(sbs::ExitCode::kConfigError);
  }

  try {
    std::optional<std::string> hinted;
    sbs::ScenarioConfig config = config_path.empty() ? sbs::ScenarioConfig{} : sbs::load_config(config_path, &hinted);
    if (scenario.empty()) {
      if (!hinted) throw sbs::ConfigError("--scenario", "required (or pass a manifest via --config)");
      scenario = *hinted;
    }
    if (seed) config.run.seed = *seed;
    if (threads) config.run.threads = *threads;
    if (samples) config.run.samples = *samples;
    config.verify.seed = config.run.seed;
    config.verify.threads = config.run.threads;

    const auto result = sbs::run_scenario(scenario, config, out_dir);
    for (const auto& p : result.outputs) std::printf("%s\n", (std::filesystem::path(out_dir) / p).string().c_str());
    if (!result.message.empty()) std::fprintf(stderr, "sbsmon: %s\n", result.message.c_str());
    return static_cast<int>(result.status);
  } catch (const sbs::ConfigError& e) {
    std::fprintf(stderr, "sbsmon: configuration error: %s\n", e.what());
    return static_cast<int>(sbs::ExitCode::kConfigError);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "sbsmon: %s\n", e.what());
    return static_cast<int>(sbs::ExitCode::kConfigError);
  }
}
