#pragma once

// Named experiment scenarios: configuration file, runners and artifact
// emission (CSV tables, JSON reports and a manifest per run).
//
// Configuration grammar (JSON, format_version 1); every key is optional and
// unknown keys are rejected:
//
//   {
//     "format_version": 1,
//     "seed": 20240917, "threads": 1, "samples": 400,
//     "measure": {
//       "angles":   {"kind": "haar"} | {"kind": "fixed", "alpha": a, "beta": b, "gamma": c},
//       "lambda":   {"kind": "hilbert_schmidt"} | {"kind": "fixed", "value": l},
//       "coupling": {"kind": "uniform", "lo": 0, "hi": 1} | {"kind": "fixed", "g": g}
//     },
//     "environment": {"total_spins": 200, "macro_size": 100, "observed_fraction": 0.5},
//     "time": {"t_min": 0, "t_max": 10, "points": 201},
//     "fig1": {"lambda_points": 11, "beta_points": 13, "samples": 2, "tau": 200,
//              "tau_points": 40000, "unobserved": 0},
//     "fig2": {"n_values": [30, 50, 200, 500]},
//     "timescales": {"cases": [{"macro_size": 100, "total_spins": 200, "observed_fraction": 0.5}]},
//     "discrimination": {"macro_size": 51, "instances": 200},
//     "verify": {"convention_draws": 1000, "qubit_instances": 200, "qutrit_instances": 50,
//                "late_instances": 100, "fuchs_instances": 500, "fuchs_macro_size": 51}
//   }
//
// A manifest written by a previous run is also accepted: its "config" member
// is read and its "scenario" member is used when no scenario is given.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sbs/ensemble.hpp"
#include "sbs/oracle.hpp"

namespace sbs {

inline constexpr int kConfigFormatVersion = 1;

enum class ExitCode : int { kSuccess = 0, kConfigError = 1, kVerificationFailure = 2, kGateFailure = 3 };

struct Fig1Settings {
  std::size_t lambda_points = 11;
  std::size_t beta_points = 13;
  std::size_t samples = 2;     // coupling realisations per node
  std::size_t unobserved = 0;  // 0 means N_m
  // tau and tau_points live in RunConfig
};

struct Fig2Settings {
  std::vector<std::size_t> n_values{30, 50, 200, 500};
};

struct TimescaleCase {
  std::size_t macro_size = 100;
  std::size_t total_spins = 200;
  double observed_fraction = 0.5;
};

struct TimescaleSettings {
  std::vector<TimescaleCase> cases{{100, 200, 0.5}, {1000, 2000, 0.5}};
};

struct DiscriminationSettings {
  std::size_t macro_size = 51;
  std::size_t instances = 200;
};

struct ScenarioConfig {
  RunConfig run;
  Fig1Settings fig1;
  Fig2Settings fig2;
  TimescaleSettings timescales;
  DiscriminationSettings discrimination;
  VerifyOptions verify;

  void validate() const;
};

/// Parses configuration text (or a manifest). Throws ConfigError naming the
/// offending key. `scenario_hint` receives the manifest's scenario, if any.
ScenarioConfig parse_config(const std::string& text, std::optional<std::string>* scenario_hint = nullptr);
ScenarioConfig load_config(const std::filesystem::path& path, std::optional<std::string>* scenario_hint = nullptr);
/// Full configuration including defaults; parse_config(to_json_text(c)) == c.
std::string to_json_text(const ScenarioConfig& config);

inline const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names{"fig1", "fig2", "timescales", "discrimination", "verify"};
  return names;
}

struct RunResult {
  ExitCode status = ExitCode::kSuccess;
  std::vector<std::filesystem::path> outputs;  // relative to the output directory, manifest last
  std::string message;
};

/// Runs one scenario, writing its artifacts and manifest.json into out_dir.
/// Throws ConfigError for an unknown scenario or invalid configuration.
RunResult run_scenario(const std::string& name, const ScenarioConfig& config, const std::filesystem::path& out_dir);

/// printf("%.17g") with '.' decimal regardless of locale.
std::string format_number(double value);

}  // namespace sbs
