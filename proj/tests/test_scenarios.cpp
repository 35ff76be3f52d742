#include "support.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "sbs/scenarios.hpp"

using namespace sbs;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("sbs_scenarios_test_" + name);
  fs::remove_all(dir);
  return dir;
}

ScenarioConfig quick() {
  ScenarioConfig c;
  c.run.samples = 20;
  c.run.time = TimeGrid{0.0, 3.0, 16};
  c.run.tau = 20.0;
  c.run.tau_points = 401;
  c.run.total_spins = 40;
  c.run.macro_size = 20;
  c.fig1.lambda_points = 3;
  c.fig1.beta_points = 3;
  c.fig2.n_values = {5, 10};
  c.timescales.cases = {{20, 40, 0.5}};
  c.discrimination = {11, 20};
  c.verify.convention_draws = 20;
  c.verify.qubit_instances = 10;
  c.verify.qutrit_instances = 2;
  c.verify.late_instances = 2;
  c.verify.fuchs_instances = 10;
  return c;
}

}  // namespace

TEST_CASE("configuration round trip") {
  const ScenarioConfig defaults;
  const std::string text = to_json_text(defaults);
  CHECK(to_json_text(parse_config(text)) == text);

  const std::string custom = to_json_text(quick());
  CHECK(to_json_text(parse_config(custom)) == custom);

  const ScenarioConfig partial = parse_config(R"({"seed": 7, "fig2": {"n_values": [3]}})");
  CHECK(partial.run.seed == 7);
  CHECK(partial.fig2.n_values == std::vector<std::size_t>{3});
  CHECK(partial.run.samples == defaults.run.samples);

  const ScenarioConfig fixed = parse_config(
      R"({"measure": {"angles": {"kind": "fixed", "alpha": 0, "beta": 1.5, "gamma": 0},
                      "lambda": {"kind": "fixed", "value": 0.9}, "coupling": {"kind": "fixed", "g": 0.5}}})");
  CHECK(std::get<FixedAngles>(fixed.run.measure.angles).beta == 1.5);
  CHECK(std::get<FixedLambda>(fixed.run.measure.lambda).lambda == 0.9);
  CHECK(std::get<FixedCoupling>(fixed.run.measure.coupling).g == 0.5);
}

TEST_CASE("configuration errors name the offending key") {
  CHECK_THROWS_WITH_AS(parse_config(R"({"sed": 1})"), doctest::Contains("sed"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(R"({"time": {"pints": 3}})"), doctest::Contains("time.pints"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(R"({"samples": -3})"), doctest::Contains("samples"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(R"({"samples": "many"})"), doctest::Contains("samples"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(R"({"format_version": 2})"), doctest::Contains("format_version"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(R"({"measure": {"angles": {"kind": "sobol"}}})"),
                       doctest::Contains("measure.angles.kind"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config("{"), doctest::Contains("invalid JSON"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(R"({"environment": {"observed_fraction": 0.333}})"),
                       doctest::Contains("observed_fraction"), ConfigError);
  CHECK_THROWS_AS(run_scenario("fig3", ScenarioConfig{}, scratch("unknown")), ConfigError);
}

TEST_CASE("manifests are accepted as configurations") {
  const fs::path dir = scratch("manifest");
  const auto res = run_scenario("timescales", quick(), dir);
  CHECK(res.status == ExitCode::kSuccess);
  CHECK(res.outputs.back() == fs::path("manifest.json"));
  std::optional<std::string> hint;
  const ScenarioConfig again = load_config(dir / "manifest.json", &hint);
  REQUIRE(hint.has_value());
  CHECK(*hint == "timescales");
  CHECK(to_json_text(again) == to_json_text(quick()));
  fs::remove_all(dir);
}

TEST_CASE("every scenario reruns byte for byte") {
  for (const auto& name : scenario_names()) {
    CAPTURE(name);
    const fs::path a = scratch(name + "_a");
    const fs::path b = scratch(name + "_b");
    ScenarioConfig c = quick();
    const auto ra = run_scenario(name, c, a);
    c.run.threads = 2;
    c.verify.threads = 2;
    const auto rb = run_scenario(name, c, b);
    CHECK(ra.status == rb.status);
    REQUIRE(ra.outputs.size() == rb.outputs.size());
    for (const auto& out : ra.outputs) {
      if (out.extension() != ".csv") continue;
      CHECK(slurp(a / out) == slurp(b / out));
    }
    fs::remove_all(a);
    fs::remove_all(b);
  }
}

TEST_CASE("fig2 table layout") {
  const fs::path dir = scratch("fig2");
  run_scenario("fig2", quick(), dir);
  std::istringstream in(slurp(dir / "fig2_n5.csv"));
  std::string header, first;
  std::getline(in, header);
  std::getline(in, first);
  CHECK(header == "t,mean_bound,stderr");
  CHECK(first == "0,2,0");
  fs::remove_all(dir);
}

TEST_CASE("timescales row") {
  const fs::path dir = scratch("timescales");
  ScenarioConfig c = quick();
  c.timescales.cases = {{100, 200, 0.5}};
  run_scenario("timescales", c, dir);
  const std::string text = slurp(dir / "timescales.csv");
  CHECK(text.find("0.83112906813455") != std::string::npos);
  CHECK(text.find(",4,") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("verification failures map to their exit code") {
  const fs::path dir = scratch("verify");
  ScenarioConfig c = quick();
  c.verify.qubit_instances = 200;
  const auto res = run_scenario("verify", c, dir);
  // The sum-of-errors bound is violated on part of the qubit corpus.
  CHECK(res.status == ExitCode::kVerificationFailure);
  const std::string report = slurp(dir / "verify.json");
  CHECK(report.find("\"all_passed\": false") != std::string::npos);
  CHECK(report.find("proposition1_helstrom") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("number formatting round trips") {
  CHECK(format_number(0.0) == "0");
  CHECK(format_number(2.0) == "2");
  for (double x : {0.1, 1.0 / 3.0, 6.02214076e23, -1e-300}) CHECK(std::stod(format_number(x)) == x);
}
