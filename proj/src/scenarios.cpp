#include "sbs/scenarios.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>
#include <type_traits>

#include "sbs/discrimination.hpp"
#include "sbs/parallel.hpp"

namespace sbs {

using json = nlohmann::json;

namespace {

constexpr std::uint64_t kDiscriminationTag = 4;
constexpr std::uint64_t kMacroInstanceTag = 5;

// Reads one JSON object, remembering which keys were consumed.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "must be an object");
  }

  std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* find(const std::string& key) {
    seen_.insert(key);
    const auto it = node_.find(key);
    return it == node_.end() ? nullptr : &*it;
  }

  void read(const std::string& key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) throw ConfigError(key_path(key), "must be a number");
      out = v->get<double>();
      if (!std::isfinite(out)) throw ConfigError(key_path(key), "must be finite");
    }
  }

  template <class Int>
    requires std::is_integral_v<Int>
  void read(const std::string& key, Int& out) {
    if (const json* v = find(key)) out = to_integer<Int>(*v, key_path(key));
  }

  void read(const std::string& key, std::vector<std::size_t>& out) {
    if (const json* v = find(key)) {
      if (!v->is_array()) throw ConfigError(key_path(key), "must be an array of integers");
      out.clear();
      for (std::size_t i = 0; i < v->size(); ++i)
        out.push_back(to_integer<std::size_t>((*v)[i], key_path(key) + "[" + std::to_string(i) + "]"));
    }
  }

  std::optional<Section> child(const std::string& key) {
    if (const json* v = find(key)) return Section(*v, key_path(key));
    return std::nullopt;
  }

  std::string kind() {
    const json* v = find("kind");
    if (!v || !v->is_string()) throw ConfigError(key_path("kind"), "must be a string");
    return v->get<std::string>();
  }

  void finish() const {
    for (const auto& item : node_.items())
      if (!seen_.contains(item.key())) throw ConfigError(key_path(item.key()), "unknown key");
  }

 private:
  template <class Int>
  static Int to_integer(const json& v, const std::string& where) {
    if (v.is_number_unsigned()) {
      const auto raw = v.get<std::uint64_t>();
      if (raw > std::numeric_limits<Int>::max()) throw ConfigError(where, "out of range");
      return static_cast<Int>(raw);
    }
    if (v.is_number_integer()) throw ConfigError(where, "must be non-negative");
    throw ConfigError(where, "must be an integer");
  }

  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

MeasureSpec parse_measure(Section& sec) {
  MeasureSpec m;
  if (auto angles = sec.child("angles")) {
    const std::string kind = angles->kind();
    if (kind == "haar") {
      m.angles = HaarAngles{};
    } else if (kind == "fixed") {
      FixedAngles f;
      angles->read("alpha", f.alpha);
      angles->read("beta", f.beta);
      angles->read("gamma", f.gamma_euler);
      m.angles = f;
    } else {
      throw ConfigError(angles->key_path("kind"), "expected \"haar\" or \"fixed\", got \"" + kind + "\"");
    }
    angles->finish();
  }
  if (auto lambda = sec.child("lambda")) {
    const std::string kind = lambda->kind();
    if (kind == "hilbert_schmidt") {
      m.lambda = HilbertSchmidtLambda{};
    } else if (kind == "fixed") {
      FixedLambda f;
      lambda->read("value", f.lambda);
      m.lambda = f;
    } else {
      throw ConfigError(lambda->key_path("kind"), "expected \"hilbert_schmidt\" or \"fixed\", got \"" + kind + "\"");
    }
    lambda->finish();
  }
  if (auto coupling = sec.child("coupling")) {
    const std::string kind = coupling->kind();
    if (kind == "uniform") {
      UniformCoupling u;
      coupling->read("lo", u.lo);
      coupling->read("hi", u.hi);
      m.coupling = u;
    } else if (kind == "fixed") {
      FixedCoupling f;
      coupling->read("g", f.g);
      m.coupling = f;
    } else {
      throw ConfigError(coupling->key_path("kind"), "expected \"uniform\" or \"fixed\", got \"" + kind + "\"");
    }
    coupling->finish();
  }
  sec.finish();
  return m;
}

json measure_to_json(const MeasureSpec& m) {
  json out;
  if (const auto* f = std::get_if<FixedAngles>(&m.angles))
    out["angles"] = {{"kind", "fixed"}, {"alpha", f->alpha}, {"beta", f->beta}, {"gamma", f->gamma_euler}};
  else
    out["angles"] = {{"kind", "haar"}};
  if (const auto* f = std::get_if<FixedLambda>(&m.lambda))
    out["lambda"] = {{"kind", "fixed"}, {"value", f->lambda}};
  else
    out["lambda"] = {{"kind", "hilbert_schmidt"}};
  if (const auto* f = std::get_if<FixedCoupling>(&m.coupling)) {
    out["coupling"] = {{"kind", "fixed"}, {"g", f->g}};
  } else {
    const auto& u = std::get<UniformCoupling>(m.coupling);
    out["coupling"] = {{"kind", "uniform"}, {"lo", u.lo}, {"hi", u.hi}};
  }
  return out;
}

ScenarioConfig config_from_json(const json& root) {
  ScenarioConfig c;
  Section top(root, "");
  std::size_t version = kConfigFormatVersion;
  top.read("format_version", version);
  if (version != static_cast<std::size_t>(kConfigFormatVersion))
    throw ConfigError("format_version", "unsupported version " + std::to_string(version) + ", expected " +
                                            std::to_string(kConfigFormatVersion));
  top.read("seed", c.run.seed);
  top.read("threads", c.run.threads);
  top.read("samples", c.run.samples);
  if (auto m = top.child("measure")) c.run.measure = parse_measure(*m);
  if (auto env = top.child("environment")) {
    env->read("total_spins", c.run.total_spins);
    env->read("macro_size", c.run.macro_size);
    env->read("observed_fraction", c.run.observed_fraction);
    env->finish();
  }
  if (auto time = top.child("time")) {
    time->read("t_min", c.run.time.t_min);
    time->read("t_max", c.run.time.t_max);
    time->read("points", c.run.time.points);
    time->finish();
  }
  if (auto fig1 = top.child("fig1")) {
    fig1->read("lambda_points", c.fig1.lambda_points);
    fig1->read("beta_points", c.fig1.beta_points);
    fig1->read("samples", c.fig1.samples);
    fig1->read("tau", c.run.tau);
    fig1->read("tau_points", c.run.tau_points);
    fig1->read("unobserved", c.fig1.unobserved);
    fig1->finish();
  }
  if (auto fig2 = top.child("fig2")) {
    fig2->read("n_values", c.fig2.n_values);
    fig2->finish();
  }
  if (auto ts = top.child("timescales")) {
    if (const json* cases = ts->find("cases")) {
      if (!cases->is_array()) throw ConfigError("timescales.cases", "must be an array");
      c.timescales.cases.clear();
      for (std::size_t i = 0; i < cases->size(); ++i) {
        Section item((*cases)[i], "timescales.cases[" + std::to_string(i) + "]");
        TimescaleCase tc;
        item.read("macro_size", tc.macro_size);
        item.read("total_spins", tc.total_spins);
        item.read("observed_fraction", tc.observed_fraction);
        item.finish();
        c.timescales.cases.push_back(tc);
      }
    }
    ts->finish();
  }
  if (auto d = top.child("discrimination")) {
    d->read("macro_size", c.discrimination.macro_size);
    d->read("instances", c.discrimination.instances);
    d->finish();
  }
  if (auto v = top.child("verify")) {
    v->read("convention_draws", c.verify.convention_draws);
    v->read("qubit_instances", c.verify.qubit_instances);
    v->read("qutrit_instances", c.verify.qutrit_instances);
    v->read("late_instances", c.verify.late_instances);
    v->read("fuchs_instances", c.verify.fuchs_instances);
    v->read("fuchs_macro_size", c.verify.fuchs_macro_size);
    v->finish();
  }
  top.finish();
  c.verify.seed = c.run.seed;
  c.verify.threads = c.run.threads;
  c.validate();
  return c;
}

json config_to_json(const ScenarioConfig& c) {
  json out;
  out["format_version"] = kConfigFormatVersion;
  out["seed"] = c.run.seed;
  out["threads"] = c.run.threads;
  out["samples"] = c.run.samples;
  out["measure"] = measure_to_json(c.run.measure);
  out["environment"] = {{"total_spins", c.run.total_spins},
                        {"macro_size", c.run.macro_size},
                        {"observed_fraction", c.run.observed_fraction}};
  out["time"] = {{"t_min", c.run.time.t_min}, {"t_max", c.run.time.t_max}, {"points", c.run.time.points}};
  out["fig1"] = {{"lambda_points", c.fig1.lambda_points}, {"beta_points", c.fig1.beta_points},
                 {"samples", c.fig1.samples},             {"tau", c.run.tau},
                 {"tau_points", c.run.tau_points},        {"unobserved", c.fig1.unobserved}};
  out["fig2"] = {{"n_values", c.fig2.n_values}};
  json cases = json::array();
  for (const auto& tc : c.timescales.cases)
    cases.push_back({{"macro_size", tc.macro_size},
                     {"total_spins", tc.total_spins},
                     {"observed_fraction", tc.observed_fraction}});
  out["timescales"] = {{"cases", cases}};
  out["discrimination"] = {{"macro_size", c.discrimination.macro_size}, {"instances", c.discrimination.instances}};
  out["verify"] = {{"convention_draws", c.verify.convention_draws}, {"qubit_instances", c.verify.qubit_instances},
                   {"qutrit_instances", c.verify.qutrit_instances}, {"late_instances", c.verify.late_instances},
                   {"fuchs_instances", c.verify.fuchs_instances},   {"fuchs_macro_size", c.verify.fuchs_macro_size}};
  return out;
}

std::vector<double> linspace(double lo, double hi, std::size_t points) {
  if (points == 1) return {lo};
  std::vector<double> out(points);
  for (std::size_t k = 0; k < points; ++k)
    out[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(points - 1);
  return out;
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::initializer_list<const char*> header)
      : out_(path, std::ios::binary | std::ios::trunc), path_(path) {
    if (!out_) throw std::runtime_error("cannot open " + path.string() + " for writing");
    bool first = true;
    for (const char* h : header) {
      if (!first) out_ << ',';
      out_ << h;
      first = false;
    }
    out_ << '\n';
  }

  void row(std::initializer_list<double> values) {
    bool first = true;
    for (double v : values) {
      if (!first) out_ << ',';
      out_ << format_number(v);
      first = false;
    }
    out_ << '\n';
  }

  ~CsvWriter() noexcept(false) {
    out_.flush();
    if (!out_ && std::uncaught_exceptions() == 0) throw std::runtime_error("write failed: " + path_.string());
  }

 private:
  std::ofstream out_;
  std::filesystem::path path_;
};

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out.flush()) throw std::runtime_error("write failed: " + path.string());
}

RunResult run_fig1(const ScenarioConfig& c, const std::filesystem::path& dir) {
  RunConfig run = c.run;
  run.samples = c.fig1.samples;
  const auto lambdas = linspace(0.5, 1.0, c.fig1.lambda_points);
  const auto betas = linspace(0.0, std::numbers::pi, c.fig1.beta_points);
  const auto rows = fig1_surface(run, lambdas, betas, c.fig1.unobserved);

  RunResult result;
  {
    CsvWriter csv(dir / "fig1.csv", {"lambda_plus", "beta", "mean_B", "mean_abs_gamma", "stderr_B", "stderr_gamma"});
    for (const auto& r : rows) csv.row({r.lambda_plus, r.beta, r.mean_b, r.mean_abs_gamma, r.stderr_b, r.stderr_gamma});
  }
  result.outputs.emplace_back("fig1.csv");

  const auto worst = std::max_element(rows.begin(), rows.end(), [](const Fig1Row& a, const Fig1Row& b) {
    return a.worst_refinement < b.worst_refinement;
  });
  const std::size_t unconverged =
      static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const Fig1Row& r) { return !r.converged; }));
  if (unconverged > 0) {
    result.status = ExitCode::kGateFailure;
    result.message = std::to_string(unconverged) + " node(s) failed the time-average convergence gate; worst relative change " +
                     format_number(worst->worst_refinement) + " at lambda_plus=" + format_number(worst->lambda_plus) +
                     ", beta=" + format_number(worst->beta) + " (increase fig1.tau_points)";
  }
  return result;
}

RunResult run_fig2(const ScenarioConfig& c, const std::filesystem::path& dir) {
  RunResult result;
  for (const auto& curve : fig2_curves(c.fig2.n_values, c.run)) {
    const std::string name = "fig2_n" + std::to_string(curve.n) + ".csv";
    CsvWriter csv(dir / name, {"t", "mean_bound", "stderr"});
    for (std::size_t k = 0; k < curve.curve.abscissa.size(); ++k)
      csv.row({curve.curve.abscissa[k], curve.curve.mean[k], curve.curve.std_error[k]});
    result.outputs.emplace_back(name);
  }
  return result;
}

RunResult run_timescales(const ScenarioConfig& c, const std::filesystem::path& dir) {
  const double g2bar = c.run.measure.mean_g2();
  RunResult result;
  {
    CsvWriter csv(dir / "timescales.csv",
                  {"N_m", "N", "f", "g2bar", "t_B", "t_D", "ratio_sq", "B_at_tB", "gamma2_at_tD"});
    for (std::size_t i = 0; i < c.timescales.cases.size(); ++i) {
      const auto& tc = c.timescales.cases[i];
      TimeScales ts;
      try {
        ts = time_scales(tc.total_spins, tc.macro_size, tc.observed_fraction, g2bar);
      } catch (const std::invalid_argument& e) {
        throw ConfigError("timescales.cases[" + std::to_string(i) + "]", e.what());
      }
      const double times[2] = {ts.t_broadcast, ts.t_decoherence};
      const auto exps = exponent_check(c.run.measure, times, c.run.samples, c.run.seed, c.run.threads);
      const double n_unobs = (1.0 - tc.observed_fraction) * static_cast<double>(tc.total_spins);
      csv.row({static_cast<double>(tc.macro_size), static_cast<double>(tc.total_spins), tc.observed_fraction, g2bar,
               ts.t_broadcast, ts.t_decoherence, ts.ratio_sq,
               std::exp(-0.5 * static_cast<double>(tc.macro_size) * exps[0].kappa_mc),
               std::exp(-n_unobs * exps[1].chi_mc)});
    }
  }
  result.outputs.emplace_back("timescales.csv");
  return result;
}

RunResult run_discrimination(const ScenarioConfig& c, const std::filesystem::path& dir) {
  const auto times = c.run.time.values();
  const std::size_t n_m = c.discrimination.macro_size;
  const std::size_t instances = c.discrimination.instances;

  // Heterogeneous macrofractions, drawn once and reused at every t.
  std::vector<std::vector<SpinParams>> macros(instances);
  parallel_for(instances, c.run.threads, [&](std::size_t s) {
    SampleStream stream(c.run.seed, {kMacroInstanceTag, s});
    macros[s].resize(n_m);
    for (auto& p : macros[s]) p = sample_spin(c.run.measure, stream);
  });

  RunResult result;
  {
    CsvWriter csv(dir / "discrimination.csv", {"t", "p_bar", "S_bar", "p_tilde_exact", "chernoff_lb", "K",
                                               "fuchs_limit", "p_tilde_heterogeneous", "fuchs_ok_fraction"});
    std::vector<double> p_tilde(instances), k_values(instances), limits(instances), ok(instances);
    for (double t : times) {
      const auto ms = mean_success(c.run.measure, t, c.run.samples, c.run.seed, c.run.threads, kDiscriminationTag);
      const auto stats = majority_stats(n_m, ms.p_bar);
      parallel_for(instances, c.run.threads, [&](std::size_t s) {
        std::vector<double> probs;
        probs.reserve(n_m);
        for (const auto& p : macros[s]) probs.push_back(local_success_probability(p, t));
        p_tilde[s] = majority_success_heterogeneous(probs);
        const auto kf = kolmogorov_fuchs(p_tilde[s], macrofraction_fidelity(macros[s], t));
        k_values[s] = kf.k;
        limits[s] = kf.fuchs_limit;
        ok[s] = kf.ok ? 1.0 : 0.0;
      });
      csv.row({t, ms.p_bar, ms.s_bar, stats.p_tilde_exact, stats.chernoff_lb, estimate_mean(k_values).mean,
               estimate_mean(limits).mean, estimate_mean(p_tilde).mean, estimate_mean(ok).mean});
    }
  }
  result.outputs.emplace_back("discrimination.csv");
  return result;
}

RunResult run_verify(const ScenarioConfig& c, const std::filesystem::path& dir) {
  VerifyOptions opts = c.verify;
  opts.seed = c.run.seed;
  opts.threads = c.run.threads;
  const auto report = run_verification(opts);

  json suites = json::array();
  std::size_t failures = 0;
  for (const auto& s : report.suites) {
    suites.push_back({{"name", s.name}, {"passed", s.passed}, {"failed", s.failed}, {"worst_margin", s.worst_margin}});
    failures += s.failed;
  }
  const json doc = {{"seed", opts.seed}, {"all_passed", report.all_passed()}, {"failures", failures}, {"suites", suites}};
  write_text(dir / "verify.json", doc.dump(2) + "\n");

  RunResult result;
  result.outputs.emplace_back("verify.json");
  if (!report.all_passed()) {
    result.status = ExitCode::kVerificationFailure;
    std::string failed;
    for (const auto& s : report.suites)
      if (!s.ok()) failed += (failed.empty() ? "" : ", ") + s.name;
    result.message = "verification failed: " + failed;
  }
  return result;
}

}  // namespace

void ScenarioConfig::validate() const {
  run.validate();
  if (fig1.lambda_points < 1) throw ConfigError("fig1.lambda_points", "must be >= 1");
  if (fig1.beta_points < 1) throw ConfigError("fig1.beta_points", "must be >= 1");
  if (fig1.samples < 1) throw ConfigError("fig1.samples", "must be >= 1");
  if (fig2.n_values.empty()) throw ConfigError("fig2.n_values", "must be nonempty");
  for (std::size_t n : fig2.n_values)
    if (n == 0) throw ConfigError("fig2.n_values", "macrofraction sizes must be >= 1");
  for (std::size_t i = 0; i < timescales.cases.size(); ++i) {
    const auto& tc = timescales.cases[i];
    const std::string where = "timescales.cases[" + std::to_string(i) + "]";
    if (tc.macro_size < 2) throw ConfigError(where + ".macro_size", "must be >= 2");
    if (!(tc.observed_fraction >= 0.0 && tc.observed_fraction < 1.0))
      throw ConfigError(where + ".observed_fraction", "must lie in [0, 1)");
    if (tc.total_spins < 1) throw ConfigError(where + ".total_spins", "must be >= 1");
  }
  if (discrimination.macro_size < 1) throw ConfigError("discrimination.macro_size", "must be >= 1");
  if (discrimination.instances < 1) throw ConfigError("discrimination.instances", "must be >= 1");
  if (verify.qubit_instances + verify.qutrit_instances + verify.late_instances == 0)
    throw ConfigError("verify", "at least one oracle instance is required");
  if (verify.fuchs_macro_size < 1) throw ConfigError("verify.fuchs_macro_size", "must be >= 1");
}

ScenarioConfig parse_config(const std::string& text, std::optional<std::string>* scenario_hint) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<file>", std::string("invalid JSON: ") + e.what());
  }
  if (root.is_object() && root.contains("config") && root.contains("manifest_version")) {
    if (scenario_hint && root.contains("scenario") && root["scenario"].is_string())
      *scenario_hint = root["scenario"].get<std::string>();
    return config_from_json(root["config"]);
  }
  return config_from_json(root);
}

ScenarioConfig load_config(const std::filesystem::path& path, std::optional<std::string>* scenario_hint) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("--config", "cannot read " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), scenario_hint);
}

std::string to_json_text(const ScenarioConfig& config) { return config_to_json(config).dump(2) + "\n"; }

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

RunResult run_scenario(const std::string& name, const ScenarioConfig& config, const std::filesystem::path& out_dir) {
  if (std::find(scenario_names().begin(), scenario_names().end(), name) == scenario_names().end())
    throw ConfigError("--scenario", "unknown scenario \"" + name + "\"");
  config.validate();
  std::filesystem::create_directories(out_dir);

  const auto start = std::chrono::steady_clock::now();
  RunResult result;
  if (name == "fig1")
    result = run_fig1(config, out_dir);
  else if (name == "fig2")
    result = run_fig2(config, out_dir);
  else if (name == "timescales")
    result = run_timescales(config, out_dir);
  else if (name == "discrimination")
    result = run_discrimination(config, out_dir);
  else
    result = run_verify(config, out_dir);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  result.outputs.emplace_back("manifest.json");
  json outputs = json::array();
  for (const auto& p : result.outputs) outputs.push_back(p.generic_string());
  const json manifest = {{"manifest_version", 1},
                         {"artifact", "sbs_monitor"},
                         {"version", SBS_VERSION},
                         {"scenario", name},
                         {"seed", config.run.seed},
                         {"config", config_to_json(config)},
                         {"outputs", outputs},
                         {"wall_time_seconds", wall},
                         {"exit_code", static_cast<int>(result.status)},
                         {"message", result.message}};
  write_text(out_dir / "manifest.json", manifest.dump(2) + "\n");
  return result;
}

}  // namespace sbs
