#include "sbs/ensemble.hpp"

#include <algorithm>
#include <cmath>

#include "sbs/parallel.hpp"

namespace sbs {

namespace {

// Stream tags keep the pipelines' random streams disjoint.
constexpr std::uint64_t kFig1Tag = 1;
constexpr std::uint64_t kFig2Tag = 2;
constexpr std::uint64_t kExponentTag = 3;

// Exact cos/sin are recomputed every this many recurrence steps.
constexpr std::size_t kResyncInterval = 64;

// Samples B(t) and |gamma(t)| on the fine grid for spins sharing (lambda, beta).
// cos/sin(g t) advance by complex rotation, resynchronised periodically.
void shared_state_traces(double lambda_plus, double beta, std::span<const double> observed_g,
                         std::span<const double> unobserved_g, double tau, std::size_t fine_points,
                         std::vector<double>& b_out, std::vector<double>& gamma_out) {
  const double contrast = (2.0 * lambda_plus - 1.0) * (2.0 * lambda_plus - 1.0);
  const double a = contrast * std::sin(beta) * std::sin(beta);
  const double one_minus_v2 = 1.0 - contrast * std::cos(beta) * std::cos(beta);
  const double dt = tau / static_cast<double>(fine_points - 1);

  auto trace = [&](std::span<const double> couplings, auto&& factor, std::vector<double>& out) {
    out.assign(fine_points, 1.0);
    const std::size_t n = couplings.size();
    std::vector<double> c(n), s(n), step_c(n), step_s(n);
    for (std::size_t j = 0; j < n; ++j) {
      step_c[j] = std::cos(couplings[j] * dt);
      step_s[j] = std::sin(couplings[j] * dt);
    }
    for (std::size_t k = 0; k < fine_points; ++k) {
      const double t = static_cast<double>(k) * dt;
      if (k % kResyncInterval == 0) {
        for (std::size_t j = 0; j < n; ++j) {
          c[j] = std::cos(couplings[j] * t);
          s[j] = std::sin(couplings[j] * t);
        }
      }
      double prod = 1.0;
      for (std::size_t j = 0; j < n; ++j) prod *= factor(c[j], s[j]);
      out[k] = prod;
      for (std::size_t j = 0; j < n; ++j) {
        const double cn = c[j] * step_c[j] - s[j] * step_s[j];
        s[j] = s[j] * step_c[j] + c[j] * step_s[j];
        c[j] = cn;
      }
    }
  };

  trace(observed_g, [a](double, double s) { return std::sqrt(std::max(0.0, 1.0 - a * s * s)); }, b_out);
  trace(unobserved_g,
        [one_minus_v2](double, double s) { return std::sqrt(std::max(0.0, 1.0 - one_minus_v2 * s * s)); },
        gamma_out);
}

}  // namespace

std::vector<double> TimeGrid::values() const {
  std::vector<double> out(points);
  for (std::size_t k = 0; k < points; ++k)
    out[k] = t_min + (t_max - t_min) * static_cast<double>(k) / static_cast<double>(points - 1);
  return out;
}

void RunConfig::validate() const {
  if (samples < 1) throw ConfigError("samples", "must be >= 1");
  if (threads < 1) throw ConfigError("threads", "must be >= 1");
  if (time.points < 2) throw ConfigError("time.points", "must be >= 2");
  if (!(time.t_min >= 0.0)) throw ConfigError("time.t_min", "must be >= 0");
  if (!(time.t_max > time.t_min)) throw ConfigError("time.t_max", "must exceed time.t_min");
  if (!(tau > 0.0)) throw ConfigError("tau", "must be > 0");
  if (tau_points < 2) throw ConfigError("tau_points", "must be >= 2");
  if (macro_size < 1) throw ConfigError("macro_size", "must be >= 1");
  if (total_spins < 1) throw ConfigError("total_spins", "must be >= 1");
  if (!(observed_fraction >= 0.0 && observed_fraction <= 1.0))
    throw ConfigError("observed_fraction", "must lie in [0, 1]");
  const double observed = observed_fraction * static_cast<double>(total_spins);
  if (std::abs(observed - std::round(observed)) > 1e-9)
    throw ConfigError("observed_fraction", "f * N must be an integer number of spins");
  if (observed_spins() % macro_size != 0)
    throw ConfigError("macro_size", "observed spins f * N must split into whole macrofractions of N_m");
  try {
    measure.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("measure", e.what());
  }
}

std::size_t RunConfig::observed_spins() const {
  return static_cast<std::size_t>(std::llround(observed_fraction * static_cast<double>(total_spins)));
}

std::size_t RunConfig::unobserved_spins() const { return total_spins - observed_spins(); }

double trapezoid_average(std::span<const double> samples) {
  if (samples.size() < 2) throw std::invalid_argument("trapezoid_average: need at least two nodes");
  std::vector<double> weighted(samples.begin(), samples.end());
  weighted.front() *= 0.5;
  weighted.back() *= 0.5;
  return pairwise_sum(weighted) / static_cast<double>(samples.size() - 1);
}

double time_average(const std::function<double(double)>& curve, double tau, std::size_t grid_points) {
  if (!(tau > 0.0)) throw std::invalid_argument("time_average: tau must be > 0");
  if (grid_points < 2) throw std::invalid_argument("time_average: need at least two grid points");
  std::vector<double> samples(grid_points);
  for (std::size_t k = 0; k < grid_points; ++k)
    samples[k] = curve(tau * static_cast<double>(k) / static_cast<double>(grid_points - 1));
  return trapezoid_average(samples);
}

RefinedAverage refined_trapezoid_average(std::span<const double> fine_samples) {
  if (fine_samples.size() < 3 || fine_samples.size() % 2 == 0)
    throw std::invalid_argument("refined_trapezoid_average: need an odd number (>= 3) of nodes");
  std::vector<double> coarse;
  coarse.reserve(fine_samples.size() / 2 + 1);
  for (std::size_t k = 0; k < fine_samples.size(); k += 2) coarse.push_back(fine_samples[k]);
  RefinedAverage out;
  out.value = trapezoid_average(coarse);
  out.refined = trapezoid_average(fine_samples);
  const double scale = std::abs(out.refined);
  out.relative_change = scale > 0.0 ? std::abs(out.refined - out.value) / scale : std::abs(out.value);
  return out;
}

bool converged(const RefinedAverage& avg) {
  return std::abs(avg.refined - avg.value) <= 1e-3 * std::abs(avg.refined) + 1e-12;
}

std::vector<Fig1Row> fig1_surface(const RunConfig& config, std::span<const double> lambda_grid,
                                  std::span<const double> beta_grid, std::size_t unobserved) {
  config.validate();
  if (lambda_grid.empty() || beta_grid.empty()) throw std::invalid_argument("fig1_surface: empty grid");
  const std::size_t n_obs = config.macro_size;
  const std::size_t n_unobs = unobserved == 0 ? config.macro_size : unobserved;
  const std::size_t fine_points = 2 * (config.tau_points - 1) + 1;
  const std::size_t nodes = lambda_grid.size() * beta_grid.size();
  const std::size_t reps = config.samples;

  struct Cell {
    RefinedAverage b, gamma;
  };
  std::vector<Cell> cells(nodes * reps);

  parallel_for(nodes * reps, config.threads, [&](std::size_t idx) {
    const std::size_t node = idx / reps;
    const std::size_t rep = idx % reps;
    const double lam = lambda_grid[node / beta_grid.size()];
    const double beta = beta_grid[node % beta_grid.size()];
    SampleStream stream(config.seed, {kFig1Tag, node, rep});
    MeasureSpec couplings_only = config.measure;
    couplings_only.angles = FixedAngles{0.0, 0.0, 0.0};
    couplings_only.lambda = FixedLambda{1.0};
    std::vector<double> g_obs(n_obs), g_unobs(n_unobs);
    for (auto& g : g_obs) g = sample_spin(couplings_only, stream).g;
    for (auto& g : g_unobs) g = sample_spin(couplings_only, stream).g;
    std::vector<double> b_trace, gamma_trace;
    shared_state_traces(lam, beta, g_obs, g_unobs, config.tau, fine_points, b_trace, gamma_trace);
    cells[idx] = Cell{refined_trapezoid_average(b_trace), refined_trapezoid_average(gamma_trace)};
  });

  std::vector<Fig1Row> rows;
  rows.reserve(nodes);
  for (std::size_t node = 0; node < nodes; ++node) {
    std::vector<double> bs(reps), gs(reps);
    Fig1Row row;
    row.lambda_plus = lambda_grid[node / beta_grid.size()];
    row.beta = beta_grid[node % beta_grid.size()];
    for (std::size_t r = 0; r < reps; ++r) {
      const Cell& cell = cells[node * reps + r];
      bs[r] = cell.b.value;
      gs[r] = cell.gamma.value;
      row.worst_refinement = std::max({row.worst_refinement, cell.b.relative_change, cell.gamma.relative_change});
      row.converged = row.converged && converged(cell.b) && converged(cell.gamma);
    }
    const auto eb = estimate_mean(bs);
    const auto eg = estimate_mean(gs);
    row.mean_b = eb.mean;
    row.stderr_b = eb.std_error;
    row.mean_abs_gamma = eg.mean;
    row.stderr_gamma = eg.std_error;
    rows.push_back(row);
  }
  return rows;
}

std::vector<Fig2Curve> fig2_curves(std::span<const std::size_t> n_values, const RunConfig& config) {
  config.validate();
  if (n_values.empty()) throw std::invalid_argument("fig2_curves: n_values must be nonempty");
  const auto times = config.time.values();
  std::vector<Fig2Curve> out;
  for (std::size_t n : n_values) {
    if (n == 0) throw std::invalid_argument("fig2_curves: macrofraction size must be >= 1");
    std::vector<std::vector<double>> per_sample(config.samples);
    parallel_for(config.samples, config.threads, [&](std::size_t s) {
      SampleStream stream(config.seed, {kFig2Tag, n, s});
      std::vector<SpinParams> unobserved(n), observed(n);
      for (auto& p : unobserved) p = sample_spin(config.measure, stream);
      for (auto& p : observed) p = sample_spin(config.measure, stream);
      auto& row = per_sample[s];
      row.resize(times.size());
      for (std::size_t k = 0; k < times.size(); ++k) {
        const double gamma_abs = std::exp(log_decoherence_factor(unobserved, times[k]).log_abs);
        const double b = std::exp(-log_macrofraction_fidelity(observed, times[k]));
        row[k] = gamma_abs + b;
      }
    });
    Fig2Curve curve;
    curve.n = n;
    curve.curve.abscissa = times;
    curve.curve.samples = config.samples;
    std::vector<double> column(config.samples);
    for (std::size_t k = 0; k < times.size(); ++k) {
      for (std::size_t s = 0; s < config.samples; ++s) column[s] = per_sample[s][k];
      const auto est = estimate_mean(column);
      curve.curve.mean.push_back(est.mean);
      curve.curve.std_error.push_back(est.std_error);
    }
    out.push_back(std::move(curve));
  }
  return out;
}

std::vector<ExponentRow> exponent_check(const MeasureSpec& measure, std::span<const double> t_grid,
                                        std::size_t samples, std::uint64_t seed, unsigned threads) {
  measure.validate();
  if (samples == 0) throw std::invalid_argument("exponent_check: samples must be >= 1");
  std::vector<SpinParams> draws(samples);
  parallel_for(samples, threads, [&](std::size_t i) {
    SampleStream stream(seed, {kExponentTag, i});
    draws[i] = sample_spin(measure, stream);
  });
  const double g2bar = measure.mean_g2();
  std::vector<ExponentRow> rows;
  std::vector<double> kappa(samples), chi(samples);
  for (double t : t_grid) {
    parallel_for(samples, threads, [&](std::size_t i) {
      const auto e = lln_exponents(draws[i], t);
      kappa[i] = e.kappa;
      chi[i] = e.chi;
    });
    const auto ek = estimate_mean(kappa);
    const auto ec = estimate_mean(chi);
    const auto st = short_time_exponents(g2bar, t);
    rows.push_back(ExponentRow{t, ek.mean, ec.mean, st.kappa, st.chi, ek.std_error, ec.std_error});
  }
  return rows;
}

}  // namespace sbs
