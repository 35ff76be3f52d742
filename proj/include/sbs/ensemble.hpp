#pragma once

// Monte Carlo averaging over random environments, time averages, and the
// pipelines behind the fig1 / fig2 / exponent tables.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sbs/sampling.hpp"
#include "sbs/spin_model.hpp"

namespace sbs {

/// Invalid configuration; field() names the offending key (dotted path).
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

struct TimeGrid {
  double t_min = 0.0;
  double t_max = 10.0;
  std::size_t points = 201;

  std::vector<double> values() const;
};

struct RunConfig {
  std::uint64_t seed = 20240917;
  unsigned threads = 1;
  std::size_t samples = 400;
  MeasureSpec measure;

  std::size_t total_spins = 200;   // N
  std::size_t macro_size = 100;    // N_m
  double observed_fraction = 0.5;  // f; observed spins f N form f N / N_m macrofractions

  TimeGrid time;
  double tau = 200.0;              // time-average horizon
  std::size_t tau_points = 40000;  // trapezoid nodes on [0, tau]

  /// Throws ConfigError naming the first inconsistent field.
  void validate() const;
  std::size_t observed_spins() const;
  std::size_t unobserved_spins() const;
};

struct AverageCurve {
  std::vector<double> abscissa;
  std::vector<double> mean;
  std::vector<double> std_error;
  std::size_t samples = 0;
};

/// Trapezoidal (1/tau) int_0^tau f(t) dt on `grid_points` equispaced nodes.
double time_average(const std::function<double(double)>& curve, double tau, std::size_t grid_points);

/// Trapezoidal average of samples on an equispaced grid covering [0, tau].
double trapezoid_average(std::span<const double> samples);

struct RefinedAverage {
  double value = 0.0;          // on the requested grid
  double refined = 0.0;        // on the grid with every interval halved
  double relative_change = 0.0;
};

/// Both averages from one pass over 2 * (grid_points - 1) + 1 nodes.
RefinedAverage refined_trapezoid_average(std::span<const double> fine_samples);

/// |fine - coarse| <= 1e-3 |fine| + 1e-12
bool converged(const RefinedAverage& avg);

struct Fig1Row {
  double lambda_plus = 0.0;
  double beta = 0.0;
  double mean_b = 0.0;
  double mean_abs_gamma = 0.0;
  double stderr_b = 0.0;
  double stderr_gamma = 0.0;
  double worst_refinement = 0.0;  // largest relative change under grid refinement
  bool converged = true;
};

/// Time-averaged B(t) over an observed macrofraction of N_m spins and |gamma(t)|
/// over `unobserved` spins (0 means N_m), all spins sharing (lambda_plus, beta)
/// with couplings drawn fresh per realisation. config.samples realisations
/// per node; node n, realisation r use SampleStream(seed, {1, n, r}).
std::vector<Fig1Row> fig1_surface(const RunConfig& config, std::span<const double> lambda_grid,
                                  std::span<const double> beta_grid, std::size_t unobserved = 0);

struct Fig2Curve {
  std::size_t n = 0;
  AverageCurve curve;  // abscissa = t, mean of |gamma(t)| + B(t)
};

/// Mean over config.samples environments of |gamma(t)| + B(t) with n unobserved
/// and n observed spins drawn i.i.d. from config.measure, on config.time.
std::vector<Fig2Curve> fig2_curves(std::span<const std::size_t> n_values, const RunConfig& config);

struct ExponentRow {
  double t = 0.0;
  double kappa_mc = 0.0;
  double chi_mc = 0.0;
  double kappa_short = 0.0;
  double chi_short = 0.0;
  double kappa_stderr = 0.0;
  double chi_stderr = 0.0;
};

/// Monte Carlo means of the per-spin exponents against the short-time forms.
/// The same draws are reused at every t.
std::vector<ExponentRow> exponent_check(const MeasureSpec& measure, std::span<const double> t_grid,
                                        std::size_t samples, std::uint64_t seed, unsigned threads = 1);

}  // namespace sbs
