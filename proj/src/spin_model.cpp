#include "sbs/spin_model.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace sbs {

namespace {

constexpr std::size_t kDirectProductLimit = 64;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_range(double value, double lo, double hi, const char* field) {
  if (!(value >= lo && value <= hi)) {
    throw std::invalid_argument(std::string("SpinParams.") + field + " = " + std::to_string(value) +
                                " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
}

// Euler rotation R for the initial state parametrisation.
ComplexMatrix euler_rotation(const SpinParams& p) {
  using namespace std::complex_literals;
  const double c = std::cos(p.beta / 2.0);
  const double s = std::sin(p.beta / 2.0);
  const double sum = (p.alpha + p.gamma_euler) / 2.0;
  const double diff = (p.alpha - p.gamma_euler) / 2.0;
  return ComplexMatrix{{std::exp(-1i * sum) * c, -std::exp(-1i * diff) * s},
                       {std::exp(1i * diff) * s, std::exp(1i * sum) * c}};
}

// exp(i s g t sigma_z / 2)
ComplexMatrix branch_unitary(double g, double t, int sign) {
  const double half = 0.5 * sign * g * t;
  return ComplexMatrix{{std::polar(1.0, half), 0.0}, {0.0, std::polar(1.0, -half)}};
}

double squared_contrast(const SpinParams& p) {
  const double a = 2.0 * p.lambda - 1.0;
  return a * a;
}

}  // namespace

void SpinParams::validate() const {
  // Closed intervals; 2 pi itself is an alias of 0 and tolerated.
  check_range(alpha, 0.0, kTwoPi, "alpha");
  check_range(beta, 0.0, std::numbers::pi, "beta");
  check_range(gamma_euler, 0.0, kTwoPi, "gamma_euler");
  check_range(lambda, 0.0, 1.0, "lambda");
  if (!std::isfinite(g)) throw std::invalid_argument("SpinParams.g must be finite");
}

std::size_t EnvironmentSpec::observed_count() const {
  std::size_t n = 0;
  for (const auto& mac : observed) n += mac.spins.size();
  return n;
}

double EnvironmentSpec::observed_fraction() const {
  const std::size_t n = total();
  return n == 0 ? 0.0 : static_cast<double>(observed_count()) / static_cast<double>(n);
}

std::vector<SpinParams> EnvironmentSpec::flattened() const {
  std::vector<SpinParams> out;
  out.reserve(total());
  for (const auto& mac : observed) out.insert(out.end(), mac.spins.begin(), mac.spins.end());
  out.insert(out.end(), unobserved.begin(), unobserved.end());
  return out;
}

DensityMatrix initial_spin_state(const SpinParams& p) {
  const ComplexMatrix r = euler_rotation(p);
  const double eig[2] = {p.lambda, 1.0 - p.lambda};
  ComplexMatrix rho = r * ComplexMatrix::diagonal(std::span<const double>(eig)) * r.adjoint();
  // Hermitian by construction; remove the rounding asymmetry.
  rho(0, 0) = rho(0, 0).real();
  rho(1, 1) = rho(1, 1).real();
  rho(1, 0) = std::conj(rho(0, 1));
  return DensityMatrix::trusted(std::move(rho));
}

Complex delta(const SpinParams& p) {
  return std::polar(0.5 * std::sin(p.beta) * (2.0 * p.lambda - 1.0), -p.alpha);
}

double pointer_population(const SpinParams& p) {
  return 0.5 * (1.0 + (2.0 * p.lambda - 1.0) * std::cos(p.beta));
}

BranchPair evolved_branch_states(const SpinParams& p, double t) {
  const double pi0 = pointer_population(p);
  const Complex d = delta(p);
  auto branch = [&](int sign) {
    const Complex off = std::polar(1.0, sign * p.g * t) * d;
    return DensityMatrix::trusted(ComplexMatrix{{pi0, off}, {std::conj(off), 1.0 - pi0}});
  };
  return BranchPair{branch(+1), branch(-1)};
}

Complex spin_decoherence_factor(const SpinParams& p, double t) {
  const double gt = p.g * t;
  return {std::cos(gt), (2.0 * p.lambda - 1.0) * std::cos(p.beta) * std::sin(gt)};
}

Complex LogComplex::value() const { return std::polar(std::exp(log_abs), phase); }

LogComplex log_decoherence_factor(std::span<const SpinParams> spins, double t) {
  LogComplex acc;
  for (const auto& p : spins) {
    const Complex f = spin_decoherence_factor(p, t);
    const double mag = std::abs(f);
    if (mag == 0.0) {
      acc.log_abs = -std::numeric_limits<double>::infinity();
      continue;
    }
    acc.log_abs += std::log(mag);
    acc.phase += std::arg(f);
  }
  acc.phase = std::remainder(acc.phase, kTwoPi);
  return acc;
}

Complex decoherence_factor(std::span<const SpinParams> spins, double t) {
  if (spins.size() > kDirectProductLimit) return log_decoherence_factor(spins, t).value();
  Complex acc = 1.0;
  for (const auto& p : spins) acc *= spin_decoherence_factor(p, t);
  return acc;
}

double spin_fidelity(const SpinParams& p, double t) {
  const double s = std::sin(p.g * t) * std::sin(p.beta);
  return std::sqrt(std::max(0.0, 1.0 - squared_contrast(p) * s * s));
}

double spin_fidelity_trace_det(const SpinParams& p, double t) {
  const ComplexMatrix r = euler_rotation(p);
  const double eig[2] = {p.lambda, 1.0 - p.lambda};
  const double root_eig[2] = {std::sqrt(p.lambda), std::sqrt(1.0 - p.lambda)};
  const ComplexMatrix d = ComplexMatrix::diagonal(std::span<const double>(eig));
  const ComplexMatrix sqrt_d = ComplexMatrix::diagonal(std::span<const double>(root_eig));
  const ComplexMatrix u_plus = branch_unitary(p.g, t, +1);
  const ComplexMatrix u_minus = branch_unitary(p.g, t, -1);
  const ComplexMatrix rd = r.adjoint();
  const ComplexMatrix m =
      sqrt_d * rd * (u_minus * u_minus) * r * d * rd * (u_plus * u_plus) * r * sqrt_d;
  const double tr = m.trace().real();
  const double det = (m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0)).real();
  return std::sqrt(std::max(0.0, tr + 2.0 * std::sqrt(std::max(0.0, det))));
}

double log_macrofraction_fidelity(std::span<const SpinParams> spins, double t) {
  double sum = 0.0;
  for (const auto& p : spins) sum += lln_exponents(p, t).kappa;
  return 0.5 * sum;
}

double macrofraction_fidelity(std::span<const SpinParams> spins, double t) {
  if (spins.size() > kDirectProductLimit) return std::exp(-log_macrofraction_fidelity(spins, t));
  double acc = 1.0;
  for (const auto& p : spins) acc *= spin_fidelity(p, t);
  return acc;
}

double macrofraction_fidelity(const MacrofractionSpec& mac, double t) {
  return macrofraction_fidelity(std::span<const SpinParams>(mac.spins), t);
}

Exponents lln_exponents(const SpinParams& p, double t) {
  const double sg = std::sin(p.g * t);
  const double sg2 = sg * sg;
  const double contrast = squared_contrast(p);
  const double sb = std::sin(p.beta);
  const double cb = std::cos(p.beta);
  // -log(1 - x) with x in [0, 1]
  auto neg_log1m = [](double x) {
    return x >= 1.0 ? std::numeric_limits<double>::infinity() : -std::log1p(-x);
  };
  return Exponents{neg_log1m(contrast * sb * sb * sg2), neg_log1m(sg2 * (1.0 - contrast * cb * cb))};
}

Exponents short_time_exponents(double g2bar, double t) {
  if (g2bar < 0.0 || t < 0.0) throw std::invalid_argument("short_time_exponents: g2bar and t must be >= 0");
  return Exponents{0.4 * g2bar * t * t, 0.8 * g2bar * t * t};
}

TimeScales time_scales(std::size_t total_spins, std::size_t macro_size, double observed_fraction,
                       double g2bar) {
  if (macro_size < 2) throw std::invalid_argument("time_scales: N_m must be >= 2 (log N_m > 0)");
  if (!(observed_fraction >= 0.0 && observed_fraction < 1.0))
    throw std::invalid_argument("time_scales: f must lie in [0, 1)");
  if (!(g2bar > 0.0)) throw std::invalid_argument("time_scales: g2bar must be > 0");
  if (total_spins == 0) throw std::invalid_argument("time_scales: N must be >= 1");
  const double nm = static_cast<double>(macro_size);
  const double unobserved = (1.0 - observed_fraction) * static_cast<double>(total_spins);
  const double log_nm = std::log(nm);
  TimeScales ts;
  ts.t_broadcast = std::sqrt(5.0 * log_nm / (g2bar * nm));
  ts.t_decoherence = std::sqrt(5.0 * log_nm / (4.0 * g2bar * unobserved));
  const double r = ts.t_broadcast / ts.t_decoherence;
  ts.ratio_sq = r * r;
  return ts;
}

}  // namespace sbs
