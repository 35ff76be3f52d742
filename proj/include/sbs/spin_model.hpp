#pragma once

// Closed-form dynamics of the central-spin / spin-environment model with
// interaction proportional to sigma_z (x) sum_j g_j sigma_z^(j).
//
// Convention: the environment spin j evolves, conditioned on the central
// pointer state s = +/-, with
//
//     U_s(t) = exp(+ i s g_j t sigma_z / 2),      s = +1 for |+>, -1 for |->,
//
// so that Tr[U_+ rho U_-^dagger] = cos(g t) + i (2 lambda - 1) cos(beta) sin(g t)
// and the branch states carry off-diagonals e^{+/- i g t} delta. Everything in
// this header (decoherence factor, branch fidelity, Helstrom probabilities in
// discrimination.hpp) is stated under this one convention; the brute-force
// simulator in oracle.hpp certifies it.

#include <cstddef>
#include <span>
#include <vector>

#include "sbs/densmat.hpp"

namespace sbs {

/// Initial state of one environment spin (Euler angles, larger-eigenvalue
/// weight lambda) plus its coupling constant.
struct SpinParams {
  double alpha = 0.0;        // [0, 2 pi)
  double beta = 0.0;         // [0, pi]
  double gamma_euler = 0.0;  // [0, 2 pi)
  double lambda = 1.0;       // [0, 1]
  double g = 1.0;            // coupling, inverse time units

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct MacrofractionSpec {
  std::vector<SpinParams> spins;
};

struct EnvironmentSpec {
  std::vector<MacrofractionSpec> observed;
  std::vector<SpinParams> unobserved;

  std::size_t observed_count() const;
  std::size_t total() const { return observed_count() + unobserved.size(); }
  /// observed / total
  double observed_fraction() const;
  /// Observed spins first (macrofraction order), then unobserved.
  std::vector<SpinParams> flattened() const;
};

struct BranchPair {
  DensityMatrix plus;
  DensityMatrix minus;
};

/// R diag(lambda, 1 - lambda) R^dagger with R the SU(2) Euler rotation.
DensityMatrix initial_spin_state(const SpinParams& p);

/// <0| rho(0) |1> = (1/2) sin(beta) e^{-i alpha} (2 lambda - 1)
Complex delta(const SpinParams& p);

/// <0| rho(t) |0> = (1/2)[1 + (2 lambda - 1) cos(beta)], constant in time.
double pointer_population(const SpinParams& p);

/// rho_{+/-}(t) = U_{+/-}(t) rho(0) U_{+/-}(t)^dagger
BranchPair evolved_branch_states(const SpinParams& p, double t);

/// Per-spin factor cos(g t) + i (2 lambda - 1) cos(beta) sin(g t).
Complex spin_decoherence_factor(const SpinParams& p, double t);

/// log|gamma| and arg(gamma) accumulated over spins; never underflows.
struct LogComplex {
  double log_abs = 0.0;
  double phase = 0.0;
  Complex value() const;
};
LogComplex log_decoherence_factor(std::span<const SpinParams> spins, double t);

/// Product of per-spin factors over the unobserved spins. Direct product up
/// to 64 spins, log-magnitude + phase accumulation above.
Complex decoherence_factor(std::span<const SpinParams> spins, double t);

/// Per-spin sqrt(1 - (2 lambda - 1)^2 sin^2(beta) sin^2(g t)).
double spin_fidelity(const SpinParams& p, double t);

/// Same quantity via the trace and determinant of the 2x2 matrix M
/// (B = sqrt(Tr M + 2 sqrt(det M))).
double spin_fidelity_trace_det(const SpinParams& p, double t);

/// B(t) = prod_j spin_fidelity, exp-of-log-sum above 64 spins.
double macrofraction_fidelity(std::span<const SpinParams> spins, double t);
double macrofraction_fidelity(const MacrofractionSpec& mac, double t);

/// -log B(t) for a macrofraction; finite unless some factor is exactly 0.
double log_macrofraction_fidelity(std::span<const SpinParams> spins, double t);

struct Exponents {
  double kappa = 0.0;
  double chi = 0.0;
};

/// kappa = -log[1 - (2l-1)^2 sin^2 b sin^2 gt], chi = -log[1 + sin^2 gt ((2l-1)^2 cos^2 b - 1)].
/// An exact zero inside the log yields +infinity.
Exponents lln_exponents(const SpinParams& p, double t);

/// ((2/5) g2bar t^2, (4/5) g2bar t^2)
Exponents short_time_exponents(double g2bar, double t);

struct TimeScales {
  double t_broadcast = 0.0;    // t_B
  double t_decoherence = 0.0;  // t_D
  double ratio_sq = 0.0;       // (t_B / t_D)^2 = 4 (1 - f) N / N_m
};

/// t_B = sqrt(5 ln N_m / (g2bar N_m)),  t_D = sqrt(5 ln N_m / (4 g2bar (1 - f) N)).
TimeScales time_scales(std::size_t total_spins, std::size_t macro_size, double observed_fraction,
                       double g2bar);

}  // namespace sbs
