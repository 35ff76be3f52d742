#pragma once

// Two-state discrimination for the branch states: Helstrom projectors (general
// and closed form for one environment spin), the majority-vote measurement on a
// macrofraction, its exact success probabilities, and the Chernoff and
// Kolmogorov/Fuchs bounds.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sbs/densmat.hpp"
#include "sbs/sampling.hpp"
#include "sbs/spin_model.hpp"

namespace sbs {

struct ProjectorPair {
  ComplexMatrix plus;
  ComplexMatrix minus;
};

/// P_+ projects on the eigenvectors of (rho_plus - rho_minus) with eigenvalue
/// > 1e-12; P_- = 1 - P_+. Equal states give P_+ = 0.
ProjectorPair helstrom_pair(const DensityMatrix& rho_plus, const DensityMatrix& rho_minus);

/// Minimum-error measurement for priors (prior_plus, 1 - prior_plus): positive
/// eigenspace of prior_plus rho_plus - (1 - prior_plus) rho_minus.
ProjectorPair helstrom_pair(const DensityMatrix& rho_plus, const DensityMatrix& rho_minus,
                            double prior_plus);

/// (1/2)(Tr[rho_minus P_+] + Tr[rho_plus P_-])
double equal_prior_error(const DensityMatrix& rho_plus, const DensityMatrix& rho_minus,
                         const ProjectorPair& pair);

struct SpinHelstrom {
  ProjectorPair projectors;
  bool degenerate = false;  // delta = 0 or sin(g t) = 0; canonical P_+ = diag(1, 0)
};

/// Closed-form Helstrom projectors for one spin's branch pair,
///   P_+/- = [[1/2, +/- s i delta / (2|delta|)], [-/+ s i delta* / (2|delta|), 1/2]],
/// s = sgn sin(g t).
SpinHelstrom helstrom_spin_analytic(const SpinParams& p, double t);

/// Tr[P_+/- rho_+/-] = 1/2 + |delta| |sin(g t)|
double local_success_probability(const SpinParams& p, double t);

struct MeanSuccess {
  double p_bar = 0.5;
  double s_bar = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

/// Monte Carlo mean of local_success_probability; sample i draws from
/// SampleStream(seed, {stream_tag, i}).
MeanSuccess mean_success(const MeasureSpec& measure, double t, std::size_t samples, std::uint64_t seed,
                         unsigned threads = 1, std::uint64_t stream_tag = 0);

/// P[X > N_m / 2], X ~ Binomial(N_m, p). Ties count as failure.
double majority_success(std::size_t n_m, double p);

/// Strict-majority probability for independent trials with the given success
/// probabilities (Poisson-binomial), O(N^2) convolution.
double majority_success_heterogeneous(std::span<const double> probs);

/// 1 - exp(-N_m S^2 / 2), S in [0, 1/2].
double chernoff_bound(std::size_t n_m, double s_bar);

struct MajorityStats {
  std::size_t n_m = 0;
  double p_bar = 0.5;
  double s_bar = 0.0;
  double p_tilde_exact = 0.5;
  double chernoff_lb = 0.0;
};
MajorityStats majority_stats(std::size_t n_m, double p_bar);

struct KolmogorovFuchs {
  double k = 0.0;            // |2 p~ - 1|
  double fuchs_limit = 1.0;  // 1 - B^2 / 2
  bool ok = true;
};
KolmogorovFuchs kolmogorov_fuchs(double p_tilde, double b_mac);

/// Majority measurement on n spins: P_+ = sum over outcome strings with a
/// strict majority of '+' of the tensor product of local projectors. Dense,
/// dimension 2^n; intended for small n.
ProjectorPair majority_measurement(std::span<const ProjectorPair> local);

}  // namespace sbs
