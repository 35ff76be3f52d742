#pragma once

// Brute-force exact simulation of small instances (central qubit or qudit plus
// a handful of environment qubits) and the randomized verification suites that
// certify the closed forms and inequalities of spin_model, sbs_core and
// discrimination against it.
//
// Tensor ordering everywhere: central system first, then environment spins in
// EnvironmentSpec::flattened() order (observed macrofractions, then
// unobserved).

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sbs/densmat.hpp"
#include "sbs/sbs_core.hpp"
#include "sbs/spin_model.hpp"

namespace sbs {

inline constexpr std::size_t kOracleDimensionCap = 4096;

/// A = sum_i a_i |i><i| (x) sum_k B_k; branch unitaries U_i^(k)(t) = exp(-i a_i B_k t).
struct InteractionSpec {
  std::vector<double> pointer_eigenvalues;  // a_i
  std::vector<ComplexMatrix> couplings;     // B_k, one per environment spin
  std::string convention;

  std::size_t d_s() const noexcept { return pointer_eigenvalues.size(); }
  void validate() const;
  /// exp(-i a_i B_k t) through the eigendecomposition of B_k.
  ComplexMatrix branch_unitary(std::size_t i, std::size_t k, double t) const;
};

/// a = (+1, -1), B_k = -(g_k / 2) sigma_z: U_+/- = exp(+/- i g_k t sigma_z / 2).
InteractionSpec spin_model_interaction(std::span<const SpinParams> spins);

/// Per-spin quantities from explicit matrices.
Complex oracle_decoherence_factor(const SpinParams& p, double t);  // Tr[U_+ rho U_-^dagger]
BranchPair oracle_branch_states(const SpinParams& p, double t);    // U_s rho U_s^dagger
double oracle_branch_fidelity(const SpinParams& p, double t);      // || sqrt(rho_+) sqrt(rho_-) ||_1

/// U rho(0) U^dagger with rho(0) = rho_S (x) (x)_k rho_k(0). Dimension must not exceed
/// kOracleDimensionCap.
DensityMatrix full_joint_state(const CentralState& central, std::span<const DensityMatrix> env_states,
                               const InteractionSpec& inter, double t);
DensityMatrix full_joint_state(const CentralState& central, const EnvironmentSpec& env,
                               const InteractionSpec& inter, double t);

/// Partial trace of the joint state over the unobserved spins.
DensityMatrix reduced_state_exact(const DensityMatrix& joint, const EnvironmentSpec& env);

/// The same reduced state assembled blockwise:
///   block (i, j) = sigma_ij prod_{unobserved} Tr[U_i rho U_j^dagger] (x)_{observed} U_i rho U_j^dagger.
DensityMatrix reduced_state_analytic(const CentralState& central, const EnvironmentSpec& env,
                                     const InteractionSpec& inter, double t);

/// (1/2) || reduced - sbs ||_1
double exact_epsilon(const DensityMatrix& reduced, const SBSState& sbs);

struct MutualInfoCheck {
  double mutual_info = 0.0;  // I(S : fM), bits
  double h_s = 0.0;          // H[{sigma_i}]
  double gap = 0.0;
  double f_bound = 0.0;
  bool applicable = false;   // eps_or_eta <= 1/4
  bool ok = true;            // gap <= f_bound + 1e-9 whenever applicable
};

/// The central factor has dimension central.dim(); everything else in
/// `reduced` is the observed part of the environment.
MutualInfoCheck exact_mutual_info_check(const DensityMatrix& reduced, const CentralState& central,
                                        double eps_or_eta);

/// A complete small instance.
struct OracleInstance {
  CentralState central;
  EnvironmentSpec env;
  InteractionSpec inter;
  double t = 0.0;
};

/// Central qubit (sigma_+ uniform, coherence c e^{i phi} sqrt(sigma_+ sigma_-),
/// c uniform on [0, 1]), 3 observed spins split as [1,1,1], [3] or [2,1]
/// (index mod 3), 3 unobserved spins, standard measure, t uniform on [0, 2 pi).
OracleInstance random_qubit_instance(std::uint64_t seed, std::size_t index);

/// Central qutrit (random full-rank density matrix), generic pointer eigenvalues
/// and random Hermitian couplings, observed macrofractions [1,1] or [2], 2
/// unobserved spins.
OracleInstance random_qutrit_instance(std::uint64_t seed, std::size_t index);

/// Post-decoherence qubit instance: observed macrofractions [2, 2] of pure
/// spins, 12 unobserved spins from the standard measure, t uniform on
/// [2 pi, 6 pi). The joint state exceeds the dimension cap, so only
/// reduced_state_analytic applies.
OracleInstance random_late_instance(std::uint64_t seed, std::size_t index);

/// Per-macrofraction branch states rho_i^(M) = (x)_{k in M} U_i rho_k U_i^dagger.
BranchEnsemble oracle_branch_ensemble(const OracleInstance& inst);

/// |Gamma| with the unobserved product taken from explicit matrices.
double oracle_collective_gamma(const OracleInstance& inst);

/// Diagnostics of one instance under one projector family.
BoundReport bound_report(const OracleInstance& inst, const ProjectorFamily& family);

struct SuiteResult {
  std::string name;
  std::size_t passed = 0;
  std::size_t failed = 0;
  double worst_margin = 0.0;  // min over checks of (allowed - observed)

  /// A check passes when slack >= -tol.
  void record(double slack, double tol = 0.0);
  bool ok() const { return failed == 0 && passed > 0; }
};

struct VerifyOptions {
  std::uint64_t seed = 20240917;
  unsigned threads = 1;
  std::size_t convention_draws = 1000;
  std::size_t qubit_instances = 200;
  std::size_t qutrit_instances = 50;
  std::size_t late_instances = 100;
  std::size_t fuchs_instances = 500;
  std::size_t fuchs_macro_size = 51;
};

struct VerifyReport {
  std::vector<SuiteResult> suites;
  bool all_passed() const;
  const SuiteResult& suite(const std::string& name) const;
};

/// Runs every suite:
///   convention            per-spin Tr[U_+ rho U_-^dagger], branch states, fidelity, purity
///   helstrom              closed-form projectors and success vs explicit matrices
///   reduced_state         partial trace vs blockwise assembly
///   proposition1_helstrom / proposition1_adversarial / proposition1_qudit
///                         epsilon <= Gamma + sum_k p_E^(k) per projector family
///   proposition1_sqrt     epsilon <= Gamma + 2 sum_k sum_i sigma_i sqrt(Tr[rho_i^(k) (1 - P_i^(k))]),
///                         the form that survives non-commuting projectors
///   corollary1            weighted Helstrom witness vs eta
///   corollary2            mutual-information gap on applicable instances
///   barnum_knill          Helstrom error vs the fidelity bound per macrofraction
///   chernoff              exact majority tail vs the Chernoff bound
///   kolmogorov_fuchs      |2 p~ - 1| <= 1 - B^2 / 2 on spin-model macrofractions
VerifyReport run_verification(const VerifyOptions& options);

SuiteResult convention_suite(std::uint64_t seed, std::size_t draws, unsigned threads = 1);
SuiteResult helstrom_suite(std::uint64_t seed, std::size_t draws, unsigned threads = 1);
SuiteResult chernoff_suite();
SuiteResult kolmogorov_fuchs_suite(std::uint64_t seed, std::size_t instances, std::size_t macro_size,
                                   unsigned threads = 1);

}  // namespace sbs
