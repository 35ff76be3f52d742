#pragma once

// Model-independent spectrum-broadcast-structure machinery: collective
// decoherence factor, discrimination error, construction of the nearest SBS
// for a given family of local projective measurements, and the trace-distance
// and mutual-information bounds built on them.
//
// Pointer indices run 0..d_S-1. Environment k carries one branch state per
// pointer index and one complete projector set.

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "sbs/densmat.hpp"

namespace sbs {

/// Table over ordered pointer pairs (i, j), i != j.
using PairTable = std::map<std::pair<std::size_t, std::size_t>, double>;

/// Thrown by build_sbs when every branch is annihilated by its projector
/// (all r_i = 0): the measurement family is orthogonal to all branches.
class DegenerateSbsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The central system's initial state in the pointer basis.
class CentralState {
 public:
  /// Validates: sigma_i >= 0 summing to 1 within 1e-12, Hermitian, PSD within 1e-10.
  explicit CentralState(ComplexMatrix matrix);

  /// Qubit with populations (sigma_plus, 1 - sigma_plus) and coherence sigma_{+-}.
  static CentralState qubit(double sigma_plus, Complex coherence);
  /// Diagonal state with the given populations.
  static CentralState diagonal(std::span<const double> sigma);

  std::size_t dim() const noexcept { return m_.dim(); }
  double sigma(std::size_t i) const { return m_(i, i).real(); }
  Complex coherence(std::size_t i, std::size_t j) const { return m_(i, j); }
  std::vector<double> populations() const;
  const ComplexMatrix& matrix() const noexcept { return m_; }
  DensityMatrix density() const { return DensityMatrix::trusted(m_); }

 private:
  ComplexMatrix m_;
};

/// Per environment k: branch_states[k][i] = rho_i^(k).
struct BranchEnsemble {
  std::vector<std::vector<DensityMatrix>> branch_states;

  std::size_t environments() const { return branch_states.size(); }
  /// Throws if some environment does not have exactly d_S branch states of a common dimension.
  void validate(std::size_t d_s) const;
};

/// Per environment k: projectors[k][i] = P_i^(k), a complete orthogonal set.
struct ProjectorFamily {
  std::vector<std::vector<ComplexMatrix>> projectors;

  /// Hermitian idempotents, mutually orthogonal, summing to identity (tol 1e-10).
  void validate(std::size_t d_s) const;
};

/// sum_i p_i |i><i| (x) (x)_k rho~_i^(k)
struct SBSState {
  std::vector<double> weights;
  std::vector<std::vector<std::optional<DensityMatrix>>> projected;  // [k][i]; empty where p_i^(k) = 0
  std::vector<double> branch_success;                 // r_i = prod_k p_i^(k)
  double eta_norm = 0.0;                              // sum_j sigma_j r_j

  /// Dense matrix in pointer-major ordering, environments in order.
  DensityMatrix assemble() const;
};

struct BoundReport {
  double time = 0.0;
  double gamma_collective = 0.0;
  std::vector<double> discrimination_errors;
  double prop1_bound = 0.0;
  double eta_cor1 = 0.0;
  std::optional<double> f_bound;
  bool f_bound_valid = false;
  std::optional<double> epsilon_exact;
  std::optional<double> fifty_fifty_error;
};

/// Gamma = sum_{i != j} |sigma_ij| prod_k |gamma_ij^(k)|, with the product over
/// unobserved environments supplied per pair.
double collective_gamma(const CentralState& central, const PairTable& gamma_mags);

/// p_E = sum_i p_i Tr[rho_i (1 - P_i)]
double discrimination_error(std::span<const double> weights, std::span<const DensityMatrix> states,
                            std::span<const ComplexMatrix> projectors);

SBSState build_sbs(const CentralState& central, const BranchEnsemble& branches,
                   const ProjectorFamily& projectors);

/// Gamma + sum_k p_E^(k)
double prop1_bound(double gamma, std::span<const double> discrimination_errors);

/// sum_{i != j} sqrt(p_i p_j) B(rho_i, rho_j)
double barnum_knill_bound(std::span<const double> weights, const PairTable& pairwise_fidelities);

/// Gamma + sum_{i != j} sqrt(sigma_i sigma_j) sum_k B[rho_i^(k), rho_j^(k)]
double cor1_eta(const CentralState& central, double gamma,
                std::span<const PairTable> per_env_pair_fidelities);

/// Pairwise fidelity table of one environment's branch states.
PairTable pairwise_fidelities(std::span<const DensityMatrix> states);

/// h(x) in bits; throws for x outside [0, 1].
double binary_entropy(double x);

/// F(x) = 4 h(2x) + 2 h(x) + 10 x log2 d_S. h(2x) is only defined for x <= 1/2;
/// larger x return +infinity.
double broadcast_entropy_bound(double x, std::size_t d_s);

struct Cor2Bound {
  double bound = 0.0;
  bool valid = false;  // hypothesis x <= 1/4
};
Cor2Bound cor2_bound(double eps_or_eta, std::size_t d_s);

/// I = S(rho_A) + S(rho_B) - S(rho) where A is the set of factors marked in
/// system_mask and B the rest. Bits.
double mutual_information(const DensityMatrix& rho, std::span<const std::size_t> factor_dims,
                          const std::vector<bool>& system_mask);

/// (1/2)(1 - trace_dist / 2), trace_dist = ||rho - rho_SBS||_1 in [0, 2].
double fifty_fifty_error(double trace_dist);

}  // namespace sbs
