#include "sbs/sbs_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace sbs {

namespace {

// Branch success probabilities below this are treated as exact zeros when
// normalising projected states.
constexpr double kNegligibleSuccess = 1e-14;

Complex trace_product(const ComplexMatrix& a, const ComplexMatrix& b) {
  // Tr[A B] without forming the product.
  const std::size_t n = a.dim();
  Complex s = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) s += a(i, k) * b(k, i);
  return s;
}

void require_complete(std::span<const ComplexMatrix> projectors, std::size_t dim) {
  ComplexMatrix sum(dim);
  for (const auto& p : projectors) {
    if (p.dim() != dim) throw DimensionError("projector dimension does not match state dimension");
    sum += p;
  }
  const double gap = sum.max_abs_diff(ComplexMatrix::identity(dim));
  if (gap > 1e-10) {
    throw std::invalid_argument("incomplete projector family: max |sum P_i - 1| = " +
                                std::to_string(gap));
  }
}

}  // namespace

// ---------------------------------------------------------------------------

CentralState::CentralState(ComplexMatrix matrix) : m_(std::move(matrix)) {
  double total = 0.0;
  for (std::size_t i = 0; i < m_.dim(); ++i) {
    const double s = m_(i, i).real();
    if (s < 0.0 || std::abs(m_(i, i).imag()) > 1e-12)
      throw std::invalid_argument("CentralState: sigma_" + std::to_string(i) + " is not a probability");
    total += s;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument("CentralState: populations sum to " + std::to_string(total));
  if (m_.hermiticity_error() > 1e-12)
    throw std::invalid_argument("CentralState: sigma_ij != conj(sigma_ji)");
  const auto spec = hermitian_eigensystem(m_);
  if (spec.eigenvalues.back() < -1e-10)
    throw std::invalid_argument("CentralState: matrix is not positive semidefinite");
}

CentralState CentralState::qubit(double sigma_plus, Complex coherence) {
  return CentralState(ComplexMatrix{{sigma_plus, coherence}, {std::conj(coherence), 1.0 - sigma_plus}});
}

CentralState CentralState::diagonal(std::span<const double> sigma) {
  return CentralState(ComplexMatrix::diagonal(sigma));
}

std::vector<double> CentralState::populations() const {
  std::vector<double> out(dim());
  for (std::size_t i = 0; i < dim(); ++i) out[i] = sigma(i);
  return out;
}

void BranchEnsemble::validate(std::size_t d_s) const {
  for (std::size_t k = 0; k < branch_states.size(); ++k) {
    const auto& env = branch_states[k];
    if (env.size() != d_s)
      throw DimensionError("environment " + std::to_string(k) + " has " + std::to_string(env.size()) +
                           " branch states, expected " + std::to_string(d_s));
    for (const auto& rho : env)
      if (rho.dim() != env.front().dim())
        throw DimensionError("environment " + std::to_string(k) + " has branch states of mixed dimension");
  }
}

void ProjectorFamily::validate(std::size_t d_s) const {
  for (std::size_t k = 0; k < projectors.size(); ++k) {
    const auto& set = projectors[k];
    if (set.size() != d_s)
      throw DimensionError("projector set " + std::to_string(k) + " has " + std::to_string(set.size()) +
                           " elements, expected " + std::to_string(d_s));
    for (const auto& p : set)
      if (!is_projector(p)) throw std::invalid_argument("projector set " + std::to_string(k) + " contains a non-projector");
    require_complete(set, set.front().dim());
    for (std::size_t i = 0; i < set.size(); ++i)
      for (std::size_t j = i + 1; j < set.size(); ++j)
        if ((set[i] * set[j]).max_abs_diff(ComplexMatrix(set[i].dim())) > 1e-10)
          throw std::invalid_argument("projector set " + std::to_string(k) + " is not mutually orthogonal");
  }
}

DensityMatrix SBSState::assemble() const {
  const std::size_t d_s = weights.size();
  std::vector<std::size_t> env_dims;
  for (const auto& env : projected) {
    std::size_t dim = 0;
    for (const auto& rho : env)
      if (rho) dim = rho->dim();
    env_dims.push_back(dim);
  }
  std::size_t block = 1;
  for (std::size_t d : env_dims) block *= d;

  ComplexMatrix out(d_s * block);
  for (std::size_t i = 0; i < d_s; ++i) {
    if (weights[i] == 0.0) continue;
    std::vector<ComplexMatrix> factors;
    for (const auto& env : projected) factors.push_back(env[i]->matrix());
    const ComplexMatrix prod = tensor(factors);
    for (std::size_t r = 0; r < block; ++r)
      for (std::size_t c = 0; c < block; ++c) out(i * block + r, i * block + c) = weights[i] * prod(r, c);
  }
  return DensityMatrix::trusted(std::move(out));
}

// ---------------------------------------------------------------------------

double collective_gamma(const CentralState& central, const PairTable& gamma_mags) {
  double total = 0.0;
  for (std::size_t i = 0; i < central.dim(); ++i)
    for (std::size_t j = 0; j < central.dim(); ++j) {
      if (i == j) continue;
      const auto it = gamma_mags.find({i, j});
      if (it == gamma_mags.end())
        throw std::invalid_argument("collective_gamma: missing decoherence factor for pair (" +
                                    std::to_string(i) + ", " + std::to_string(j) + ")");
      total += std::abs(central.coherence(i, j)) * it->second;
    }
  return total;
}

double discrimination_error(std::span<const double> weights, std::span<const DensityMatrix> states,
                            std::span<const ComplexMatrix> projectors) {
  if (weights.size() != states.size() || states.size() != projectors.size())
    throw DimensionError("discrimination_error: weights, states and projectors must have equal counts");
  if (states.empty()) return 0.0;
  require_complete(projectors, states.front().dim());
  double err = 0.0;
  for (std::size_t i = 0; i < states.size(); ++i)
    err += weights[i] * (1.0 - trace_product(states[i].matrix(), projectors[i]).real());
  return std::clamp(err, 0.0, 1.0);
}

SBSState build_sbs(const CentralState& central, const BranchEnsemble& branches,
                   const ProjectorFamily& projectors) {
  const std::size_t d_s = central.dim();
  branches.validate(d_s);
  projectors.validate(d_s);
  if (projectors.projectors.size() != branches.environments())
    throw DimensionError("build_sbs: projector family and branch ensemble cover different environments");

  const std::size_t n_env = branches.environments();
  SBSState out;
  out.projected.assign(n_env, std::vector<std::optional<DensityMatrix>>(d_s));
  out.branch_success.assign(d_s, 1.0);

  for (std::size_t k = 0; k < n_env; ++k) {
    for (std::size_t i = 0; i < d_s; ++i) {
      const ComplexMatrix& p = projectors.projectors[k][i];
      ComplexMatrix projected = p * branches.branch_states[k][i].matrix() * p;
      const double success = projected.trace().real();
      if (success < kNegligibleSuccess) {
        out.branch_success[i] = 0.0;
        continue;
      }
      out.branch_success[i] *= success;
      projected *= Complex(1.0 / success);
      out.projected[k][i] = DensityMatrix::trusted(std::move(projected));
    }
  }

  out.eta_norm = 0.0;
  for (std::size_t j = 0; j < d_s; ++j) out.eta_norm += central.sigma(j) * out.branch_success[j];
  if (!(out.eta_norm > 0.0))
    throw DegenerateSbsError("build_sbs: every branch has zero success probability under the projector family");

  out.weights.resize(d_s);
  for (std::size_t i = 0; i < d_s; ++i) out.weights[i] = central.sigma(i) * out.branch_success[i] / out.eta_norm;
  return out;
}

double prop1_bound(double gamma, std::span<const double> discrimination_errors) {
  double total = gamma;
  for (double e : discrimination_errors) total += e;
  return total;
}

double barnum_knill_bound(std::span<const double> weights, const PairTable& pairwise_fidelities) {
  double total = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i)
    for (std::size_t j = 0; j < weights.size(); ++j) {
      if (i == j) continue;
      const auto it = pairwise_fidelities.find({i, j});
      if (it == pairwise_fidelities.end())
        throw std::invalid_argument("barnum_knill_bound: missing fidelity for a pair");
      total += std::sqrt(weights[i] * weights[j]) * it->second;
    }
  return total;
}

double cor1_eta(const CentralState& central, double gamma,
                std::span<const PairTable> per_env_pair_fidelities) {
  const auto sigma = central.populations();
  double total = gamma;
  for (const auto& table : per_env_pair_fidelities) total += barnum_knill_bound(sigma, table);
  return total;
}

PairTable pairwise_fidelities(std::span<const DensityMatrix> states) {
  PairTable out;
  for (std::size_t i = 0; i < states.size(); ++i)
    for (std::size_t j = i + 1; j < states.size(); ++j) {
      const double b = fidelity(states[i], states[j]);
      out[{i, j}] = b;
      out[{j, i}] = b;
    }
  return out;
}

double binary_entropy(double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("binary_entropy: argument outside [0, 1]");
  if (x == 0.0 || x == 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

double broadcast_entropy_bound(double x, std::size_t d_s) {
  if (x < 0.0) throw std::invalid_argument("broadcast_entropy_bound: negative argument");
  if (d_s < 1) throw std::invalid_argument("broadcast_entropy_bound: d_S must be >= 1");
  if (x > 0.5) return std::numeric_limits<double>::infinity();
  return 4.0 * binary_entropy(2.0 * x) + 2.0 * binary_entropy(x) +
         10.0 * x * std::log2(static_cast<double>(d_s));
}

Cor2Bound cor2_bound(double eps_or_eta, std::size_t d_s) {
  return Cor2Bound{broadcast_entropy_bound(eps_or_eta, d_s), eps_or_eta <= 0.25};
}

double mutual_information(const DensityMatrix& rho, std::span<const std::size_t> factor_dims,
                          const std::vector<bool>& system_mask) {
  std::vector<bool> rest(system_mask.size());
  for (std::size_t k = 0; k < system_mask.size(); ++k) rest[k] = !system_mask[k];
  const double s_a = von_neumann_entropy(partial_trace(rho, factor_dims, system_mask));
  const double s_b = von_neumann_entropy(partial_trace(rho, factor_dims, rest));
  return s_a + s_b - von_neumann_entropy(rho);
}

double fifty_fifty_error(double trace_dist) {
  if (!(trace_dist >= 0.0 && trace_dist <= 2.0))
    throw std::invalid_argument("fifty_fifty_error: trace distance outside [0, 2]");
  return 0.5 * (1.0 - 0.5 * trace_dist);
}

}  // namespace sbs
