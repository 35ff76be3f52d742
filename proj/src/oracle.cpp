#include "sbs/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <stdexcept>

#include "sbs/discrimination.hpp"
#include "sbs/parallel.hpp"
#include "sbs/sampling.hpp"

namespace sbs {

namespace {

constexpr std::uint64_t kConventionTag = 10;
constexpr std::uint64_t kQubitTag = 11;
constexpr std::uint64_t kQutritTag = 12;
constexpr std::uint64_t kLateTag = 13;
constexpr std::uint64_t kFuchsTag = 14;
constexpr std::uint64_t kFamilyTag = 15;
constexpr std::uint64_t kHelstromTag = 16;

// Above this joint dimension the instance suites use only the blockwise route.
constexpr std::size_t kExactRouteLimit = 1024;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double gaussian(SampleStream& s) {
  const double u1 = 1.0 - s.uniform();
  const double u2 = s.uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

ComplexMatrix random_unitary(std::size_t n, SampleStream& s) {
  ComplexMatrix q(n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) q(r, c) = Complex(gaussian(s), gaussian(s));
  // modified Gram-Schmidt on columns
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t prev = 0; prev < c; ++prev) {
      Complex overlap = 0.0;
      for (std::size_t r = 0; r < n; ++r) overlap += std::conj(q(r, prev)) * q(r, c);
      for (std::size_t r = 0; r < n; ++r) q(r, c) -= overlap * q(r, prev);
    }
    double norm = 0.0;
    for (std::size_t r = 0; r < n; ++r) norm += std::norm(q(r, c));
    norm = std::sqrt(norm);
    for (std::size_t r = 0; r < n; ++r) q(r, c) /= norm;
  }
  return q;
}

ComplexMatrix column_projector(const ComplexMatrix& v, std::span<const std::size_t> columns) {
  const std::size_t n = v.dim();
  ComplexMatrix p(n);
  for (std::size_t c : columns)
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t s = 0; s < n; ++s) p(r, s) += v(r, c) * std::conj(v(s, c));
  return p;
}

ComplexMatrix sandwich(const ComplexMatrix& left, const ComplexMatrix& rho, const ComplexMatrix& right) {
  return left * rho * right.adjoint();
}

std::size_t pow2(std::size_t n) { return std::size_t{1} << n; }

std::vector<DensityMatrix> initial_states(const EnvironmentSpec& env) {
  std::vector<DensityMatrix> out;
  for (const auto& p : env.flattened()) out.push_back(initial_spin_state(p));
  return out;
}

// unitaries[i][k] = U_i^(k)(t)
std::vector<std::vector<ComplexMatrix>> all_unitaries(const InteractionSpec& inter, double t) {
  std::vector<std::vector<ComplexMatrix>> out(inter.d_s());
  for (std::size_t i = 0; i < inter.d_s(); ++i)
    for (std::size_t k = 0; k < inter.couplings.size(); ++k) out[i].push_back(inter.branch_unitary(i, k, t));
  return out;
}

void require_consistent(const CentralState& central, std::size_t env_count, const InteractionSpec& inter) {
  inter.validate();
  if (inter.d_s() != central.dim())
    throw DimensionError("interaction has " + std::to_string(inter.d_s()) + " pointer states, central system " +
                         std::to_string(central.dim()));
  if (inter.couplings.size() != env_count)
    throw DimensionError("interaction couples " + std::to_string(inter.couplings.size()) +
                         " environments, instance has " + std::to_string(env_count));
}

// Every observed spin's index range inside flattened(), one entry per macrofraction.
std::vector<std::pair<std::size_t, std::size_t>> macro_ranges(const EnvironmentSpec& env) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t offset = 0;
  for (const auto& mac : env.observed) {
    out.emplace_back(offset, offset + mac.spins.size());
    offset += mac.spins.size();
  }
  return out;
}

ProjectorFamily weighted_helstrom_family(const OracleInstance& inst, const BranchEnsemble& branches) {
  ProjectorFamily family;
  const double prior = inst.central.sigma(0);
  for (const auto& states : branches.branch_states) {
    const auto pair = helstrom_pair(states[0], states[1], prior);
    family.projectors.push_back({pair.plus, pair.minus});
  }
  return family;
}

ProjectorFamily unweighted_helstrom_family(const BranchEnsemble& branches) {
  ProjectorFamily family;
  for (const auto& states : branches.branch_states) {
    const auto pair = helstrom_pair(states[0], states[1]);
    family.projectors.push_back({pair.plus, pair.minus});
  }
  return family;
}

ProjectorFamily majority_family(const OracleInstance& inst) {
  ProjectorFamily family;
  for (const auto& mac : inst.env.observed) {
    std::vector<ProjectorPair> local;
    for (const auto& p : mac.spins) local.push_back(helstrom_spin_analytic(p, inst.t).projectors);
    const auto pair = majority_measurement(local);
    family.projectors.push_back({pair.plus, pair.minus});
  }
  return family;
}

ProjectorFamily swapped(ProjectorFamily family) {
  for (auto& set : family.projectors) std::reverse(set.begin(), set.end());
  return family;
}

ProjectorFamily trivial_family(const BranchEnsemble& branches, std::size_t d_s) {
  ProjectorFamily family;
  for (const auto& states : branches.branch_states) {
    const std::size_t dim = states.front().dim();
    std::vector<ComplexMatrix> set(d_s, ComplexMatrix(dim));
    set[0] = ComplexMatrix::identity(dim);
    family.projectors.push_back(std::move(set));
  }
  return family;
}

// Random orthonormal basis per environment, each vector assigned to a random pointer index.
ProjectorFamily random_family(const BranchEnsemble& branches, std::size_t d_s, SampleStream& stream) {
  ProjectorFamily family;
  for (const auto& states : branches.branch_states) {
    const std::size_t dim = states.front().dim();
    const ComplexMatrix v = random_unitary(dim, stream);
    std::vector<std::vector<std::size_t>> assigned(d_s);
    for (std::size_t c = 0; c < dim; ++c) {
      const auto i = std::min(d_s - 1, static_cast<std::size_t>(stream.uniform() * static_cast<double>(d_s)));
      assigned[i].push_back(c);
    }
    std::vector<ComplexMatrix> set;
    for (const auto& cols : assigned) set.push_back(column_projector(v, cols));
    family.projectors.push_back(std::move(set));
  }
  return family;
}

// Eigenbasis of sum_i (i + 1) sigma_i rho_i, each vector sent to argmax_i sigma_i <v|rho_i|v>.
ProjectorFamily greedy_family(const OracleInstance& inst, const BranchEnsemble& branches) {
  const std::size_t d_s = inst.central.dim();
  ProjectorFamily family;
  for (const auto& states : branches.branch_states) {
    const std::size_t dim = states.front().dim();
    ComplexMatrix mix(dim);
    for (std::size_t i = 0; i < d_s; ++i)
      mix += states[i].matrix() * Complex(static_cast<double>(i + 1) * inst.central.sigma(i));
    const auto spec = hermitian_eigensystem(mix);
    std::vector<std::vector<std::size_t>> assigned(d_s);
    for (std::size_t c = 0; c < dim; ++c) {
      std::size_t best = 0;
      double best_score = -1.0;
      for (std::size_t i = 0; i < d_s; ++i) {
        double score = 0.0;
        for (std::size_t r = 0; r < dim; ++r)
          for (std::size_t s = 0; s < dim; ++s)
            score += (std::conj(spec.eigenvectors(r, c)) * states[i](r, s) * spec.eigenvectors(s, c)).real();
        score *= inst.central.sigma(i);
        if (score > best_score) {
          best_score = score;
          best = i;
        }
      }
      assigned[best].push_back(c);
    }
    std::vector<ComplexMatrix> set;
    for (const auto& cols : assigned) set.push_back(column_projector(spec.eigenvectors, cols));
    family.projectors.push_back(std::move(set));
  }
  return family;
}

// Each instance contributes (suite name, slack, tolerance) triples, merged in instance order.
struct Check {
  std::string suite;
  double slack;
  double tol;
};

struct FamilyOutcome {
  BoundReport report;
  std::vector<double> errors;
  double sqrt_bound = 0.0;  // Gamma + 2 sum_k sum_i sigma_i sqrt(Tr[rho_i^(k) (1 - P_i^(k))])
};

class InstanceEvaluator {
 public:
  explicit InstanceEvaluator(const OracleInstance& inst)
      : inst_(inst), branches_(oracle_branch_ensemble(inst)), gamma_(oracle_collective_gamma(inst)) {
    std::vector<std::size_t> dims{inst.central.dim()};
    for (std::size_t k = 0; k < inst.env.total(); ++k) dims.push_back(2);
    std::size_t joint_dim = 1;
    for (auto d : dims) joint_dim *= d;
    analytic_.emplace(reduced_state_analytic(inst.central, inst.env, inst.inter, inst.t));
    if (joint_dim <= kExactRouteLimit) {
      exact_.emplace(reduced_state_exact(full_joint_state(inst.central, inst.env, inst.inter, inst.t), inst.env));
      reduced_mismatch_ = exact_->matrix().max_abs_diff(analytic_->matrix());
    }
    std::vector<PairTable> tables;
    for (const auto& states : branches_.branch_states) tables.push_back(pairwise_fidelities(states));
    fidelity_tables_ = tables;
    eta_ = cor1_eta(inst.central, gamma_, tables);
  }

  const BranchEnsemble& branches() const { return branches_; }
  const DensityMatrix& reduced() const { return exact_ ? *exact_ : *analytic_; }
  std::optional<double> reduced_mismatch() const { return reduced_mismatch_; }
  double eta() const { return eta_; }
  const std::vector<PairTable>& fidelity_tables() const { return fidelity_tables_; }

  /// Fills the Proposition 1 quantities; nullopt when every branch is annihilated.
  std::optional<FamilyOutcome> evaluate(const ProjectorFamily& family) const {
    FamilyOutcome out;
    const auto sigma = inst_.central.populations();
    out.sqrt_bound = gamma_;
    for (std::size_t m = 0; m < branches_.environments(); ++m) {
      const auto& states = branches_.branch_states[m];
      out.errors.push_back(discrimination_error(sigma, states, family.projectors[m]));
      for (std::size_t i = 0; i < sigma.size(); ++i) {
        const double miss = 1.0 - (states[i].matrix() * family.projectors[m][i]).trace().real();
        out.sqrt_bound += 2.0 * sigma[i] * std::sqrt(std::max(0.0, miss));
      }
    }
    out.report.time = inst_.t;
    out.report.gamma_collective = gamma_;
    out.report.discrimination_errors = out.errors;
    out.report.prop1_bound = prop1_bound(gamma_, out.errors);
    out.report.eta_cor1 = eta_;
    try {
      const SBSState sbs = build_sbs(inst_.central, branches_, family);
      const double eps = exact_epsilon(reduced(), sbs);
      out.report.epsilon_exact = eps;
      out.report.fifty_fifty_error = fifty_fifty_error(std::min(2.0, 2.0 * eps));
    } catch (const DegenerateSbsError&) {
      return std::nullopt;
    }
    const double x = std::min(*out.report.epsilon_exact, eta_);
    const auto c2 = cor2_bound(x, inst_.central.dim());
    out.report.f_bound = c2.bound;
    out.report.f_bound_valid = c2.valid;
    return out;
  }

 private:
  const OracleInstance& inst_;
  BranchEnsemble branches_;
  double gamma_;
  std::optional<DensityMatrix> exact_;
  std::optional<DensityMatrix> analytic_;
  std::optional<double> reduced_mismatch_;
  std::vector<PairTable> fidelity_tables_;
  double eta_ = 0.0;
};

void prop1_checks(const std::optional<FamilyOutcome>& outcome, const std::string& suite, std::vector<Check>& out,
                  double& best_eps) {
  if (!outcome) return;
  const double eps = *outcome->report.epsilon_exact;
  best_eps = std::min(best_eps, eps);
  out.push_back({suite, outcome->report.prop1_bound - eps, 1e-9});
  out.push_back({"proposition1_sqrt", outcome->sqrt_bound - eps, 1e-9});
}

void cor2_check(const InstanceEvaluator& ev, const CentralState& central, double best_eps, std::vector<Check>& out) {
  const double x = std::min(best_eps, ev.eta());
  const auto mi = exact_mutual_info_check(ev.reduced(), central, x);
  if (mi.applicable) out.push_back({"corollary2", mi.f_bound - mi.gap, 1e-9});
}

std::vector<Check> qubit_checks(const OracleInstance& inst, std::uint64_t seed, std::uint64_t tag,
                                std::size_t index) {
  std::vector<Check> out;
  const InstanceEvaluator ev(inst);
  if (const auto mismatch = ev.reduced_mismatch()) out.push_back({"reduced_state", -*mismatch, 1e-10});

  double best_eps = std::numeric_limits<double>::infinity();
  const auto weighted = weighted_helstrom_family(inst, ev.branches());
  const auto weighted_outcome = ev.evaluate(weighted);
  prop1_checks(weighted_outcome, "proposition1_helstrom", out, best_eps);
  prop1_checks(ev.evaluate(unweighted_helstrom_family(ev.branches())), "proposition1_helstrom", out, best_eps);
  prop1_checks(ev.evaluate(majority_family(inst)), "proposition1_helstrom", out, best_eps);

  SampleStream stream(seed, {kFamilyTag, tag, index});
  prop1_checks(ev.evaluate(swapped(weighted)), "proposition1_adversarial", out, best_eps);
  prop1_checks(ev.evaluate(trivial_family(ev.branches(), 2)), "proposition1_adversarial", out, best_eps);
  for (int r = 0; r < 2; ++r)
    prop1_checks(ev.evaluate(random_family(ev.branches(), 2, stream)), "proposition1_adversarial", out, best_eps);

  if (weighted_outcome) out.push_back({"corollary1", ev.eta() - *weighted_outcome->report.epsilon_exact, 1e-9});

  const auto sigma = inst.central.populations();
  for (std::size_t m = 0; m < ev.branches().environments(); ++m) {
    const double bk = barnum_knill_bound(sigma, ev.fidelity_tables()[m]);
    const double err = discrimination_error(sigma, ev.branches().branch_states[m], weighted.projectors[m]);
    out.push_back({"barnum_knill", bk - err, 1e-9});
  }
  cor2_check(ev, inst.central, best_eps, out);
  return out;
}

std::vector<Check> qudit_checks(const OracleInstance& inst, std::uint64_t seed, std::size_t index) {
  std::vector<Check> out;
  const InstanceEvaluator ev(inst);
  if (const auto mismatch = ev.reduced_mismatch()) out.push_back({"reduced_state", -*mismatch, 1e-10});
  const std::size_t d_s = inst.central.dim();
  double best_eps = std::numeric_limits<double>::infinity();
  SampleStream stream(seed, {kFamilyTag, kQutritTag, index});
  prop1_checks(ev.evaluate(greedy_family(inst, ev.branches())), "proposition1_qudit", out, best_eps);
  prop1_checks(ev.evaluate(trivial_family(ev.branches(), d_s)), "proposition1_qudit", out, best_eps);
  for (int r = 0; r < 3; ++r)
    prop1_checks(ev.evaluate(random_family(ev.branches(), d_s, stream)), "proposition1_qudit", out, best_eps);
  cor2_check(ev, inst.central, best_eps, out);
  return out;
}

template <class Generator>
void run_instances(std::size_t count, unsigned threads, Generator&& checks_for,
                   std::map<std::string, SuiteResult>& suites) {
  std::vector<std::vector<Check>> per(count);
  parallel_for(count, threads, [&](std::size_t i) { per[i] = checks_for(i); });
  for (const auto& checks : per)
    for (const auto& c : checks) {
      auto& suite = suites[c.suite];
      suite.name = c.suite;
      suite.record(c.slack, c.tol);
    }
}

SpinParams random_convention_spin(SampleStream& stream) {
  SpinParams p = sample_spin(MeasureSpec::standard(), stream);
  p.g = stream.uniform(0.0, 3.0);
  return p;
}

}  // namespace

// ---------------------------------------------------------------------------

void InteractionSpec::validate() const {
  if (d_s() < 2) throw std::invalid_argument("InteractionSpec: need at least two pointer states");
  for (std::size_t k = 0; k < couplings.size(); ++k) {
    if (couplings[k].dim() < 2)
      throw DimensionError("InteractionSpec: coupling " + std::to_string(k) + " acts on a trivial space");
    if (couplings[k].hermiticity_error() > 1e-12)
      throw NotHermitianError(couplings[k].hermiticity_error());
  }
}

ComplexMatrix InteractionSpec::branch_unitary(std::size_t i, std::size_t k, double t) const {
  if (i >= d_s() || k >= couplings.size()) throw std::out_of_range("InteractionSpec::branch_unitary");
  const auto spec = hermitian_eigensystem(couplings[k]);
  std::vector<Complex> phases;
  for (double lam : spec.eigenvalues) phases.push_back(std::polar(1.0, -pointer_eigenvalues[i] * lam * t));
  return spec.eigenvectors * ComplexMatrix::diagonal(std::span<const Complex>(phases)) * spec.eigenvectors.adjoint();
}

InteractionSpec spin_model_interaction(std::span<const SpinParams> spins) {
  InteractionSpec inter;
  inter.pointer_eigenvalues = {1.0, -1.0};
  inter.convention = "U_s = exp(+i s g t sigma_z / 2), s = +1, -1";
  for (const auto& p : spins) {
    const double diag[2] = {-0.5 * p.g, 0.5 * p.g};
    inter.couplings.push_back(ComplexMatrix::diagonal(std::span<const double>(diag)));
  }
  return inter;
}

Complex oracle_decoherence_factor(const SpinParams& p, double t) {
  const auto inter = spin_model_interaction(std::span<const SpinParams>(&p, 1));
  return sandwich(inter.branch_unitary(0, 0, t), initial_spin_state(p).matrix(), inter.branch_unitary(1, 0, t))
      .trace();
}

BranchPair oracle_branch_states(const SpinParams& p, double t) {
  const auto inter = spin_model_interaction(std::span<const SpinParams>(&p, 1));
  const auto rho = initial_spin_state(p).matrix();
  const auto up = inter.branch_unitary(0, 0, t);
  const auto um = inter.branch_unitary(1, 0, t);
  return BranchPair{DensityMatrix::trusted(sandwich(up, rho, up)), DensityMatrix::trusted(sandwich(um, rho, um))};
}

double oracle_branch_fidelity(const SpinParams& p, double t) {
  const auto pair = oracle_branch_states(p, t);
  return fidelity(pair.plus, pair.minus);
}

DensityMatrix full_joint_state(const CentralState& central, std::span<const DensityMatrix> env_states,
                               const InteractionSpec& inter, double t) {
  require_consistent(central, env_states.size(), inter);
  std::size_t block = 1;
  for (std::size_t k = 0; k < env_states.size(); ++k) {
    if (env_states[k].dim() != inter.couplings[k].dim())
      throw DimensionError("environment " + std::to_string(k) + " does not match its coupling operator");
    block *= env_states[k].dim();
  }
  const std::size_t d_s = central.dim();
  if (d_s * block > kOracleDimensionCap)
    throw DimensionError("full_joint_state: dimension " + std::to_string(d_s * block) + " exceeds the cap of " +
                         std::to_string(kOracleDimensionCap));

  // rho(0) restricted to block (i, j) is sigma_ij (x)_k rho_k; W_i = (x)_k U_i^(k).
  std::vector<ComplexMatrix> env_mats;
  for (const auto& rho : env_states) env_mats.push_back(rho.matrix());
  const ComplexMatrix env0 = tensor(env_mats);
  const auto unitaries = all_unitaries(inter, t);
  std::vector<ComplexMatrix> w;
  for (std::size_t i = 0; i < d_s; ++i) w.push_back(tensor(unitaries[i]));

  ComplexMatrix out(d_s * block);
  for (std::size_t i = 0; i < d_s; ++i) {
    const ComplexMatrix left = w[i] * env0;
    for (std::size_t j = 0; j < d_s; ++j) {
      const Complex s = central.coherence(i, j);
      if (s == Complex(0.0)) continue;
      const ComplexMatrix b = left * w[j].adjoint();
      for (std::size_t r = 0; r < block; ++r)
        for (std::size_t c = 0; c < block; ++c) out(i * block + r, j * block + c) = s * b(r, c);
    }
  }
  return DensityMatrix::trusted(std::move(out));
}

DensityMatrix full_joint_state(const CentralState& central, const EnvironmentSpec& env, const InteractionSpec& inter,
                               double t) {
  const auto states = initial_states(env);
  return full_joint_state(central, states, inter, t);
}

DensityMatrix reduced_state_exact(const DensityMatrix& joint, const EnvironmentSpec& env) {
  const std::size_t n = env.total();
  const std::size_t block = pow2(n);
  if (joint.dim() % block != 0 || joint.dim() / block < 2)
    throw DimensionError("reduced_state_exact: joint dimension " + std::to_string(joint.dim()) +
                         " does not fit " + std::to_string(n) + " environment spins");
  std::vector<std::size_t> dims{joint.dim() / block};
  std::vector<bool> keep{true};
  for (std::size_t k = 0; k < n; ++k) {
    dims.push_back(2);
    keep.push_back(k < env.observed_count());
  }
  return partial_trace(joint, dims, keep);
}

DensityMatrix reduced_state_analytic(const CentralState& central, const EnvironmentSpec& env,
                                     const InteractionSpec& inter, double t) {
  const auto states = initial_states(env);
  require_consistent(central, states.size(), inter);
  const std::size_t d_s = central.dim();
  const std::size_t n_obs = env.observed_count();
  const std::size_t block = pow2(n_obs);
  const auto unitaries = all_unitaries(inter, t);

  ComplexMatrix out(d_s * block);
  for (std::size_t i = 0; i < d_s; ++i)
    for (std::size_t j = 0; j < d_s; ++j) {
      Complex weight = central.coherence(i, j);
      for (std::size_t k = n_obs; k < states.size(); ++k)
        weight *= sandwich(unitaries[i][k], states[k].matrix(), unitaries[j][k]).trace();
      std::vector<ComplexMatrix> factors;
      for (std::size_t k = 0; k < n_obs; ++k)
        factors.push_back(sandwich(unitaries[i][k], states[k].matrix(), unitaries[j][k]));
      const ComplexMatrix b = factors.empty() ? ComplexMatrix::identity(1) : tensor(factors);
      for (std::size_t r = 0; r < block; ++r)
        for (std::size_t c = 0; c < block; ++c) out(i * block + r, j * block + c) = weight * b(r, c);
    }
  return DensityMatrix::trusted(std::move(out));
}

double exact_epsilon(const DensityMatrix& reduced, const SBSState& sbs) {
  const DensityMatrix target = sbs.assemble();
  if (target.dim() != reduced.dim())
    throw DimensionError("exact_epsilon: SBS state has dimension " + std::to_string(target.dim()) +
                         ", reduced state " + std::to_string(reduced.dim()));
  return 0.5 * trace_norm(reduced.matrix() - target.matrix());
}

MutualInfoCheck exact_mutual_info_check(const DensityMatrix& reduced, const CentralState& central,
                                        double eps_or_eta) {
  const std::size_t d_s = central.dim();
  if (reduced.dim() % d_s != 0) throw DimensionError("exact_mutual_info_check: central dimension mismatch");
  const std::size_t dims[2] = {d_s, reduced.dim() / d_s};
  MutualInfoCheck out;
  out.mutual_info = mutual_information(reduced, dims, {true, false});
  const auto sigma = central.populations();
  out.h_s = shannon_entropy(sigma);
  out.gap = std::abs(out.mutual_info - out.h_s);
  const auto c2 = cor2_bound(eps_or_eta, d_s);
  out.f_bound = c2.bound;
  out.applicable = c2.valid;
  out.ok = !out.applicable || out.gap <= out.f_bound + 1e-9;
  return out;
}

OracleInstance random_qubit_instance(std::uint64_t seed, std::size_t index) {
  SampleStream stream(seed, {kQubitTag, index});
  const double sp = stream.uniform();
  const double c = stream.uniform();
  const double phi = stream.uniform(0.0, kTwoPi);
  const auto central = CentralState::qubit(sp, std::polar(c * std::sqrt(sp * (1.0 - sp)), phi));

  static const std::vector<std::vector<std::size_t>> layouts{{1, 1, 1}, {3}, {2, 1}};
  EnvironmentSpec env;
  const auto measure = MeasureSpec::standard();
  for (std::size_t size : layouts[index % layouts.size()]) {
    MacrofractionSpec mac;
    for (std::size_t s = 0; s < size; ++s) mac.spins.push_back(sample_spin(measure, stream));
    env.observed.push_back(std::move(mac));
  }
  for (int s = 0; s < 3; ++s) env.unobserved.push_back(sample_spin(measure, stream));
  const double t = stream.uniform(0.0, kTwoPi);
  const auto flat = env.flattened();
  return OracleInstance{central, std::move(env), spin_model_interaction(flat), t};
}

OracleInstance random_qutrit_instance(std::uint64_t seed, std::size_t index) {
  SampleStream stream(seed, {kQutritTag, index});
  ComplexMatrix g(3);
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 3; ++c) g(r, c) = Complex(gaussian(stream), gaussian(stream));
  ComplexMatrix rho = g * g.adjoint();
  rho = (rho + rho.adjoint()) * Complex(0.5);
  rho *= Complex(1.0 / rho.trace().real());
  const CentralState central(rho);

  InteractionSpec inter;
  for (int i = 0; i < 3; ++i) inter.pointer_eigenvalues.push_back(stream.uniform(-1.0, 1.0));
  std::sort(inter.pointer_eigenvalues.begin(), inter.pointer_eigenvalues.end());
  inter.convention = "U_i = exp(-i a_i B_k t)";

  static const std::vector<std::vector<std::size_t>> layouts{{1, 1}, {2}};
  EnvironmentSpec env;
  const auto measure = MeasureSpec::standard();
  for (std::size_t size : layouts[index % layouts.size()]) {
    MacrofractionSpec mac;
    for (std::size_t s = 0; s < size; ++s) mac.spins.push_back(sample_spin(measure, stream));
    env.observed.push_back(std::move(mac));
  }
  for (int s = 0; s < 2; ++s) env.unobserved.push_back(sample_spin(measure, stream));
  for (std::size_t k = 0; k < env.total(); ++k) {
    const Complex z(stream.uniform(-1.0, 1.0), stream.uniform(-1.0, 1.0));
    inter.couplings.push_back(ComplexMatrix{{stream.uniform(-1.0, 1.0), z}, {std::conj(z), stream.uniform(-1.0, 1.0)}});
  }
  const double t = stream.uniform(0.0, kTwoPi);
  return OracleInstance{central, std::move(env), std::move(inter), t};
}

OracleInstance random_late_instance(std::uint64_t seed, std::size_t index) {
  SampleStream stream(seed, {kLateTag, index});
  const double sp = stream.uniform();
  const double c = stream.uniform();
  const double phi = stream.uniform(0.0, kTwoPi);
  const auto central = CentralState::qubit(sp, std::polar(c * std::sqrt(sp * (1.0 - sp)), phi));

  MeasureSpec pure = MeasureSpec::standard();
  pure.lambda = FixedLambda{1.0};
  EnvironmentSpec env;
  for (int m = 0; m < 2; ++m) {
    MacrofractionSpec mac;
    for (int s = 0; s < 2; ++s) mac.spins.push_back(sample_spin(pure, stream));
    env.observed.push_back(std::move(mac));
  }
  const auto measure = MeasureSpec::standard();
  for (int s = 0; s < 12; ++s) env.unobserved.push_back(sample_spin(measure, stream));
  const double t = stream.uniform(kTwoPi, 3.0 * kTwoPi);
  const auto flat = env.flattened();
  return OracleInstance{central, std::move(env), spin_model_interaction(flat), t};
}

BranchEnsemble oracle_branch_ensemble(const OracleInstance& inst) {
  const auto states = initial_states(inst.env);
  require_consistent(inst.central, states.size(), inst.inter);
  const auto unitaries = all_unitaries(inst.inter, inst.t);
  BranchEnsemble out;
  for (const auto& [lo, hi] : macro_ranges(inst.env)) {
    std::vector<DensityMatrix> branch;
    for (std::size_t i = 0; i < inst.central.dim(); ++i) {
      std::vector<ComplexMatrix> factors;
      for (std::size_t k = lo; k < hi; ++k) factors.push_back(sandwich(unitaries[i][k], states[k].matrix(), unitaries[i][k]));
      branch.push_back(DensityMatrix::trusted(tensor(factors)));
    }
    out.branch_states.push_back(std::move(branch));
  }
  return out;
}

double oracle_collective_gamma(const OracleInstance& inst) {
  const auto states = initial_states(inst.env);
  require_consistent(inst.central, states.size(), inst.inter);
  const auto unitaries = all_unitaries(inst.inter, inst.t);
  PairTable mags;
  for (std::size_t i = 0; i < inst.central.dim(); ++i)
    for (std::size_t j = 0; j < inst.central.dim(); ++j) {
      if (i == j) continue;
      double prod = 1.0;
      for (std::size_t k = inst.env.observed_count(); k < states.size(); ++k)
        prod *= std::abs(sandwich(unitaries[i][k], states[k].matrix(), unitaries[j][k]).trace());
      mags[{i, j}] = prod;
    }
  return collective_gamma(inst.central, mags);
}

BoundReport bound_report(const OracleInstance& inst, const ProjectorFamily& family) {
  const InstanceEvaluator ev(inst);
  if (auto outcome = ev.evaluate(family)) return outcome->report;
  BoundReport report;
  const auto sigma = inst.central.populations();
  report.time = inst.t;
  report.gamma_collective = oracle_collective_gamma(inst);
  for (std::size_t m = 0; m < ev.branches().environments(); ++m)
    report.discrimination_errors.push_back(
        discrimination_error(sigma, ev.branches().branch_states[m], family.projectors[m]));
  report.prop1_bound = prop1_bound(report.gamma_collective, report.discrimination_errors);
  report.eta_cor1 = ev.eta();
  return report;
}

// ---------------------------------------------------------------------------

void SuiteResult::record(double slack, double tol) {
  if (passed + failed == 0 || slack < worst_margin) worst_margin = slack;
  if (slack >= -tol)
    ++passed;
  else
    ++failed;
}

bool VerifyReport::all_passed() const {
  return !suites.empty() && std::all_of(suites.begin(), suites.end(), [](const SuiteResult& s) { return s.ok(); });
}

const SuiteResult& VerifyReport::suite(const std::string& name) const {
  for (const auto& s : suites)
    if (s.name == name) return s;
  throw std::out_of_range("VerifyReport: no suite named " + name);
}

SuiteResult convention_suite(std::uint64_t seed, std::size_t draws, unsigned threads) {
  std::vector<std::vector<double>> errors(draws);
  parallel_for(draws, threads, [&](std::size_t i) {
    SampleStream stream(seed, {kConventionTag, i});
    const SpinParams p = random_convention_spin(stream);
    const double t = stream.uniform(0.0, 2.0 * kTwoPi);
    const auto oracle_pair = oracle_branch_states(p, t);
    const auto closed_pair = evolved_branch_states(p, t);
    const double oracle_b = fidelity(oracle_pair.plus, oracle_pair.minus);
    const auto rho0 = initial_spin_state(p).matrix();
    const double purity0 = (rho0 * rho0).trace().real();
    errors[i] = {
        std::abs(oracle_decoherence_factor(p, t) - spin_decoherence_factor(p, t)),
        std::abs(oracle_b - spin_fidelity(p, t)),
        std::abs(oracle_b - spin_fidelity_trace_det(p, t)),
        oracle_pair.plus.matrix().max_abs_diff(closed_pair.plus.matrix()),
        oracle_pair.minus.matrix().max_abs_diff(closed_pair.minus.matrix()),
        std::abs((oracle_pair.plus.matrix() * oracle_pair.plus.matrix()).trace().real() - purity0),
        std::abs((oracle_pair.minus.matrix() * oracle_pair.minus.matrix()).trace().real() - purity0),
    };
  });
  SuiteResult out{"convention"};
  for (const auto& row : errors)
    for (std::size_t c = 0; c < row.size(); ++c) out.record(-row[c], c < 5 ? 1e-10 : 1e-12);
  return out;
}

SuiteResult helstrom_suite(std::uint64_t seed, std::size_t draws, unsigned threads) {
  std::vector<std::vector<double>> errors(draws);
  parallel_for(draws, threads, [&](std::size_t i) {
    SampleStream stream(seed, {kHelstromTag, i});
    const SpinParams p = random_convention_spin(stream);
    const double t = stream.uniform(0.0, 2.0 * kTwoPi);
    const auto pair = oracle_branch_states(p, t);
    const auto analytic = helstrom_spin_analytic(p, t).projectors;
    const double p_closed = local_success_probability(p, t);
    auto tr = [](const ComplexMatrix& a, const ComplexMatrix& b) { return (a * b).trace().real(); };
    const double p_plus = tr(analytic.plus, pair.plus.matrix());
    const double p_minus = tr(analytic.minus, pair.minus.matrix());
    const auto numeric = helstrom_pair(pair.plus, pair.minus);
    const double err = equal_prior_error(pair.plus, pair.minus, numeric);
    const double trace_dist = trace_norm(pair.plus.matrix() - pair.minus.matrix());
    errors[i] = {std::abs(p_plus - p_closed), std::abs(p_minus - p_closed), std::abs(1.0 - err - p_closed),
                 std::abs(err - 0.5 * (1.0 - 0.5 * trace_dist))};
  });
  SuiteResult out{"helstrom"};
  for (const auto& row : errors)
    for (std::size_t c = 0; c < row.size(); ++c) out.record(-row[c], c < 2 ? 1e-12 : 1e-10);
  return out;
}

SuiteResult chernoff_suite() {
  SuiteResult out{"chernoff"};
  for (std::size_t n : {11u, 101u, 1001u})
    for (int s = 1; s <= 9; ++s) {
      const double s_bar = 0.05 * s;
      out.record(majority_success(n, 0.5 + s_bar) - chernoff_bound(n, s_bar));
    }
  out.record(-std::abs(majority_success(3, 0.5) - 0.5));
  return out;
}

SuiteResult kolmogorov_fuchs_suite(std::uint64_t seed, std::size_t instances, std::size_t macro_size,
                                   unsigned threads) {
  std::vector<double> slack(instances);
  parallel_for(instances, threads, [&](std::size_t i) {
    SampleStream stream(seed, {kFuchsTag, i});
    std::vector<SpinParams> spins(macro_size);
    for (auto& p : spins) p = sample_spin(MeasureSpec::standard(), stream);
    const double t = stream.uniform(0.0, kTwoPi);
    std::vector<double> probs;
    for (const auto& p : spins) probs.push_back(local_success_probability(p, t));
    const auto kf = kolmogorov_fuchs(majority_success_heterogeneous(probs), macrofraction_fidelity(spins, t));
    slack[i] = kf.fuchs_limit - kf.k;
  });
  SuiteResult out{"kolmogorov_fuchs"};
  for (double s : slack) out.record(s, 1e-9);
  return out;
}

VerifyReport run_verification(const VerifyOptions& options) {
  VerifyReport report;
  report.suites.push_back(convention_suite(options.seed, options.convention_draws, options.threads));
  report.suites.push_back(helstrom_suite(options.seed, options.convention_draws, options.threads));

  std::map<std::string, SuiteResult> instance_suites;
  for (const char* name : {"reduced_state", "proposition1_helstrom", "proposition1_adversarial", "proposition1_qudit",
                           "proposition1_sqrt", "corollary1", "corollary2", "barnum_knill"})
    instance_suites[name].name = name;
  run_instances(options.qubit_instances, options.threads,
                [&](std::size_t i) { return qubit_checks(random_qubit_instance(options.seed, i), options.seed, kQubitTag, i); },
                instance_suites);
  run_instances(options.late_instances, options.threads,
                [&](std::size_t i) { return qubit_checks(random_late_instance(options.seed, i), options.seed, kLateTag, i); },
                instance_suites);
  run_instances(options.qutrit_instances, options.threads,
                [&](std::size_t i) { return qudit_checks(random_qutrit_instance(options.seed, i), options.seed, i); },
                instance_suites);
  for (const char* name : {"reduced_state", "proposition1_helstrom", "proposition1_adversarial", "proposition1_qudit",
                           "proposition1_sqrt", "corollary1", "corollary2", "barnum_knill"})
    report.suites.push_back(instance_suites[name]);

  report.suites.push_back(chernoff_suite());
  report.suites.push_back(
      kolmogorov_fuchs_suite(options.seed, options.fuchs_instances, options.fuchs_macro_size, options.threads));
  return report;
}

}  // namespace sbs
