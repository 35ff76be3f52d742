#include "support.hpp"

#include "sbs/discrimination.hpp"
#include "sbs/oracle.hpp"

using namespace sbs;
using testing::Gen;
using testing::kPi;

namespace {

SpinParams pure_plus(double g = 1.0) {
  SpinParams p;
  p.beta = kPi / 2;
  p.g = g;
  return p;
}

OracleInstance make_instance(CentralState central, std::vector<std::vector<SpinParams>> observed,
                             std::vector<SpinParams> unobserved, double t) {
  EnvironmentSpec env;
  for (auto& m : observed) env.observed.push_back(MacrofractionSpec{std::move(m)});
  env.unobserved = std::move(unobserved);
  const auto flat = env.flattened();
  InteractionSpec inter = spin_model_interaction(flat);
  return OracleInstance{std::move(central), std::move(env), std::move(inter), t};
}

ProjectorFamily helstrom_family(const OracleInstance& inst) {
  const BranchEnsemble br = oracle_branch_ensemble(inst);
  ProjectorFamily fam;
  for (const auto& states : br.branch_states) {
    const auto pair = helstrom_pair(states[0], states[1], inst.central.sigma(0));
    fam.projectors.push_back({pair.plus, pair.minus});
  }
  return fam;
}

}  // namespace

TEST_CASE("per-spin oracles agree with the closed forms") {
  Gen gen(51);
  for (int rep = 0; rep < 300; ++rep) {
    const SpinParams p = gen.spin();
    const double t = gen.uniform(0.0, 4 * kPi);
    CHECK(std::abs(oracle_decoherence_factor(p, t) - spin_decoherence_factor(p, t)) < 1e-10);
    CHECK(oracle_branch_fidelity(p, t) == doctest::Approx(spin_fidelity(p, t)).epsilon(1e-7));
    const auto a = oracle_branch_states(p, t);
    const auto b = evolved_branch_states(p, t);
    CHECK(a.plus.matrix().max_abs_diff(b.plus.matrix()) < 1e-10);
    CHECK(a.minus.matrix().max_abs_diff(b.minus.matrix()) < 1e-10);
  }
}

TEST_CASE("joint state at t = 0 is the initial product state") {
  Gen gen(52);
  const CentralState c = CentralState::qubit(0.3, Complex(0.2, 0.1));
  std::vector<SpinParams> obs{gen.spin(), gen.spin()};
  std::vector<SpinParams> un{gen.spin()};
  const OracleInstance inst = make_instance(c, {obs}, un, 0.0);
  const DensityMatrix joint = full_joint_state(inst.central, inst.env, inst.inter, 0.0);
  std::vector<DensityMatrix> factors{c.density()};
  for (const auto& s : inst.env.flattened()) factors.push_back(initial_spin_state(s));
  CHECK(joint.matrix().max_abs_diff(tensor(std::span<const DensityMatrix>(factors)).matrix()) < 1e-14);
}

TEST_CASE("diagonal central state keeps the joint state block diagonal") {
  Gen gen(53);
  const double pops[] = {0.4, 0.6};
  const OracleInstance inst = make_instance(CentralState::diagonal(pops), {{gen.spin(), gen.spin()}}, {gen.spin()}, 1.3);
  const DensityMatrix joint = full_joint_state(inst.central, inst.env, inst.inter, inst.t);
  const std::size_t half = joint.dim() / 2;
  double off = 0.0;
  for (std::size_t r = 0; r < half; ++r)
    for (std::size_t c = half; c < joint.dim(); ++c) off = std::max(off, std::abs(joint(r, c)));
  CHECK(off == 0.0);
}

TEST_CASE("reduced state: nothing discarded, everything discarded") {
  Gen gen(54);
  const CentralState c = CentralState::qubit(0.55, Complex(0.3, -0.2));
  SUBCASE("f = 1") {
    const OracleInstance inst = make_instance(c, {{gen.spin(), gen.spin()}, {gen.spin()}}, {}, 2.1);
    const DensityMatrix joint = full_joint_state(inst.central, inst.env, inst.inter, inst.t);
    CHECK(reduced_state_exact(joint, inst.env).matrix().max_abs_diff(joint.matrix()) < 1e-14);
    CHECK(reduced_state_analytic(inst.central, inst.env, inst.inter, inst.t).matrix().max_abs_diff(joint.matrix()) < 1e-12);
  }
  SUBCASE("f = 0") {
    std::vector<SpinParams> un{gen.spin(), gen.spin(), gen.spin(), gen.spin()};
    const OracleInstance inst = make_instance(c, {}, un, 0.9);
    const DensityMatrix joint = full_joint_state(inst.central, inst.env, inst.inter, inst.t);
    const DensityMatrix exact = reduced_state_exact(joint, inst.env);
    REQUIRE(exact.dim() == 2);
    const Complex g = decoherence_factor(un, inst.t);
    CHECK(std::abs(exact(0, 1) - c.coherence(0, 1) * g) < 1e-12);
    CHECK(std::abs(exact(1, 0) - c.coherence(1, 0) * std::conj(g)) < 1e-12);
    CHECK(exact(0, 0).real() == doctest::Approx(0.55));
  }
  SUBCASE("single discarded spin") {
    const SpinParams s = gen.spin();
    const OracleInstance inst = make_instance(c, {}, {s}, 2.7);
    const DensityMatrix exact = reduced_state_exact(full_joint_state(inst.central, inst.env, inst.inter, inst.t), inst.env);
    CHECK(std::abs(exact(0, 1) - spin_decoherence_factor(s, 2.7) * c.coherence(0, 1)) < 1e-12);
  }
}

TEST_CASE("blockwise reduced state matches the partial trace") {
  for (std::size_t i = 0; i < 20; ++i) {
    const OracleInstance inst = random_qubit_instance(77, i);
    const DensityMatrix joint = full_joint_state(inst.central, inst.env, inst.inter, inst.t);
    const DensityMatrix a = reduced_state_exact(joint, inst.env);
    const DensityMatrix b = reduced_state_analytic(inst.central, inst.env, inst.inter, inst.t);
    CHECK(a.matrix().max_abs_diff(b.matrix()) < 1e-10);
    CHECK(oracle_collective_gamma(inst) >= 0.0);
  }
  for (std::size_t i = 0; i < 5; ++i) {
    const OracleInstance inst = random_qutrit_instance(77, i);
    const DensityMatrix joint = full_joint_state(inst.central, inst.env, inst.inter, inst.t);
    CHECK(reduced_state_exact(joint, inst.env).matrix().max_abs_diff(
              reduced_state_analytic(inst.central, inst.env, inst.inter, inst.t).matrix()) < 1e-10);
  }
}

TEST_CASE("an SBS state is at distance zero from its own SBS") {
  const double pops[] = {0.35, 0.65};
  const OracleInstance inst = make_instance(CentralState::diagonal(pops), {{pure_plus()}, {pure_plus(), pure_plus()}}, {}, kPi / 2);
  const DensityMatrix reduced = reduced_state_analytic(inst.central, inst.env, inst.inter, inst.t);
  const SBSState sbs = build_sbs(inst.central, oracle_branch_ensemble(inst), helstrom_family(inst));
  CHECK(exact_epsilon(reduced, sbs) < 1e-10);
  CHECK(sbs.eta_norm == doctest::Approx(1.0));

  const auto mi = exact_mutual_info_check(reduced, inst.central, 0.0);
  CHECK(mi.mutual_info == doctest::Approx(mi.h_s).epsilon(1e-9));
  CHECK(mi.ok);

  const double fair[] = {0.5, 0.5};
  const OracleInstance fifty = make_instance(CentralState::diagonal(fair), {{pure_plus()}}, {}, kPi / 2);
  const auto fmi = exact_mutual_info_check(reduced_state_analytic(fifty.central, fifty.env, fifty.inter, fifty.t),
                                           fifty.central, 0.0);
  CHECK(fmi.mutual_info == doctest::Approx(1.0));
  CHECK(fmi.gap == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("product state with a diagonal central part carries no information") {
  const double fair[] = {0.5, 0.5};
  const OracleInstance inst = make_instance(CentralState::diagonal(fair), {{pure_plus()}}, {}, 0.0);
  const auto mi = exact_mutual_info_check(reduced_state_analytic(inst.central, inst.env, inst.inter, 0.0), inst.central, 0.5);
  CHECK(mi.mutual_info == doctest::Approx(0.0).scale(1.0));
  CHECK(mi.gap == doctest::Approx(1.0));
  CHECK_FALSE(mi.applicable);
}

TEST_CASE("coherent t = 0 pessimistic qubit is far from SBS") {
  const OracleInstance inst = make_instance(CentralState::qubit(0.5, 0.5), {{pure_plus()}}, {pure_plus()}, 0.0);
  const DensityMatrix reduced = reduced_state_analytic(inst.central, inst.env, inst.inter, 0.0);
  const SBSState sbs = build_sbs(inst.central, oracle_branch_ensemble(inst), helstrom_family(inst));
  CHECK(exact_epsilon(reduced, sbs) > 0.1);
}

TEST_CASE("sum-of-errors bound fails for non-commuting projectors") {
  // Central pointer state |+><+| only, one observed spin in |+x> at t = 0,
  // measured with projectors onto the computational basis. The branch overlap
  // with the chosen projector is c = 1/2, so the trace distance is sqrt(1 - c)
  // while Gamma + p_E is only 1 - c.
  const OracleInstance inst = make_instance(CentralState::qubit(1.0, 0.0), {{pure_plus()}}, {}, 0.0);
  ProjectorFamily fam{{{ComplexMatrix{{1.0, 0.0}, {0.0, 0.0}}, ComplexMatrix{{0.0, 0.0}, {0.0, 1.0}}}}};
  const BoundReport r = bound_report(inst, fam);
  REQUIRE(r.epsilon_exact.has_value());
  CHECK(*r.epsilon_exact == doctest::Approx(0.70710678118654752).epsilon(1e-12));
  CHECK(r.gamma_collective == 0.0);
  CHECK(r.prop1_bound == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(*r.epsilon_exact > r.prop1_bound);

  // The gentle-measurement form 2 sigma sqrt(Tr[rho (1 - P)]) still dominates.
  CHECK(*r.epsilon_exact <= 2.0 * std::sqrt(0.5) + 1e-12);
}

TEST_CASE("distance to SBS grows with the overlap deficit as a square root") {
  // Family of projectors rotated by theta away from |+x>: c = cos^2(theta / 2).
  const OracleInstance inst = make_instance(CentralState::qubit(1.0, 0.0), {{pure_plus()}}, {}, 0.0);
  for (double theta : {0.1, 0.4, 0.9, 1.4}) {
    const double c = std::cos(theta / 2), s = std::sin(theta / 2);
    // phi = cos(th/2)|+> + sin(th/2)|->
    const Complex phi[] = {(c + s) / std::sqrt(2.0), (c - s) / std::sqrt(2.0)};
    const ComplexMatrix p = DensityMatrix::pure(phi).matrix();
    ProjectorFamily fam{{{p, ComplexMatrix::identity(2) - p}}};
    const BoundReport r = bound_report(inst, fam);
    const double overlap = c * c;
    CHECK(*r.epsilon_exact == doctest::Approx(std::sqrt(1.0 - overlap)).epsilon(1e-10));
    CHECK(r.prop1_bound == doctest::Approx(1.0 - overlap).epsilon(1e-10));
  }
}

TEST_CASE("suites pass on a reduced corpus") {
  CHECK(convention_suite(5, 200).ok());
  CHECK(helstrom_suite(5, 200).ok());
  CHECK(chernoff_suite().ok());
  CHECK(kolmogorov_fuchs_suite(5, 50, 21).ok());

  VerifyOptions opt;
  opt.seed = 5;
  opt.convention_draws = 50;
  opt.qubit_instances = 30;
  opt.qutrit_instances = 8;
  opt.late_instances = 10;
  opt.fuchs_instances = 20;
  const VerifyReport rep = run_verification(opt);
  for (const char* name : {"convention", "helstrom", "reduced_state", "proposition1_qudit", "proposition1_sqrt",
                           "corollary1", "corollary2", "barnum_knill", "chernoff", "kolmogorov_fuchs"}) {
    CAPTURE(name);
    CHECK(rep.suite(name).ok());
  }
  CHECK_THROWS_AS(rep.suite("missing"), std::out_of_range);
}

TEST_CASE("dimension cap") {
  std::vector<SpinParams> many(12, pure_plus());
  const OracleInstance inst = make_instance(CentralState::qubit(0.5, 0.0), {}, many, 1.0);
  CHECK_THROWS(full_joint_state(inst.central, inst.env, inst.inter, inst.t));
}
