#include "support.hpp"

#include <algorithm>
#include <limits>

#include "sbs/spin_model.hpp"

using namespace sbs;
using testing::Gen;
using testing::kPi;
using testing::Mat2;

namespace {

SpinParams example_spin() {
  SpinParams p;
  p.lambda = 0.75;
  p.beta = kPi / 3;
  p.g = 1.0;
  return p;
}

Complex oracle_gamma(const SpinParams& p, double t) {
  const Mat2 rho = testing::spin_state(p);
  return (testing::pointer_unitary(p.g, t, +1) * rho * testing::pointer_unitary(p.g, t, -1).dagger()).trace();
}

Mat2 oracle_branch(const SpinParams& p, double t, int s) {
  const Mat2 u = testing::pointer_unitary(p.g, t, s);
  return u * testing::spin_state(p) * u.dagger();
}

}  // namespace

TEST_CASE("initial spin state") {
  SpinParams p;
  CHECK(initial_spin_state(p).matrix().max_abs_diff(ComplexMatrix{{1.0, 0.0}, {0.0, 0.0}}) < 1e-15);

  p.beta = kPi / 2;
  CHECK(initial_spin_state(p).matrix().max_abs_diff(ComplexMatrix{{0.5, 0.5}, {0.5, 0.5}}) < 1e-15);

  Gen gen(21);
  for (int rep = 0; rep < 200; ++rep) {
    SpinParams q = gen.spin();
    const DensityMatrix rho = initial_spin_state(q);
    CHECK(testing::max_diff(testing::to_mat2(rho.matrix()), testing::spin_state(q)) < 1e-14);
    CHECK(std::abs(rho(0, 1) - delta(q)) < 1e-15);
    CHECK(rho(0, 0).real() == doctest::Approx(pointer_population(q)).epsilon(1e-14));
    const auto s = hermitian_eigensystem(rho.matrix());
    CHECK(s.eigenvalues[0] == doctest::Approx(std::max(q.lambda, 1 - q.lambda)).epsilon(1e-12));
    q.lambda = 0.5;
    CHECK(initial_spin_state(q).matrix().max_abs_diff(ComplexMatrix::identity(2) * Complex(0.5)) < 1e-15);
  }
}

TEST_CASE("parameter validation names the field") {
  SpinParams p;
  p.lambda = 1.5;
  CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("lambda"), std::invalid_argument);
  p = SpinParams{};
  p.beta = -0.1;
  CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("beta"), std::invalid_argument);
}

TEST_CASE("evolved branch states") {
  const SpinParams p = example_spin();
  const auto at0 = evolved_branch_states(p, 0.0);
  CHECK(at0.plus.matrix().max_abs_diff(initial_spin_state(p).matrix()) < 1e-15);
  CHECK(at0.minus.matrix().max_abs_diff(initial_spin_state(p).matrix()) < 1e-15);

  SpinParams frozen;
  for (double t : {0.3, 1.7, 9.0}) {
    const auto b = evolved_branch_states(frozen, t);
    CHECK(b.plus.matrix().max_abs_diff(ComplexMatrix{{1.0, 0.0}, {0.0, 0.0}}) < 1e-15);
    CHECK(b.minus.matrix().max_abs_diff(ComplexMatrix{{1.0, 0.0}, {0.0, 0.0}}) < 1e-15);
  }

  Gen gen(22);
  for (int rep = 0; rep < 300; ++rep) {
    const SpinParams q = gen.spin();
    const double t = gen.uniform(0.0, 4 * kPi);
    const auto b = evolved_branch_states(q, t);
    CHECK(testing::max_diff(testing::to_mat2(b.plus.matrix()), oracle_branch(q, t, +1)) < 1e-12);
    CHECK(testing::max_diff(testing::to_mat2(b.minus.matrix()), oracle_branch(q, t, -1)) < 1e-12);
  }
}

TEST_CASE("decoherence factor") {
  const SpinParams p = example_spin();
  const Complex expected(0.70710678118654752, 0.17677669529663688);
  CHECK(std::abs(spin_decoherence_factor(p, kPi / 4) - expected) < 1e-15);
  CHECK(std::abs(oracle_gamma(p, kPi / 4) - expected) < 1e-14);
  CHECK(spin_decoherence_factor(p, 0.0) == Complex(1.0, 0.0));

  SpinParams eigen;
  eigen.g = 0.8;
  for (double t : {0.1, 2.0, 7.5}) {
    const Complex f = spin_decoherence_factor(eigen, t);
    CHECK(std::abs(f - std::polar(1.0, eigen.g * t)) < 1e-15);
  }

  Gen gen(23);
  for (int rep = 0; rep < 500; ++rep) {
    const SpinParams q = gen.spin();
    const double t = gen.uniform(0.0, 4 * kPi);
    CHECK(std::abs(spin_decoherence_factor(q, t) - oracle_gamma(q, t)) < 1e-12);
  }
}

TEST_CASE("collective decoherence factor agrees in both regimes") {
  Gen gen(24);
  for (std::size_t n : {1u, 5u, 64u, 65u, 200u}) {
    std::vector<SpinParams> spins;
    for (std::size_t k = 0; k < n; ++k) spins.push_back(gen.spin(1.0));
    const double t = gen.uniform(0.0, 3.0);
    Complex direct = 1.0;
    for (const auto& s : spins) direct *= oracle_gamma(s, t);
    const Complex got = decoherence_factor(spins, t);
    CHECK(std::abs(got - direct) <= 1e-12 * std::max(1.0, std::abs(direct)) + 1e-300);
    const LogComplex lg = log_decoherence_factor(spins, t);
    CHECK(lg.log_abs == doctest::Approx(std::log(std::abs(direct))).epsilon(1e-10));
  }
  // Far below the double range the log route stays finite.
  std::vector<SpinParams> many(20000);
  for (auto& s : many) s = gen.spin(1.0);
  const LogComplex deep = log_decoherence_factor(many, 5.0);
  CHECK(std::isfinite(deep.log_abs));
  CHECK(deep.log_abs < -745.0);
  CHECK(decoherence_factor(many, 5.0) == Complex(0.0, 0.0));
}

TEST_CASE("branch fidelity") {
  const SpinParams p = example_spin();
  CHECK(spin_fidelity(p, kPi / 4) == doctest::Approx(0.9519716382329886).epsilon(1e-14));
  CHECK(spin_fidelity(p, 0.0) == 1.0);

  SpinParams sharp;
  sharp.beta = kPi / 2;
  CHECK(spin_fidelity(sharp, kPi / 2) == doctest::Approx(0.0));

  Gen gen(25);
  for (int rep = 0; rep < 300; ++rep) {
    const SpinParams q = gen.spin();
    const double t = gen.uniform(0.0, 4 * kPi);
    const auto b = evolved_branch_states(q, t);
    const double oracle = fidelity(b.plus, b.minus);
    CHECK(spin_fidelity(q, t) == doctest::Approx(oracle).epsilon(1e-7));
    CHECK(spin_fidelity_trace_det(q, t) == doctest::Approx(spin_fidelity(q, t)).epsilon(1e-7));
  }
}

TEST_CASE("macrofraction fidelity and its logarithm") {
  Gen gen(26);
  for (std::size_t n : {1u, 10u, 64u, 100u}) {
    MacrofractionSpec mac;
    for (std::size_t k = 0; k < n; ++k) mac.spins.push_back(gen.spin(1.0));
    const double t = gen.uniform(0.0, 2.0);
    double prod = 1.0;
    for (const auto& s : mac.spins) prod *= spin_fidelity(s, t);
    CHECK(macrofraction_fidelity(mac, t) == doctest::Approx(prod).epsilon(1e-12));
    CHECK(std::exp(-log_macrofraction_fidelity(mac.spins, t)) == doctest::Approx(prod).epsilon(1e-10));
  }
}

TEST_CASE("large-N exponents") {
  const SpinParams p = example_spin();
  const Exponents e = lln_exponents(p, kPi / 4);
  CHECK(e.kappa == doctest::Approx(0.09844007281325252).epsilon(1e-13));
  CHECK(std::exp(-e.kappa / 2) == doctest::Approx(spin_fidelity(p, kPi / 4)).epsilon(1e-14));
  CHECK(std::exp(-e.chi / 2) == doctest::Approx(std::abs(spin_decoherence_factor(p, kPi / 4))).epsilon(1e-14));

  const Exponents zero = lln_exponents(p, 0.0);
  CHECK(zero.kappa == 0.0);
  CHECK(zero.chi == 0.0);

  SpinParams mixed = p;
  mixed.lambda = 0.5;
  for (double t : {0.5, 1.5, 3.0}) CHECK(lln_exponents(mixed, t).kappa == 0.0);

  SpinParams sharp;
  sharp.beta = kPi / 2;
  CHECK(lln_exponents(sharp, kPi / 2).kappa == std::numeric_limits<double>::infinity());
}

TEST_CASE("short-time exponents") {
  const Exponents e = short_time_exponents(1.0 / 3.0, 0.1);
  CHECK(e.kappa == doctest::Approx(0.0013333333333333333).epsilon(1e-14));
  CHECK(e.chi == doctest::Approx(0.0026666666666666667).epsilon(1e-14));
  CHECK(short_time_exponents(1.0 / 3.0, 0.0).kappa == 0.0);
  CHECK_THROWS_AS(short_time_exponents(-1.0, 0.1), std::invalid_argument);
}

TEST_CASE("time scales") {
  const TimeScales ts = time_scales(200, 100, 0.5, 1.0 / 3.0);
  CHECK(ts.t_broadcast == doctest::Approx(0.831129068134555).epsilon(1e-14));
  CHECK(ts.ratio_sq == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(ts.t_broadcast / ts.t_decoherence == doctest::Approx(2.0).epsilon(1e-12));

  // The short-time broadcast exponent at t_B is exactly log N_m.
  for (std::size_t nm : {10u, 100u, 1000u}) {
    const TimeScales s = time_scales(2 * nm, nm, 0.5, 1.0 / 3.0);
    const double k = short_time_exponents(1.0 / 3.0, s.t_broadcast).kappa;
    CHECK(std::exp(-static_cast<double>(nm) * k / 2) == doctest::Approx(1.0 / nm).epsilon(1e-12));
  }

  const TimeScales none = time_scales(300, 100, 0.0, 0.25);
  CHECK(none.t_decoherence == doctest::Approx(std::sqrt(5 * std::log(100.0) / (4 * 0.25 * 300))).epsilon(1e-14));

  Gen gen(27);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t nm = 2 + gen.index(500);
    const std::size_t n = nm + gen.index(5000);
    const double f = gen.uniform(0.0, 0.99);
    const TimeScales s = time_scales(n, nm, f, gen.uniform(0.01, 2.0));
    CHECK(s.ratio_sq == doctest::Approx(4 * (1 - f) * n / static_cast<double>(nm)).epsilon(1e-12));
  }

  CHECK_THROWS_AS(time_scales(200, 1, 0.5, 1.0 / 3.0), std::invalid_argument);
  CHECK_THROWS_AS(time_scales(200, 100, 1.0, 1.0 / 3.0), std::invalid_argument);
}
