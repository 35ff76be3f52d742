#include "support.hpp"

#include "sbs/discrimination.hpp"
#include "sbs/sbs_core.hpp"

using namespace sbs;
using testing::Gen;
using testing::kPi;

TEST_CASE("Helstrom pair for orthogonal and identical states") {
  const DensityMatrix up(ComplexMatrix{{1.0, 0.0}, {0.0, 0.0}});
  const DensityMatrix down(ComplexMatrix{{0.0, 0.0}, {0.0, 1.0}});
  const auto p = helstrom_pair(up, down);
  CHECK(p.plus.max_abs_diff(up.matrix()) < 1e-14);
  CHECK(equal_prior_error(up, down, p) == doctest::Approx(0.0));

  const auto same = helstrom_pair(up, up);
  CHECK(same.plus.max_abs_diff(ComplexMatrix(2)) < 1e-14);
  CHECK(equal_prior_error(up, up, same) == doctest::Approx(0.5));
}

TEST_CASE("Helstrom error equals (1 - T/2) / 2") {
  Gen gen(41);
  for (int rep = 0; rep < 300; ++rep) {
    const std::size_t n = 2 + gen.index(3);
    const DensityMatrix a = gen.state(n);
    const DensityMatrix b = gen.state(n);
    const auto pair = helstrom_pair(a, b);
    CHECK(is_projector(pair.plus));
    const double t = trace_norm(a.matrix() - b.matrix());
    CHECK(equal_prior_error(a, b, pair) == doctest::Approx(0.5 * (1.0 - t / 2)).epsilon(1e-10));
  }
}

TEST_CASE("closed-form spin Helstrom projectors") {
  SpinParams sharp;
  sharp.beta = kPi / 2;
  const double t = kPi / 2;
  const auto h = helstrom_spin_analytic(sharp, t);
  CHECK_FALSE(h.degenerate);
  CHECK(is_projector(h.projectors.plus));
  const auto b = evolved_branch_states(sharp, t);
  CHECK((h.projectors.plus * b.plus.matrix()).trace().real() == doctest::Approx(1.0));
  CHECK((h.projectors.minus * b.minus.matrix()).trace().real() == doctest::Approx(1.0));
  CHECK(local_success_probability(sharp, t) == doctest::Approx(1.0));

  SpinParams eigen;
  eigen.lambda = 0.8;
  const auto d = helstrom_spin_analytic(eigen, 1.0);
  CHECK(d.degenerate);
  CHECK(d.projectors.plus.max_abs_diff(ComplexMatrix{{1.0, 0.0}, {0.0, 0.0}}) < 1e-15);
  CHECK(local_success_probability(eigen, 1.3) == 0.5);

  Gen gen(42);
  for (int rep = 0; rep < 500; ++rep) {
    const SpinParams p = gen.spin();
    const double tt = gen.uniform(0.0, 4 * kPi);
    const auto hs = helstrom_spin_analytic(p, tt);
    const auto br = evolved_branch_states(p, tt);
    const double plus = (hs.projectors.plus * br.plus.matrix()).trace().real();
    const double minus = (hs.projectors.minus * br.minus.matrix()).trace().real();
    const double closed = local_success_probability(p, tt);
    CHECK(plus == doctest::Approx(closed).epsilon(1e-12));
    CHECK(minus == doctest::Approx(closed).epsilon(1e-12));
    const auto numeric = helstrom_pair(br.plus, br.minus);
    CHECK(1.0 - equal_prior_error(br.plus, br.minus, numeric) == doctest::Approx(closed).epsilon(1e-10));
  }
}

TEST_CASE("mean success over fixed measures") {
  SpinParams eigen;
  const auto flat = mean_success(MeasureSpec::fixed(eigen), 0.7, 100, 1);
  CHECK(flat.p_bar == 0.5);
  CHECK(flat.s_bar == 0.0);

  SpinParams sharp;
  sharp.beta = kPi / 2;
  const auto best = mean_success(MeasureSpec::fixed(sharp), kPi / 2, 100, 1);
  CHECK(best.p_bar == doctest::Approx(1.0));
  CHECK(best.s_bar == doctest::Approx(0.5));
  CHECK(best.std_error == doctest::Approx(0.0));

  const auto a = mean_success(MeasureSpec::standard(), 1.0, 2000, 7, 1);
  const auto b = mean_success(MeasureSpec::standard(), 1.0, 2000, 7, 3);
  CHECK(a.p_bar == b.p_bar);
}

TEST_CASE("majority success") {
  CHECK(majority_success(3, 1.0) == 1.0);
  CHECK(majority_success(3, 0.5) == 0.5);
  CHECK(majority_success(4, 0.5) == doctest::Approx(5.0 / 16.0));
  const double half[] = {0.5, 0.5, 0.5};
  CHECK(majority_success_heterogeneous(half) == doctest::Approx(0.5));
  const double ones[] = {1.0, 1.0, 1.0, 1.0};
  CHECK(majority_success_heterogeneous(ones) == 1.0);

  // Enumeration oracle for small N.
  Gen gen(43);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = 1 + gen.index(9);
    std::vector<double> probs(n);
    for (auto& q : probs) q = gen.uniform();
    double exact = 0.0;
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
      double w = 1.0;
      std::size_t wins = 0;
      for (std::size_t k = 0; k < n; ++k) {
        const bool win = (mask >> k) & 1u;
        wins += win;
        w *= win ? probs[k] : 1.0 - probs[k];
      }
      if (2 * wins > n) exact += w;
    }
    CHECK(majority_success_heterogeneous(probs) == doctest::Approx(exact).epsilon(1e-12));
    const double pc = probs[0];
    const std::vector<double> homo(n, pc);
    CHECK(majority_success_heterogeneous(homo) == doctest::Approx(majority_success(n, pc)).epsilon(1e-12));
  }
}

TEST_CASE("heterogeneous majority agrees with simulation") {
  Gen gen(44);
  std::vector<double> probs(25);
  for (auto& q : probs) q = gen.uniform(0.4, 0.8);
  const double exact = majority_success_heterogeneous(probs);
  const int trials = 400000;
  int hits = 0;
  for (int r = 0; r < trials; ++r) {
    int wins = 0;
    for (double q : probs) wins += gen.uniform() < q;
    hits += 2 * wins > 25;
  }
  const double mc = static_cast<double>(hits) / trials;
  const double se = std::sqrt(exact * (1 - exact) / trials);
  CHECK(std::abs(mc - exact) < 5 * se);
}

TEST_CASE("Chernoff bound") {
  CHECK(chernoff_bound(100, 0.0) == 0.0);
  CHECK(chernoff_bound(100, 0.3) == doctest::Approx(0.9888910034617577).epsilon(1e-14));
  CHECK(majority_success(100, 0.8) >= chernoff_bound(100, 0.3));
  double prev = 0.0;
  for (std::size_t n = 1; n < 2000; n += 37) {
    const double c = chernoff_bound(n, 0.1);
    CHECK(c >= prev);
    prev = c;
  }
  for (std::size_t n : {11u, 101u, 1001u})
    for (int k = 1; k <= 9; ++k) {
      const double s = 0.05 * k;
      CHECK(majority_success(n, 0.5 + s) >= chernoff_bound(n, s));
    }
  const MajorityStats st = majority_stats(101, 0.7);
  CHECK(st.s_bar == doctest::Approx(0.2));
  CHECK(st.p_tilde_exact >= st.chernoff_lb);
}

TEST_CASE("Kolmogorov-Fuchs") {
  const auto fair = kolmogorov_fuchs(0.5, 0.3);
  CHECK(fair.k == 0.0);
  CHECK(fair.ok);
  const auto sat = kolmogorov_fuchs(1.0, 0.0);
  CHECK(sat.k == 1.0);
  CHECK(sat.fuchs_limit == 1.0);
  CHECK(sat.ok);
  CHECK_FALSE(kolmogorov_fuchs(1.0, 1.0).ok);
}

TEST_CASE("majority measurement operator") {
  Gen gen(45);
  for (int rep = 0; rep < 10; ++rep) {
    const std::size_t n = 1 + gen.index(4);
    std::vector<SpinParams> spins(n);
    std::vector<ProjectorPair> local;
    const double t = gen.uniform(0.1, 3.0);
    for (auto& s : spins) {
      s = gen.spin();
      local.push_back(helstrom_spin_analytic(s, t).projectors);
    }
    const auto maj = majority_measurement(local);
    CHECK(is_projector(maj.plus));
    CHECK((maj.plus + maj.minus).max_abs_diff(ComplexMatrix::identity(std::size_t{1} << n)) < 1e-12);

    std::vector<DensityMatrix> plus_states;
    std::vector<double> probs;
    for (const auto& s : spins) {
      plus_states.push_back(evolved_branch_states(s, t).plus);
      probs.push_back(local_success_probability(s, t));
    }
    const DensityMatrix joint = tensor(std::span<const DensityMatrix>(plus_states));
    CHECK((maj.plus * joint.matrix()).trace().real() ==
          doctest::Approx(majority_success_heterogeneous(probs)).epsilon(1e-10));
  }
}
