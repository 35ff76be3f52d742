#pragma once

#include <doctest.h>

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include "sbs/densmat.hpp"
#include "sbs/spin_model.hpp"

namespace testing {

using sbs::Complex;
using sbs::ComplexMatrix;

inline constexpr double kPi = 3.14159265358979323846;

// Independent 2x2 arithmetic for oracles; deliberately does not touch the library kernel.
struct Mat2 {
  Complex a, b, c, d;  // [[a, b], [c, d]]

  Mat2 operator*(const Mat2& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
  }
  Mat2 dagger() const { return {std::conj(a), std::conj(c), std::conj(b), std::conj(d)}; }
  Complex trace() const { return a + d; }
};

// exp(+i s g t sigma_z / 2)
inline Mat2 pointer_unitary(double g, double t, int s) {
  const double phi = s * g * t / 2.0;
  return {std::polar(1.0, phi), 0.0, 0.0, std::polar(1.0, -phi)};
}

// Z(alpha) Y(beta) Z(gamma) with Z(x) = diag(e^{-ix/2}, e^{ix/2}), Y(x) = exp(-i x sigma_y / 2)
inline Mat2 euler(double alpha, double beta, double gamma) {
  const Mat2 za{std::polar(1.0, -alpha / 2), 0.0, 0.0, std::polar(1.0, alpha / 2)};
  const Mat2 zg{std::polar(1.0, -gamma / 2), 0.0, 0.0, std::polar(1.0, gamma / 2)};
  const double c = std::cos(beta / 2), s = std::sin(beta / 2);
  const Mat2 y{c, -s, s, c};
  return za * y * zg;
}

inline Mat2 spin_state(const sbs::SpinParams& p) {
  const Mat2 r = euler(p.alpha, p.beta, p.gamma_euler);
  const Mat2 d{p.lambda, 0.0, 0.0, 1.0 - p.lambda};
  return r * d * r.dagger();
}

inline Mat2 to_mat2(const ComplexMatrix& m) { return {m(0, 0), m(0, 1), m(1, 0), m(1, 1)}; }

inline double max_diff(const Mat2& x, const Mat2& y) {
  return std::max({std::abs(x.a - y.a), std::abs(x.b - y.b), std::abs(x.c - y.c), std::abs(x.d - y.d)});
}

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  double normal() { return std::normal_distribution<double>()(rng_); }
  std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }

  sbs::SpinParams spin(double g_hi = 3.0) {
    sbs::SpinParams p;
    p.alpha = uniform(0.0, 2 * kPi);
    p.beta = std::acos(1.0 - 2.0 * uniform());
    p.gamma_euler = uniform(0.0, 2 * kPi);
    p.lambda = uniform();
    p.g = uniform(0.0, g_hi);
    return p;
  }

  ComplexMatrix hermitian(std::size_t n) {
    ComplexMatrix h(n);
    for (std::size_t i = 0; i < n; ++i) {
      h(i, i) = normal();
      for (std::size_t j = i + 1; j < n; ++j) {
        h(i, j) = Complex(normal(), normal());
        h(j, i) = std::conj(h(i, j));
      }
    }
    return h;
  }

  // Ginibre G G^dagger / Tr
  sbs::DensityMatrix state(std::size_t n) {
    ComplexMatrix g(n);
    for (auto& z : g.data()) z = Complex(normal(), normal());
    ComplexMatrix rho = g * g.adjoint();
    rho *= Complex(1.0 / rho.trace().real());
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < i; ++j) rho(i, j) = std::conj(rho(j, i));
    return sbs::DensityMatrix(rho);
  }

  std::vector<Complex> unit_vector(std::size_t n) {
    std::vector<Complex> v(n);
    double norm = 0.0;
    for (auto& z : v) {
      z = Complex(normal(), normal());
      norm += std::norm(z);
    }
    for (auto& z : v) z /= std::sqrt(norm);
    return v;
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace testing
