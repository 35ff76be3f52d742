#pragma once

// Random parameter measures and counter-based random streams.
//
// Every Monte Carlo sample draws from its own stream derived from
// (master seed, stream key...), so results never depend on how samples are
// distributed over worker threads.

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <variant>

#include "sbs/spin_model.hpp"

namespace sbs {

/// SplitMix64 stream keyed by (seed, keys...). Satisfies UniformRandomBitGenerator.
class SampleStream {
 public:
  using result_type = std::uint64_t;

  SampleStream(std::uint64_t seed, std::initializer_list<std::uint64_t> keys);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::uint64_t state_;
};

struct HaarAngles {};
struct FixedAngles {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma_euler = 0.0;
};

struct HilbertSchmidtLambda {};
struct FixedLambda {
  double lambda = 1.0;
};

struct UniformCoupling {
  double lo = 0.0;
  double hi = 1.0;
};
struct FixedCoupling {
  double g = 1.0;
};

struct MeasureSpec {
  std::variant<HaarAngles, FixedAngles> angles = HaarAngles{};
  std::variant<HilbertSchmidtLambda, FixedLambda> lambda = HilbertSchmidtLambda{};
  std::variant<UniformCoupling, FixedCoupling> coupling = UniformCoupling{};

  /// Haar angles, Hilbert-Schmidt eigenvalue, couplings uniform on [0, 1].
  static MeasureSpec standard() { return {}; }
  static MeasureSpec fixed(const SpinParams& p);

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;

  /// E[g^2] under the coupling measure.
  double mean_g2() const;
};

/// Haar: beta = arccos(1 - 2u), alpha, gamma uniform on [0, 2 pi).
/// Hilbert-Schmidt: lambda = (1 + cbrt(2u - 1)) / 2 (inverse CDF of 3 (2 lambda - 1)^2).
/// Fixed components are copied verbatim.
SpinParams sample_spin(const MeasureSpec& measure, SampleStream& stream);

}  // namespace sbs
