#include "sbs/sampling.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sbs {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

SampleStream::SampleStream(std::uint64_t seed, std::initializer_list<std::uint64_t> keys)
    : state_(mix64(seed + kGolden)) {
  for (std::uint64_t k : keys) state_ = mix64(state_ ^ mix64(k + kGolden));
}

SampleStream::result_type SampleStream::operator()() {
  state_ += kGolden;
  return mix64(state_);
}

double SampleStream::uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

MeasureSpec MeasureSpec::fixed(const SpinParams& p) {
  MeasureSpec m;
  m.angles = FixedAngles{p.alpha, p.beta, p.gamma_euler};
  m.lambda = FixedLambda{p.lambda};
  m.coupling = FixedCoupling{p.g};
  return m;
}

void MeasureSpec::validate() const {
  if (const auto* f = std::get_if<FixedAngles>(&angles)) {
    SpinParams probe;
    probe.alpha = f->alpha;
    probe.beta = f->beta;
    probe.gamma_euler = f->gamma_euler;
    probe.validate();
  }
  if (const auto* f = std::get_if<FixedLambda>(&lambda)) {
    if (!(f->lambda >= 0.0 && f->lambda <= 1.0))
      throw std::invalid_argument("measure.lambda.value must lie in [0, 1]");
  }
  if (const auto* u = std::get_if<UniformCoupling>(&coupling)) {
    if (!(u->lo < u->hi)) throw std::invalid_argument("measure.coupling: uniform bounds need lo < hi");
  }
  if (const auto* f = std::get_if<FixedCoupling>(&coupling)) {
    if (!std::isfinite(f->g)) throw std::invalid_argument("measure.coupling.value must be finite");
  }
}

double MeasureSpec::mean_g2() const {
  return std::visit(Overloaded{[](const UniformCoupling& u) { return (u.lo * u.lo + u.lo * u.hi + u.hi * u.hi) / 3.0; },
                               [](const FixedCoupling& f) { return f.g * f.g; }},
                    coupling);
}

SpinParams sample_spin(const MeasureSpec& measure, SampleStream& stream) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  SpinParams p;
  std::visit(Overloaded{[&](const HaarAngles&) {
                          p.alpha = stream.uniform(0.0, two_pi);
                          p.beta = std::acos(1.0 - 2.0 * stream.uniform());
                          p.gamma_euler = stream.uniform(0.0, two_pi);
                        },
                        [&](const FixedAngles& f) {
                          p.alpha = f.alpha;
                          p.beta = f.beta;
                          p.gamma_euler = f.gamma_euler;
                        }},
             measure.angles);
  std::visit(Overloaded{[&](const HilbertSchmidtLambda&) {
                          p.lambda = 0.5 * (1.0 + std::cbrt(2.0 * stream.uniform() - 1.0));
                        },
                        [&](const FixedLambda& f) { p.lambda = f.lambda; }},
             measure.lambda);
  std::visit(Overloaded{[&](const UniformCoupling& u) { p.g = stream.uniform(u.lo, u.hi); },
                        [&](const FixedCoupling& f) { p.g = f.g; }},
             measure.coupling);
  return p;
}

}  // namespace sbs
