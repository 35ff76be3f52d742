#include "sbs/discrimination.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "sbs/parallel.hpp"

namespace sbs {

namespace {

constexpr double kTieTolerance = 1e-12;
// Largest N_m evaluated by direct convolution; log-space terms above.
constexpr std::size_t kConvolutionLimit = 2000;

ProjectorPair positive_part_projectors(const ComplexMatrix& difference) {
  const auto spec = hermitian_eigensystem(difference);
  const std::size_t n = difference.dim();
  ComplexMatrix plus(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (spec.eigenvalues[k] <= kTieTolerance) continue;
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c)
        plus(r, c) += spec.eigenvectors(r, k) * std::conj(spec.eigenvectors(c, k));
  }
  return ProjectorPair{plus, ComplexMatrix::identity(n) - plus};
}

double trace_of_product(const ComplexMatrix& a, const ComplexMatrix& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t k = 0; k < a.dim(); ++k) s += (a(i, k) * b(k, i)).real();
  return s;
}

double log_sum_exp(std::span<const double> logs) {
  const double top = *std::max_element(logs.begin(), logs.end());
  if (!std::isfinite(top)) return top;
  std::vector<double> scaled(logs.size());
  std::transform(logs.begin(), logs.end(), scaled.begin(), [&](double l) { return std::exp(l - top); });
  return top + std::log(pairwise_sum(scaled));
}

// log P[lo <= X <= hi], X ~ Binomial(n_m, p), 0 < p < 1.
double log_binomial_range(std::size_t n_m, double p, std::size_t lo, std::size_t hi) {
  const double n = static_cast<double>(n_m);
  const double log_odds = std::log(p) - std::log1p(-p);
  const double k_lo = static_cast<double>(lo);
  double log_term = std::lgamma(n + 1.0) - std::lgamma(k_lo + 1.0) - std::lgamma(n - k_lo + 1.0) +
                    k_lo * std::log(p) + (n - k_lo) * std::log1p(-p);
  std::vector<double> logs;
  logs.reserve(hi - lo + 1);
  for (std::size_t k = lo; k <= hi; ++k) {
    logs.push_back(log_term);
    log_term += std::log((n - static_cast<double>(k)) / (static_cast<double>(k) + 1.0)) + log_odds;
  }
  return log_sum_exp(logs);
}

double majority_log_space(std::size_t n_m, double p) {
  const std::size_t k0 = n_m / 2 + 1;
  // Sum whichever tail is smaller; the complement of a tiny tail is exact to rounding.
  if (p > 0.5) return -std::expm1(log_binomial_range(n_m, p, 0, k0 - 1));
  return std::min(1.0, std::exp(log_binomial_range(n_m, p, k0, n_m)));
}

void require_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument(std::string(what) + ": probability outside [0, 1]");
}

}  // namespace

ProjectorPair helstrom_pair(const DensityMatrix& rho_plus, const DensityMatrix& rho_minus) {
  if (rho_plus.dim() != rho_minus.dim()) throw DimensionError("helstrom_pair: dimension mismatch");
  return positive_part_projectors(rho_plus.matrix() - rho_minus.matrix());
}

ProjectorPair helstrom_pair(const DensityMatrix& rho_plus, const DensityMatrix& rho_minus, double prior_plus) {
  if (rho_plus.dim() != rho_minus.dim()) throw DimensionError("helstrom_pair: dimension mismatch");
  require_probability(prior_plus, "helstrom_pair");
  return positive_part_projectors(rho_plus.matrix() * Complex(prior_plus) -
                                  rho_minus.matrix() * Complex(1.0 - prior_plus));
}

double equal_prior_error(const DensityMatrix& rho_plus, const DensityMatrix& rho_minus, const ProjectorPair& pair) {
  return 0.5 * (trace_of_product(rho_minus.matrix(), pair.plus) + trace_of_product(rho_plus.matrix(), pair.minus));
}

SpinHelstrom helstrom_spin_analytic(const SpinParams& p, double t) {
  using namespace std::complex_literals;
  const Complex d = delta(p);
  const double mag = std::abs(d);
  const double s = std::sin(p.g * t);
  if (2.0 * mag * std::abs(s) <= kTieTolerance) {
    const double plus_diag[2] = {1.0, 0.0};
    const double minus_diag[2] = {0.0, 1.0};
    return SpinHelstrom{ProjectorPair{ComplexMatrix::diagonal(std::span<const double>(plus_diag)),
                                      ComplexMatrix::diagonal(std::span<const double>(minus_diag))},
                        true};
  }
  const double sign = s > 0.0 ? 1.0 : -1.0;
  const Complex off = sign * 1i * d / (2.0 * mag);
  ComplexMatrix plus{{0.5, off}, {std::conj(off), 0.5}};
  ComplexMatrix minus{{0.5, -off}, {-std::conj(off), 0.5}};
  return SpinHelstrom{ProjectorPair{std::move(plus), std::move(minus)}, false};
}

double local_success_probability(const SpinParams& p, double t) {
  return 0.5 + std::abs(delta(p)) * std::abs(std::sin(p.g * t));
}

MeanSuccess mean_success(const MeasureSpec& measure, double t, std::size_t samples, std::uint64_t seed,
                         unsigned threads, std::uint64_t stream_tag) {
  if (samples == 0) throw std::invalid_argument("mean_success: samples must be >= 1");
  std::vector<double> values(samples);
  parallel_for(samples, threads, [&](std::size_t i) {
    SampleStream stream(seed, {stream_tag, i});
    values[i] = local_success_probability(sample_spin(measure, stream), t);
  });
  const auto est = estimate_mean(values);
  return MeanSuccess{est.mean, std::max(0.0, est.mean - 0.5), est.std_error, samples};
}

double majority_success(std::size_t n_m, double p) {
  require_probability(p, "majority_success");
  if (n_m == 0) throw std::invalid_argument("majority_success: N_m must be >= 1");
  if (p == 0.0) return 0.0;
  if (p == 1.0) return 1.0;
  if (n_m <= kConvolutionLimit) {
    const std::vector<double> probs(n_m, p);
    const double exact = majority_success_heterogeneous(probs);
    // Direct masses below ~1e-300 underflow; fall back when either tail is that small.
    if (exact > 1e-280 && 1.0 - exact > 1e-280) return exact;
  }
  return majority_log_space(n_m, p);
}

double majority_success_heterogeneous(std::span<const double> probs) {
  if (probs.empty()) throw std::invalid_argument("majority_success_heterogeneous: empty input");
  // dist[k] = P[k successes among the trials seen so far]
  std::vector<double> dist(probs.size() + 1, 0.0);
  dist[0] = 1.0;
  for (std::size_t j = 0; j < probs.size(); ++j) {
    const double p = probs[j];
    require_probability(p, "majority_success_heterogeneous");
    for (std::size_t k = j + 1; k > 0; --k) dist[k] = dist[k] * (1.0 - p) + dist[k - 1] * p;
    dist[0] *= 1.0 - p;
  }
  const std::size_t k0 = probs.size() / 2 + 1;
  const std::span<const double> all(dist);
  const double success = pairwise_sum(all.subspan(k0));
  const double failure = pairwise_sum(all.first(k0));
  return std::clamp(failure < success ? 1.0 - failure : success, 0.0, 1.0);
}

double chernoff_bound(std::size_t n_m, double s_bar) {
  if (!(s_bar >= 0.0 && s_bar <= 0.5)) throw std::invalid_argument("chernoff_bound: S_bar outside [0, 1/2]");
  return -std::expm1(-0.5 * static_cast<double>(n_m) * s_bar * s_bar);
}

MajorityStats majority_stats(std::size_t n_m, double p_bar) {
  MajorityStats out;
  out.n_m = n_m;
  out.p_bar = p_bar;
  out.s_bar = p_bar - 0.5;
  out.p_tilde_exact = majority_success(n_m, p_bar);
  out.chernoff_lb = out.s_bar >= 0.0 ? chernoff_bound(n_m, std::min(out.s_bar, 0.5)) : 0.0;
  return out;
}

KolmogorovFuchs kolmogorov_fuchs(double p_tilde, double b_mac) {
  require_probability(p_tilde, "kolmogorov_fuchs");
  require_probability(b_mac, "kolmogorov_fuchs");
  KolmogorovFuchs out;
  out.k = std::abs(2.0 * p_tilde - 1.0);
  out.fuchs_limit = 1.0 - 0.5 * b_mac * b_mac;
  out.ok = out.k <= out.fuchs_limit + 1e-9;
  return out;
}

ProjectorPair majority_measurement(std::span<const ProjectorPair> local) {
  const std::size_t n = local.size();
  if (n == 0 || n > 12) throw std::invalid_argument("majority_measurement: need 1..12 spins");
  std::size_t dim = 1;
  for (const auto& pair : local) dim *= pair.plus.dim();
  ComplexMatrix plus(dim);
  for (std::size_t outcome = 0; outcome < (std::size_t{1} << n); ++outcome) {
    // bit j set means spin j reports '+'
    std::size_t votes = 0;
    for (std::size_t j = 0; j < n; ++j) votes += (outcome >> j) & 1U;
    if (2 * votes <= n) continue;
    std::vector<ComplexMatrix> factors;
    factors.reserve(n);
    for (std::size_t j = 0; j < n; ++j) factors.push_back(((outcome >> j) & 1U) ? local[j].plus : local[j].minus);
    plus += tensor(factors);
  }
  return ProjectorPair{plus, ComplexMatrix::identity(dim) - plus};
}

}  // namespace sbs
