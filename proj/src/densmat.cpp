#include "sbs/densmat.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace sbs {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr int kMaxSweeps = 80;

void require_same_dim(const ComplexMatrix& a, const ComplexMatrix& b, const char* what) {
  if (a.dim() != b.dim()) {
    std::ostringstream os;
    os << what << ": dimension mismatch " << a.dim() << " vs " << b.dim();
    throw DimensionError(os.str());
  }
}

std::string format_double(double x) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << x;
  return os.str();
}

}  // namespace

NotHermitianError::NotHermitianError(double asymmetry)
    : std::invalid_argument("matrix is not Hermitian (max |A - A^dagger| = " +
                            format_double(asymmetry) + ")"),
      asymmetry_(asymmetry) {}

// ---------------------------------------------------------------------------
// ComplexMatrix

ComplexMatrix::ComplexMatrix(std::size_t dim) : dim_(dim), data_(dim * dim) {
  if (dim == 0) throw DimensionError("ComplexMatrix: dimension must be >= 1");
}

ComplexMatrix::ComplexMatrix(std::size_t dim, std::vector<Complex> entries)
    : dim_(dim), data_(std::move(entries)) {
  if (dim == 0) throw DimensionError("ComplexMatrix: dimension must be >= 1");
  if (data_.size() != dim * dim) {
    throw DimensionError("ComplexMatrix: expected " + std::to_string(dim * dim) +
                         " entries, got " + std::to_string(data_.size()));
  }
}

ComplexMatrix::ComplexMatrix(std::initializer_list<std::initializer_list<Complex>> rows)
    : ComplexMatrix(rows.size()) {
  std::size_t r = 0;
  for (const auto& row : rows) {
    if (row.size() != dim_) throw DimensionError("ComplexMatrix: ragged initializer");
    std::copy(row.begin(), row.end(), data_.begin() + static_cast<std::ptrdiff_t>(r * dim_));
    ++r;
  }
}

ComplexMatrix ComplexMatrix::identity(std::size_t dim) {
  ComplexMatrix m(dim);
  for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
  return m;
}

ComplexMatrix ComplexMatrix::diagonal(std::span<const double> values) {
  ComplexMatrix m(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
  return m;
}

ComplexMatrix ComplexMatrix::diagonal(std::span<const Complex> values) {
  ComplexMatrix m(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
  return m;
}

ComplexMatrix ComplexMatrix::adjoint() const {
  ComplexMatrix out(dim_);
  for (std::size_t r = 0; r < dim_; ++r)
    for (std::size_t c = 0; c < dim_; ++c) out(c, r) = std::conj((*this)(r, c));
  return out;
}

Complex ComplexMatrix::trace() const {
  Complex t = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) t += (*this)(i, i);
  return t;
}

double ComplexMatrix::max_abs_diff(const ComplexMatrix& other) const {
  require_same_dim(*this, other, "max_abs_diff");
  double worst = 0.0;
  for (std::size_t k = 0; k < data_.size(); ++k)
    worst = std::max(worst, std::abs(data_[k] - other.data_[k]));
  return worst;
}

double ComplexMatrix::hermiticity_error() const {
  double worst = 0.0;
  for (std::size_t r = 0; r < dim_; ++r)
    for (std::size_t c = r; c < dim_; ++c)
      worst = std::max(worst, std::abs((*this)(r, c) - std::conj((*this)(c, r))));
  return worst;
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& rhs) {
  require_same_dim(*this, rhs, "operator+");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += rhs.data_[k];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& rhs) {
  require_same_dim(*this, rhs, "operator-");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= rhs.data_[k];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(Complex scalar) {
  for (auto& x : data_) x *= scalar;
  return *this;
}

ComplexMatrix operator*(const ComplexMatrix& lhs, const ComplexMatrix& rhs) {
  require_same_dim(lhs, rhs, "operator*");
  const std::size_t n = lhs.dim();
  ComplexMatrix out(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      const Complex a = lhs(i, k);
      if (a == Complex{}) continue;
      const Complex* brow = &rhs(k, 0);
      Complex* orow = &out(i, 0);
      for (std::size_t j = 0; j < n; ++j) orow[j] += a * brow[j];
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// DensityMatrix

DensityMatrix::DensityMatrix(ComplexMatrix m, double tol) : m_(std::move(m)) {
  const double asym = m_.hermiticity_error();
  if (asym > tol) {
    throw NotAStateError("not a density matrix: max |A - A^dagger| = " + format_double(asym));
  }
  const Complex tr = m_.trace();
  if (std::abs(tr - 1.0) > tol) {
    throw NotAStateError("not a density matrix: trace = " + format_double(tr.real()));
  }
  const auto spec = hermitian_eigensystem(m_);
  if (spec.eigenvalues.back() < -tol) {
    throw NotAStateError("not a density matrix: smallest eigenvalue = " +
                         format_double(spec.eigenvalues.back()));
  }
}

DensityMatrix DensityMatrix::trusted(ComplexMatrix m) { return DensityMatrix(std::move(m), TrustedTag{}); }

DensityMatrix DensityMatrix::maximally_mixed(std::size_t dim) {
  return trusted(ComplexMatrix::identity(dim) * Complex(1.0 / static_cast<double>(dim)));
}

DensityMatrix DensityMatrix::pure(std::span<const Complex> psi) {
  double norm2 = 0.0;
  for (const auto& a : psi) norm2 += std::norm(a);
  if (norm2 <= 0.0) throw NotAStateError("pure: zero vector");
  ComplexMatrix m(psi.size());
  for (std::size_t r = 0; r < psi.size(); ++r)
    for (std::size_t c = 0; c < psi.size(); ++c) m(r, c) = psi[r] * std::conj(psi[c]) / norm2;
  return trusted(std::move(m));
}

// ---------------------------------------------------------------------------
// Eigensystem

ComplexMatrix Spectrum::reconstruct() const {
  const std::size_t n = eigenvectors.dim();
  ComplexMatrix out(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double lam = eigenvalues[k];
    if (lam == 0.0) continue;
    for (std::size_t r = 0; r < n; ++r) {
      const Complex vr = eigenvectors(r, k) * lam;
      for (std::size_t c = 0; c < n; ++c) out(r, c) += vr * std::conj(eigenvectors(c, k));
    }
  }
  return out;
}

Spectrum hermitian_eigensystem(const ComplexMatrix& h) {
  const double asym = h.hermiticity_error();
  if (asym > 1e-8) throw NotHermitianError(asym);

  const std::size_t n = h.dim();
  ComplexMatrix a = h;
  for (std::size_t r = 0; r < n; ++r) {
    a(r, r) = a(r, r).real();
    for (std::size_t c = r + 1; c < n; ++c) {
      const Complex sym = 0.5 * (a(r, c) + std::conj(a(c, r)));
      a(r, c) = sym;
      a(c, r) = std::conj(sym);
    }
  }
  ComplexMatrix v = ComplexMatrix::identity(n);

  double frob2 = 0.0;
  for (const auto& x : a.data()) frob2 += std::norm(x);

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double off2 = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off2 += std::norm(a(p, q));
    if (off2 <= kEps * kEps * frob2 * 1e-4 || off2 == 0.0) break;

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const Complex apq = a(p, q);
        const double mag = std::abs(apq);
        if (mag == 0.0) continue;
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        // Negligible relative to both diagonal entries: zero it without rotating.
        if (sweep > 3 && std::abs(app) + 1e3 * mag == std::abs(app) &&
            std::abs(aqq) + 1e3 * mag == std::abs(aqq)) {
          a(p, q) = 0.0;
          a(q, p) = 0.0;
          continue;
        }
        const Complex phase = apq / mag;  // e^{i phi}
        const double theta = (aqq - app) / (2.0 * mag);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        const Complex sp = s * std::conj(phase);  // s e^{-i phi}

        // A <- A J with J = [[c, s], [-s e^{-i phi}, c e^{-i phi}]] on (p, q)
        for (std::size_t k = 0; k < n; ++k) {
          const Complex akp = a(k, p);
          const Complex akq = a(k, q);
          a(k, p) = c * akp - sp * akq;
          a(k, q) = s * akp + c * std::conj(phase) * akq;
        }
        // A <- J^dagger A
        for (std::size_t k = 0; k < n; ++k) {
          const Complex apk = a(p, k);
          const Complex aqk = a(q, k);
          a(p, k) = c * apk - std::conj(sp) * aqk;
          a(q, k) = s * apk + c * phase * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = a(p, p).real();
        a(q, q) = a(q, q).real();
        for (std::size_t k = 0; k < n; ++k) {
          const Complex vkp = v(k, p);
          const Complex vkq = v(k, q);
          v(k, p) = c * vkp - sp * vkq;
          v(k, q) = s * vkp + c * std::conj(phase) * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return a(x, x).real() > a(y, y).real(); });

  Spectrum out{std::vector<double>(n), ComplexMatrix(n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.eigenvalues[k] = a(order[k], order[k]).real();
    for (std::size_t r = 0; r < n; ++r) out.eigenvectors(r, k) = v(r, order[k]);
  }
  return out;
}

std::vector<double> singular_values(const ComplexMatrix& m) {
  const std::size_t n = m.dim();
  // Column-major working copy for cache-friendly column rotations.
  std::vector<Complex> cols(n * n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) cols[c * n + r] = m(r, c);

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        Complex* cp = &cols[p * n];
        Complex* cq = &cols[q * n];
        double alpha = 0.0, beta = 0.0;
        Complex gamma = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          alpha += std::norm(cp[k]);
          beta += std::norm(cq[k]);
          gamma += std::conj(cp[k]) * cq[k];
        }
        const double g = std::abs(gamma);
        if (g == 0.0 || g <= kEps * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const Complex phase_conj = std::conj(gamma) / g;  // e^{-i phi}
        const double zeta = (beta - alpha) / (2.0 * g);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t k = 0; k < n; ++k) {
          const Complex xp = cp[k];
          const Complex xq = phase_conj * cq[k];
          cp[k] = c * xp - s * xq;
          cq[k] = s * xp + c * xq;
        }
      }
    }
    if (!rotated) break;
  }

  std::vector<double> sv(n);
  for (std::size_t c = 0; c < n; ++c) {
    double s2 = 0.0;
    for (std::size_t k = 0; k < n; ++k) s2 += std::norm(cols[c * n + k]);
    sv[c] = std::sqrt(s2);
  }
  std::sort(sv.begin(), sv.end(), std::greater<>());
  return sv;
}

ComplexMatrix psd_sqrt(const ComplexMatrix& a) {
  auto spec = hermitian_eigensystem(a);
  const double top = std::max(spec.eigenvalues.front(), 0.0);
  const double noise = 4.0 * kEps * static_cast<double>(a.dim()) * top;
  for (auto& lam : spec.eigenvalues) {
    if (lam < -1e-8) {
      throw NotAStateError("psd_sqrt: eigenvalue " + format_double(lam) + " is not PSD");
    }
    lam = lam <= noise ? 0.0 : std::sqrt(lam);
  }
  return spec.reconstruct();
}

ComplexMatrix psd_sqrt(const DensityMatrix& rho) { return psd_sqrt(rho.matrix()); }

double trace_norm(const ComplexMatrix& a) {
  double scale = 0.0;
  for (const auto& x : a.data()) scale = std::max(scale, std::abs(x));
  if (a.hermiticity_error() <= 1e-14 * std::max(scale, 1.0)) {
    const auto spec = hermitian_eigensystem(a);
    double s = 0.0;
    for (double lam : spec.eigenvalues) s += std::abs(lam);
    return s;
  }
  const auto sv = singular_values(a);
  return std::accumulate(sv.begin(), sv.end(), 0.0);
}

double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  require_same_dim(rho.matrix(), sigma.matrix(), "fidelity");
  const ComplexMatrix prod = psd_sqrt(rho) * psd_sqrt(sigma);
  const auto sv = singular_values(prod);
  const double b = std::accumulate(sv.begin(), sv.end(), 0.0);
  return std::clamp(b, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Products and partial traces

ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b) {
  const std::size_t da = a.dim(), db = b.dim();
  ComplexMatrix out(da * db);
  for (std::size_t i = 0; i < da; ++i)
    for (std::size_t j = 0; j < da; ++j) {
      const Complex aij = a(i, j);
      if (aij == Complex{}) continue;
      for (std::size_t k = 0; k < db; ++k)
        for (std::size_t l = 0; l < db; ++l) out(i * db + k, j * db + l) = aij * b(k, l);
    }
  return out;
}

ComplexMatrix tensor(std::span<const ComplexMatrix> factors) {
  if (factors.empty()) return ComplexMatrix::identity(1);
  ComplexMatrix out = factors.front();
  for (std::size_t k = 1; k < factors.size(); ++k) out = tensor(out, factors[k]);
  return out;
}

DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
  return DensityMatrix::trusted(tensor(a.matrix(), b.matrix()));
}

DensityMatrix tensor(std::span<const DensityMatrix> factors) {
  if (factors.empty()) return DensityMatrix::trusted(ComplexMatrix::identity(1));
  ComplexMatrix out = factors.front().matrix();
  for (std::size_t k = 1; k < factors.size(); ++k) out = tensor(out, factors[k].matrix());
  return DensityMatrix::trusted(std::move(out));
}

ComplexMatrix partial_trace(const ComplexMatrix& m, std::span<const std::size_t> factor_dims,
                            const std::vector<bool>& keep) {
  if (keep.size() != factor_dims.size()) {
    throw DimensionError("partial_trace: keep mask has " + std::to_string(keep.size()) +
                         " entries for " + std::to_string(factor_dims.size()) + " factors");
  }
  std::size_t total = 1, kept_dim = 1, traced_dim = 1;
  for (std::size_t k = 0; k < factor_dims.size(); ++k) {
    if (factor_dims[k] == 0) throw DimensionError("partial_trace: zero factor dimension");
    total *= factor_dims[k];
    (keep[k] ? kept_dim : traced_dim) *= factor_dims[k];
  }
  if (total != m.dim()) {
    throw DimensionError("partial_trace: factor dimensions multiply to " + std::to_string(total) +
                         ", matrix has dimension " + std::to_string(m.dim()));
  }
  if (std::none_of(keep.begin(), keep.end(), [](bool b) { return b; })) {
    throw DimensionError("partial_trace: at least one factor must be kept");
  }

  // Map (kept index, traced index) -> full index, factor 0 most significant.
  const std::size_t nf = factor_dims.size();
  std::vector<std::size_t> stride(nf);
  {
    std::size_t s = 1;
    for (std::size_t k = nf; k-- > 0;) {
      stride[k] = s;
      s *= factor_dims[k];
    }
  }
  auto offsets = [&](bool kept_side, std::size_t count) {
    std::vector<std::size_t> out(count);
    for (std::size_t idx = 0; idx < count; ++idx) {
      std::size_t rem = idx, full = 0;
      for (std::size_t k = nf; k-- > 0;) {
        if (keep[k] != kept_side) continue;
        full += (rem % factor_dims[k]) * stride[k];
        rem /= factor_dims[k];
      }
      out[idx] = full;
    }
    return out;
  };
  const auto kept_off = offsets(true, kept_dim);
  const auto traced_off = offsets(false, traced_dim);

  ComplexMatrix out(kept_dim);
  for (std::size_t r = 0; r < kept_dim; ++r)
    for (std::size_t c = 0; c < kept_dim; ++c) {
      Complex s = 0.0;
      for (std::size_t t : traced_off) s += m(kept_off[r] + t, kept_off[c] + t);
      out(r, c) = s;
    }
  return out;
}

DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const std::size_t> factor_dims,
                            const std::vector<bool>& keep) {
  return DensityMatrix::trusted(partial_trace(rho.matrix(), factor_dims, keep));
}

double von_neumann_entropy(const DensityMatrix& rho) {
  const auto spec = hermitian_eigensystem(rho.matrix());
  double s = 0.0;
  for (double lam : spec.eigenvalues)
    if (lam > 1e-14) s -= lam * std::log2(lam);
  return std::max(s, 0.0);
}

double shannon_entropy(std::span<const double> probabilities) {
  double s = 0.0;
  for (double p : probabilities)
    if (p > 0.0) s -= p * std::log2(p);
  return s;
}

bool is_projector(const ComplexMatrix& p, double tol) {
  return p.hermiticity_error() <= tol && (p * p).max_abs_diff(p) <= tol;
}

}  // namespace sbs
