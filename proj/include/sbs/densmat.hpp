#pragma once

// Dense complex-matrix kernel: Hermitian eigensystems, PSD roots, trace norms,
// fidelities, Kronecker products, partial traces and entropies.
//
// Index convention: tensor(A, B) puts the A index in the major (slow) position,
// so (A ⊗ B)(i*dB + k, j*dB + l) = A(i, j) * B(k, l). Partial traces and all
// multipartite layouts in this library follow the same ordering.

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sbs {

using Complex = std::complex<double>;

/// Thrown when an operation receives incompatible dimensions.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a matrix expected to be Hermitian is not; carries the measured
/// max-entry asymmetry |A - A^†|.
class NotHermitianError : public std::invalid_argument {
 public:
  NotHermitianError(double asymmetry);
  double asymmetry() const noexcept { return asymmetry_; }

 private:
  double asymmetry_;
};

/// Thrown when a matrix fails the density-matrix checks (Hermitian, unit trace, PSD).
class NotAStateError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  explicit ComplexMatrix(std::size_t dim);
  ComplexMatrix(std::size_t dim, std::vector<Complex> entries);
  ComplexMatrix(std::initializer_list<std::initializer_list<Complex>> rows);

  static ComplexMatrix identity(std::size_t dim);
  static ComplexMatrix diagonal(std::span<const double> values);
  static ComplexMatrix diagonal(std::span<const Complex> values);

  std::size_t dim() const noexcept { return dim_; }

  Complex& operator()(std::size_t row, std::size_t col) { return data_[row * dim_ + col]; }
  const Complex& operator()(std::size_t row, std::size_t col) const {
    return data_[row * dim_ + col];
  }

  std::span<const Complex> data() const noexcept { return data_; }
  std::span<Complex> data() noexcept { return data_; }

  ComplexMatrix adjoint() const;
  Complex trace() const;

  /// max_ij |A_ij - B_ij|
  double max_abs_diff(const ComplexMatrix& other) const;
  /// max_ij |A_ij - conj(A_ji)|
  double hermiticity_error() const;

  ComplexMatrix& operator+=(const ComplexMatrix& rhs);
  ComplexMatrix& operator-=(const ComplexMatrix& rhs);
  ComplexMatrix& operator*=(Complex scalar);

  friend ComplexMatrix operator+(ComplexMatrix lhs, const ComplexMatrix& rhs) { return lhs += rhs; }
  friend ComplexMatrix operator-(ComplexMatrix lhs, const ComplexMatrix& rhs) { return lhs -= rhs; }
  friend ComplexMatrix operator*(ComplexMatrix lhs, Complex s) { return lhs *= s; }
  friend ComplexMatrix operator*(Complex s, ComplexMatrix rhs) { return rhs *= s; }
  friend ComplexMatrix operator*(const ComplexMatrix& lhs, const ComplexMatrix& rhs);

 private:
  std::size_t dim_ = 0;
  std::vector<Complex> data_;
};

/// A Hermitian, positive semidefinite, unit-trace matrix. Construction validates.
class DensityMatrix {
 public:
  /// Validates with tolerance 1e-10 on hermiticity, trace and smallest eigenvalue.
  explicit DensityMatrix(ComplexMatrix m, double tol = 1e-10);

  /// Skips validation; for states produced by constructions that are states
  /// by algebra (products, unitary conjugations, projections).
  static DensityMatrix trusted(ComplexMatrix m);

  const ComplexMatrix& matrix() const noexcept { return m_; }
  std::size_t dim() const noexcept { return m_.dim(); }
  Complex operator()(std::size_t r, std::size_t c) const { return m_(r, c); }

  static DensityMatrix maximally_mixed(std::size_t dim);
  static DensityMatrix pure(std::span<const Complex> psi);

 private:
  struct TrustedTag {};
  DensityMatrix(ComplexMatrix m, TrustedTag) : m_(std::move(m)) {}
  ComplexMatrix m_;
};

struct Spectrum {
  std::vector<double> eigenvalues;  // descending
  ComplexMatrix eigenvectors;       // columns

  ComplexMatrix reconstruct() const;
};

/// Cyclic Jacobi diagonalisation. Rejects inputs with |A - A^†|_max > 1e-8.
Spectrum hermitian_eigensystem(const ComplexMatrix& h);

/// Singular values (descending) via one-sided Jacobi.
std::vector<double> singular_values(const ComplexMatrix& a);

/// Square root of a PSD matrix; eigenvalues in [-1e-8, 0) are clamped to zero,
/// anything lower is rejected with NotAStateError.
ComplexMatrix psd_sqrt(const ComplexMatrix& a);
ComplexMatrix psd_sqrt(const DensityMatrix& rho);

/// Sum of singular values. Hermitian inputs take the eigenvalue path.
double trace_norm(const ComplexMatrix& a);

/// B(rho, sigma) = || sqrt(rho) sqrt(sigma) ||_1
double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma);

ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix tensor(std::span<const ComplexMatrix> factors);
DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b);
DensityMatrix tensor(std::span<const DensityMatrix> factors);

/// Traces out every factor whose `keep` entry is false.
ComplexMatrix partial_trace(const ComplexMatrix& m, std::span<const std::size_t> factor_dims,
                            const std::vector<bool>& keep);
DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const std::size_t> factor_dims,
                            const std::vector<bool>& keep);

/// Entropy in bits; eigenvalues below 1e-14 are skipped.
double von_neumann_entropy(const DensityMatrix& rho);

/// -sum p log2 p over a probability vector, 0 log 0 = 0.
double shannon_entropy(std::span<const double> probabilities);

/// Hermitian idempotent within tol.
bool is_projector(const ComplexMatrix& p, double tol = 1e-10);

}  // namespace sbs
