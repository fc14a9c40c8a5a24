#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "hmmdiag/matrix.hpp"
#include "hmmdiag/op_counter.hpp"

namespace hmmdiag {

/// Pivots below this fraction of the matrix max-norm are treated as zero.
inline constexpr double kSingularPivotRatio = 1e-14;

/// Gauss-Jordan inverse with partial pivoting. Throws SingularMatrixError.
Matrix invert(const Matrix& m);
ComplexMatrix invert(const ComplexMatrix& m);

/// Eigenpairs of a real square matrix.
///
/// Values are sorted by descending magnitude, ties broken by descending real
/// part and then descending imaginary part. Column i of `vectors` belongs to
/// `values[i]`; it is scaled so its largest component has modulus 1 and its
/// first nonzero component is real and positive.
struct EigenDecomposition {
  std::vector<Complex> values;
  ComplexMatrix vectors;
};

/// Real Schur form via Eigen's EigenSolver. Eigenvalues sorted by descending
/// magnitude, then real part, then imaginary part; each eigenvector scaled to
/// unit max modulus with its first significant component real positive.
/// Throws ConvergenceError if the QR iteration fails.
EigenDecomposition eigendecompose(const Matrix& m);

/// A = P * diag(d) * P^-1.
struct DiagFactorization {
  ComplexMatrix p;
  std::vector<Complex> d;
  ComplexMatrix p_inv;
  /// ||P||_inf * ||P^-1||_inf
  double condition_estimate = 0.0;
  /// ||P diag(d) P^-1 - A||_max at construction time.
  double reconstruction_error = 0.0;

  std::size_t size() const { return d.size(); }
};

inline constexpr double kMaxEigenvectorCondition = 1e12;
inline constexpr double kMaxReconstructionError = 1e-10;

/// Eigen-factorization of `m`, or nullopt when `m` is numerically defective:
/// the eigenvector matrix is singular or has condition estimate above
/// kMaxEigenvectorCondition, or the reconstruction (or P * P^-1 = I) misses
/// by kMaxReconstructionError or more. Propagates ConvergenceError.
std::optional<DiagFactorization> diagonalize(const Matrix& m);

/// Largest imaginary part that matrix_power_diag will silently discard.
inline constexpr double kMaxImaginaryResidue = 1e-9;

struct PowerResult {
  Matrix value;
  double imaginary_residue = 0.0;
};

/// Real part of P * diag(d^l) * P^-1.
///
/// The diagonal power is formed by repeated multiplication, N*(l-1)
/// multiplications, and both N x N products are tallied as full mat_mul
/// calls. l = 0 returns the identity at no cost. Throws NumericQualityError
/// when the discarded imaginary part reaches kMaxImaginaryResidue.
PowerResult matrix_power_diag(const DiagFactorization& f, std::size_t l,
                              OpCounter& counter);

/// m multiplied by itself l-1 times through mat_mul; l = 0 gives the identity.
Matrix matrix_power_naive(const Matrix& m, std::size_t l, OpCounter& counter);

}  // namespace hmmdiag
