#include "hmmdiag/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <utility>

#include <Eigen/Eigenvalues>

namespace hmmdiag {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

template <typename T>
BasicMatrix<T> gauss_jordan_inverse(const BasicMatrix<T>& m) {
  if (!m.square()) {
    throw DimensionError("invert: matrix is " + std::to_string(m.rows()) +
                         "x" + std::to_string(m.cols()));
  }
  const std::size_t n = m.rows();
  const double scale = max_norm(m);
  if (n == 0 || scale == 0.0) throw SingularMatrixError("invert: zero matrix");

  BasicMatrix<T> a = m;
  BasicMatrix<T> inv = BasicMatrix<T>::identity(n);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    double best = std::abs(a(col, col));
    for (std::size_t r = col + 1; r < n; ++r) {
      const double v = std::abs(a(r, col));
      if (v > best) {
        best = v;
        pivot = r;
      }
    }
    if (!(best >= kSingularPivotRatio * scale)) {
      throw SingularMatrixError("invert: pivot " + std::to_string(best) +
                                " in column " + std::to_string(col) +
                                " is numerically zero");
    }
    if (pivot != col) {
      std::swap_ranges(a.row(col).begin(), a.row(col).end(),
                       a.row(pivot).begin());
      std::swap_ranges(inv.row(col).begin(), inv.row(col).end(),
                       inv.row(pivot).begin());
    }
    const T p = a(col, col);
    for (std::size_t j = 0; j < n; ++j) {
      a(col, j) /= p;
      inv(col, j) /= p;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const T f = a(r, col);
      if (f == T{}) continue;
      for (std::size_t j = 0; j < n; ++j) {
        a(r, j) -= f * a(col, j);
        inv(r, j) -= f * inv(col, j);
      }
    }
  }
  return inv;
}

void normalize_column(ComplexMatrix& v, std::size_t col) {
  const std::size_t n = v.rows();
  double mx = 0.0;
  for (std::size_t i = 0; i < n; ++i) mx = std::max(mx, std::abs(v(i, col)));
  if (mx == 0.0) return;
  for (std::size_t i = 0; i < n; ++i) v(i, col) /= mx;
  // first component that is not roundoff noise becomes real positive
  const double threshold = std::sqrt(kEps);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = std::abs(v(i, col));
    if (a > threshold) {
      const Complex rot = std::conj(v(i, col)) / a;
      for (std::size_t r = 0; r < n; ++r) v(r, col) *= rot;
      v(i, col) = a;
      break;
    }
  }
}

bool near(double a, double b) {
  return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}

bool eigen_order(const Complex& a, const Complex& b) {
  const double ma = std::abs(a), mb = std::abs(b);
  if (!near(ma, mb)) return ma > mb;
  if (!near(a.real(), b.real())) return a.real() > b.real();
  if (!near(a.imag(), b.imag())) return a.imag() > b.imag();
  return false;
}

}  // namespace

Matrix invert(const Matrix& m) { return gauss_jordan_inverse(m); }
ComplexMatrix invert(const ComplexMatrix& m) { return gauss_jordan_inverse(m); }

EigenDecomposition eigendecompose(const Matrix& m) {
  if (!m.square() || m.rows() == 0) {
    throw DimensionError("eigendecompose: matrix is " + std::to_string(m.rows()) +
                         "x" + std::to_string(m.cols()));
  }
  for (double v : m.data()) {
    if (!std::isfinite(v)) throw DimensionError("eigendecompose: non-finite entry");
  }
  const std::size_t n = m.rows();
  Eigen::MatrixXd em(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) em(i, j) = m(i, j);
  const Eigen::EigenSolver<Eigen::MatrixXd> solver(em);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceError("eigendecompose: QR iteration did not converge for a " +
                           std::to_string(n) + "x" + std::to_string(n) + " matrix");
  }
  const auto& ev = solver.eigenvalues();
  const auto& evec = solver.eigenvectors();
  std::vector<Complex> values(ev.begin(), ev.end());

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return eigen_order(values[a], values[b]);
  });

  EigenDecomposition out{std::vector<Complex>(n), ComplexMatrix(n, n)};
  for (std::size_t c = 0; c < n; ++c) {
    out.values[c] = values[order[c]];
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, c) = evec(r, order[c]);
    normalize_column(out.vectors, c);
  }
  return out;
}

std::optional<DiagFactorization> diagonalize(const Matrix& m) {
  EigenDecomposition eig = eigendecompose(m);
  const std::size_t n = m.rows();

  DiagFactorization f;
  f.p = std::move(eig.vectors);
  f.d = std::move(eig.values);
  try {
    f.p_inv = invert(f.p);
  } catch (const SingularMatrixError&) {
    return std::nullopt;
  }
  f.condition_estimate = inf_norm(f.p) * inf_norm(f.p_inv);
  if (!(f.condition_estimate <= kMaxEigenvectorCondition)) return std::nullopt;

  OpCounter scratch;
  ComplexMatrix dm(n, n);
  for (std::size_t i = 0; i < n; ++i) dm(i, i) = f.d[i];
  const ComplexMatrix rebuilt = mat_mul(mat_mul(f.p, dm, scratch), f.p_inv, scratch);
  f.reconstruction_error = max_abs_diff(rebuilt, to_complex(m));
  if (!(f.reconstruction_error < kMaxReconstructionError)) return std::nullopt;

  const ComplexMatrix eye = mat_mul(f.p, f.p_inv, scratch);
  if (!(max_abs_diff(eye, ComplexMatrix::identity(n)) < kMaxReconstructionError)) {
    return std::nullopt;
  }
  return f;
}

PowerResult matrix_power_diag(const DiagFactorization& f, std::size_t l,
                              OpCounter& counter) {
  const std::size_t n = f.size();
  if (l == 0) return {Matrix::identity(n), 0.0};

  ComplexMatrix dl(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    Complex v = f.d[i];
    for (std::size_t step = 1; step < l; ++step) v *= f.d[i];
    dl(i, i) = v;
  }
  counter.complex_mul(n * (l - 1));

  const ComplexMatrix full = mat_mul(mat_mul(f.p, dl, counter), f.p_inv, counter);
  PowerResult out{Matrix(n, n), 0.0};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      out.value(i, j) = full(i, j).real();
      out.imaginary_residue = std::max(out.imaginary_residue, std::abs(full(i, j).imag()));
    }
  }
  if (!(out.imaginary_residue < kMaxImaginaryResidue)) {
    throw NumericQualityError("matrix_power_diag: imaginary residue " +
                                  std::to_string(out.imaginary_residue) +
                                  " too large to discard",
                              out.imaginary_residue);
  }
  return out;
}

Matrix matrix_power_naive(const Matrix& m, std::size_t l, OpCounter& counter) {
  if (!m.square()) throw DimensionError("matrix_power_naive: matrix not square");
  if (l == 0) return Matrix::identity(m.rows());
  Matrix out = m;
  for (std::size_t i = 1; i < l; ++i) out = mat_mul(out, m, counter);
  return out;
}

}  // namespace hmmdiag
