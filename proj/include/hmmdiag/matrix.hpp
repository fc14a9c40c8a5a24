#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "hmmdiag/errors.hpp"
#include "hmmdiag/op_counter.hpp"

namespace hmmdiag {

using Complex = std::complex<double>;

/// Dense row-major matrix. Used with `double` for model-side quantities and
/// with `Complex` for eigenvector bases.
template <typename T>
class BasicMatrix {
 public:
  using value_type = T;

  BasicMatrix() = default;
  BasicMatrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  BasicMatrix(std::initializer_list<std::initializer_list<T>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) throw DimensionError("ragged matrix initializer");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  static BasicMatrix identity(std::size_t n) {
    BasicMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T{1};
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }

  std::span<T> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const T> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }

  std::span<const T> data() const { return data_; }

  friend bool operator==(const BasicMatrix&, const BasicMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using Matrix = BasicMatrix<double>;
using ComplexMatrix = BasicMatrix<Complex>;

/// Standard product. Tallies rows*cols*inner multiplications and
/// rows*cols*(inner-1) additions.
template <typename T>
BasicMatrix<T> mat_mul(const BasicMatrix<T>& a, const BasicMatrix<T>& b,
                       OpCounter& counter) {
  if (a.cols() != b.rows()) {
    throw DimensionError("mat_mul: " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " times " +
                         std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()));
  }
  const std::size_t n = a.rows(), m = b.cols(), inner = a.cols();
  if (inner == 0) throw DimensionError("mat_mul: empty inner dimension");
  BasicMatrix<T> out(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      T acc = a(i, 0) * b(0, j);
      for (std::size_t k = 1; k < inner; ++k) acc += a(i, k) * b(k, j);
      out(i, j) = acc;
    }
  }
  if constexpr (std::is_same_v<T, Complex>) {
    counter.complex_mul(n * m * inner);
    counter.complex_add(n * m * (inner - 1));
  } else {
    counter.mul(n * m * inner);
    counter.add(n * m * (inner - 1));
  }
  return out;
}

template <typename T>
double max_norm(const BasicMatrix<T>& m) {
  double out = 0.0;
  for (const T& v : m.data()) out = std::max(out, static_cast<double>(std::abs(v)));
  return out;
}

/// Max-norm of a - b.
template <typename T>
double max_abs_diff(const BasicMatrix<T>& a, const BasicMatrix<T>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("max_abs_diff: shape mismatch");
  }
  double out = 0.0;
  auto x = a.data();
  auto y = b.data();
  for (std::size_t i = 0; i < x.size(); ++i) {
    out = std::max(out, static_cast<double>(std::abs(x[i] - y[i])));
  }
  return out;
}

/// Induced infinity norm (max absolute row sum).
template <typename T>
double inf_norm(const BasicMatrix<T>& m) {
  double out = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double s = 0.0;
    for (const T& v : m.row(i)) s += std::abs(v);
    out = std::max(out, s);
  }
  return out;
}

inline ComplexMatrix to_complex(const Matrix& m) {
  ComplexMatrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = m(i, j);
  return out;
}

}  // namespace hmmdiag
