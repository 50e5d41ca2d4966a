#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <type_traits>
#include <vector>

#include "optreg/core/error.hpp"

namespace optreg {

template <typename T>
struct is_complex : std::false_type {};
template <typename T>
struct is_complex<std::complex<T>> : std::true_type {};

template <typename T>
inline constexpr bool is_complex_v = is_complex<T>::value;

template <typename T>
using DenseVector = std::vector<T>;

using Vector = DenseVector<double>;
using CVector = DenseVector<std::complex<double>>;

inline bool is_finite(double v) { return std::isfinite(v); }
inline bool is_finite(const std::complex<double>& v) {
  return std::isfinite(v.real()) && std::isfinite(v.imag());
}

template <typename T>
bool all_finite(std::span<const T> v) {
  return std::all_of(v.begin(), v.end(), [](const T& x) { return is_finite(x); });
}

/// Column-major dense matrix. Entry (i, j) lives at data_[i + j * rows].
template <typename T>
class DenseMatrix {
 public:
  using value_type = T;

  DenseMatrix() = default;

  DenseMatrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {
    require(rows >= 1 && cols >= 1, ErrorKind::InvalidArgument, "matrix dimensions must be positive");
  }

  /// Takes ownership of column-major data; entries must be finite.
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<T> column_major)
      : rows_(rows), cols_(cols), data_(std::move(column_major)) {
    require(rows >= 1 && cols >= 1, ErrorKind::InvalidArgument, "matrix dimensions must be positive");
    require(data_.size() == rows * cols, ErrorKind::InvalidArgument, "entry count must equal rows*cols");
    require(all_finite<T>(data_), ErrorKind::InvalidArgument, "matrix entries must be finite");
  }

  /// Row-wise literal, e.g. {{1, 2}, {3, 4}}.
  DenseMatrix(std::initializer_list<std::initializer_list<T>> rows) {
    rows_ = rows.size();
    cols_ = rows_ ? rows.begin()->size() : 0;
    require(rows_ >= 1 && cols_ >= 1, ErrorKind::InvalidArgument, "matrix dimensions must be positive");
    data_.assign(rows_ * cols_, T{});
    std::size_t i = 0;
    for (const auto& row : rows) {
      require(row.size() == cols_, ErrorKind::InvalidArgument, "ragged matrix literal");
      std::size_t j = 0;
      for (const T& v : row) (*this)(i, j++) = v;
      ++i;
    }
    require(all_finite<T>(data_), ErrorKind::InvalidArgument, "matrix entries must be finite");
  }

  static DenseMatrix identity(std::size_t n) {
    DenseMatrix I(n, n);
    for (std::size_t i = 0; i < n; ++i) I(i, i) = T{1};
    return I;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(std::size_t i, std::size_t j) { return data_[i + j * rows_]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[i + j * rows_]; }

  std::span<T> col(std::size_t j) { return {data_.data() + j * rows_, rows_}; }
  std::span<const T> col(std::size_t j) const { return {data_.data() + j * rows_, rows_}; }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }

  DenseVector<T> column(std::size_t j) const {
    auto c = col(j);
    return {c.begin(), c.end()};
  }

  DenseMatrix transpose() const {
    DenseMatrix t(cols_, rows_);
    for (std::size_t j = 0; j < cols_; ++j)
      for (std::size_t i = 0; i < rows_; ++i) t(j, i) = (*this)(i, j);
    return t;
  }

  /// Rows [r0, r0+nr) and columns [c0, c0+nc).
  DenseMatrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
    DenseMatrix b(nr, nc);
    for (std::size_t j = 0; j < nc; ++j)
      for (std::size_t i = 0; i < nr; ++i) b(i, j) = (*this)(r0 + i, c0 + j);
    return b;
  }

  bool operator==(const DenseMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using Matrix = DenseMatrix<double>;

// ---------------------------------------------------------------------------
// Vector helpers

template <typename T>
T dot(std::span<const T> a, std::span<const T> b) {
  T s{};
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(std::span<const double> v) {
  double scale = 0.0, ssq = 1.0;
  for (double x : v) {
    if (x == 0.0) continue;
    const double a = std::abs(x);
    if (scale < a) {
      ssq = 1.0 + ssq * (scale / a) * (scale / a);
      scale = a;
    } else {
      ssq += (a / scale) * (a / scale);
    }
  }
  return scale * std::sqrt(ssq);
}

inline double norm2_sq(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

inline Vector operator-(const Vector& a, const Vector& b) {
  require(a.size() == b.size(), ErrorKind::InvalidArgument, "vector size mismatch");
  Vector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

inline Vector operator+(const Vector& a, const Vector& b) {
  require(a.size() == b.size(), ErrorKind::InvalidArgument, "vector size mismatch");
  Vector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

inline Vector operator*(double alpha, const Vector& a) {
  Vector r(a);
  for (double& x : r) x *= alpha;
  return r;
}

// y += alpha * x
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

// ---------------------------------------------------------------------------
// Matrix helpers

template <typename T>
double frobenius_norm(const DenseMatrix<T>& m) {
  double s = 0.0;
  for (const T& x : m.data()) s += std::norm(x);
  return std::sqrt(s);
}

template <typename T>
DenseMatrix<T> operator*(const DenseMatrix<T>& a, const DenseMatrix<T>& b) {
  require(a.cols() == b.rows(), ErrorKind::InvalidArgument, "matmul dimension mismatch");
  DenseMatrix<T> c(a.rows(), b.cols());
  for (std::size_t j = 0; j < b.cols(); ++j) {
    auto cj = c.col(j);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const T bkj = b(k, j);
      if (bkj == T{}) continue;
      auto ak = a.col(k);
      for (std::size_t i = 0; i < a.rows(); ++i) cj[i] += ak[i] * bkj;
    }
  }
  return c;
}

template <typename T>
DenseMatrix<T> operator-(const DenseMatrix<T>& a, const DenseMatrix<T>& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), ErrorKind::InvalidArgument, "matrix size mismatch");
  DenseMatrix<T> c(a.rows(), a.cols());
  for (std::size_t k = 0; k < a.size(); ++k) c.data()[k] = a.data()[k] - b.data()[k];
  return c;
}

template <typename T>
DenseMatrix<T> operator+(const DenseMatrix<T>& a, const DenseMatrix<T>& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), ErrorKind::InvalidArgument, "matrix size mismatch");
  DenseMatrix<T> c(a.rows(), a.cols());
  for (std::size_t k = 0; k < a.size(); ++k) c.data()[k] = a.data()[k] + b.data()[k];
  return c;
}

/// aᵀ b without forming the transpose.
inline Matrix transpose_times(const Matrix& a, const Matrix& b) {
  require(a.rows() == b.rows(), ErrorKind::InvalidArgument, "transpose_times dimension mismatch");
  Matrix c(a.cols(), b.cols());
  for (std::size_t j = 0; j < b.cols(); ++j)
    for (std::size_t i = 0; i < a.cols(); ++i) c(i, j) = dot<double>(a.col(i), b.col(j));
  return c;
}

inline Vector matvec(const Matrix& a, std::span<const double> x) {
  require(a.cols() == x.size(), ErrorKind::InvalidArgument, "matvec dimension mismatch");
  Vector y(a.rows(), 0.0);
  for (std::size_t j = 0; j < a.cols(); ++j) {
    if (x[j] == 0.0) continue;
    axpy(x[j], a.col(j), y);
  }
  return y;
}

/// aᵀ x.
inline Vector matvec_t(const Matrix& a, std::span<const double> x) {
  require(a.rows() == x.size(), ErrorKind::InvalidArgument, "matvec_t dimension mismatch");
  Vector y(a.cols());
  for (std::size_t j = 0; j < a.cols(); ++j) y[j] = dot<double>(a.col(j), x);
  return y;
}

/// Stack a on top of b.
inline Matrix vstack(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.cols(), ErrorKind::InvalidArgument, "vstack column mismatch");
  Matrix s(a.rows() + b.rows(), a.cols());
  for (std::size_t j = 0; j < a.cols(); ++j) {
    std::copy(a.col(j).begin(), a.col(j).end(), s.col(j).begin());
    std::copy(b.col(j).begin(), b.col(j).end(), s.col(j).begin() + static_cast<std::ptrdiff_t>(a.rows()));
  }
  return s;
}

inline Matrix diag(std::span<const double> d) {
  Matrix m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

/// ‖QᵀQ − I‖_F for a matrix with (supposedly) orthonormal columns.
inline double orthonormality_defect(const Matrix& q) {
  Matrix g = transpose_times(q, q);
  for (std::size_t i = 0; i < g.rows(); ++i) g(i, i) -= 1.0;
  return frobenius_norm(g);
}

}  // namespace optreg
