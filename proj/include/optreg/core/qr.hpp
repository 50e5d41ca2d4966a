#pragma once

#include <cmath>
#include <vector>

#include "optreg/core/matrix.hpp"

namespace optreg {

struct QrFactors {
  Matrix Q;  // rows × cols, orthonormal columns
  Matrix R;  // cols × cols, upper triangular with non-negative diagonal
};

namespace detail {

// Householder reflector for x: returns v with ‖v‖ = 1 (or all zeros when x = 0)
// such that (I − 2vvᵀ)x = beta·e1, beta = −sign(x0)‖x‖.
inline double householder(std::span<const double> x, std::span<double> v) {
  const double nx = norm2(x);
  std::fill(v.begin(), v.end(), 0.0);
  if (nx == 0.0) return 0.0;
  const double beta = x[0] >= 0.0 ? -nx : nx;
  std::copy(x.begin(), x.end(), v.begin());
  v[0] -= beta;
  const double nv = norm2(v);
  for (double& e : v) e /= nv;
  return beta;
}

// Apply I − 2vvᵀ to columns [c0, cols) of m restricted to rows [r0, r0+|v|).
inline void apply_reflector_left(std::span<const double> v, Matrix& m, std::size_t r0, std::size_t c0) {
  for (std::size_t j = c0; j < m.cols(); ++j) {
    auto cj = m.col(j).subspan(r0, v.size());
    const double s = 2.0 * dot<double>(v, cj);
    if (s != 0.0) axpy(-s, v, cj);
  }
}

}  // namespace detail

/// Reduced Householder QR of a tall matrix. Throws RankDeficient when a
/// diagonal entry of R falls below 1e-12·‖M‖_F.
inline QrFactors qr_reduced(const Matrix& M) {
  const std::size_t m = M.rows(), n = M.cols();
  require(m >= n, ErrorKind::InvalidArgument, "qr_reduced requires rows >= cols");
  Matrix work = M;
  std::vector<std::vector<double>> reflectors(n);
  for (std::size_t k = 0; k < n; ++k) {
    reflectors[k].assign(m - k, 0.0);
    detail::householder(work.col(k).subspan(k), reflectors[k]);
    detail::apply_reflector_left(reflectors[k], work, k, k);
  }

  QrFactors f{Matrix(m, n), Matrix(n, n)};
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i <= j; ++i) f.R(i, j) = work(i, j);
  for (std::size_t j = 0; j < n; ++j) f.Q(j, j) = 1.0;
  for (std::size_t k = n; k-- > 0;) detail::apply_reflector_left(reflectors[k], f.Q, k, 0);

  for (std::size_t k = 0; k < n; ++k) {
    if (f.R(k, k) < 0.0) {
      for (std::size_t j = k; j < n; ++j) f.R(k, j) = -f.R(k, j);
      for (double& q : f.Q.col(k)) q = -q;
    }
  }

  const double tol = 1e-12 * frobenius_norm(M);
  for (std::size_t k = 0; k < n; ++k)
    if (f.R(k, k) <= tol) fail(ErrorKind::RankDeficient, "column " + std::to_string(k) + " is numerically dependent");
  return f;
}

/// Solve R X = B for upper-triangular R (B may have several columns).
inline Matrix solve_upper(const Matrix& R, const Matrix& B) {
  const std::size_t n = R.rows();
  require(R.cols() == n && B.rows() == n, ErrorKind::InvalidArgument, "solve_upper dimension mismatch");
  double dmax = 0.0;
  for (std::size_t i = 0; i < n; ++i) dmax = std::max(dmax, std::abs(R(i, i)));
  for (std::size_t i = 0; i < n; ++i)
    if (!(std::abs(R(i, i)) >= 1e-14 * dmax) || dmax == 0.0)
      fail(ErrorKind::SingularSystem, "triangular factor has a negligible diagonal entry");

  Matrix X = B;
  for (std::size_t c = 0; c < X.cols(); ++c) {
    auto x = X.col(c);
    for (std::size_t i = n; i-- > 0;) {
      double s = x[i];
      for (std::size_t j = i + 1; j < n; ++j) s -= R(i, j) * x[j];
      x[i] = s / R(i, i);
    }
  }
  return X;
}

inline Vector solve_upper(const Matrix& R, std::span<const double> rhs) {
  Matrix b(rhs.size(), 1, Vector(rhs.begin(), rhs.end()));
  return solve_upper(R, b).column(0);
}

/// Least-squares solution of min ‖M x − rhs‖ (exact solve when M is square).
inline Vector solve_lls(const Matrix& M, std::span<const double> rhs) {
  require(M.rows() == rhs.size(), ErrorKind::InvalidArgument, "solve_lls dimension mismatch");
  QrFactors f = [&] {
    try {
      return qr_reduced(M);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::RankDeficient) fail(ErrorKind::SingularSystem, e.what());
      throw;
    }
  }();
  return solve_upper(f.R, matvec_t(f.Q, rhs));
}

}  // namespace optreg
