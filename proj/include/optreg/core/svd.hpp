#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "optreg/core/qr.hpp"

namespace optreg {

struct SvdFactors {
  Matrix U;      // rows × cols, orthonormal columns
  Vector sigma;  // non-negative, descending
  Matrix V;      // cols × cols, orthogonal
};

namespace detail {

// Apply the plane rotation [c s; −s c] to columns (j, k) of m.
inline void rotate_columns(Matrix& m, std::size_t j, std::size_t k, double c, double s) {
  auto a = m.col(j), b = m.col(k);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double t = c * a[i] + s * b[i];
    b[i] = -s * a[i] + c * b[i];
    a[i] = t;
  }
}

}  // namespace detail

/// Thin SVD M = U·diag(σ)·Vᵀ of a tall matrix: Householder bidiagonalization
/// followed by implicit-shift QR sweeps on the bidiagonal (Golub–Kahan–Reinsch).
inline SvdFactors svd_thin(const Matrix& M) {
  const std::size_t m = M.rows(), n = M.cols();
  require(m >= n, ErrorKind::InvalidArgument, "svd_thin requires rows >= cols");

  // Bidiagonalization: work := Hₙ…H₀ · M · G₀…Gₙ₋₃, diagonal in d, superdiagonal in e.
  Matrix work = M;
  Vector d(n, 0.0), e(n, 0.0);
  std::vector<Vector> left(n), right(n);
  Vector row;
  for (std::size_t k = 0; k < n; ++k) {
    left[k].assign(m - k, 0.0);
    d[k] = detail::householder(work.col(k).subspan(k), left[k]);
    detail::apply_reflector_left(left[k], work, k, k + 1);
    if (k + 2 < n) {
      row.assign(n - k - 1, 0.0);
      for (std::size_t j = k + 1; j < n; ++j) row[j - k - 1] = work(k, j);
      right[k].assign(n - k - 1, 0.0);
      e[k] = detail::householder(row, right[k]);
      const auto& w = right[k];
      for (std::size_t i = k + 1; i < m; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < w.size(); ++j) s += work(i, k + 1 + j) * w[j];
        s *= 2.0;
        if (s != 0.0)
          for (std::size_t j = 0; j < w.size(); ++j) work(i, k + 1 + j) -= s * w[j];
      }
    } else if (k + 1 < n) {
      e[k] = work(k, k + 1);
    }
  }

  SvdFactors f{Matrix(m, n), Vector(), Matrix::identity(n)};
  for (std::size_t j = 0; j < n; ++j) f.U(j, j) = 1.0;
  for (std::size_t k = n; k-- > 0;) detail::apply_reflector_left(left[k], f.U, k, 0);
  for (std::size_t k = n; k-- > 0;)
    if (k + 2 < n) detail::apply_reflector_left(right[k], f.V, k + 1, 0);

  Matrix& U = f.U;
  Matrix& V = f.V;
  const double eps = std::numeric_limits<double>::epsilon();
  const double tiny = std::numeric_limits<double>::min();
  const std::size_t max_steps = 100 * n;
  std::size_t steps = 0;

  // QR phase on the bidiagonal; p is the size of the active (unconverged) block.
  std::ptrdiff_t p = static_cast<std::ptrdiff_t>(n);
  while (p > 0) {
    std::ptrdiff_t k;
    for (k = p - 2; k >= 0; --k) {
      if (std::abs(e[k]) <= tiny + eps * (std::abs(d[k]) + std::abs(d[k + 1]))) {
        e[k] = 0.0;
        break;
      }
    }
    int kase;
    if (k == p - 2) {
      kase = 4;  // e[p-2] negligible: d[p-1] converged
    } else {
      std::ptrdiff_t ks;
      for (ks = p - 1; ks > k; --ks) {
        const double t = (ks != p ? std::abs(e[ks]) : 0.0) + (ks != k + 1 ? std::abs(e[ks - 1]) : 0.0);
        if (std::abs(d[ks]) <= tiny + eps * t) {
          d[ks] = 0.0;
          break;
        }
      }
      if (ks == k) {
        kase = 3;
      } else if (ks == p - 1) {
        kase = 1;
      } else {
        kase = 2;
        k = ks;
      }
    }
    ++k;

    switch (kase) {
      case 1: {  // deflate negligible d[p-1]
        double f_ = e[p - 2];
        e[p - 2] = 0.0;
        for (std::ptrdiff_t j = p - 2; j >= k; --j) {
          const double t = std::hypot(d[j], f_);
          const double cs = d[j] / t, sn = f_ / t;
          d[j] = t;
          if (j != k) {
            f_ = -sn * e[j - 1];
            e[j - 1] = cs * e[j - 1];
          }
          detail::rotate_columns(V, j, p - 1, cs, sn);
        }
        break;
      }
      case 2: {  // split at negligible d[k-1]
        double f_ = e[k - 1];
        e[k - 1] = 0.0;
        for (std::ptrdiff_t j = k; j < p; ++j) {
          const double t = std::hypot(d[j], f_);
          const double cs = d[j] / t, sn = f_ / t;
          d[j] = t;
          f_ = -sn * e[j];
          e[j] = cs * e[j];
          detail::rotate_columns(U, j, k - 1, cs, sn);
        }
        break;
      }
      case 3: {  // one implicit-shift QR sweep on d[k..p-1]
        if (++steps > max_steps) fail(ErrorKind::ConvergenceFailure, "svd_thin exceeded its iteration cap");
        const double scale = std::max({std::abs(d[p - 1]), std::abs(d[p - 2]), std::abs(e[p - 2]), std::abs(d[k]),
                                       std::abs(e[k])});
        const double sp = d[p - 1] / scale, spm1 = d[p - 2] / scale, epm1 = e[p - 2] / scale;
        const double sk = d[k] / scale, ek = e[k] / scale;
        const double b = ((spm1 + sp) * (spm1 - sp) + epm1 * epm1) / 2.0;
        const double c = (sp * epm1) * (sp * epm1);
        double shift = 0.0;
        if (b != 0.0 || c != 0.0) {
          shift = std::sqrt(b * b + c);
          if (b < 0.0) shift = -shift;
          shift = c / (b + shift);
        }
        double f_ = (sk + sp) * (sk - sp) + shift;
        double g = sk * ek;
        for (std::ptrdiff_t j = k; j < p - 1; ++j) {
          double t = std::hypot(f_, g);
          double cs = f_ / t, sn = g / t;
          if (j != k) e[j - 1] = t;
          f_ = cs * d[j] + sn * e[j];
          e[j] = cs * e[j] - sn * d[j];
          g = sn * d[j + 1];
          d[j + 1] = cs * d[j + 1];
          detail::rotate_columns(V, j, j + 1, cs, sn);
          t = std::hypot(f_, g);
          cs = f_ / t;
          sn = g / t;
          d[j] = t;
          f_ = cs * e[j] + sn * d[j + 1];
          d[j + 1] = -sn * e[j] + cs * d[j + 1];
          g = sn * e[j + 1];
          e[j + 1] = cs * e[j + 1];
          detail::rotate_columns(U, j, j + 1, cs, sn);
        }
        e[p - 2] = f_;
        break;
      }
      default: {  // convergence of d[k]
        if (d[k] <= 0.0) {
          d[k] = d[k] < 0.0 ? -d[k] : 0.0;
          for (double& v : V.col(k)) v = -v;
        }
        --p;
        break;
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return d[a] > d[b]; });
  Matrix Us(m, n), Vs(n, n);
  f.sigma.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    f.sigma[j] = d[order[j]];
    std::copy(U.col(order[j]).begin(), U.col(order[j]).end(), Us.col(j).begin());
    std::copy(V.col(order[j]).begin(), V.col(order[j]).end(), Vs.col(j).begin());
    // Sign convention: the largest-magnitude entry of each right singular vector is positive.
    auto vj = Vs.col(j);
    const auto big = std::max_element(vj.begin(), vj.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
    if (*big < 0.0) {
      for (double& v : vj) v = -v;
      for (double& u : Us.col(j)) u = -u;
    }
  }
  f.U = std::move(Us);
  f.V = std::move(Vs);
  return f;
}

}  // namespace optreg
