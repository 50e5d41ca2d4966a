#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "optreg/core/qr.hpp"
#include "optreg/core/svd.hpp"

namespace optreg {

enum class BasisTag { svd, gsvd, transform };

inline const char* to_string(BasisTag t) {
  switch (t) {
    case BasisTag::svd: return "svd";
    case BasisTag::gsvd: return "gsvd";
    case BasisTag::transform: return "transform";
  }
  return "?";
}

inline BasisTag basis_tag_from_string(const std::string& s) {
  if (s == "svd") return BasisTag::svd;
  if (s == "gsvd") return BasisTag::gsvd;
  if (s == "transform") return BasisTag::transform;
  fail(ErrorKind::InvalidArgument, "unknown basis tag '" + s + "'");
}

/// Joint factorization A = P·diag(c)·Zinv, L = Pbar·S·Zinv.
///
/// Index layout follows the usual GSVD ordering: the first min(n,p) indices are
/// paired (c descending, s ascending, c² + s² = 1); when p < n the trailing
/// n − p indices carry c = 1 and span the null space of L.
///
/// The same type also stores an SVD basis of A (tag svd): c holds the singular
/// values, s = 1 and Z = V, i.e. the pair {A, I}. The CS identity only holds
/// for the gsvd tag.
struct GsvdFactors {
  BasisTag tag = BasisTag::gsvd;
  std::size_t m = 0, n = 0, p = 0;
  Matrix P;     // m × n
  Matrix Pbar;  // p × min(n, p)
  Vector c;     // n
  Vector s;     // min(n, p)
  Matrix Z;     // n × n, solution basis
  Matrix Zinv;  // n × n

  std::size_t paired() const noexcept { return std::min(n, p); }
};

namespace detail {

// Extend the orthonormal columns [0, filled) of q by one unit vector orthogonal
// to them, written into column `target`. Picks the coordinate direction with the
// largest residual after two rounds of Gram–Schmidt.
inline void complete_orthonormal_column(Matrix& q, const std::vector<bool>& filled, std::size_t target) {
  const std::size_t rows = q.rows();
  Vector best;
  double best_norm = -1.0;
  Vector cand(rows);
  for (std::size_t e = 0; e < rows; ++e) {
    std::fill(cand.begin(), cand.end(), 0.0);
    cand[e] = 1.0;
    for (int pass = 0; pass < 2; ++pass)
      for (std::size_t j = 0; j < q.cols(); ++j)
        if (filled[j]) axpy(-dot<double>(q.col(j), cand), q.col(j), cand);
    const double nc = norm2(cand);
    if (nc > best_norm + 1e-12) {
      best_norm = nc;
      best = cand;
    }
  }
  for (double& v : best) v /= best_norm;
  std::copy(best.begin(), best.end(), q.col(target).begin());
}

}  // namespace detail

/// GSVD of {A, L} through a reduced QR of [A; L] followed by a CS decomposition
/// of the two orthonormal blocks.
inline GsvdFactors gsvd(const Matrix& A, const Matrix& L) {
  const std::size_t m = A.rows(), n = A.cols(), p = L.rows();
  require(m >= n, ErrorKind::InvalidArgument, "gsvd requires A with rows >= cols");
  require(L.cols() == n, ErrorKind::InvalidArgument, "A and L must have the same number of columns");

  const QrFactors qr = qr_reduced(vstack(A, L));
  const Matrix QA = qr.Q.block(0, 0, m, n);
  const Matrix QL = qr.Q.block(m, 0, p, n);
  const SvdFactors cs = svd_thin(QA);

  const std::size_t q = std::min(n, p);
  const std::size_t trailing = n - q;
  // SVD order has c descending; the n − p directions with c = 1 move to the end.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(q), trailing);
  std::iota(order.begin() + static_cast<std::ptrdiff_t>(q), order.end(), 0);

  GsvdFactors f;
  f.tag = BasisTag::gsvd;
  f.m = m;
  f.n = n;
  f.p = p;
  f.P = Matrix(m, n);
  f.c.resize(n);
  Matrix W(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t src = order[i];
    std::copy(cs.U.col(src).begin(), cs.U.col(src).end(), f.P.col(i).begin());
    std::copy(cs.V.col(src).begin(), cs.V.col(src).end(), W.col(i).begin());
    f.c[i] = std::min(cs.sigma[src], 1.0);
  }

  const Matrix B = QL * W;
  f.s.resize(q);
  f.Pbar = Matrix(p, q);
  std::vector<bool> filled(q, false);
  double defect = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double nb = norm2(B.col(i));
    defect = std::max(defect, std::abs(f.c[i] * f.c[i] + nb * nb - 1.0));
    if (i >= q) continue;
    f.s[i] = nb;
    if (nb >= 1e-8) {
      for (std::size_t r = 0; r < p; ++r) f.Pbar(r, i) = B(r, i) / nb;
      filled[i] = true;
    }
  }
  if (defect > 1e-8)
    fail(ErrorKind::NumericalBreakdown, "CS decomposition orthogonality defect " + std::to_string(defect));
  for (std::size_t i = q; i < n; ++i) f.c[i] = 1.0;
  for (std::size_t i = 0; i < q; ++i) {
    if (filled[i]) continue;
    detail::complete_orthonormal_column(f.Pbar, filled, i);
    filled[i] = true;
  }

  f.Zinv = transpose_times(W, qr.R);
  f.Z = solve_upper(qr.R, W);
  return f;
}

/// SVD basis of A packed as factors of the pair {A, I}: c = σ, s = 1, Z = V.
inline GsvdFactors svd_basis(const Matrix& A) {
  require(A.rows() >= A.cols(), ErrorKind::InvalidArgument, "svd_basis requires rows >= cols");
  SvdFactors sv = svd_thin(A);
  GsvdFactors f;
  f.tag = BasisTag::svd;
  f.m = A.rows();
  f.n = A.cols();
  f.p = A.cols();
  f.P = std::move(sv.U);
  f.c = std::move(sv.sigma);
  f.s.assign(f.n, 1.0);
  f.Pbar = sv.V;
  f.Zinv = sv.V.transpose();
  f.Z = std::move(sv.V);
  return f;
}

struct GeneralizedSingularValues {
  Vector t;                          // c_i / s_i; 0 at indices listed in zero_s
  std::vector<std::size_t> zero_s;   // indices with s_i = 0 (t undefined there)
};

inline GeneralizedSingularValues generalized_singular_values(const GsvdFactors& f) {
  GeneralizedSingularValues g;
  g.t.resize(f.paired());
  for (std::size_t i = 0; i < f.paired(); ++i) {
    if (f.s[i] > 0.0) {
      g.t[i] = f.c[i] / f.s[i];
    } else {
      g.t[i] = 0.0;
      g.zero_s.push_back(i);
    }
  }
  return g;
}

/// Trailing energy Σ_{i>n} (p_iᵀb)² = ‖b‖² − Σ_{i≤n} (p_iᵀb)², clamped at 0.
inline double tail_energy(const GsvdFactors& f, std::span<const double> b, std::span<const double> projections) {
  if (f.m == f.n) return 0.0;
  double e = norm2_sq(b) - norm2_sq(projections);
  return std::max(e, 0.0);
}

}  // namespace optreg
