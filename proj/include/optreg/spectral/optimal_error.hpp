#pragma once

#include <cmath>
#include <vector>

#include "optreg/learn/multi.hpp"

namespace optreg {

/// Free-form filters minimizing the training error in the squared 2-norm.
struct OptimalErrorFilters {
  FilterVector filters;
  std::vector<std::size_t> zero_indices;  // indices with no data energy; φ set to 0
};

/// Orthonormal solution basis (SVD or transform): per-index closed form
/// φ_i = Re Σ_k conj(γ_ik) β_ik / Σ_k |γ_ik|².
template <typename T>
OptimalErrorFilters optimal_error_filters_orthonormal(BasisTag tag, const std::vector<DenseVector<T>>& gamma,
                                                      const std::vector<DenseVector<T>>& beta) {
  require(!gamma.empty() && gamma.size() == beta.size(), ErrorKind::InvalidArgument, "need K >= 1 matched pairs");
  const std::size_t n = gamma[0].size();
  Vector num(n, 0.0), den(n, 0.0);
  for (std::size_t k = 0; k < gamma.size(); ++k)
    for (std::size_t i = 0; i < n; ++i) {
      if constexpr (is_complex_v<T>) {
        num[i] += (std::conj(gamma[k][i]) * beta[k][i]).real();
        den[i] += std::norm(gamma[k][i]);
      } else {
        num[i] += gamma[k][i] * beta[k][i];
        den[i] += gamma[k][i] * gamma[k][i];
      }
    }
  OptimalErrorFilters out{{tag, Vector(n, 0.0)}, {}};
  for (std::size_t i = 0; i < n; ++i) {
    if (den[i] >= 1e-14)
      out.filters.phi[i] = num[i] / den[i];
    else
      out.zero_indices.push_back(i);
  }
  return out;
}

/// GSVD/SVD basis. The SVD basis uses the closed form; the GSVD basis solves
/// (M⊙G)_FF φ_F = h_F − (M⊙G)_FT 1 over the paired indices F with the
/// trailing indices T fixed at 1.
inline OptimalErrorFilters learn_optimal_error_filters(const GsvdFactors& f, const TrainingSet& ts) {
  ts.validate(f.m, f.n);
  const std::size_t n = f.n, K = ts.size();
  Matrix Gamma(n, K);
  std::vector<Vector> gam(K), beta(K);
  for (std::size_t k = 0; k < K; ++k) {
    gam[k] = spectral_coefficients(f, ts.b[k]).gamma;
    std::copy(gam[k].begin(), gam[k].end(), Gamma.col(k).begin());
    if (f.tag == BasisTag::svd) beta[k] = matvec(f.Zinv, ts.x[k]);
  }
  if (f.tag == BasisTag::svd) return optimal_error_filters_orthonormal(f.tag, gam, beta);

  const QuadraticSummary q = quadratic_summary(f, Gamma, ts.x);
  OptimalErrorFilters out{{f.tag, Vector(n, 1.0)}, {}};
  double dmax = 0.0;
  for (std::size_t i = 0; i < n; ++i) dmax = std::max(dmax, q.MG(i, i));
  std::vector<std::size_t> free;
  for (std::size_t i = 0; i < f.paired(); ++i) {
    double g2 = 0.0;
    for (std::size_t k = 0; k < K; ++k) g2 += Gamma(i, k) * Gamma(i, k);
    if (g2 >= 1e-14 && q.MG(i, i) > 1e-14 * dmax)
      free.push_back(i);
    else {
      out.filters.phi[i] = 0.0;
      out.zero_indices.push_back(i);
    }
  }
  if (free.empty()) return out;

  // Symmetric diagonal scaling before the solve; M⊙G is positive definite
  // but its diagonal spans many orders of magnitude.
  const std::size_t nf = free.size();
  Vector d(nf);
  for (std::size_t a = 0; a < nf; ++a) d[a] = 1.0 / std::sqrt(q.MG(free[a], free[a]));
  Matrix S(nf, nf);
  Vector rhs(nf);
  for (std::size_t a = 0; a < nf; ++a) {
    double r = q.h[free[a]];
    for (std::size_t i = f.paired(); i < n; ++i) r -= q.MG(free[a], i);
    rhs[a] = d[a] * r;
    for (std::size_t b = 0; b < nf; ++b) S(a, b) = d[a] * q.MG(free[a], free[b]) * d[b];
  }
  const Vector y = solve_lls(S, rhs);
  for (std::size_t a = 0; a < nf; ++a) out.filters.phi[free[a]] = d[a] * y[a];
  return out;
}

/// Transform path: β = Q*x_true, γ = Q*b / c.
inline OptimalErrorFilters learn_optimal_error_filters(const SpectralOperator& op, const TrainingSet& ts) {
  ts.validate(op.n(), op.n());
  std::vector<CVector> gam, beta;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    gam.push_back(spectral_coefficients(op, ts.b[k]).gamma);
    beta.push_back(op.transform->forward(ts.x[k]));
  }
  return optimal_error_filters_orthonormal(BasisTag::transform, gam, beta);
}

}  // namespace optreg
