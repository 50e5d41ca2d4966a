#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "optreg/gsvd.hpp"
#include "optreg/structured/operator.hpp"

namespace optreg {

/// Per-index filter factors φ in a given basis.
struct FilterVector {
  BasisTag basis_tag = BasisTag::gsvd;
  Vector phi;
};

/// γ_i = (p_iᵀb)/c_i with the raw projections kept for residual/GCV formulas.
/// T is double on the GSVD/SVD path and complex on the transform path.
template <typename T>
struct SpectralCoefficients {
  DenseVector<T> gamma;
  DenseVector<T> projections;
  double tail_energy = 0.0;
  std::vector<std::size_t> zero_c;  // indices with c_i = 0 (γ_i set to 0)
};

using RealCoefficients = SpectralCoefficients<double>;
using ComplexCoefficients = SpectralCoefficients<std::complex<double>>;

inline RealCoefficients spectral_coefficients(const GsvdFactors& f, std::span<const double> b) {
  require(b.size() == f.m, ErrorKind::InvalidArgument, "data length does not match the factorization");
  RealCoefficients co;
  co.projections = matvec_t(f.P, b);
  co.gamma.resize(f.n);
  for (std::size_t i = 0; i < f.n; ++i) {
    if (f.c[i] > 0.0) {
      co.gamma[i] = co.projections[i] / f.c[i];
    } else {
      co.gamma[i] = 0.0;
      co.zero_c.push_back(i);
    }
  }
  co.tail_energy = tail_energy(f, b, co.projections);
  return co;
}

inline ComplexCoefficients spectral_coefficients(const SpectralOperator& op, std::span<const double> b) {
  require(b.size() == op.n(), ErrorKind::InvalidArgument, "data length does not match the operator grid");
  ComplexCoefficients co;
  co.projections = op.transform->forward(b);
  co.gamma.resize(op.n());
  for (std::size_t i = 0; i < op.n(); ++i) {
    if (std::abs(op.c_spectrum[i]) > 0.0) {
      co.gamma[i] = co.projections[i] / op.c_spectrum[i];
    } else {
      co.gamma[i] = 0.0;
      co.zero_c.push_back(i);
    }
  }
  return co;
}

/// φ_i = c_i²/(c_i² + λ²s_i²) on paired indices, 1 on trailing ones.
inline FilterVector tikhonov_filters_gsvd(const GsvdFactors& f, double lambda) {
  require(lambda >= 0.0, ErrorKind::InvalidArgument, "lambda must be non-negative");
  FilterVector out{f.tag, Vector(f.n, 1.0)};
  const double l2 = lambda * lambda;
  for (std::size_t i = 0; i < f.paired(); ++i) {
    const double c2 = f.c[i] * f.c[i], s2 = f.s[i] * f.s[i];
    if (c2 == 0.0 && s2 == 0.0) fail(ErrorKind::InvalidFactors, "c_i = s_i = 0 at index " + std::to_string(i));
    out.phi[i] = c2 == 0.0 ? 0.0 : c2 / (c2 + l2 * s2);
  }
  return out;
}

/// dφ_i/dλ = −2λc_i²s_i²/(c_i² + λ²s_i²)²; zero on trailing indices.
inline Vector tikhonov_filter_derivative(const GsvdFactors& f, double lambda) {
  Vector psi(f.n, 0.0);
  for (std::size_t i = 0; i < f.paired(); ++i) {
    const double c2 = f.c[i] * f.c[i], s2 = f.s[i] * f.s[i];
    const double d = c2 + lambda * lambda * s2;
    if (c2 > 0.0) psi[i] = -2.0 * lambda * c2 * s2 / (d * d);
  }
  return psi;
}

/// φ_i = |c_i|²/(|c_i|² + Σ_j λ_j²|s_ij|²).
inline FilterVector multi_tikhonov_filters(const SpectralOperator& op, std::span<const double> lambda) {
  require(lambda.size() == op.J(), ErrorKind::InvalidArgument, "one lambda per regularizer is required");
  for (double l : lambda) require(l >= 0.0, ErrorKind::InvalidArgument, "lambda must be non-negative");
  FilterVector out{BasisTag::transform, Vector(op.n())};
  for (std::size_t i = 0; i < op.n(); ++i) {
    const double c2 = std::norm(op.c_spectrum[i]);
    double pen = 0.0, smax = 0.0;
    for (std::size_t j = 0; j < op.J(); ++j) {
      const double s2 = std::norm(op.s_spectra[j][i]);
      pen += lambda[j] * lambda[j] * s2;
      smax = std::max(smax, s2);
    }
    if (c2 == 0.0 && smax == 0.0) fail(ErrorKind::InvalidFactors, "all spectra vanish at index " + std::to_string(i));
    out.phi[i] = c2 == 0.0 ? 0.0 : c2 / (c2 + pen);
  }
  return out;
}

/// x = Σ φ_i γ_i z_i.
inline Vector apply_filtered_solution(const RealCoefficients& co, const FilterVector& phi, const GsvdFactors& f) {
  require(co.gamma.size() == f.n && phi.phi.size() == f.n, ErrorKind::InvalidArgument, "filter length mismatch");
  Vector w(f.n);
  for (std::size_t i = 0; i < f.n; ++i) w[i] = phi.phi[i] * co.gamma[i];
  return matvec(f.Z, w);
}

/// x = Q(φ ⊙ γ). The imaginary residue must be negligible.
inline Vector apply_filtered_solution(const ComplexCoefficients& co, const FilterVector& phi,
                                      const GridTransform& transform) {
  const std::size_t n = transform.size();
  require(co.gamma.size() == n && phi.phi.size() == n, ErrorKind::InvalidArgument, "filter length mismatch");
  CVector w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = phi.phi[i] * co.gamma[i];
  const CVector y = transform.inverse(w);
  Vector x(n);
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = y[i].real();
    re += y[i].real() * y[i].real();
    im += y[i].imag() * y[i].imag();
  }
  if (std::sqrt(im) > 1e-8 * std::sqrt(re))
    fail(ErrorKind::SpectralMismatch, "filtered solution has a non-negligible imaginary part");
  return x;
}

}  // namespace optreg
