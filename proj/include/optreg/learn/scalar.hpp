#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "optreg/learn/error_measure.hpp"
#include "optreg/learn/training_set.hpp"
#include "optreg/select/search.hpp"
#include "optreg/spectral/filter.hpp"

namespace optreg {

/// Training data summarized for the squared 2-norm on a GSVD/SVD basis:
/// with M = ZᵀZ, G = Σ_k γ_k γ_kᵀ and h_i = Σ_k γ_ik (Zᵀx_k)_i,
///   Σ_k ‖Z(φ⊙γ_k) − x_k‖² = φᵀ(M⊙G)φ − 2φᵀh + Σ_k ‖x_k‖².
struct QuadraticSummary {
  Matrix MG;
  Vector h;
  double x_energy = 0.0;
  std::size_t K = 0;
};

inline QuadraticSummary quadratic_summary(const GsvdFactors& f, const Matrix& Gamma, const std::vector<Vector>& x) {
  const std::size_t n = f.n, K = Gamma.cols();
  QuadraticSummary q;
  q.K = K;
  q.MG = transpose_times(f.Z, f.Z);
  const Matrix G = Gamma * Gamma.transpose();
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) q.MG(i, j) *= G(i, j);
  q.h.assign(n, 0.0);
  for (std::size_t k = 0; k < K; ++k) {
    const Vector zx = matvec_t(f.Z, x[k]);
    for (std::size_t i = 0; i < n; ++i) q.h[i] += Gamma(i, k) * zx[i];
    q.x_energy += norm2_sq(x[k]);
  }
  return q;
}

/// Empirical risk f_K(λ) of one-parameter general-form Tikhonov on a fixed
/// GSVD (or SVD) basis, and its derivative.
class GsvdRiskModel {
 public:
  GsvdRiskModel(std::shared_ptr<const GsvdFactors> f, const TrainingSet& ts, ErrorMeasure rho, bool fast_path = true)
      : f_(std::move(f)), rho_(rho), x_(ts.x) {
    ts.validate(f_->m, f_->n);
    Gamma_ = Matrix(f_->n, ts.size());
    for (std::size_t k = 0; k < ts.size(); ++k) {
      const auto co = spectral_coefficients(*f_, ts.b[k]);
      std::copy(co.gamma.begin(), co.gamma.end(), Gamma_.col(k).begin());
    }
    if (fast_path && rho_.kind() == ErrorMeasure::Kind::sq2norm) summary_ = quadratic_summary(*f_, Gamma_, x_);
  }

  std::size_t K() const noexcept { return x_.size(); }
  const GsvdFactors& factors() const noexcept { return *f_; }
  const ErrorMeasure& measure() const noexcept { return rho_; }
  bool smooth() const noexcept { return rho_.smooth(); }
  bool uses_fast_path() const noexcept { return summary_.K > 0; }

  double risk(double lambda) const {
    const Vector phi = tikhonov_filters_gsvd(*f_, lambda).phi;
    if (uses_fast_path()) {
      const Vector mp = matvec(summary_.MG, phi);
      const double quad = dot<double>(phi, mp) - 2.0 * dot<double>(phi, summary_.h) + summary_.x_energy;
      return 0.5 * quad / static_cast<double>(K());
    }
    double total = 0.0;
    for (std::size_t k = 0; k < K(); ++k) total += rho_.evaluate(error(k, phi));
    return total / static_cast<double>(K());
  }

  /// f′_K(λ) = (1/K) Σ_k (Z(ψ⊙γ_k))ᵀ ∇ρ(e_k).
  double derivative(double lambda) const {
    const Vector phi = tikhonov_filters_gsvd(*f_, lambda).phi;
    const Vector psi = tikhonov_filter_derivative(*f_, lambda);
    if (uses_fast_path()) {
      const Vector r = matvec(summary_.MG, phi) - summary_.h;
      return dot<double>(psi, r) / static_cast<double>(K());
    }
    double total = 0.0;
    for (std::size_t k = 0; k < K(); ++k) {
      const Vector zg = matvec_t(f_->Z, rho_.gradient(error(k, phi)));
      for (std::size_t i = 0; i < f_->n; ++i) total += psi[i] * Gamma_(i, k) * zg[i];
    }
    return total / static_cast<double>(K());
  }

  Vector reconstruct(std::size_t k, double lambda) const {
    return solution(k, tikhonov_filters_gsvd(*f_, lambda).phi);
  }

 private:
  Vector solution(std::size_t k, const Vector& phi) const {
    Vector w(f_->n);
    for (std::size_t i = 0; i < f_->n; ++i) w[i] = phi[i] * Gamma_(i, k);
    return matvec(f_->Z, w);
  }
  Vector error(std::size_t k, const Vector& phi) const { return solution(k, phi) - x_[k]; }

  std::shared_ptr<const GsvdFactors> f_;
  ErrorMeasure rho_;
  std::vector<Vector> x_;
  Matrix Gamma_;
  QuadraticSummary summary_;
};

inline double empirical_risk(std::shared_ptr<const GsvdFactors> f, const TrainingSet& ts, double lambda,
                             const ErrorMeasure& rho) {
  return GsvdRiskModel(std::move(f), ts, rho).risk(lambda);
}

inline double risk_derivative_scalar(std::shared_ptr<const GsvdFactors> f, const TrainingSet& ts, double lambda,
                                     const ErrorMeasure& rho) {
  return GsvdRiskModel(std::move(f), ts, rho).derivative(lambda);
}

struct TrainResult {
  Vector lambda;
  double risk = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<std::string> warnings;
  std::vector<double> history;  // accepted objective values, multi-parameter trainer only
};

struct ScalarSearch {
  double lo = 1e-6;
  double hi = 1e3;
  std::size_t points = 200;
  double rel_width = 1e-8;
};

/// Minimizes a one-parameter risk on [lo, hi]: log-grid scan, then bisection
/// on f′ (smooth ρ with a bracketed sign change) or golden-section on f.
/// The model needs risk(double), derivative(double) and smooth().
template <typename Model>
TrainResult train_scalar(const Model& model, const ScalarSearch& search = {}) {
  const auto grid = log_grid(search.lo, search.hi, search.points);
  const GridScan s = scan(grid, [&](double l) { return model.risk(l); });
  const std::size_t i = s.best;
  const double lo = grid[i == 0 ? 0 : i - 1];
  const double hi = grid[std::min(i + 1, grid.size() - 1)];

  TrainResult r;
  r.lambda = {grid[i]};
  r.risk = s.values[i];
  r.iterations = grid.size();
  if (i == 0 || i + 1 == grid.size())
    r.warnings.push_back("BoundaryMinimum: risk is minimized at the search boundary lambda = " +
                         std::to_string(grid[i]));

  double cand;
  if (model.smooth() && model.derivative(lo) < 0.0 && model.derivative(hi) > 0.0) {
    cand = bisect_log([&](double l) { return model.derivative(l); }, lo, hi, search.rel_width);
  } else {
    cand = golden_section_log([&](double l) { return model.risk(l); }, lo, hi, search.rel_width).x;
  }
  const double fc = model.risk(cand);
  if (fc <= r.risk) {
    r.lambda = {cand};
    r.risk = fc;
  }
  r.converged = true;
  return r;
}

}  // namespace optreg
