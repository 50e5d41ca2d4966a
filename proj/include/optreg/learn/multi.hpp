#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "optreg/core/qr.hpp"
#include "optreg/learn/scalar.hpp"

namespace optreg {

/// Gauss–Newton quantities at one λ.
struct GnState {
  Vector lambda;
  double risk = 0.0;
  Vector g;                       // J
  Matrix H;                       // J × J, generic assembly (1/K) Σ J*FJ
  std::optional<Matrix> H_closed; // squared 2-norm closed form
  Matrix Psi;                     // n × J, dφ/dλ
  Matrix Sbar;                    // n × J, |s_ij|²
  Vector T;                       // |c|²/(|c|² + Σλ²|s|²)²
};

/// Empirical risk of multi-parameter Tikhonov on a transform-diagonalized
/// operator family.
class SpectralRiskModel {
 public:
  SpectralRiskModel(std::shared_ptr<const SpectralOperator> op, const TrainingSet& ts, ErrorMeasure rho)
      : op_(std::move(op)), rho_(rho), x_(ts.x) {
    ts.validate(op_->n(), op_->n());
    const std::size_t n = op_->n();
    gamma_.reserve(ts.size());
    A_.assign(n, 0.0);
    B_.assign(n, 0.0);
    for (std::size_t k = 0; k < ts.size(); ++k) {
      gamma_.push_back(spectral_coefficients(*op_, ts.b[k]).gamma);
      const CVector beta = op_->transform->forward(x_[k]);
      for (std::size_t i = 0; i < n; ++i) {
        A_[i] += std::norm(gamma_[k][i]);
        B_[i] += (std::conj(gamma_[k][i]) * beta[i]).real();
      }
      x_energy_ += norm2_sq(x_[k]);
    }
  }

  std::size_t K() const noexcept { return x_.size(); }
  std::size_t J() const noexcept { return op_->J(); }
  const SpectralOperator& op() const noexcept { return *op_; }
  const ErrorMeasure& measure() const noexcept { return rho_; }
  bool smooth() const noexcept { return rho_.smooth(); }

  double risk(std::span<const double> lambda) const {
    const Vector phi = multi_tikhonov_filters(*op_, lambda).phi;
    if (rho_.kind() == ErrorMeasure::Kind::sq2norm) {
      // Q unitary: ‖Q(φ⊙γ) − x‖² = ‖φ⊙γ − Q*x‖²
      double quad = x_energy_;
      for (std::size_t i = 0; i < phi.size(); ++i) quad += phi[i] * (phi[i] * A_[i] - 2.0 * B_[i]);
      return 0.5 * quad / static_cast<double>(K());
    }
    double total = 0.0;
    for (std::size_t k = 0; k < K(); ++k) total += rho_.evaluate(error(k, phi));
    return total / static_cast<double>(K());
  }

  Vector reconstruct(std::size_t k, std::span<const double> lambda) const {
    return solution(k, multi_tikhonov_filters(*op_, lambda).phi);
  }

  /// Gradient and Gauss–Newton Hessian.
  GnState assemble(std::span<const double> lambda) const {
    const std::size_t n = op_->n(), J = this->J();
    GnState st;
    st.lambda.assign(lambda.begin(), lambda.end());
    st.Sbar = Matrix(n, J);
    st.T.assign(n, 0.0);
    st.Psi = Matrix(n, J);
    const Vector phi = multi_tikhonov_filters(*op_, lambda).phi;
    for (std::size_t i = 0; i < n; ++i) {
      const double c2 = std::norm(op_->c_spectrum[i]);
      double d = c2;
      for (std::size_t j = 0; j < J; ++j) {
        st.Sbar(i, j) = std::norm(op_->s_spectra[j][i]);
        d += lambda[j] * lambda[j] * st.Sbar(i, j);
      }
      st.T[i] = c2 == 0.0 ? 0.0 : c2 / (d * d);
      for (std::size_t j = 0; j < J; ++j) st.Psi(i, j) = -2.0 * st.T[i] * st.Sbar(i, j) * lambda[j];
    }

    st.g.assign(J, 0.0);
    st.H = Matrix(J, J);
    double total = 0.0;
    std::vector<Vector> cols(J);
    for (std::size_t k = 0; k < K(); ++k) {
      const Vector e = error(k, phi);
      total += rho_.evaluate(e);
      const Vector grad = rho_.gradient(e);
      const Vector F = rho_.hessian_diag(e);
      const CVector w = op_->transform->forward(grad);
      for (std::size_t j = 0; j < J; ++j) {
        CVector y(n);
        double gj = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          y[i] = st.Psi(i, j) * gamma_[k][i];
          gj += (y[i] * std::conj(w[i])).real();
        }
        st.g[j] += gj;
        cols[j] = real_part(op_->transform->inverse(y));
      }
      for (std::size_t j = 0; j < J; ++j)
        for (std::size_t l = 0; l <= j; ++l) {
          double h = 0.0;
          for (std::size_t i = 0; i < n; ++i) h += cols[j][i] * F[i] * cols[l][i];
          st.H(j, l) += h;
        }
    }
    const double invK = 1.0 / static_cast<double>(K());
    st.risk = total * invK;
    for (double& v : st.g) v *= invK;
    for (std::size_t j = 0; j < J; ++j)
      for (std::size_t l = 0; l <= j; ++l) {
        st.H(j, l) *= invK;
        st.H(l, j) = st.H(j, l);
      }

    if (rho_.kind() == ErrorMeasure::Kind::sq2norm) {
      // (4/K) Λ S̄ᵀ T diag(Σ|γ|²) T S̄ Λ
      Matrix Hc(J, J);
      for (std::size_t j = 0; j < J; ++j)
        for (std::size_t l = 0; l <= j; ++l) {
          double h = 0.0;
          for (std::size_t i = 0; i < n; ++i) h += st.Sbar(i, j) * st.T[i] * A_[i] * st.T[i] * st.Sbar(i, l);
          Hc(j, l) = Hc(l, j) = 4.0 * invK * lambda[j] * lambda[l] * h;
        }
      st.H_closed = std::move(Hc);
    }
    return st;
  }

  /// g alone, through the spectral identity for the squared 2-norm.
  Vector gradient(std::span<const double> lambda) const {
    if (rho_.kind() != ErrorMeasure::Kind::sq2norm) return assemble(lambda).g;
    const std::size_t n = op_->n(), J = this->J();
    const Vector phi = multi_tikhonov_filters(*op_, lambda).phi;
    Vector g(J, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double c2 = std::norm(op_->c_spectrum[i]);
      if (c2 == 0.0) continue;
      double d = c2;
      for (std::size_t j = 0; j < J; ++j) d += lambda[j] * lambda[j] * std::norm(op_->s_spectra[j][i]);
      const double t = c2 / (d * d), r = phi[i] * A_[i] - B_[i];
      for (std::size_t j = 0; j < J; ++j) g[j] += -2.0 * t * std::norm(op_->s_spectra[j][i]) * lambda[j] * r;
    }
    for (double& v : g) v /= static_cast<double>(K());
    return g;
  }

 private:
  static Vector real_part(const CVector& v) {
    Vector r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) r[i] = v[i].real();
    return r;
  }
  Vector solution(std::size_t k, const Vector& phi) const {
    CVector w(op_->n());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = phi[i] * gamma_[k][i];
    return real_part(op_->transform->inverse(w));
  }
  Vector error(std::size_t k, const Vector& phi) const { return solution(k, phi) - x_[k]; }

  std::shared_ptr<const SpectralOperator> op_;
  ErrorMeasure rho_;
  std::vector<Vector> x_;
  std::vector<CVector> gamma_;
  Vector A_, B_;  // Σ_k |γ_ik|², Σ_k Re(conj(γ_ik) β_ik)
  double x_energy_ = 0.0;
};

inline GnState gn_assemble(const SpectralRiskModel& model, std::span<const double> lambda) {
  return model.assemble(lambda);
}

/// One-parameter view of a J = 1 spectral model, for train_scalar.
class ScalarSlice {
 public:
  explicit ScalarSlice(const SpectralRiskModel& m) : m_(m) {
    require(m.J() == 1, ErrorKind::InvalidArgument, "scalar slice needs exactly one regularizer");
  }
  double risk(double l) const { return m_.risk(std::span<const double>(&l, 1)); }
  double derivative(double l) const { return m_.gradient(std::span<const double>(&l, 1))[0]; }
  bool smooth() const { return m_.smooth(); }

 private:
  const SpectralRiskModel& m_;
};

struct GaussNewtonOptions {
  std::size_t max_iter = 100;
  double grad_tol = 1e-10;
  double step_tol = 1e-10;
  double armijo_c = 1e-4;
  std::size_t max_halvings = 20;
};

/// Levenberg-damped Gauss–Newton with Armijo backtracking. λ is mapped through
/// |·| after every step since φ depends on λ_j² only.
inline TrainResult train_multi(const SpectralRiskModel& model, Vector init = {}, const GaussNewtonOptions& opt = {}) {
  const std::size_t J = model.J();
  if (init.empty()) init.assign(J, 0.1);
  require(init.size() == J, ErrorKind::InvalidArgument, "initial lambda has the wrong length");
  for (double v : init) require(v > 0.0, ErrorKind::InvalidArgument, "initial lambda entries must be positive");

  TrainResult r;
  Vector lambda = init;
  GnState st = model.assemble(lambda);
  double f = st.risk;
  r.history.push_back(f);
  double mu = 0.0;
  for (std::size_t j = 0; j < J; ++j) mu = std::max(mu, st.H(j, j));
  mu = mu > 0.0 ? 1e-3 * mu : 1e-3;

  for (std::size_t it = 0; it < opt.max_iter; ++it) {
    r.iterations = it + 1;
    const double gnorm = norm2(st.g);
    if (gnorm <= opt.grad_tol * (1.0 + f)) {
      r.converged = true;
      break;
    }
    Matrix Hd = st.H;
    for (std::size_t j = 0; j < J; ++j) Hd(j, j) += mu;
    Vector delta;
    try {
      delta = solve_lls(Hd, st.g);
      for (double& v : delta) v = -v;
    } catch (const Error&) {
      delta = st.g;
      for (double& v : delta) v = -v / mu;
    }
    double slope = dot<double>(st.g, delta);
    if (!(slope < 0.0)) {  // not a descent direction; fall back to steepest descent
      delta = st.g;
      for (double& v : delta) v = -v / std::max(mu, 1e-300);
      slope = dot<double>(st.g, delta);
    }

    double t = 1.0, f_new = f;
    Vector trial(J);
    bool accepted = false;
    for (std::size_t h = 0; h <= opt.max_halvings; ++h) {
      for (std::size_t j = 0; j < J; ++j) trial[j] = std::abs(lambda[j] + t * delta[j]);
      f_new = model.risk(trial);
      if (f_new <= f + opt.armijo_c * t * slope) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      // A directional derivative at the gradient tolerance means the objective
      // cannot decrease measurably along δ: treat as converged.
      if (std::abs(slope) <= opt.grad_tol * (1.0 + std::abs(f))) {
        r.converged = true;
        break;
      }
      std::string at;
      for (double v : lambda) at += (at.empty() ? "" : ", ") + std::to_string(v);
      fail(ErrorKind::StallNoDescent, "line search failed after " + std::to_string(opt.max_halvings) +
                                          " halvings at lambda = [" + at + "]");
    }

    // gain ratio of the accepted step against the quadratic model
    const double predicted = -(t * slope + 0.5 * t * t * dot<double>(delta, matvec(st.H, delta)));
    const double rho_gain = predicted > 0.0 ? (f - f_new) / predicted : 0.0;
    if (rho_gain > 0.75)
      mu = std::max(mu / 3.0, 1e-12);
    else if (rho_gain < 0.25)
      mu *= 2.0;

    Vector step = trial - lambda;
    const double rel_step = norm2(step) / std::max(norm2(lambda), 1e-300);
    lambda = trial;
    f = f_new;
    r.history.push_back(f);
    if (rel_step < opt.step_tol) {
      r.converged = true;
      break;
    }
    st = model.assemble(lambda);
  }
  r.lambda = lambda;
  r.risk = f;
  return r;
}

}  // namespace optreg
