#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "optreg/select/search.hpp"
#include "optreg/spectral/filter.hpp"

namespace optreg {

struct DpConfig {
  double tau = 1.0;
  double eta = 0.0;  // estimate of E‖n‖²
};

struct Selection {
  Vector lambda;
  double objective = 0.0;
  std::vector<std::string> warnings;
};

/// ‖Ax_λ − b‖² from the spectral coefficients.
inline double residual_norm_sq(const GsvdFactors& f, const RealCoefficients& co, double lambda) {
  double r = co.tail_energy;
  const double l2 = lambda * lambda;
  for (std::size_t i = 0; i < f.paired(); ++i) {
    const double c2 = f.c[i] * f.c[i], s2 = f.s[i] * f.s[i];
    const double d = c2 + l2 * s2;
    const double w = d > 0.0 ? l2 * s2 / d : 1.0;
    r += w * w * co.projections[i] * co.projections[i];
  }
  return r;
}

inline double residual_norm_sq(const GsvdFactors& f, std::span<const double> b, double lambda) {
  return residual_norm_sq(f, spectral_coefficients(f, b), lambda);
}

/// Discrepancy principle: residual(λ) = τη by bisection in log λ.
inline Selection select_dp(const GsvdFactors& f, std::span<const double> b, const DpConfig& cfg) {
  require(cfg.tau > 0.0 && cfg.eta >= 0.0, ErrorKind::InvalidArgument, "DP needs tau > 0 and eta >= 0");
  const auto co = spectral_coefficients(f, b);
  const double target = cfg.tau * cfg.eta;
  const double r0 = residual_norm_sq(f, co, 0.0);
  double rinf = co.tail_energy;
  for (std::size_t i = 0; i < f.paired(); ++i)
    if (f.s[i] > 0.0) rinf += co.projections[i] * co.projections[i];
  if (!(target > r0 && target < rinf))
    fail(ErrorKind::NoRoot, "tau*eta = " + std::to_string(target) + " outside the attainable residual range [" +
                                std::to_string(r0) + ", " + std::to_string(rinf) + "]");
  auto g = [&](double l) { return residual_norm_sq(f, co, l) - target; };
  // bracket in λ: grow hi until the residual passes the target
  double lo = 1e-300, hi = 1.0;
  while (g(hi) < 0.0 && hi < 1e300) hi *= 1e4;
  lo = hi;
  while (g(lo) > 0.0 && lo > 1e-300) lo *= 1e-4;
  double a = std::log(lo), bb = std::log(hi);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (a + bb);
    if (g(std::exp(mid)) < 0.0)
      a = mid;
    else
      bb = mid;
    if (bb - a < 1e-15) break;
  }
  // pick the endpoint closer to the target
  const double la = std::exp(a), lb = std::exp(bb);
  const double lam = std::abs(g(la)) <= std::abs(g(lb)) ? la : lb;
  return {{lam}, residual_norm_sq(f, co, lam), {}};
}

/// GCV(λ) = residual(λ) / (m − n + Σ_{i≤min(n,p)} (1 − φ_i))²; 0/0 counts as +∞.
inline double gcv_value(const GsvdFactors& f, const RealCoefficients& co, double lambda) {
  const Vector phi = tikhonov_filters_gsvd(f, lambda).phi;
  double trace = static_cast<double>(f.m - f.n);
  for (std::size_t i = 0; i < f.paired(); ++i) trace += 1.0 - phi[i];
  const double num = residual_norm_sq(f, co, lambda);
  if (trace <= 0.0) return std::numeric_limits<double>::infinity();
  return num / (trace * trace);
}

inline double gcv_value(const GsvdFactors& f, std::span<const double> b, double lambda) {
  return gcv_value(f, spectral_coefficients(f, b), lambda);
}

namespace detail {

// Characteristic scale of λ: ratio of the largest c to the largest s.
inline double lambda_scale(const GsvdFactors& f) {
  double cmax = 0.0, smax = 0.0;
  for (std::size_t i = 0; i < f.paired(); ++i) {
    cmax = std::max(cmax, f.c[i]);
    smax = std::max(smax, f.s[i]);
  }
  return (cmax > 0.0 && smax > 0.0) ? cmax / smax : 1.0;
}

inline Selection grid_then_golden(const std::function<double(double)>& obj, double lo, double hi, std::size_t points,
                                  double rel_width) {
  const auto grid = log_grid(lo, hi, points);
  const GridScan s = scan(grid, obj);
  Selection sel;
  double vmin = std::numeric_limits<double>::infinity(), vmax = -vmin;
  for (double v : s.values)
    if (std::isfinite(v)) {
      vmin = std::min(vmin, v);
      vmax = std::max(vmax, v);
    }
  if (std::isfinite(vmin) && vmax - vmin < 1e-14 * std::max(1.0, std::abs(vmax))) {
    const double mid = grid[grid.size() / 2];
    sel.lambda = {mid};
    sel.objective = obj(mid);
    sel.warnings.push_back("FlatObjective: objective is constant over the search grid");
    return sel;
  }
  const std::size_t i = s.best;
  const Minimum m = golden_section_log(obj, grid[i == 0 ? 0 : i - 1], grid[std::min(i + 1, grid.size() - 1)], rel_width);
  sel.lambda = {grid[i]};
  sel.objective = s.values[i];
  if (m.value <= sel.objective) {
    sel.lambda = {m.x};
    sel.objective = m.value;
  }
  if (i == 0 || i + 1 == grid.size()) sel.warnings.push_back("BoundaryMinimum: minimizer at the search boundary");
  return sel;
}

}  // namespace detail

/// GCV minimizer over [1e-8, 1e4]·scale.
inline Selection select_gcv(const GsvdFactors& f, std::span<const double> b) {
  const auto co = spectral_coefficients(f, b);
  const double scale = detail::lambda_scale(f);
  return detail::grid_then_golden([&](double l) { return gcv_value(f, co, l); }, 1e-8 * scale, 1e4 * scale, 200,
                                  1e-6);
}

/// Σ(1 − φ_i)²|q_i*b|² / (Σ(1 − φ_i))² on a square transform-diagonalized problem.
inline double gcv_value_multi(const SpectralOperator& op, const ComplexCoefficients& co, std::span<const double> lambda) {
  const Vector phi = multi_tikhonov_filters(op, lambda).phi;
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    const double w = 1.0 - phi[i];
    num += w * w * std::norm(co.projections[i]);
    den += w;
  }
  if (den <= 0.0) return std::numeric_limits<double>::infinity();
  return num / (den * den);
}

inline double gcv_value_multi(const SpectralOperator& op, std::span<const double> b, std::span<const double> lambda) {
  return gcv_value_multi(op, spectral_coefficients(op, b), lambda);
}

struct MultiGcvOptions {
  double lo = 1e-8;
  double hi = 1e4;
  std::size_t scan_points = 60;
  double rel_width = 1e-8;
  std::size_t max_sweeps = 200;
};

/// Cyclic coordinate search in log λ_j (scan + golden-section per coordinate)
/// from the starts λ = 1e-3, 1e-1, 1e1 in every coordinate.
inline Selection select_gcv_multi(const SpectralOperator& op, std::span<const double> b, const MultiGcvOptions& o = {}) {
  const auto co = spectral_coefficients(op, b);
  const std::size_t J = op.J();
  auto F = [&](const Vector& l) { return gcv_value_multi(op, co, l); };
  const auto grid = log_grid(o.lo, o.hi, o.scan_points);

  Selection best;
  best.objective = std::numeric_limits<double>::infinity();
  for (double start : {1e-3, 1e-1, 1e1}) {
    Vector lam(J, start);
    double f = F(lam);
    for (std::size_t sweep = 0; sweep < o.max_sweeps; ++sweep) {
      const double before = f;
      for (std::size_t j = 0; j < J; ++j) {
        auto line = [&](double v) {
          Vector t = lam;
          t[j] = v;
          return F(t);
        };
        const GridScan s = scan(grid, line);
        const std::size_t i = s.best;
        double cand = grid[i], fc = s.values[i];
        const Minimum m = golden_section_log(line, grid[i == 0 ? 0 : i - 1], grid[std::min(i + 1, grid.size() - 1)],
                                             o.rel_width);
        if (m.value < fc) {
          cand = m.x;
          fc = m.value;
        }
        if (fc < f) {
          lam[j] = cand;
          f = fc;
        }
      }
      if (before - f <= 1e-10 * std::abs(before)) break;
    }
    if (f < best.objective) {
      best.lambda = lam;
      best.objective = f;
    }
  }
  return best;
}

/// λ minimizing ‖x_λ − x_true‖² (benchmark oracle).
inline Selection select_mse_oracle(const GsvdFactors& f, std::span<const double> b, std::span<const double> x_true,
                                   double lo = 1e-8, double hi = 1e4) {
  const auto co = spectral_coefficients(f, b);
  auto err = [&](double l) {
    const Vector x = apply_filtered_solution(co, tikhonov_filters_gsvd(f, l), f);
    double e = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) e += (x[i] - x_true[i]) * (x[i] - x_true[i]);
    return e;
  };
  return detail::grid_then_golden(err, lo, hi, 200, 1e-8);
}

}  // namespace optreg
