#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "optreg/core/matrix.hpp"
#include "optreg/structured/operator.hpp"

namespace optreg {

using LinearMap = std::function<Vector(std::span<const double>)>;

/// A matrix-free operator with its transpose.
struct MatrixFreeOperator {
  LinearMap apply;
  LinearMap apply_transpose;

  static MatrixFreeOperator from(const ConvolutionOperator& op) {
    return {[op](std::span<const double> x) { return op.apply(x); },
            [op](std::span<const double> x) { return op.apply_transpose(x); }};
  }
  static MatrixFreeOperator from(const Matrix& m) {
    return {[m](std::span<const double> x) { return matvec(m, x); },
            [m](std::span<const double> x) { return matvec_t(m, x); }};
  }
};

struct IterativeSolution {
  Vector x;
  std::size_t iterations = 0;
  double relative_residual = 0.0;
  std::vector<double> residual_history;  // ‖r_k‖ of the normal equations
};

struct CgOptions {
  double rel_tol = 1e-8;
  std::size_t max_iter = 1000;
};

/// Solves (AᵀA + Σ λ_j² L_jᵀL_j) x = Aᵀb with the conjugate residual method,
/// which keeps the normal-equations residual monotone.
inline IterativeSolution solve_multi_tikhonov_general(const MatrixFreeOperator& A,
                                                      const std::vector<MatrixFreeOperator>& L,
                                                      std::span<const double> b, std::span<const double> lambda,
                                                      const CgOptions& opt = {}) {
  require(L.size() == lambda.size(), ErrorKind::InvalidArgument, "one lambda per regularizer is required");
  auto normal = [&](std::span<const double> v) {
    Vector out = A.apply_transpose(A.apply(v));
    for (std::size_t j = 0; j < L.size(); ++j) {
      if (lambda[j] == 0.0) continue;
      const Vector t = L[j].apply_transpose(L[j].apply(v));
      axpy(lambda[j] * lambda[j], t, out);
    }
    return out;
  };
  const Vector rhs = A.apply_transpose(b);
  const double rhs_norm = norm2(rhs);
  IterativeSolution sol;
  sol.x.assign(rhs.size(), 0.0);
  if (rhs_norm == 0.0) return sol;

  Vector r = rhs;
  Vector p = r;
  Vector Ar = normal(r);
  Vector Ap = Ar;
  double rAr = dot<double>(r, Ar);
  sol.residual_history.push_back(rhs_norm);
  for (std::size_t it = 0; it < opt.max_iter; ++it) {
    const double ApAp = dot<double>(Ap, Ap);
    if (ApAp == 0.0) break;
    const double alpha = rAr / ApAp;
    axpy(alpha, p, sol.x);
    axpy(-alpha, Ap, r);
    const double rn = norm2(r);
    sol.residual_history.push_back(rn);
    sol.iterations = it + 1;
    if (rn <= opt.rel_tol * rhs_norm) break;
    Ar = normal(r);
    const double rAr_new = dot<double>(r, Ar);
    const double beta = rAr_new / rAr;
    rAr = rAr_new;
    for (std::size_t i = 0; i < p.size(); ++i) {
      p[i] = r[i] + beta * p[i];
      Ap[i] = Ar[i] + beta * Ap[i];
    }
  }
  sol.relative_residual = norm2(rhs - normal(sol.x)) / rhs_norm;
  if (sol.relative_residual > opt.rel_tol && sol.residual_history.back() > opt.rel_tol * rhs_norm)
    fail(ErrorKind::ConvergenceFailure,
         "iteration cap reached with relative residual " + std::to_string(sol.relative_residual));
  return sol;
}

}  // namespace optreg
