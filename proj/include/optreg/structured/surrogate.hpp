#pragma once

#include <memory>
#include <vector>

#include "optreg/learn/multi.hpp"
#include "optreg/structured/cg.hpp"

namespace optreg {

/// A deblurring problem as given: PSF, boundary condition, grid and stencils.
struct BlurProblem {
  Matrix psf;
  Index2 center;
  Boundary bc = Boundary::reflexive;
  std::size_t rows = 0, cols = 0;
  std::vector<Matrix> stencils;

  std::shared_ptr<const SpectralOperator> spectral(Boundary as) const {
    return std::make_shared<const SpectralOperator>(build_spectral_operator(psf, center, as, rows, cols, stencils));
  }
};

/// Learns λ on the periodic (DFT-diagonalized) stand-in of the problem.
inline TrainResult surrogate_parameters(const BlurProblem& problem, const TrainingSet& ts, const ErrorMeasure& rho,
                                        Vector init = {}) {
  const SpectralRiskModel model(problem.spectral(Boundary::periodic), ts, rho);
  return train_multi(model, std::move(init));
}

/// Solves the problem with its own boundary condition by conjugate residual.
inline Vector solve_original(const BlurProblem& problem, std::span<const double> b, std::span<const double> lambda,
                             const CgOptions& opt = {}) {
  const ConvolutionOperator A(problem.psf, problem.center, problem.bc, problem.rows, problem.cols);
  std::vector<MatrixFreeOperator> L;
  for (const Matrix& s : problem.stencils)
    L.push_back(MatrixFreeOperator::from(
        ConvolutionOperator(s, default_center(s.rows(), s.cols()), problem.bc, problem.rows, problem.cols)));
  return solve_multi_tikhonov_general(MatrixFreeOperator::from(A), L, b, lambda, opt).x;
}

}  // namespace optreg
