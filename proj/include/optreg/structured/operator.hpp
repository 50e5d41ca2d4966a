#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "optreg/core/matrix.hpp"
#include "optreg/structured/transform.hpp"

namespace optreg {

enum class Boundary { zero, periodic, reflexive };

inline const char* to_string(Boundary b) {
  switch (b) {
    case Boundary::zero: return "zero";
    case Boundary::periodic: return "periodic";
    case Boundary::reflexive: return "reflexive";
  }
  return "?";
}

inline Boundary boundary_from_string(const std::string& s) {
  if (s == "zero") return Boundary::zero;
  if (s == "periodic") return Boundary::periodic;
  if (s == "reflexive") return Boundary::reflexive;
  fail(ErrorKind::InvalidArgument, "unknown boundary condition '" + s + "'");
}

struct Index2 {
  std::size_t row = 0, col = 0;
  bool operator==(const Index2&) const = default;
};

/// One-based center (⌈rows/2⌉, ⌈cols/2⌉), returned zero-based.
inline Index2 default_center(std::size_t rows, std::size_t cols) { return {(rows + 1) / 2 - 1, (cols + 1) / 2 - 1}; }

/// Gaussian PSF with the given variance, sampled on a rows × cols grid around
/// the default center and normalized to unit sum.
inline Matrix gaussian_psf(std::size_t rows, std::size_t cols, double variance) {
  require(variance > 0.0, ErrorKind::InvalidArgument, "PSF variance must be positive");
  const Index2 ctr = default_center(rows, cols);
  Matrix psf(rows, cols);
  double total = 0.0;
  for (std::size_t j = 0; j < cols; ++j)
    for (std::size_t i = 0; i < rows; ++i) {
      const double di = static_cast<double>(i) - static_cast<double>(ctr.row);
      const double dj = static_cast<double>(j) - static_cast<double>(ctr.col);
      psf(i, j) = std::exp(-(di * di + dj * dj) / (2.0 * variance));
      total += psf(i, j);
    }
  for (double& v : psf.data()) v /= total;
  return psf;
}

/// Regularization stencils: identity, horizontal and vertical second
/// differences, and the 5-point Laplacian.
struct StencilBank {
  static Matrix l1() { return Matrix{{1.0}}; }
  static Matrix l2() { return Matrix{{0, 0, 0}, {1, -2, 1}, {0, 0, 0}}; }
  static Matrix l3() { return Matrix{{0, 1, 0}, {0, -2, 0}, {0, 1, 0}}; }
  static Matrix l4() { return Matrix{{0, 1, 0}, {1, -4, 1}, {0, 1, 0}}; }

  static Matrix by_name(const std::string& name) {
    if (name == "l1") return l1();
    if (name == "l2") return l2();
    if (name == "l3") return l3();
    if (name == "l4") return l4();
    fail(ErrorKind::InvalidArgument, "unknown stencil '" + name + "'");
  }
};

/// Matrix-free 2D convolution y = A x on a rows × cols grid (column-major
/// vectorization) with the given boundary condition.
class ConvolutionOperator {
 public:
  ConvolutionOperator() = default;

  ConvolutionOperator(Matrix kernel, Index2 center, Boundary bc, std::size_t rows, std::size_t cols)
      : kernel_(std::move(kernel)), center_(center), bc_(bc), rows_(rows), cols_(cols) {
    require(center_.row < kernel_.rows() && center_.col < kernel_.cols(), ErrorKind::InvalidArgument,
            "PSF center outside the PSF");
    if (bc_ == Boundary::periodic)
      require(kernel_.rows() <= rows_ && kernel_.cols() <= cols_, ErrorKind::InvalidArgument,
              "PSF does not fit in the grid");
    if (bc_ == Boundary::reflexive) restrict_to_symmetric_window();
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return rows_ * cols_; }
  Boundary boundary() const noexcept { return bc_; }
  const Matrix& kernel() const noexcept { return kernel_; }
  Index2 center() const noexcept { return center_; }

  Vector apply(std::span<const double> x) const { return convolve(x, false); }
  Vector apply_transpose(std::span<const double> x) const { return convolve(x, true); }

  /// Dense assembly (column j = A e_j); intended for small grids and tests.
  Matrix dense() const {
    Matrix a(size(), size());
    Vector e(size(), 0.0);
    for (std::size_t j = 0; j < size(); ++j) {
      e[j] = 1.0;
      const Vector col = apply(e);
      std::copy(col.begin(), col.end(), a.col(j).begin());
      e[j] = 0.0;
    }
    return a;
  }

 private:
  // Reflexive BC are only diagonalized by the DCT for doubly symmetric kernels.
  // Keep the largest window symmetric about the center; everything outside it
  // must be negligible.
  void restrict_to_symmetric_window() {
    const std::size_t ra = std::min(center_.row, kernel_.rows() - 1 - center_.row);
    const std::size_t rb = std::min(center_.col, kernel_.cols() - 1 - center_.col);
    double peak = 0.0;
    for (double v : kernel_.data()) peak = std::max(peak, std::abs(v));
    const double tol = 1e-10 * peak;
    for (std::size_t j = 0; j < kernel_.cols(); ++j)
      for (std::size_t i = 0; i < kernel_.rows(); ++i) {
        const bool inside = i + ra >= center_.row && i <= center_.row + ra && j + rb >= center_.col &&
                            j <= center_.col + rb;
        if (!inside && std::abs(kernel_(i, j)) > tol)
          fail(ErrorKind::SymmetryViolation, "PSF has significant mass outside its symmetric window");
      }
    Matrix w(2 * ra + 1, 2 * rb + 1);
    for (std::size_t j = 0; j < w.cols(); ++j)
      for (std::size_t i = 0; i < w.rows(); ++i) w(i, j) = kernel_(center_.row - ra + i, center_.col - rb + j);
    for (std::size_t j = 0; j < w.cols(); ++j)
      for (std::size_t i = 0; i < w.rows(); ++i) {
        const double v = w(i, j);
        if (std::abs(v - w(w.rows() - 1 - i, j)) > tol || std::abs(v - w(i, w.cols() - 1 - j)) > tol)
          fail(ErrorKind::SymmetryViolation, "PSF is not doubly symmetric about its center");
      }
    require(ra < rows_ + 1 && rb < cols_ + 1, ErrorKind::InvalidArgument, "PSF window exceeds the grid");
    kernel_ = std::move(w);
    center_ = {ra, rb};
  }

  // Map an out-of-range index back into [0, n); returns false for zero BC.
  bool wrap(std::ptrdiff_t& i, std::ptrdiff_t n) const {
    if (i >= 0 && i < n) return true;
    switch (bc_) {
      case Boundary::zero: return false;
      case Boundary::periodic: i = ((i % n) + n) % n; return true;
      case Boundary::reflexive:
        if (i < 0) i = -i - 1;
        if (i >= n) i = 2 * n - 1 - i;
        return i >= 0 && i < n;
    }
    return false;
  }

  // y(r,c) = Σ_{a,b} k(a,b) x(r − (a − cr), c − (b − cc)); the transpose
  // scatters instead of gathers.
  Vector convolve(std::span<const double> x, bool transpose) const {
    require(x.size() == size(), ErrorKind::InvalidArgument, "operator input size mismatch");
    Vector y(size(), 0.0);
    const auto R = static_cast<std::ptrdiff_t>(rows_), C = static_cast<std::ptrdiff_t>(cols_);
    const auto cr = static_cast<std::ptrdiff_t>(center_.row), cc = static_cast<std::ptrdiff_t>(center_.col);
    for (std::size_t b = 0; b < kernel_.cols(); ++b)
      for (std::size_t a = 0; a < kernel_.rows(); ++a) {
        const double k = kernel_(a, b);
        if (k == 0.0) continue;
        const std::ptrdiff_t da = static_cast<std::ptrdiff_t>(a) - cr, db = static_cast<std::ptrdiff_t>(b) - cc;
        for (std::ptrdiff_t c = 0; c < C; ++c) {
          std::ptrdiff_t sc = c - db;
          if (!wrap(sc, C)) continue;
          for (std::ptrdiff_t r = 0; r < R; ++r) {
            std::ptrdiff_t sr = r - da;
            if (!wrap(sr, R)) continue;
            const std::size_t out = static_cast<std::size_t>(r + c * R);
            const std::size_t in = static_cast<std::size_t>(sr + sc * R);
            if (transpose)
              y[in] += k * x[out];
            else
              y[out] += k * x[in];
          }
        }
      }
    return y;
  }

  Matrix kernel_;
  Index2 center_;
  Boundary bc_ = Boundary::zero;
  std::size_t rows_ = 0, cols_ = 0;
};

/// Transform-diagonalized family A = Q·diag(c)·Q*, L_j = Q·diag(s_j)·Q*.
struct SpectralOperator {
  std::shared_ptr<const GridTransform> transform;
  Boundary bc = Boundary::periodic;
  std::size_t rows = 0, cols = 0;
  CVector c_spectrum;
  std::vector<CVector> s_spectra;
  ConvolutionOperator blur;
  std::vector<ConvolutionOperator> regularizers;
  std::vector<std::size_t> ratio_fallback;  // indices where the first-column ratio was undefined

  std::size_t n() const noexcept { return rows * cols; }
  std::size_t J() const noexcept { return s_spectra.size(); }

  /// "dft2", "dct1", ...
  std::string transform_name() const {
    const char* base = transform->kind() == TransformKind::dft ? "dft" : "dct";
    return std::string(base) + ((rows == 1 || cols == 1) ? "1" : "2");
  }
};

namespace detail {

// Spectrum of a convolution operator on the transform's grid.
inline CVector operator_spectrum(const ConvolutionOperator& op, const GridTransform& xf,
                                 std::vector<std::size_t>* fallback) {
  const std::size_t n = op.size();
  Vector e1(n, 0.0);
  e1[0] = 1.0;
  const Vector col = op.apply(e1);  // first column A e₁
  CVector num = xf.forward(col);
  if (xf.kind() == TransformKind::dft) {
    // Circulant: eigenvalues are the unnormalized DFT of the first column.
    const double scale = std::sqrt(static_cast<double>(n));
    for (auto& v : num) v *= scale;
    return num;
  }
  const CVector den = xf.forward(e1);
  CVector spec(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(den[i]) > 1e-14) {
      spec[i] = std::complex<double>(num[i].real() / den[i].real(), 0.0);
    } else {
      // Rayleigh quotient q_iᵀ A q_i on the basis vector itself.
      CVector unit(n, 0.0);
      unit[i] = 1.0;
      const CVector qi = xf.inverse(unit);
      Vector q(n);
      for (std::size_t k = 0; k < n; ++k) q[k] = qi[k].real();
      spec[i] = dot<double>(q, op.apply(q));
      if (fallback) fallback->push_back(i);
    }
  }
  return spec;
}

}  // namespace detail

/// Build the spectral representation of a blur and its regularization
/// stencils. Periodic BC use the DFT; reflexive BC use the DCT and require
/// doubly symmetric kernels.
inline SpectralOperator build_spectral_operator(const Matrix& psf, Index2 psf_center, Boundary bc, std::size_t rows,
                                                std::size_t cols, const std::vector<Matrix>& stencils) {
  require(bc == Boundary::periodic || bc == Boundary::reflexive, ErrorKind::InvalidArgument,
          "spectral operators need periodic or reflexive boundary conditions");
  SpectralOperator op;
  op.bc = bc;
  op.rows = rows;
  op.cols = cols;
  op.transform = std::make_shared<const GridTransform>(
      bc == Boundary::periodic ? TransformKind::dft : TransformKind::dct, rows, cols);
  op.blur = ConvolutionOperator(psf, psf_center, bc, rows, cols);
  op.c_spectrum = detail::operator_spectrum(op.blur, *op.transform, &op.ratio_fallback);
  for (const Matrix& st : stencils) {
    op.regularizers.emplace_back(st, default_center(st.rows(), st.cols()), bc, rows, cols);
    op.s_spectra.push_back(detail::operator_spectrum(op.regularizers.back(), *op.transform, &op.ratio_fallback));
  }
  return op;
}

}  // namespace optreg
