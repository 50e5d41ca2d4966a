#pragma once

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <memory>
#include <span>

#include "optreg/core/matrix.hpp"

namespace optreg {

enum class TransformKind { dft, dct };

namespace detail {

struct FftwPlanDeleter {
  void operator()(fftw_plan_s* p) const { fftw_destroy_plan(p); }
};
using FftwPlan = std::unique_ptr<fftw_plan_s, FftwPlanDeleter>;

template <typename T>
struct FftwBuffer {
  explicit FftwBuffer(std::size_t n) : ptr(static_cast<T*>(fftw_malloc(sizeof(T) * n))) {
    if (!ptr) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(ptr); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  T* ptr;
};

}  // namespace detail

/// Unitary 2D transform Q* on a rows × cols grid stored column-major.
///
/// dft: Q*x = fft2(x)/√N.  dct: Q* is the orthonormal 2D DCT-II, so Q = Q*ᵀ is
/// the orthonormal DCT-III. Plans are built once; forward()/inverse() use
/// FFTW's new-array execute on private buffers and are safe to call
/// concurrently on one instance.
class GridTransform {
 public:
  GridTransform(TransformKind kind, std::size_t rows, std::size_t cols) : kind_(kind), rows_(rows), cols_(cols) {
    require(rows >= 1 && cols >= 1, ErrorKind::InvalidArgument, "transform grid must be non-empty");
    const int n0 = static_cast<int>(cols), n1 = static_cast<int>(rows);  // column-major = row-major (cols, rows)
    if (kind == TransformKind::dft) {
      detail::FftwBuffer<fftw_complex> in(size()), out(size());
      fwd_.reset(fftw_plan_dft_2d(n0, n1, in.ptr, out.ptr, FFTW_FORWARD, FFTW_ESTIMATE));
      inv_.reset(fftw_plan_dft_2d(n0, n1, in.ptr, out.ptr, FFTW_BACKWARD, FFTW_ESTIMATE));
    } else {
      detail::FftwBuffer<double> in(size()), out(size());
      fwd_.reset(fftw_plan_r2r_2d(n0, n1, in.ptr, out.ptr, FFTW_REDFT10, FFTW_REDFT10, FFTW_ESTIMATE));
      inv_.reset(fftw_plan_r2r_2d(n0, n1, in.ptr, out.ptr, FFTW_REDFT01, FFTW_REDFT01, FFTW_ESTIMATE));
    }
    require(fwd_ && inv_, ErrorKind::InvalidArgument, "FFTW planning failed");
  }

  TransformKind kind() const noexcept { return kind_; }
  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return rows_ * cols_; }

  /// Q* x for a real grid.
  CVector forward(std::span<const double> x) const {
    require(x.size() == size(), ErrorKind::InvalidArgument, "transform input size mismatch");
    CVector out(size());
    if (kind_ == TransformKind::dft) {
      detail::FftwBuffer<fftw_complex> in(size()), res(size());
      for (std::size_t i = 0; i < size(); ++i) {
        in.ptr[i][0] = x[i];
        in.ptr[i][1] = 0.0;
      }
      fftw_execute_dft(fwd_.get(), in.ptr, res.ptr);
      const double scale = 1.0 / std::sqrt(static_cast<double>(size()));
      for (std::size_t i = 0; i < size(); ++i) out[i] = {res.ptr[i][0] * scale, res.ptr[i][1] * scale};
    } else {
      detail::FftwBuffer<double> in(size()), res(size());
      std::copy(x.begin(), x.end(), in.ptr);
      fftw_execute_r2r(fwd_.get(), in.ptr, res.ptr);
      for (std::size_t c = 0; c < cols_; ++c)
        for (std::size_t r = 0; r < rows_; ++r) {
          const std::size_t i = r + c * rows_;
          out[i] = res.ptr[i] * dct_out_scale(r, rows_) * dct_out_scale(c, cols_);
        }
    }
    return out;
  }

  /// Q y. Returns the complex grid; callers decide how to treat the imaginary part.
  CVector inverse(std::span<const std::complex<double>> y) const {
    require(y.size() == size(), ErrorKind::InvalidArgument, "transform input size mismatch");
    CVector out(size());
    if (kind_ == TransformKind::dft) {
      detail::FftwBuffer<fftw_complex> in(size()), res(size());
      for (std::size_t i = 0; i < size(); ++i) {
        in.ptr[i][0] = y[i].real();
        in.ptr[i][1] = y[i].imag();
      }
      fftw_execute_dft(inv_.get(), in.ptr, res.ptr);
      const double scale = 1.0 / std::sqrt(static_cast<double>(size()));
      for (std::size_t i = 0; i < size(); ++i) out[i] = {res.ptr[i][0] * scale, res.ptr[i][1] * scale};
    } else {
      detail::FftwBuffer<double> re(size()), im(size()), res(size());
      bool has_imag = false;
      for (std::size_t c = 0; c < cols_; ++c)
        for (std::size_t r = 0; r < rows_; ++r) {
          const std::size_t i = r + c * rows_;
          const double w = dct_in_scale(r, rows_) * dct_in_scale(c, cols_);
          re.ptr[i] = y[i].real() * w;
          im.ptr[i] = y[i].imag() * w;
          has_imag = has_imag || y[i].imag() != 0.0;
        }
      fftw_execute_r2r(inv_.get(), re.ptr, res.ptr);
      for (std::size_t i = 0; i < size(); ++i) out[i] = res.ptr[i];
      if (has_imag) {
        fftw_execute_r2r(inv_.get(), im.ptr, res.ptr);
        for (std::size_t i = 0; i < size(); ++i) out[i].imag(res.ptr[i]);
      }
    }
    return out;
  }

 private:
  // FFTW's REDFT10 is 2Σ x_j cos(πk(j+½)/N); rescale to the orthonormal DCT-II.
  static double dct_out_scale(std::size_t k, std::size_t n) {
    return k == 0 ? std::sqrt(1.0 / (4.0 * n)) : std::sqrt(1.0 / (2.0 * n));
  }
  // REDFT01 is X_0 + 2Σ_{k≥1} X_k cos(πk(j+½)/N); prescale so it equals the orthonormal DCT-III.
  static double dct_in_scale(std::size_t k, std::size_t n) {
    return k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n) / 2.0;
  }

  TransformKind kind_;
  std::size_t rows_, cols_;
  detail::FftwPlan fwd_, inv_;
};

}  // namespace optreg
