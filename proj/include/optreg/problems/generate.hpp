#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "optreg/learn/training_set.hpp"
#include "optreg/problems/rng.hpp"
#include "optreg/structured/surrogate.hpp"

namespace optreg {

enum class ProblemKind { deconv1d, deblur2d };

inline const char* to_string(ProblemKind k) { return k == ProblemKind::deconv1d ? "deconv1d" : "deblur2d"; }

struct PsfSpec {
  std::string kind = "gaussian";  // "gaussian" or "file"
  double variance = 1.0;
  std::string file;
};

struct ProblemSpec {
  ProblemKind kind = ProblemKind::deconv1d;
  std::size_t rows = 256, cols = 1;  // deconv1d: rows = n, cols = 1
  PsfSpec psf;
  Boundary bc = Boundary::zero;
  std::string regularizer = "first_derivative";  // deconv1d only
  std::vector<std::string> stencils;             // deblur2d only
  double noise_lo = 0.0, noise_hi = 0.0;
  std::uint64_t seed = 0;
  std::string phantom = "piecewise";  // builtin generator when sources is empty
  std::vector<std::string> sources;   // PGM/CSV images
  bool augment = false;               // add flips/rotations of each source image

  std::size_t n() const noexcept { return rows * cols; }

  void validate() const {
    require(rows > 0 && cols > 0, ErrorKind::ConfigError, "shape: dimensions must be positive");
    require(noise_lo >= 0.0 && noise_lo <= noise_hi && noise_hi < 1.0, ErrorKind::ConfigError,
            "noise_range: need 0 <= lo <= hi < 1");
    require(psf.kind == "gaussian" || psf.kind == "file", ErrorKind::ConfigError,
            "psf.kind: expected 'gaussian' or 'file'");
    if (psf.kind == "gaussian")
      require(psf.variance > 0.0, ErrorKind::ConfigError, "psf.variance: must be positive");
    else
      require(!psf.file.empty(), ErrorKind::ConfigError, "psf.file: required when psf.kind is 'file'");
    if (kind == ProblemKind::deconv1d) {
      require(cols == 1, ErrorKind::ConfigError, "shape: deconv1d takes a single length");
      require(bc == Boundary::zero, ErrorKind::ConfigError, "bc: deconv1d uses zero boundary conditions");
      require(regularizer == "identity" || regularizer == "first_derivative" || regularizer == "second_derivative",
              ErrorKind::ConfigError, "regularizer: expected identity, first_derivative or second_derivative");
      require(stencils.empty(), ErrorKind::ConfigError, "stencils: only valid for deblur2d");
      require(phantom == "piecewise", ErrorKind::ConfigError, "phantom: deconv1d supports 'piecewise'");
    } else {
      require(!stencils.empty(), ErrorKind::ConfigError, "stencils: deblur2d needs at least one stencil");
      for (const auto& s : stencils)
        require(s == "l1" || s == "l2" || s == "l3" || s == "l4", ErrorKind::ConfigError,
                "stencils: unknown stencil '" + s + "'");
      require(phantom == "blobs", ErrorKind::ConfigError, "phantom: deblur2d supports 'blobs'");
    }
  }
};

// ---------------------------------------------------------------------------
// Operators

/// 1D regularization matrices. first_derivative is (n+1)×n with the boundary
/// rows kept, so it has full column rank.
inline Matrix regularization_matrix(const std::string& name, std::size_t n) {
  if (name == "identity") {
    Matrix L(n, n);
    for (std::size_t i = 0; i < n; ++i) L(i, i) = 1.0;
    return L;
  }
  if (name == "first_derivative") {
    Matrix L(n + 1, n);
    for (std::size_t i = 0; i < n; ++i) {
      L(i, i) = 1.0;
      L(i + 1, i) = -1.0;
    }
    return L;
  }
  if (name == "second_derivative") {
    require(n >= 3, ErrorKind::InvalidArgument, "second_derivative needs n >= 3");
    Matrix L(n - 2, n);
    for (std::size_t i = 0; i + 2 < n; ++i) {
      L(i, i) = 1.0;
      L(i, i + 1) = -2.0;
      L(i, i + 2) = 1.0;
    }
    return L;
  }
  fail(ErrorKind::InvalidArgument, "unknown regularizer '" + name + "'");
}

/// Dense Toeplitz convolution with zero boundaries: A(i,j) = k[center + i − j].
inline Matrix toeplitz_convolution(std::span<const double> kernel, std::size_t center, std::size_t n) {
  Matrix A(n, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) {
      const std::ptrdiff_t t = static_cast<std::ptrdiff_t>(center + i) - static_cast<std::ptrdiff_t>(j);
      if (t >= 0 && t < static_cast<std::ptrdiff_t>(kernel.size())) A(i, j) = kernel[static_cast<std::size_t>(t)];
    }
  return A;
}

/// Largest odd size not exceeding n: Gaussian PSFs need a symmetric support
/// for the reflexive/DCT path.
inline std::size_t odd_support(std::size_t n) { return n % 2 == 1 ? n : n - 1; }

/// Blur operator of the spec, both as a BlurProblem (2D) and a dense matrix
/// (1D). The loader resolves psf.file.
struct ForwardModel {
  ProblemSpec spec;
  Matrix A;         // deconv1d
  Matrix L;         // deconv1d
  BlurProblem blur; // deblur2d

  Vector apply(std::span<const double> x) const {
    if (spec.kind == ProblemKind::deconv1d) return matvec(A, x);
    return ConvolutionOperator(blur.psf, blur.center, blur.bc, blur.rows, blur.cols).apply(x);
  }
};

using ImageLoader = std::function<Matrix(const std::string&)>;

inline ForwardModel forward_model(const ProblemSpec& spec, const ImageLoader& load = {}) {
  spec.validate();
  ForwardModel fm;
  fm.spec = spec;
  Matrix psf;
  if (spec.psf.kind == "file") {
    require(static_cast<bool>(load), ErrorKind::ConfigError, "psf.file given but no image loader");
    psf = load(spec.psf.file);
    double total = 0.0;
    for (double v : psf.data()) total += v;
    require(total > 0.0, ErrorKind::SourceError, spec.psf.file + ": PSF has zero sum");
    for (double& v : psf.data()) v /= total;
  }
  if (spec.kind == ProblemKind::deconv1d) {
    const std::size_t n = spec.rows;
    if (psf.empty()) psf = gaussian_psf(2 * n - 1, 1, spec.psf.variance);
    require(psf.cols() == 1 || psf.rows() == 1, ErrorKind::SourceError, spec.psf.file + ": 1D PSF must be a vector");
    const std::size_t len = psf.size();
    fm.A = toeplitz_convolution(psf.data(), (len + 1) / 2 - 1, n);
    fm.L = regularization_matrix(spec.regularizer, n);
    return fm;
  }
  if (psf.empty()) psf = gaussian_psf(odd_support(spec.rows), odd_support(spec.cols), spec.psf.variance);
  fm.blur.psf = psf;
  fm.blur.center = default_center(psf.rows(), psf.cols());
  fm.blur.bc = spec.bc;
  fm.blur.rows = spec.rows;
  fm.blur.cols = spec.cols;
  for (const auto& s : spec.stencils) fm.blur.stencils.push_back(StencilBank::by_name(s));
  return fm;
}

// ---------------------------------------------------------------------------
// Builtin phantoms

/// Piecewise-smooth 1D signal: zero near both ends, a raised interior made of
/// 3–6 segments, each a random quadratic, with jumps between segments.
inline Vector piecewise_phantom(std::size_t n, SplitMix64& rng) {
  Vector x(n, 0.0);
  const double dn = static_cast<double>(n);
  const auto a = static_cast<std::size_t>(rng.uniform(0.05, 0.15) * dn);
  const auto b = static_cast<std::size_t>(rng.uniform(0.85, 0.95) * dn);
  const int segments = 3 + static_cast<int>(rng.uniform() * 4.0);
  std::vector<double> cuts{static_cast<double>(a), static_cast<double>(b)};
  for (int s = 1; s < segments; ++s) cuts.push_back(rng.uniform(static_cast<double>(a), static_cast<double>(b)));
  std::sort(cuts.begin(), cuts.end());
  const double base = rng.uniform(0.6, 1.0);
  for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
    const double level = base + rng.uniform(-0.3, 0.3);
    const double slope = rng.uniform(-0.5, 0.5), curve = rng.uniform(-0.5, 0.5);
    const double lo = cuts[s], hi = cuts[s + 1], w = std::max(hi - lo, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i);
      if (t < lo || t >= hi) continue;
      const double u = (t - lo) / w - 0.5;
      x[i] = level + slope * u + curve * (u * u - 1.0 / 12.0);
    }
  }
  return x;
}

/// Smooth 2D scene: a background level plus 3–6 Gaussian bumps.
inline Vector blob_phantom(std::size_t rows, std::size_t cols, SplitMix64& rng) {
  Vector x(rows * cols, rng.uniform(0.2, 0.4));
  const int bumps = 3 + static_cast<int>(rng.uniform() * 4.0);
  for (int k = 0; k < bumps; ++k) {
    const double r0 = rng.uniform(0.0, static_cast<double>(rows - 1));
    const double c0 = rng.uniform(0.0, static_cast<double>(cols - 1));
    const double sr = rng.uniform(1.2, 3.0), sc = rng.uniform(1.2, 3.0);
    const double amp = rng.uniform(0.3, 1.0);
    for (std::size_t j = 0; j < cols; ++j)
      for (std::size_t i = 0; i < rows; ++i) {
        const double dr = (static_cast<double>(i) - r0) / sr, dc = (static_cast<double>(j) - c0) / sc;
        x[i + j * rows] += amp * std::exp(-0.5 * (dr * dr + dc * dc));
      }
  }
  return x;
}

// ---------------------------------------------------------------------------
// Datasets

enum class DatasetRole { training, validation };

inline const char* to_string(DatasetRole r) { return r == DatasetRole::training ? "training" : "validation"; }

struct DatasetItem {
  Vector x, b;
  double noise_level = 0.0;
};

struct Dataset {
  ProblemSpec spec;
  DatasetRole role = DatasetRole::training;
  std::vector<DatasetItem> items;

  std::size_t size() const noexcept { return items.size(); }

  TrainingSet training_set() const {
    TrainingSet ts;
    for (const auto& it : items) ts.add(it.b, it.x);
    return ts;
  }
};

/// Signals taken from source images: for deconv1d every column of every
/// image (images must have spec.rows rows); for deblur2d the images themselves.
inline std::vector<Vector> source_signals(const ProblemSpec& spec, const ImageLoader& load) {
  std::vector<Vector> pool;
  for (const auto& path : spec.sources) {
    const Matrix img = load(path);
    if (spec.kind == ProblemKind::deconv1d) {
      require(img.rows() == spec.rows, ErrorKind::SourceError,
              path + ": image has " + std::to_string(img.rows()) + " rows, expected " + std::to_string(spec.rows));
      for (std::size_t j = 0; j < img.cols(); ++j) pool.push_back(img.column(j));
      continue;
    }
    require(img.rows() == spec.rows && img.cols() == spec.cols, ErrorKind::SourceError,
            path + ": image is " + std::to_string(img.rows()) + "x" + std::to_string(img.cols()) + ", expected " +
                std::to_string(spec.rows) + "x" + std::to_string(spec.cols));
    std::vector<Matrix> variants{img};
    if (spec.augment) {
      Matrix ud(img.rows(), img.cols()), lr(img.rows(), img.cols()), rot(img.rows(), img.cols());
      for (std::size_t j = 0; j < img.cols(); ++j)
        for (std::size_t i = 0; i < img.rows(); ++i) {
          ud(i, j) = img(img.rows() - 1 - i, j);
          lr(i, j) = img(i, img.cols() - 1 - j);
          rot(i, j) = img(img.rows() - 1 - i, img.cols() - 1 - j);
        }
      variants.insert(variants.end(), {ud, lr, rot});
      if (img.rows() == img.cols()) {
        const Matrix t = img.transpose();
        variants.push_back(t);
        Matrix t2(t.rows(), t.cols());
        for (std::size_t j = 0; j < t.cols(); ++j)
          for (std::size_t i = 0; i < t.rows(); ++i) t2(i, j) = t(t.rows() - 1 - i, t.cols() - 1 - j);
        variants.push_back(t2);
      }
    }
    for (const Matrix& v : variants) pool.emplace_back(v.data().begin(), v.data().end());
  }
  return pool;
}

/// Adds white Gaussian noise scaled so that ‖η‖²/‖Ax‖² equals a uniform draw
/// from the spec's noise range.
inline DatasetItem make_item(const ForwardModel& fm, Vector x, SplitMix64& rng) {
  DatasetItem it;
  const Vector ax = fm.apply(x);
  const double level = rng.uniform(fm.spec.noise_lo, fm.spec.noise_hi);
  it.b = ax;
  if (level > 0.0) {
    Vector eta(ax.size());
    for (double& v : eta) v = rng.normal();
    const double scale = std::sqrt(level * norm2_sq(ax) / norm2_sq(eta));
    for (std::size_t i = 0; i < eta.size(); ++i) it.b[i] += scale * eta[i];
  }
  it.noise_level = level;
  it.x = std::move(x);
  return it;
}

/// K items of the given role. Each role draws from its own stream, so the
/// training and validation sets do not depend on each other's sizes.
inline Dataset generate_dataset(const ProblemSpec& spec, std::size_t count, DatasetRole role,
                                const ImageLoader& load = {}) {
  require(count >= 1, ErrorKind::ConfigError, "dataset size must be at least 1");
  const ForwardModel fm = forward_model(spec, load);
  Dataset ds;
  ds.spec = spec;
  ds.role = role;
  SplitMix64 root(spec.seed);
  SplitMix64 rng = root.split();
  if (role == DatasetRole::validation) rng = root.split();

  std::vector<Vector> pool;
  if (!spec.sources.empty()) {
    require(static_cast<bool>(load), ErrorKind::ConfigError, "sources given but no image loader");
    pool = source_signals(spec, load);
    require(!pool.empty(), ErrorKind::SourceError, "sources produced no signals");
  }
  for (std::size_t k = 0; k < count; ++k) {
    Vector x;
    if (!pool.empty()) {
      // Training takes the pool front to back, validation back to front.
      const std::size_t idx = role == DatasetRole::training ? k % pool.size() : pool.size() - 1 - k % pool.size();
      x = pool[idx];
    } else if (spec.kind == ProblemKind::deconv1d) {
      x = piecewise_phantom(spec.rows, rng);
    } else {
      x = blob_phantom(spec.rows, spec.cols, rng);
    }
    ds.items.push_back(make_item(fm, std::move(x), rng));
  }
  return ds;
}

}  // namespace optreg
