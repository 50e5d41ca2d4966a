#pragma once

#include <Eigen/Dense>
#include <random>

#include "optreg/core/matrix.hpp"

namespace testutil {

using optreg::Matrix;
using optreg::Vector;

inline Matrix random_matrix(std::size_t m, std::size_t n, std::mt19937_64& gen) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix a(m, n);
  for (double& x : a.data()) x = dist(gen);
  return a;
}

inline Vector random_vector(std::size_t n, std::mt19937_64& gen) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Vector v(n);
  for (double& x : v) x = dist(gen);
  return v;
}

inline Eigen::MatrixXd to_eigen(const Matrix& a) {
  Eigen::MatrixXd e(a.rows(), a.cols());
  for (std::size_t j = 0; j < a.cols(); ++j)
    for (std::size_t i = 0; i < a.rows(); ++i) e(i, j) = a(i, j);
  return e;
}

inline Eigen::VectorXd to_eigen(const Vector& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline Vector from_eigen(const Eigen::VectorXd& v) { return Vector(v.data(), v.data() + v.size()); }

/// (n+1)×n first-difference matrix with 1 on the diagonal and −1 below it.
inline Matrix first_derivative(std::size_t n) {
  Matrix L(n + 1, n);
  for (std::size_t i = 0; i < n; ++i) {
    L(i, i) = 1.0;
    L(i + 1, i) = -1.0;
  }
  return L;
}

/// (n−1)×n forward difference (nontrivial null space: constants).
inline Matrix forward_difference(std::size_t n) {
  Matrix L(n - 1, n);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    L(i, i) = -1.0;
    L(i, i + 1) = 1.0;
  }
  return L;
}

/// (n−2)×n second difference.
inline Matrix second_difference(std::size_t n) {
  Matrix L(n - 2, n);
  for (std::size_t i = 0; i + 2 < n; ++i) {
    L(i, i) = 1.0;
    L(i, i + 1) = -2.0;
    L(i, i + 2) = 1.0;
  }
  return L;
}

/// Dense general-form Tikhonov oracle: (AᵀA + λ²LᵀL)x = Aᵀb via LDLᵀ.
inline Vector dense_tikhonov(const Matrix& A, const Matrix& L, const Vector& b, double lambda) {
  const Eigen::MatrixXd a = to_eigen(A), l = to_eigen(L);
  const Eigen::MatrixXd normal = a.transpose() * a + lambda * lambda * l.transpose() * l;
  return from_eigen(normal.ldlt().solve(a.transpose() * to_eigen(b)));
}

inline double rel_diff(const Vector& a, const Vector& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num / std::max(den, 1e-300));
}

}  // namespace testutil
