#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "optreg/gsvd.hpp"
#include "test_util.hpp"

using namespace optreg;
using testutil::random_matrix;

namespace {

Matrix S_matrix(const GsvdFactors& f) {
  Matrix S(f.paired(), f.n);
  for (std::size_t i = 0; i < f.paired(); ++i) S(i, i) = f.s[i];
  return S;
}

void expect_invariants(const GsvdFactors& f, const Matrix& A, const Matrix& L, double tol = 1e-10) {
  ASSERT_EQ(f.c.size(), f.n);
  ASSERT_EQ(f.s.size(), f.paired());
  for (std::size_t i = 0; i < f.paired(); ++i) EXPECT_NEAR(f.c[i] * f.c[i] + f.s[i] * f.s[i], 1.0, tol);
  for (std::size_t i = f.paired(); i < f.n; ++i) EXPECT_EQ(f.c[i], 1.0);
  for (std::size_t i = 1; i < f.paired(); ++i) {
    EXPECT_GE(f.c[i - 1], f.c[i]);
    EXPECT_LE(f.s[i - 1], f.s[i]);
  }
  EXPECT_LE(frobenius_norm(A - f.P * diag(f.c) * f.Zinv), tol * frobenius_norm(A));
  EXPECT_LE(frobenius_norm(L - f.Pbar * S_matrix(f) * f.Zinv), tol * frobenius_norm(L));
  EXPECT_LE(frobenius_norm(f.Z * f.Zinv - Matrix::identity(f.n)), tol * f.n);
  EXPECT_LE(orthonormality_defect(f.P), tol);
  EXPECT_LE(orthonormality_defect(f.Pbar), tol);
}

}  // namespace

TEST(Gsvd, IdentityPairGivesEqualCosinesAndSines) {
  const Matrix I = Matrix::identity(4);
  const auto f = gsvd(I, I);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_NEAR(f.c[i], 1.0 / std::sqrt(2.0), 1e-14);
    EXPECT_NEAR(f.s[i], 1.0 / std::sqrt(2.0), 1e-14);
  }
  const auto t = generalized_singular_values(f);
  for (double v : t.t) EXPECT_NEAR(v, 1.0, 1e-13);
  EXPECT_TRUE(t.zero_s.empty());
  expect_invariants(f, I, I);
}

TEST(Gsvd, DiagonalPairClosedForm) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.1, 3.0);
  for (int trial = 0; trial < 20; ++trial) {
    Vector a(4), l(4);
    for (auto& v : a) v = u(gen);
    for (auto& v : l) v = u(gen);
    const auto f = gsvd(diag(a), diag(l));
    std::vector<std::pair<double, double>> expected;
    for (int i = 0; i < 4; ++i) {
      const double r = std::hypot(a[i], l[i]);
      expected.emplace_back(a[i] / r, l[i] / r);
    }
    std::sort(expected.rbegin(), expected.rend());
    for (int i = 0; i < 4; ++i) {
      EXPECT_NEAR(f.c[i], expected[i].first, 1e-12);
      EXPECT_NEAR(f.s[i], expected[i].second, 1e-12);
    }
  }
}

TEST(Gsvd, FirstDerivativeRegularizer) {
  std::mt19937_64 gen(7);
  const Matrix A = random_matrix(12, 8, gen);
  const Matrix L = testutil::first_derivative(8);
  expect_invariants(gsvd(A, L), A, L);
}

TEST(Gsvd, ShortRegularizerHasTrailingUnitCosines) {
  std::mt19937_64 gen(9);
  const Matrix A = random_matrix(10, 7, gen);
  for (const Matrix& L : {testutil::forward_difference(7), testutil::second_difference(7)}) {
    const auto f = gsvd(A, L);
    EXPECT_EQ(f.paired(), L.rows());
    expect_invariants(f, A, L);
    // trailing z_i span the null space of L
    for (std::size_t i = f.paired(); i < f.n; ++i) {
      const Vector z = f.Z.column(i);
      EXPECT_LE(norm2(matvec(L, z)), 1e-10 * norm2(z));
    }
  }
}

TEST(Gsvd, CsIdentityOnManyRandomPairs) {
  std::mt19937_64 gen(13);
  for (std::size_t n : {4u, 8u, 16u, 32u}) {
    for (int trial = 0; trial < 100; ++trial) {
      const Matrix A = random_matrix(n + 2, n, gen);
      const Matrix L = random_matrix(n, n, gen);
      const auto f = gsvd(A, L);
      double defect = 0.0;
      for (std::size_t i = 0; i < f.paired(); ++i) defect = std::max(defect, std::abs(f.c[i] * f.c[i] + f.s[i] * f.s[i] - 1));
      ASSERT_LE(defect, 1e-10) << n;
    }
  }
}

TEST(Gsvd, IdentityRegularizerMatchesSvd) {
  std::mt19937_64 gen(17);
  const Matrix A = random_matrix(14, 9, gen);
  const auto f = gsvd(A, Matrix::identity(9));
  const auto sv = svd_thin(A);
  const auto t = generalized_singular_values(f);
  for (std::size_t i = 0; i < 9; ++i) EXPECT_NEAR(t.t[i], sv.sigma[i], 1e-8 * sv.sigma[0]);
}

TEST(Gsvd, Deterministic) {
  std::mt19937_64 gen(19);
  const Matrix A = random_matrix(9, 6, gen);
  const Matrix L = testutil::first_derivative(6);
  const auto f = gsvd(A, L), g = gsvd(A, L);
  EXPECT_EQ(f.P, g.P);
  EXPECT_EQ(f.Z, g.Z);
  EXPECT_EQ(f.c, g.c);
  EXPECT_EQ(f.s, g.s);
}

TEST(Gsvd, ExtremePairFlagsZeroSine) {
  GsvdFactors f;
  f.n = f.p = 2;
  f.c = {1.0, 0.0};
  f.s = {0.0, 1.0};
  const auto t = generalized_singular_values(f);
  ASSERT_EQ(t.zero_s.size(), 1u);
  EXPECT_EQ(t.zero_s[0], 0u);
  EXPECT_EQ(t.t[0], 0.0);
  EXPECT_EQ(t.t[1], 0.0);
}

TEST(Gsvd, GeneralizedValuesNonIncreasing) {
  std::mt19937_64 gen(23);
  const Matrix A = random_matrix(20, 12, gen);
  const auto t = generalized_singular_values(gsvd(A, testutil::first_derivative(12)));
  EXPECT_TRUE(std::is_sorted(t.t.rbegin(), t.t.rend()));
}

TEST(Gsvd, RankDeficientStackThrows) {
  Matrix A(4, 3), L(2, 3);
  A(0, 0) = 1.0;
  L(0, 1) = 1.0;
  try {
    gsvd(A, L);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::RankDeficient);
  }
}

TEST(SvdBasis, PacksSingularValues) {
  std::mt19937_64 gen(29);
  const Matrix A = random_matrix(8, 5, gen);
  const auto f = svd_basis(A);
  EXPECT_EQ(f.tag, BasisTag::svd);
  EXPECT_LE(frobenius_norm(A - f.P * diag(f.c) * f.Zinv), 1e-12 * frobenius_norm(A));
  EXPECT_EQ(f.s, Vector(5, 1.0));
}
