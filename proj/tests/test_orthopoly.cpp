#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "scop/orthopoly.hpp"
#include "test_support.hpp"

using namespace scop;
using scop::testing::chebyshev2;
using scop::testing::rel;

TEST(StieltjesProcedure, ChebyshevSecondKindCoefficients) {
  const auto tab = stieltjes_procedure(chebyshev2(), 0.0, 10);
  for (int n = 1; n <= 10; ++n) EXPECT_NEAR(tab.a[n], 0.5, 1e-10);
  for (int n = 0; n < 10; ++n) EXPECT_LE(std::abs(tab.b[n]), 1e-12);
  // mu_0 = pi/2
  EXPECT_NEAR(tab.gamma[0], std::sqrt(2.0 / std::numbers::pi), 1e-14);
}

TEST(StieltjesProcedure, JacobiClosedForm) {
  // alpha=(1.5, 0.5): (1+x)^1.5 (1-x)^0.5, i.e. Jacobi a=0.5, b=1.5
  const auto w = make_weight({1.5, 0.5}, {1.0}, EndpointTrajectory::fixed(std::vector<double>{-1.0, 1.0}));
  const scop::testing::JacobiClosedForm ref{0.5, 1.5};
  const auto tab = stieltjes_procedure(w, 0.0, 12);
  for (int n = 0; n < 12; ++n) EXPECT_LE(std::abs(tab.b[n] - ref.diag(n)), 1e-9 * std::max(1.0, std::abs(ref.diag(n))));
  for (int n = 1; n <= 12; ++n) EXPECT_LE(rel(tab.a[n], ref.offdiag(n)), 1e-9);
}

TEST(StieltjesProcedure, TableInvariants) {
  const auto w = make_weight({0.5, 0.3, 1.7}, {1.0, 2.0}, EndpointTrajectory::fixed(std::vector<double>{-1.0, 0.2, 1.0}));
  const auto tab = stieltjes_procedure(w, 0.0, 15);
  for (int n = 1; n <= 15; ++n) {
    EXPECT_GT(tab.a[n], 0.0);
    EXPECT_GT(tab.gamma[n], 0.0);
    EXPECT_LE(rel(tab.gamma[n - 1], tab.a[n] * tab.gamma[n]), 1e-12);
  }
}

TEST(StieltjesProcedure, SymmetricWeightHasVanishingB) {
  for (double c : {0.0, 0.75}) {
    const auto w = make_weight({0.7, 1.3, 0.7}, {2.0, 2.0},
                               EndpointTrajectory::fixed(std::vector<double>{c - 1.0, c, c + 1.0}));
    const auto tab = stieltjes_procedure(w, 0.0, 12);
    for (int n = 0; n < 12; ++n) EXPECT_LE(std::abs(tab.b[n] - c), 1e-10);
  }
}

TEST(StieltjesProcedure, LostOrthogonalityOnExhaustedMeasure) {
  // two quadrature points cannot carry a third orthonormal polynomial
  try {
    stieltjes_procedure(chebyshev2(), 0.0, 3, 2);
    FAIL() << "expected LostOrthogonality";
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::lost_orthogonality);
  }
}

TEST(EvalPolynomial, DegreeZeroIsGamma0) {
  const auto tab = stieltjes_procedure(chebyshev2(), 0.0, 4);
  for (double x : {-3.0, 0.0, 0.4, 10.0}) EXPECT_DOUBLE_EQ(eval_polynomial(tab, 0, x).p, tab.gamma[0]);
}

TEST(EvalPolynomial, ChebyshevValueAtOne) {
  // U_n(1) = n+1 and every orthonormal p_n is sqrt(2/pi) U_n
  const auto tab = stieltjes_procedure(chebyshev2(), 0.0, 10);
  for (int n = 0; n <= 10; ++n)
    EXPECT_LE(rel(eval_polynomial(tab, n, 1.0).p, std::sqrt(2.0 / std::numbers::pi) * (n + 1)), 1e-12);
}

TEST(EvalPolynomial, DerivativeMatchesFiniteDifference) {
  const auto tab = stieltjes_procedure(scop::testing::three_node_fixed(), 0.0, 8);
  for (int n = 1; n <= 8; ++n) {
    for (double x : {-0.83, -0.1, 0.37, 0.91}) {
      const double h = 1e-5;
      const double fd = (eval_polynomial(tab, n, x + h).p - eval_polynomial(tab, n, x - h).p) / (2 * h);
      const double dp = eval_polynomial(tab, n, x).dp;
      EXPECT_LE(std::abs(dp - fd), 1e-7 * std::max(std::abs(dp), 1.0)) << "n=" << n << " x=" << x;
    }
  }
}

TEST(EvalPolynomial, IndexOutOfRange) {
  const auto tab = stieltjes_procedure(chebyshev2(), 0.0, 3);
  try {
    eval_polynomial(tab, 4, 0.0);
    FAIL() << "expected IndexOutOfRange";
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::index_out_of_range);
  }
}

TEST(Orthonormality, UpToDegreeTen) {
  const auto w = make_weight({0.5, 0.5, 0.5}, {1.0, 3.0}, EndpointTrajectory::fixed(std::vector<double>{-1.0, 0.2, 1.0}));
  const auto tab = stieltjes_procedure(w, 0.0, 10);
  const auto measure = discretize(w, 0.0, 100);
  for (int i = 0; i <= 10; ++i) {
    for (int j = 0; j <= i; ++j) {
      const double ip = measure.integrate(
          [&](double u) { return eval_polynomial(tab, i, u).p * eval_polynomial(tab, j, u).p; });
      EXPECT_NEAR(ip, i == j ? 1.0 : 0.0, 1e-9) << i << "," << j;
    }
  }
}

TEST(Moments, ChebyshevAnalyticValues) {
  const auto mu = moments(chebyshev2(), 0.0, 6);
  EXPECT_NEAR(mu[0], std::numbers::pi / 2, 1e-14);
  // int (1-u^2)^{1/2} (u+1) du = 0 + pi/2
  EXPECT_NEAR(mu[1], std::numbers::pi / 2, 1e-14);
  for (double m : mu) EXPECT_GT(m, 0.0);
}

TEST(Hankel, OrderOneIsMu0AndPositive) {
  const auto mu = moments(scop::testing::three_node_fixed(), 0.0, 16);
  EXPECT_DOUBLE_EQ(hankel_det(mu, 1), mu[0]);
  EXPECT_DOUBLE_EQ(hankel_det(mu, 0), 1.0);
  for (int n = 1; n <= 8; ++n) EXPECT_GT(hankel_det(mu, n), 0.0) << n;
  EXPECT_GT(hankel_det(mu, 9), 0.0);  // needs mu_16, the last available
  EXPECT_THROW(hankel_det(mu, 10), error);
}

TEST(Hankel, DeterminantRatiosReproduceRecurrence) {
  const auto w = make_weight({0.5, 1.2, 0.8}, {1.0, 2.0}, EndpointTrajectory::fixed(std::vector<double>{-1.0, 0.2, 1.0}));
  const auto tab = stieltjes_procedure(w, 0.0, 8);
  const auto mu = moments(w, 0.0, 16);
  const double x1 = -1.0;
  for (int n = 0; n <= 6; ++n) {
    const auto r = recurrence_from_moments(mu, n);
    if (n >= 1) {
      EXPECT_LE(rel(r.a2, tab.a[n] * tab.a[n]), 1e-6) << n;
    }
    EXPECT_LE(std::abs(r.b + x1 - tab.b[n]), 1e-6 * std::max(1.0, std::abs(tab.b[n]))) << n;
  }
}
