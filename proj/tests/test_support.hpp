#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "scop/weight.hpp"

namespace scop::testing {

inline GeneralizedJacobiWeight chebyshev2() {
  return make_weight({0.5, 0.5}, {1.0}, EndpointTrajectory::fixed(std::vector<double>{-1.0, 1.0}));
}

/// m=3, alpha=(0.5,0.5,0.5), nodes (-1, 0.2, 1).
inline GeneralizedJacobiWeight three_node_fixed() {
  return make_weight({0.5, 0.5, 0.5}, {1.0, 1.0}, EndpointTrajectory::fixed(std::vector<double>{-1.0, 0.2, 1.0}));
}

/// m=3, alpha=(0.5,0.5,0.5), trajectory x(t) = (-1, t, 1).
inline GeneralizedJacobiWeight three_node_moving() {
  return make_weight({0.5, 0.5, 0.5}, {1.0, 1.0}, EndpointTrajectory({{-1.0}, {0.0, 1.0}, {1.0}}));
}

inline double rel(double got, double want) { return std::abs(got - want) / std::abs(want); }

/**
 * Orthonormal Jacobi recurrence for (1-x)^a (1+x)^b on [-1,1], written out
 * from the classical closed forms (monic beta_n, alpha_n) independently of the
 * library.
 */
struct JacobiClosedForm {
  double a, b;

  double diag(int n) const {
    if (n == 0) return (b - a) / (a + b + 2.0);
    const double s = 2.0 * n + a + b;
    return (b * b - a * a) / (s * (s + 2.0));
  }

  double offdiag(int n) const {  // a_n, n >= 1
    if (n == 1) return std::sqrt(4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + a + b) * (2.0 + a + b) * (3.0 + a + b)));
    const double s = 2.0 * n + a + b;
    return std::sqrt(4.0 * n * (n + a) * (n + b) * (n + a + b) / (s * s * (s + 1.0) * (s - 1.0)));
  }
};

}  // namespace scop::testing
