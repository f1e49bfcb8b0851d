#pragma once

/**
 * @file quadrature.hpp
 * @brief Gauss-Jacobi rules and singularity-absorbing integration against a weight.
 *
 * Every piece [x_j, x_{j+1}] of a generalized Jacobi weight is mapped to [-1, 1]
 * and the two endpoint factors are absorbed into a Gauss-Jacobi rule, so the
 * sampled remainder is smooth on the closed piece. The Cauchy kernel of the
 * Stieltjes transform at a node x_j is absorbed the same way by lowering the
 * exponent at x_j by one on the adjacent pieces.
 */

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "scop/error.hpp"
#include "scop/weight.hpp"

namespace scop {

inline constexpr int default_quadrature_points = 64;

/// Nodes in (-1, 1) and positive weights for the reference weight (1-s)^beta_right (1+s)^beta_left.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  double beta_left = 0.0;
  double beta_right = 0.0;

  std::size_t size() const noexcept { return nodes.size(); }
};

/// Integral of (1-s)^beta_right (1+s)^beta_left over [-1, 1].
inline double jacobi_mass(double beta_left, double beta_right) {
  const double a = beta_right;
  const double b = beta_left;
  return std::exp((a + b + 1.0) * std::log(2.0) + std::lgamma(a + 1.0) + std::lgamma(b + 1.0) -
                  std::lgamma(a + b + 2.0));
}

/**
 * @brief Gauss rule for (1-s)^beta_right (1+s)^beta_left via Golub-Welsch.
 *
 * The symmetric Jacobi matrix of the monic Jacobi recurrence is diagonalized;
 * nodes are its eigenvalues and weights are mass * (first eigenvector component)^2.
 */
inline QuadratureRule gauss_jacobi_rule(int npts, double beta_left, double beta_right) {
  if (npts < 1) throw error(errc::index_out_of_range, "quadrature needs at least one point");
  if (!(beta_left > -1.0) || !(beta_right > -1.0))
    throw error(errc::bad_exponent, "Gauss-Jacobi exponents must exceed -1");

  const double a = beta_right;
  const double b = beta_left;
  const double ab = a + b;
  const auto n = static_cast<Eigen::Index>(npts);

  Eigen::VectorXd diag(n);
  Eigen::VectorXd sub(n > 1 ? n - 1 : 1);
  diag(0) = (b - a) / (ab + 2.0);
  for (Eigen::Index k = 1; k < n; ++k) {
    const double kk = static_cast<double>(k);
    const double s = 2.0 * kk + ab;
    diag(k) = (b * b - a * a) / (s * (s + 2.0));
  }
  for (Eigen::Index k = 1; k < n; ++k) {
    const double kk = static_cast<double>(k);
    const double s = 2.0 * kk + ab;
    double beta2;
    if (k == 1) {
      beta2 = 4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab) * (2.0 + ab) * (3.0 + ab));
    } else {
      beta2 = 4.0 * kk * (kk + a) * (kk + b) * (kk + ab) / (s * s * (s + 1.0) * (s - 1.0));
    }
    sub(k - 1) = std::sqrt(beta2);
  }

  QuadratureRule rule;
  rule.beta_left = beta_left;
  rule.beta_right = beta_right;
  rule.nodes.resize(npts);
  rule.weights.resize(npts);
  const double mass = jacobi_mass(beta_left, beta_right);

  if (n == 1) {
    rule.nodes[0] = diag(0);
    rule.weights[0] = mass;
    return rule;
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub.head(n - 1), Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) throw error(errc::non_finite, "tridiagonal eigensolver failed");
  for (Eigen::Index k = 0; k < n; ++k) {
    rule.nodes[k] = solver.eigenvalues()(k);
    const double v0 = solver.eigenvectors()(0, k);
    rule.weights[k] = mass * v0 * v0;
  }
  return rule;
}

/// Sum_i weights_i f(nodes_i) approximating an integral against a (possibly signed) kernel.
struct DiscreteMeasure {
  std::vector<double> nodes;
  std::vector<double> weights;

  template <class F>
  double integrate(F&& f) const {
    double s = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * f(nodes[i]);
    return s;
  }

  std::size_t size() const noexcept { return nodes.size(); }
};

namespace detail {

// Appends one piece [lo, hi] with exponent e_lo at lo and e_hi at hi absorbed;
// the remaining smooth factor is scale * prod_{k not adjacent} |u - x_k|^alpha_k.
inline void append_piece(DiscreteMeasure& out, const GeneralizedJacobiWeight& w, std::span<const double> x,
                         std::size_t piece, double e_lo, double e_hi, double sign, int npts) {
  const double lo = x[piece];
  const double hi = x[piece + 1];
  const double half = 0.5 * (hi - lo);
  const double mid = 0.5 * (hi + lo);
  const auto rule = gauss_jacobi_rule(npts, e_lo, e_hi);
  const double scale = sign * w.pieces()[piece] * std::pow(half, 1.0 + e_lo + e_hi);
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double u = mid + half * rule.nodes[i];
    double smooth = 1.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      if (k == piece || k == piece + 1) continue;
      smooth *= std::pow(std::abs(u - x[k]), w.alpha()[k]);
    }
    out.nodes.push_back(u);
    out.weights.push_back(scale * rule.weights[i] * smooth);
  }
}

inline std::vector<double> ordered_nodes(const GeneralizedJacobiWeight& w, double t) {
  auto x = w.trajectory().positions(t);
  for (std::size_t k = 1; k < x.size(); ++k) {
    if (!(x[k - 1] < x[k]))
      throw error(errc::non_distinct_endpoints, "endpoints not strictly increasing at t=" + std::to_string(t));
  }
  return x;
}

}  // namespace detail

/// Composite rule for the weight at time t: npts absorbed Gauss-Jacobi points per piece.
inline DiscreteMeasure discretize(const GeneralizedJacobiWeight& w, double t, int npts = default_quadrature_points) {
  const auto x = detail::ordered_nodes(w, t);
  DiscreteMeasure out;
  out.nodes.reserve(static_cast<std::size_t>(npts) * (x.size() - 1));
  out.weights.reserve(out.nodes.capacity());
  for (std::size_t j = 0; j + 1 < x.size(); ++j) {
    detail::append_piece(out, w, x, j, w.alpha()[j], w.alpha()[j + 1], 1.0, npts);
  }
  return out;
}

/**
 * @brief Signed rule with sum_i W_i f(u_i) ~ integral of w(u) f(u) / (x_j - u) du.
 *
 * Requires alpha_j > 0: the absorbed exponent at x_j becomes alpha_j - 1.
 */
inline DiscreteMeasure cauchy_measure(const GeneralizedJacobiWeight& w, std::size_t j, double t,
                                      int npts = default_quadrature_points) {
  if (j >= w.m()) throw error(errc::index_out_of_range, "node index " + std::to_string(j));
  if (!(w.alpha()[j] > 0.0))
    throw error(errc::divergent_transform,
                "Stieltjes transform diverges at node " + std::to_string(j) + " (alpha <= 0)");
  const auto x = detail::ordered_nodes(w, t);
  DiscreteMeasure out;
  for (std::size_t piece = 0; piece + 1 < x.size(); ++piece) {
    const double e_lo = w.alpha()[piece];
    const double e_hi = w.alpha()[piece + 1];
    if (piece + 1 == j) {
      // x_j is the right end: x_j - u = |u - x_j| > 0
      detail::append_piece(out, w, x, piece, e_lo, e_hi - 1.0, 1.0, npts);
    } else if (piece == j) {
      // x_j is the left end: x_j - u = -|u - x_j|
      detail::append_piece(out, w, x, piece, e_lo - 1.0, e_hi, -1.0, npts);
    } else {
      const std::size_t first = out.size();
      detail::append_piece(out, w, x, piece, e_lo, e_hi, 1.0, npts);
      for (std::size_t i = first; i < out.size(); ++i) out.weights[i] /= x[j] - out.nodes[i];
    }
  }
  return out;
}

template <class F>
double integrate_against_weight(const GeneralizedJacobiWeight& w, F&& f, double t,
                                int npts = default_quadrature_points) {
  return discretize(w, t, npts).integrate(std::forward<F>(f));
}

/// q(x_j) = integral of w(u) p(u) / (x_j - u) du for a polynomial evaluator p.
template <class F>
double stieltjes_at_node(const GeneralizedJacobiWeight& w, F&& p, std::size_t j, double t,
                         int npts = default_quadrature_points) {
  return cauchy_measure(w, j, t, npts).integrate(std::forward<F>(p));
}

}  // namespace scop
