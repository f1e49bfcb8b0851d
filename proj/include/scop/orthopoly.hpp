#pragma once

/**
 * @file orthopoly.hpp
 * @brief Recurrence coefficients of orthonormal polynomials, moments and Hankel determinants.
 *
 * The orthonormal polynomials p_n = gamma_n x^n + ... satisfy
 *   a_{n+1} p_{n+1}(x) = (x - b_n) p_n(x) - a_n p_{n-1}(x),   p_{-1} = 0.
 * The table is built by the discretized Stieltjes procedure on the composite
 * Gauss-Jacobi discretization of the weight. Moment determinants are kept as a
 * small-n diagnostic only.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/LU>

#include "scop/error.hpp"
#include "scop/quadrature.hpp"
#include "scop/weight.hpp"

namespace scop {

/**
 * @brief a_n, b_n, gamma_n up to degree N.
 *
 * a[n] holds a_n for n = 1..N (a[0] = 0 stands for the absent a_0 p_{-1} term),
 * b[n] holds b_n for n = 0..N-1, gamma[n] holds gamma_n for n = 0..N.
 */
struct RecurrenceTable {
  int N = 0;
  std::vector<double> a;
  std::vector<double> b;
  std::vector<double> gamma;
};

inline RecurrenceTable stieltjes_procedure(const DiscreteMeasure& measure, int N, double support_width) {
  if (N < 0) throw error(errc::index_out_of_range, "N must be non-negative");
  const std::size_t q = measure.size();
  RecurrenceTable table;
  table.N = N;
  table.a.assign(static_cast<std::size_t>(N) + 1, 0.0);
  table.b.assign(static_cast<std::size_t>(N), 0.0);
  table.gamma.assign(static_cast<std::size_t>(N) + 1, 0.0);

  double mu0 = 0.0;
  for (double wi : measure.weights) mu0 += wi;
  if (!(mu0 > 0.0)) throw error(errc::lost_orthogonality, "non-positive total mass");
  table.gamma[0] = 1.0 / std::sqrt(mu0);

  const double floor = 1e-14 * support_width * support_width;
  std::vector<double> prev(q, 0.0), cur(q, table.gamma[0]), next(q);
  for (int n = 0; n < N; ++n) {
    double bn = 0.0;
    for (std::size_t i = 0; i < q; ++i) bn += measure.weights[i] * measure.nodes[i] * cur[i] * cur[i];
    table.b[n] = bn;
    double a2 = 0.0;
    for (std::size_t i = 0; i < q; ++i) {
      next[i] = (measure.nodes[i] - bn) * cur[i] - table.a[n] * prev[i];
      a2 += measure.weights[i] * next[i] * next[i];
    }
    if (!(a2 > floor))
      throw error(errc::lost_orthogonality, "a_" + std::to_string(n + 1) + "^2 = " + std::to_string(a2) +
                                                " below quadrature floor");
    const double an = std::sqrt(a2);
    table.a[n + 1] = an;
    table.gamma[n + 1] = table.gamma[n] / an;
    for (std::size_t i = 0; i < q; ++i) next[i] /= an;
    std::swap(prev, cur);
    std::swap(cur, next);
  }
  return table;
}

inline RecurrenceTable stieltjes_procedure(const GeneralizedJacobiWeight& w, double t, int N,
                                           int npts = default_quadrature_points) {
  const auto x = w.trajectory().positions(t);
  return stieltjes_procedure(discretize(w, t, npts), N, x.back() - x.front());
}

struct PolyValues {
  double p = 0.0;       ///< p_n(x)
  double dp = 0.0;      ///< p_n'(x)
  double p_prev = 0.0;  ///< p_{n-1}(x), zero for n = 0
};

/// Forward recurrence with its x-derivative.
inline PolyValues eval_polynomial(const RecurrenceTable& table, int n, double x) {
  if (n < 0 || n > table.N)
    throw error(errc::index_out_of_range,
                "degree " + std::to_string(n) + " outside table of size " + std::to_string(table.N));
  double pm = 0.0, dpm = 0.0;
  double p = table.gamma[0], dp = 0.0;
  for (int k = 0; k < n; ++k) {
    const double an1 = table.a[k + 1];
    const double pn = ((x - table.b[k]) * p - table.a[k] * pm) / an1;
    const double dpn = (p + (x - table.b[k]) * dp - table.a[k] * dpm) / an1;
    pm = p;
    dpm = dp;
    p = pn;
    dp = dpn;
  }
  return {p, dp, pm};
}

/// Values p_0(x)..p_n(x).
inline std::vector<double> eval_polynomials(const RecurrenceTable& table, int n, double x) {
  if (n < 0 || n > table.N) throw error(errc::index_out_of_range, "degree " + std::to_string(n));
  std::vector<double> out(static_cast<std::size_t>(n) + 1);
  out[0] = table.gamma[0];
  double pm = 0.0;
  for (int k = 0; k < n; ++k) {
    out[k + 1] = ((x - table.b[k]) * out[k] - table.a[k] * pm) / table.a[k + 1];
    pm = out[k];
  }
  return out;
}

/// mu_k = integral of w(u) (u - x_1)^k du, k = 0..nmax.
inline std::vector<double> moments(const GeneralizedJacobiWeight& w, double t, int nmax,
                                   int npts = default_quadrature_points) {
  if (nmax < 0) throw error(errc::index_out_of_range, "nmax must be non-negative");
  const auto measure = discretize(w, t, npts);
  const double x1 = w.trajectory().position(0, t);
  std::vector<double> mu(static_cast<std::size_t>(nmax) + 1, 0.0);
  for (std::size_t i = 0; i < measure.size(); ++i) {
    const double y = measure.nodes[i] - x1;
    double pw = measure.weights[i];
    for (auto& m : mu) {
      m += pw;
      pw *= y;
    }
  }
  return mu;
}

namespace detail {

inline double lu_determinant(const Eigen::MatrixXd& h) {
  if (h.rows() == 0) return 1.0;
  return Eigen::PartialPivLU<Eigen::MatrixXd>(h).determinant();
}

}  // namespace detail

/// det [mu_{i+j}]_{i,j<n}; n = 0 gives 1.
inline double hankel_det(std::span<const double> mu, int n) {
  if (n < 0 || (n > 0 && static_cast<std::size_t>(2 * n - 1) > mu.size()))
    throw error(errc::index_out_of_range, "Hankel order " + std::to_string(n) + " needs moments up to 2n-2");
  Eigen::MatrixXd h(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) h(i, j) = mu[i + j];
  return detail::lu_determinant(h);
}

/// Hankel determinant with its last column shifted by one: columns mu_{i+j}, j<n-1, then mu_{i+n}.
inline double bordered_hankel_det(std::span<const double> mu, int n) {
  if (n < 0 || (n > 0 && static_cast<std::size_t>(2 * n) > mu.size()))
    throw error(errc::index_out_of_range, "bordered Hankel order " + std::to_string(n) + " needs moments up to 2n-1");
  if (n == 0) return 0.0;
  Eigen::MatrixXd h(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j + 1 < n; ++j) h(i, j) = mu[i + j];
    h(i, n - 1) = mu[i + n];
  }
  return detail::lu_determinant(h);
}

struct MomentRecurrence {
  double a2 = 0.0;  ///< a_n^2 = H_{n+1} H_{n-1} / H_n^2
  double b = 0.0;   ///< b_n in the variable the moments are taken in
};

/// a_n^2 and b_n from ratios of moment determinants (n >= 1 for a2; b valid for n >= 0).
inline MomentRecurrence recurrence_from_moments(std::span<const double> mu, int n) {
  MomentRecurrence r;
  const double hn = hankel_det(mu, n);
  const double hn1 = hankel_det(mu, n + 1);
  if (n >= 1) r.a2 = hn1 * hankel_det(mu, n - 1) / (hn * hn);
  r.b = bordered_hankel_det(mu, n + 1) / hn1 - bordered_hankel_det(mu, n) / hn;
  return r;
}

}  // namespace scop
