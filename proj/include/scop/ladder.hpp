#pragma once

/**
 * @file ladder.hpp
 * @brief Laguerre ladder polynomials Omega_n, Theta_n carried as node values.
 *
 * The differential relation is W p_n' = (Omega_n - V) p_n - a_n Theta_n p_{n-1},
 * with deg Omega_n <= m-1 and deg Theta_n <= m-2. At the nodes, with q_n the
 * Stieltjes transform of w p_n,
 *   Theta_n(x_k)       = alpha_k W'(x_k) p_n(x_k) q_n(x_k),
 *   Omega_n(x_k) - V_k = a_n alpha_k W'(x_k) q_n(x_k) p_{n-1}(x_k),
 * and the pair advances in n by
 *   Omega_{n+1} = (x - b_n) Theta_n - Omega_n,
 *   (x - b_n)(Omega_{n+1} - Omega_n) = W + a_{n+1}^2 Theta_{n+1} - a_n^2 Theta_{n-1}.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "scop/error.hpp"
#include "scop/orthopoly.hpp"
#include "scop/quadrature.hpp"
#include "scop/weight.hpp"

namespace scop {

struct LadderValues {
  int n = 0;
  std::vector<double> theta;       ///< Theta_n(x_j)
  std::vector<double> omega;       ///< Omega_n(x_j)
  std::vector<double> theta_prev;  ///< Theta_{n-1}(x_j); zeros when n = 0
};

/// Stieltjes transforms q_k(x_j) for k = 0..n at every node.
inline std::vector<std::vector<double>> node_transforms(const GeneralizedJacobiWeight& w,
                                                        const RecurrenceTable& table, int n, double t,
                                                        int npts = default_quadrature_points) {
  std::vector<std::vector<double>> q(w.m(), std::vector<double>(static_cast<std::size_t>(n) + 1, 0.0));
  for (std::size_t j = 0; j < w.m(); ++j) {
    const auto measure = cauchy_measure(w, j, t, npts);
    for (std::size_t i = 0; i < measure.size(); ++i) {
      const auto p = eval_polynomials(table, n, measure.nodes[i]);
      for (int k = 0; k <= n; ++k) q[j][k] += measure.weights[i] * p[k];
    }
  }
  return q;
}

/// Node values of Theta_n, Omega_n and Theta_{n-1} from p, q at the nodes.
inline LadderValues ladder_init(const GeneralizedJacobiWeight& w, const RecurrenceTable& table, double t, int n,
                                int npts = default_quadrature_points) {
  if (n < 0 || n > table.N) throw error(errc::index_out_of_range, "ladder degree " + std::to_string(n));
  if (!w.all_exponents_positive())
    throw error(errc::divergent_transform, "ladder values need every alpha_k > 0");
  const auto nd = node_data(w, t);
  const auto q = node_transforms(w, table, n, t, npts);
  const double an = table.a[n];

  LadderValues out;
  out.n = n;
  out.theta.resize(w.m());
  out.omega.resize(w.m());
  out.theta_prev.assign(w.m(), 0.0);
  for (std::size_t j = 0; j < w.m(); ++j) {
    const auto pv = eval_polynomial(table, n, nd.x[j]);
    const double aw = w.alpha()[j] * nd.wprime[j];
    out.theta[j] = aw * pv.p * q[j][n];
    out.omega[j] = 0.5 * aw + an * aw * q[j][n] * pv.p_prev;
    if (n > 0) out.theta_prev[j] = aw * pv.p_prev * q[j][n - 1];
  }
  return out;
}

/// Advance node values from n to n+1 using W(x_j) = 0.
inline LadderValues ladder_step(const LadderValues& v, std::span<const double> nodes, double a_n, double a_next,
                                double b_n) {
  if (!(a_next != 0.0)) throw error(errc::zero_coefficient, "a_" + std::to_string(v.n + 1) + " = 0");
  LadderValues out;
  out.n = v.n + 1;
  out.theta.resize(nodes.size());
  out.omega.resize(nodes.size());
  out.theta_prev = v.theta;
  const double inv = 1.0 / (a_next * a_next);
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    const double shift = nodes[j] - b_n;
    out.omega[j] = shift * v.theta[j] - v.omega[j];
    out.theta[j] = (shift * (out.omega[j] - v.omega[j]) + a_n * a_n * v.theta_prev[j]) * inv;
  }
  return out;
}

/// The leading-coefficient sums sum Theta/W', sum x Theta/W', sum Omega/W'.
struct ResidueSums {
  double theta = 0.0;
  double xtheta = 0.0;
  double omega = 0.0;
};

inline ResidueSums residue_sums(const LadderValues& v, const NodeData& nd) {
  ResidueSums s;
  for (std::size_t j = 0; j < nd.size(); ++j) {
    s.theta += v.theta[j] / nd.wprime[j];
    s.xtheta += nd.x[j] * v.theta[j] / nd.wprime[j];
    s.omega += v.omega[j] / nd.wprime[j];
  }
  return s;
}

/// Expected sums: 0, 2n+1+sum alpha, n+(sum alpha)/2.
inline ResidueSums expected_residue_sums(int n, double alpha_sum) {
  return {0.0, 2.0 * n + 1.0 + alpha_sum, n + 0.5 * alpha_sum};
}

struct LadderReport {
  int n = 0;
  double theta_sum = 0.0;       ///< |sum Theta/W'| / max|Theta/W'|
  double xtheta_sum = 0.0;      ///< relative deviation from 2n+1+sum alpha
  double omega_sum = 0.0;       ///< relative deviation from n+(sum alpha)/2
  double differential = 0.0;    ///< max residual of the differential relation over max term size
  double wronskian = 0.0;       ///< max |a_n (p_n q_{n-1} - p_{n-1} q_n) - 1| over the nodes; 0 for n = 0
};

/**
 * @brief Residuals of the structural identities for one degree.
 *
 * The differential relation is sampled at `samples` uniformly random points
 * of the support (fixed seed); Theta_n, Omega_n and V are interpolated
 * barycentrically from their node values.
 */
inline LadderReport ladder_checks(const GeneralizedJacobiWeight& w, const RecurrenceTable& table,
                                  const LadderValues& v, double t, int npts = default_quadrature_points,
                                  int samples = 20, std::uint64_t seed = 20241) {
  const int n = v.n;
  const auto nd = node_data(w, t);
  const auto expected = expected_residue_sums(n, w.alpha_sum());
  const auto sums = residue_sums(v, nd);

  LadderReport r;
  r.n = n;
  double theta_scale = 0.0;
  for (std::size_t j = 0; j < nd.size(); ++j) theta_scale = std::max(theta_scale, std::abs(v.theta[j] / nd.wprime[j]));
  r.theta_sum = std::abs(sums.theta) / std::max(theta_scale, 1e-300);
  r.xtheta_sum = std::abs(sums.xtheta - expected.xtheta) / std::abs(expected.xtheta);
  r.omega_sum = std::abs(sums.omega - expected.omega) / std::max(std::abs(expected.omega), 1e-300);

  const auto vnodes = v_node_values(w, nd);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(nd.x.front(), nd.x.back());
  double max_res = 0.0, max_term = 0.0;
  for (int s = 0; s < samples; ++s) {
    const double x = dist(rng);
    const auto pv = eval_polynomial(table, n, x);
    const double W = eval_node_polynomial(nd.x, x);
    const double theta = barycentric_eval(nd.x, nd.wprime, v.theta, x);
    const double omega = barycentric_eval(nd.x, nd.wprime, v.omega, x);
    const double V = barycentric_eval(nd.x, nd.wprime, vnodes, x);
    const double lhs = W * pv.dp;
    const double t1 = (omega - V) * pv.p;
    const double t2 = table.a[n] * theta * pv.p_prev;
    max_res = std::max(max_res, std::abs(lhs - t1 + t2));
    max_term = std::max({max_term, std::abs(lhs), std::abs(t1), std::abs(t2)});
  }
  r.differential = max_term > 0.0 ? max_res / max_term : max_res;

  if (n > 0) {
    const auto q = node_transforms(w, table, n, t, npts);
    for (std::size_t j = 0; j < nd.size(); ++j) {
      const auto pv = eval_polynomial(table, n, nd.x[j]);
      const double wr = table.a[n] * (pv.p * q[j][n - 1] - pv.p_prev * q[j][n]);
      r.wronskian = std::max(r.wronskian, std::abs(wr - 1.0));
    }
  }
  return r;
}

}  // namespace scop
