#pragma once

/**
 * @file evolution.hpp
 * @brief Deformation flow of a_n, b_n, gamma_n and the ladder node ratios as the endpoints move.
 *
 * State components, with W' = W'(x_j(t), t):
 *   theta_j      = Theta_n(x_j) / W'(x_j)
 *   theta_prev_j = Theta_{n-1}(x_j) / W'(x_j)
 *   omega_j      = Omega_n(x_j) / W'(x_j)
 * Along the flow the Lagrange leading-coefficient sums are conserved:
 *   sum theta = 0, sum theta_prev = 0, sum x theta = 2n+1+sum alpha,
 *   sum x theta_prev = 2n-1+sum alpha, sum omega = n+(sum alpha)/2.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "scop/error.hpp"
#include "scop/ladder.hpp"
#include "scop/ode.hpp"
#include "scop/orthopoly.hpp"
#include "scop/quadrature.hpp"
#include "scop/weight.hpp"

namespace scop {

struct EvolutionState {
  double t = 0.0;
  int n = 0;
  double a = 0.0;
  double b = 0.0;
  double gamma = 0.0;
  std::vector<double> theta;
  std::vector<double> theta_prev;
  std::vector<double> omega;

  std::size_t m() const noexcept { return theta.size(); }

  /// Packed layout [a, b, gamma, theta..., theta_prev..., omega...].
  std::vector<double> pack() const {
    std::vector<double> y;
    y.reserve(3 + 3 * m());
    y.push_back(a);
    y.push_back(b);
    y.push_back(gamma);
    y.insert(y.end(), theta.begin(), theta.end());
    y.insert(y.end(), theta_prev.begin(), theta_prev.end());
    y.insert(y.end(), omega.begin(), omega.end());
    return y;
  }

  static EvolutionState unpack(std::span<const double> y, int n, double t) {
    const std::size_t m = (y.size() - 3) / 3;
    EvolutionState s;
    s.t = t;
    s.n = n;
    s.a = y[0];
    s.b = y[1];
    s.gamma = y[2];
    s.theta.assign(y.begin() + 3, y.begin() + 3 + m);
    s.theta_prev.assign(y.begin() + 3 + m, y.begin() + 3 + 2 * m);
    s.omega.assign(y.begin() + 3 + 2 * m, y.begin() + 3 + 3 * m);
    return s;
  }
};

struct ConservedSums {
  double theta = 0.0;
  double theta_prev = 0.0;
  double xtheta = 0.0;
  double xtheta_prev = 0.0;
  double omega = 0.0;

  double max_abs() const noexcept {
    return std::max({std::abs(theta), std::abs(theta_prev), std::abs(xtheta), std::abs(xtheta_prev),
                     std::abs(omega)});
  }
};

inline ConservedSums conserved_sums(const EvolutionState& s, std::span<const double> x) {
  ConservedSums c;
  for (std::size_t j = 0; j < s.m(); ++j) {
    c.theta += s.theta[j];
    c.theta_prev += s.theta_prev[j];
    c.xtheta += x[j] * s.theta[j];
    c.xtheta_prev += x[j] * s.theta_prev[j];
    c.omega += s.omega[j];
  }
  return c;
}

inline ConservedSums expected_conserved_sums(int n, double alpha_sum) {
  return {0.0, 0.0, 2.0 * n + 1.0 + alpha_sum, 2.0 * n - 1.0 + alpha_sum, n + 0.5 * alpha_sum};
}

inline ConservedSums conserved_drift(const EvolutionState& s, std::span<const double> x, double alpha_sum) {
  const auto c = conserved_sums(s, x);
  const auto e = expected_conserved_sums(s.n, alpha_sum);
  return {c.theta - e.theta, c.theta_prev - e.theta_prev, c.xtheta - e.xtheta, c.xtheta_prev - e.xtheta_prev,
          c.omega - e.omega};
}

/**
 * @brief Time derivative of the state; the returned fields hold rates.
 *
 * With g = gamma_n'/gamma_n = -1/2 sum xdot_k theta_k and c_jk = (xdot_j - xdot_k)/(x_j - x_k):
 *   a'/a          = 1/2 sum (theta_k - theta_prev_k) xdot_k
 *   b'            = sum ((x_k - b) theta_k - 2 omega_k) xdot_k
 *   theta_j'      =  2 g theta_j - 2 sum_{k!=j} c_jk (theta_k omega_j - theta_j omega_k)
 *   theta_prev_j' = -2 g' theta_prev_j + 2 sum_{k!=j} c_jk (theta_prev_k omega_j - theta_prev_j omega_k)
 *   omega_j'      = a^2 sum_{k!=j} c_jk (theta_j theta_prev_k - theta_k theta_prev_j)
 * where g' = gamma_{n-1}'/gamma_{n-1} = a'/a + g.
 */
inline EvolutionState evolution_rhs(const EvolutionState& s, const NodeData& nd) {
  const std::size_t m = s.m();
  if (nd.size() != m) throw error(errc::index_out_of_range, "state and node data sizes differ");
  for (std::size_t k = 1; k < m; ++k) {
    if (!(nd.x[k - 1] < nd.x[k]))
      throw error(errc::non_distinct_endpoints, "endpoints not strictly increasing at t=" + std::to_string(nd.t));
  }

  double dlog_a = 0.0, db = 0.0, g = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    dlog_a += 0.5 * (s.theta[k] - s.theta_prev[k]) * nd.xdot[k];
    db += ((nd.x[k] - s.b) * s.theta[k] - 2.0 * s.omega[k]) * nd.xdot[k];
    g -= 0.5 * nd.xdot[k] * s.theta[k];
  }
  const double g_prev = dlog_a + g;

  EvolutionState d;
  d.t = s.t;
  d.n = s.n;
  d.a = s.a * dlog_a;
  d.b = db;
  d.gamma = s.gamma * g;
  d.theta.assign(m, 0.0);
  d.theta_prev.assign(m, 0.0);
  d.omega.assign(m, 0.0);
  const double a2 = s.a * s.a;
  for (std::size_t j = 0; j < m; ++j) {
    double st = 0.0, sp = 0.0, so = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      if (k == j) continue;
      const double c = (nd.xdot[j] - nd.xdot[k]) / (nd.x[j] - nd.x[k]);
      if (c == 0.0) continue;
      st += c * (s.theta[k] * s.omega[j] - s.theta[j] * s.omega[k]);
      sp += c * (s.theta_prev[k] * s.omega[j] - s.theta_prev[j] * s.omega[k]);
      so += c * (s.theta[j] * s.theta_prev[k] - s.theta[k] * s.theta_prev[j]);
    }
    d.theta[j] = 2.0 * g * s.theta[j] - 2.0 * st;
    d.theta_prev[j] = -2.0 * g_prev * s.theta_prev[j] + 2.0 * sp;
    d.omega[j] = a2 * so;
  }
  return d;
}

/// State at time t computed from scratch by quadrature (recurrence table plus ladder values).
inline EvolutionState direct_state(const GeneralizedJacobiWeight& w, int n, double t,
                                   int npts = default_quadrature_points) {
  if (n < 1) throw error(errc::index_out_of_range, "evolution needs n >= 1");
  const auto table = stieltjes_procedure(w, t, n + 1, npts);
  const auto ladder = ladder_init(w, table, t, n, npts);
  const auto nd = node_data(w, t);
  EvolutionState s;
  s.t = t;
  s.n = n;
  s.a = table.a[n];
  s.b = table.b[n];
  s.gamma = table.gamma[n];
  s.theta.resize(w.m());
  s.theta_prev.resize(w.m());
  s.omega.resize(w.m());
  for (std::size_t j = 0; j < w.m(); ++j) {
    s.theta[j] = ladder.theta[j] / nd.wprime[j];
    s.theta_prev[j] = ladder.theta_prev[j] / nd.wprime[j];
    s.omega[j] = ladder.omega[j] / nd.wprime[j];
  }
  return s;
}

namespace detail {

// Minimal-norm correction of v so that sum v = s0 and sum x v = s1.
inline void project_two_sums(std::span<double> v, std::span<const double> x, double s0, double s1) {
  const double m = static_cast<double>(v.size());
  double sx = 0.0, sxx = 0.0, r0 = -s0, r1 = -s1;
  for (std::size_t j = 0; j < v.size(); ++j) {
    sx += x[j];
    sxx += x[j] * x[j];
    r0 += v[j];
    r1 += x[j] * v[j];
  }
  const double det = m * sxx - sx * sx;
  const double l0 = (sxx * r0 - sx * r1) / det;
  const double l1 = (m * r1 - sx * r0) / det;
  for (std::size_t j = 0; j < v.size(); ++j) v[j] -= l0 + l1 * x[j];
}

}  // namespace detail

struct EvolveOptions {
  double rtol = 1e-9;
  double atol = 1e-12;
  int samples = 20;
  int npts = default_quadrature_points;
  bool reproject = false;  ///< project onto the conserved sums after every accepted step
};

struct EvolutionReport {
  std::vector<EvolutionState> samples;
  std::vector<ConservedSums> drift;  ///< conserved-sum deviation at each sample
  double max_step_drift = 0.0;       ///< largest conserved-sum deviation over all accepted steps
  IntegratorStats stats;
};

namespace detail {

inline std::string format_pole_candidate(const GeneralizedJacobiWeight& w, int n, double t,
                                         std::span<const double> state, int npts) {
  std::ostringstream os;
  os.precision(17);
  os << " last state=[";
  for (std::size_t i = 0; i < state.size(); ++i) os << (i ? "," : "") << state[i];
  os << "]";
  try {
    const auto mu = moments(w, t, 2 * n + 2, npts);
    os << " hankel=[";
    for (int k = 1; k <= n + 1; ++k) os << (k > 1 ? "," : "") << hankel_det(mu, k);
    os << "]";
  } catch (const error&) {
    os << " hankel=unavailable";
  }
  return os.str();
}

}  // namespace detail

/**
 * @brief Integrate the deformation flow for index n from t0 to t1.
 *
 * The initial state comes from direct_state at t0. Output states are sampled
 * at `samples` uniform times including both ends.
 */
inline EvolutionReport evolve(const GeneralizedJacobiWeight& w, int n, double t0, double t1,
                              const EvolveOptions& opts = {}) {
  if (!w.all_exponents_positive())
    throw error(errc::init_failure, "evolution needs every alpha_k > 0");
  EvolutionState init;
  try {
    init = direct_state(w, n, t0, opts.npts);
  } catch (const error& e) {
    throw error(errc::init_failure, e.what());
  }

  const double alpha_sum = w.alpha_sum();
  const auto expected = expected_conserved_sums(n, alpha_sum);
  const auto times = sample_times(t0, t1, opts.samples);

  EvolutionReport report;
  report.samples.resize(times.size());
  report.drift.resize(times.size());

  const OdeRhs rhs = [&](double t, std::span<const double> y, std::span<double> dy) {
    if (!w.trajectory().ordered_at(t))
      throw error(errc::endpoint_collision, "endpoints not strictly increasing at t=" + std::to_string(t));
    const auto nd = node_data(w, t);
    const auto d = evolution_rhs(EvolutionState::unpack(y, n, t), nd).pack();
    std::copy(d.begin(), d.end(), dy.begin());
  };

  const StepObserver on_step = [&](double t, std::span<double> y) {
    const auto x = w.trajectory().positions(t);
    bool modified = false;
    if (opts.reproject) {
      const std::size_t m = w.m();
      detail::project_two_sums(y.subspan(3, m), x, expected.theta, expected.xtheta);
      detail::project_two_sums(y.subspan(3 + m, m), x, expected.theta_prev, expected.xtheta_prev);
      double so = 0.0;
      for (std::size_t j = 0; j < m; ++j) so += y[3 + 2 * m + j];
      for (std::size_t j = 0; j < m; ++j) y[3 + 2 * m + j] -= (so - expected.omega) / static_cast<double>(m);
      modified = true;
    }
    const auto s = EvolutionState::unpack(y, n, t);
    if (!(s.a > 0.0) || !(s.gamma > 0.0))
      throw integration_failure(errc::step_collapse, "positivity of a or gamma lost at t=" + std::to_string(t), t,
                                {y.begin(), y.end()});
    report.max_step_drift = std::max(report.max_step_drift, conserved_drift(s, x, alpha_sum).max_abs());
    return modified;
  };

  StepperOptions so;
  so.rtol = opts.rtol;
  so.atol = opts.atol;
  DormandPrince45 stepper(so);
  try {
    stepper.integrate(
        rhs, times, init.pack(),
        [&](std::size_t i, std::span<const double> y) {
          report.samples[i] = EvolutionState::unpack(y, n, times[i]);
          report.drift[i] = conserved_drift(report.samples[i], w.trajectory().positions(times[i]), alpha_sum);
        },
        on_step);
  } catch (const integration_failure& e) {
    try {
      rethrow_with_collision_check(e, w.trajectory(), t0, t1);
    } catch (const integration_failure& f) {
      if (f.code() != errc::step_collapse) throw;
      throw integration_failure(f.code(),
                                f.message() + detail::format_pole_candidate(w, n, f.last_t(), f.last_state(), opts.npts),
                                f.last_t(), f.last_state());
    }
  }
  report.stats = stepper.stats();
  return report;
}

/// Relative deviations of one evolved sample against the direct oracle.
struct DeviationRow {
  double t = 0.0;
  double a = 0.0;
  double b = 0.0;
  double gamma = 0.0;
  std::vector<double> theta;
  std::vector<double> theta_prev;
  std::vector<double> omega;

  double max() const {
    double v = std::max({a, b, gamma});
    for (double x : theta) v = std::max(v, x);
    for (double x : theta_prev) v = std::max(v, x);
    for (double x : omega) v = std::max(v, x);
    return v;
  }
};

namespace detail {

// Per-component deviation scaled by max(|d_j|, max_k |d_k|), i.e. normwise over the group.
inline std::vector<double> group_deviation(std::span<const double> e, std::span<const double> d) {
  double scale = 0.0;
  for (double v : d) scale = std::max(scale, std::abs(v));
  std::vector<double> out(e.size());
  for (std::size_t j = 0; j < e.size(); ++j) out[j] = std::abs(e[j] - d[j]) / std::max(scale, 1e-300);
  return out;
}

}  // namespace detail

/**
 * @brief Compare evolved samples with states recomputed from scratch.
 *
 * a and gamma use plain relative deviation; b is scaled by max(|b|, half the
 * support width) since it carries units of x and may vanish; node-value groups
 * are scaled by the largest magnitude in the group.
 */
inline DeviationRow deviation(const EvolutionState& evolved, const EvolutionState& direct, double half_width) {
  DeviationRow r;
  r.t = evolved.t;
  r.a = std::abs(evolved.a - direct.a) / std::abs(direct.a);
  r.b = std::abs(evolved.b - direct.b) / std::max(std::abs(direct.b), half_width);
  r.gamma = std::abs(evolved.gamma - direct.gamma) / std::abs(direct.gamma);
  r.theta = detail::group_deviation(evolved.theta, direct.theta);
  r.theta_prev = detail::group_deviation(evolved.theta_prev, direct.theta_prev);
  r.omega = detail::group_deviation(evolved.omega, direct.omega);
  return r;
}

inline std::vector<DeviationRow> verify_against_direct(const GeneralizedJacobiWeight& w, int n,
                                                       const EvolutionReport& report,
                                                       int npts = default_quadrature_points) {
  std::vector<DeviationRow> rows(report.samples.size());
  for (std::size_t i = 0; i < report.samples.size(); ++i) {
    const auto& s = report.samples[i];
    const auto direct = direct_state(w, n, s.t, npts);
    const auto x = w.trajectory().positions(s.t);
    rows[i] = deviation(s, direct, 0.5 * (x.back() - x.front()));
  }
  return rows;
}

struct TimeDerivativeCheck {
  double off_node = 0.0;  ///< relative residual of the d p_n(x,t)/dt formula at fixed x
  double at_node = 0.0;   ///< largest relative residual of d p_n(x_j(t),t)/dt over the nodes
  double fd_off_node = 0.0;
  double formula_off_node = 0.0;
};

/**
 * @brief Finite-difference check of the partial t-derivative of p_n.
 *
 * Off the nodes:
 *   dp_n/dt = g p_n(x) - sum_k xdot_k [(Omega_k - V_k) p_n(x) - a_n Theta_k p_{n-1}(x)] / (W'_k (x - x_k)),
 * and along a node x_j(t):
 *   d p_n(x_j(t),t)/dt = g p_n(x_j) + sum_{k!=j} (xdot_j - xdot_k) [(Omega_k - V_k) p_n(x_j)
 *                        - a_n Theta_k p_{n-1}(x_j)] / (W'_k (x_j - x_k)),
 * both compared against centered differences of tables recomputed at t +- h.
 */
inline TimeDerivativeCheck pn_time_derivative_check(const GeneralizedJacobiWeight& w, const RecurrenceTable& table,
                                                    int n, double x, double t, double h,
                                                    int npts = default_quadrature_points) {
  const auto nd = node_data(w, t);
  const auto lad = ladder_init(w, table, t, n, npts);
  const std::size_t m = w.m();
  std::vector<double> theta(m), reduced_omega(m);
  double g = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    theta[k] = lad.theta[k] / nd.wprime[k];
    reduced_omega[k] = lad.omega[k] / nd.wprime[k] - 0.5 * w.alpha()[k];  // (Omega_k - V_k)/W'_k
    g -= 0.5 * nd.xdot[k] * theta[k];
  }
  const double an = table.a[n];

  const auto plus = stieltjes_procedure(w, t + h, n, npts);
  const auto minus = stieltjes_procedure(w, t - h, n, npts);

  TimeDerivativeCheck out;
  {
    const auto pv = eval_polynomial(table, n, x);
    double formula = g * pv.p;
    for (std::size_t k = 0; k < m; ++k) {
      formula -= nd.xdot[k] * (reduced_omega[k] * pv.p - an * theta[k] * pv.p_prev) / (x - nd.x[k]);
    }
    const double fd = (eval_polynomial(plus, n, x).p - eval_polynomial(minus, n, x).p) / (2.0 * h);
    const double scale = std::max({std::abs(fd), std::abs(formula), std::abs(pv.p)});
    out.fd_off_node = fd;
    out.formula_off_node = formula;
    out.off_node = std::abs(fd - formula) / scale;
  }

  const auto xp = w.trajectory().positions(t + h);
  const auto xm = w.trajectory().positions(t - h);
  for (std::size_t j = 0; j < m; ++j) {
    const auto pv = eval_polynomial(table, n, nd.x[j]);
    double formula = g * pv.p;
    for (std::size_t k = 0; k < m; ++k) {
      if (k == j) continue;
      formula += (nd.xdot[j] - nd.xdot[k]) * (reduced_omega[k] * pv.p - an * theta[k] * pv.p_prev) /
                 (nd.x[j] - nd.x[k]);
    }
    const double fd = (eval_polynomial(plus, n, xp[j]).p - eval_polynomial(minus, n, xm[j]).p) / (2.0 * h);
    const double scale = std::max({std::abs(fd), std::abs(formula), std::abs(pv.p)});
    out.at_node = std::max(out.at_node, std::abs(fd - formula) / scale);
  }
  return out;
}

}  // namespace scop
