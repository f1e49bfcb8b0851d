#pragma once

/**
 * @file moment_flow.hpp
 * @brief Linear flow of the moments nu_{n,j} = int w(u) prod_k (u - x_k)^{beta_k} / (u - x_j) du.
 *
 * With beta_1 = n+1 and beta_k = 1 otherwise,
 *   nu_{n,j}' = sum_{k!=j} (xdot_j - xdot_k)(alpha_k + beta_k)(nu_{n,j} - nu_{n,k})/(x_j - x_k).
 * The integrand is a polynomial times the weight, so initial values and checks
 * need no singular transform.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "scop/error.hpp"
#include "scop/ode.hpp"
#include "scop/orthopoly.hpp"
#include "scop/quadrature.hpp"
#include "scop/weight.hpp"

namespace scop {

struct MomentState {
  int n = 0;
  double t = 0.0;
  std::vector<double> nu;
};

/// beta_1 = n+1, beta_2..beta_m = 1
inline std::vector<double> moment_exponents(int n, std::size_t m) {
  std::vector<double> beta(m, 1.0);
  beta[0] = n + 1.0;
  return beta;
}

inline std::vector<double> moment_rhs(const MomentState& s, const NodeData& nd, std::span<const double> alpha,
                                      std::span<const double> beta) {
  const std::size_t m = nd.size();
  for (std::size_t k = 1; k < m; ++k) {
    if (!(nd.x[k - 1] < nd.x[k]))
      throw error(errc::non_distinct_endpoints, "endpoints not strictly increasing at t=" + std::to_string(nd.t));
  }
  std::vector<double> d(m, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t k = 0; k < m; ++k) {
      if (k == j) continue;
      const double rel = nd.xdot[j] - nd.xdot[k];
      if (rel == 0.0) continue;
      d[j] += rel * (alpha[k] + beta[k]) * (s.nu[j] - s.nu[k]) / (nd.x[j] - nd.x[k]);
    }
  }
  return d;
}

/// nu_{n,j} at time t by quadrature of the defining integral.
inline MomentState moments_by_quadrature(const GeneralizedJacobiWeight& w, int n, double t,
                                         int npts = default_quadrature_points) {
  if (n < 0) throw error(errc::index_out_of_range, "moment index must be non-negative");
  const auto measure = discretize(w, t, npts);
  const auto x = w.trajectory().positions(t);
  const std::size_t m = x.size();
  MomentState s;
  s.n = n;
  s.t = t;
  s.nu.assign(m, 0.0);
  for (std::size_t i = 0; i < measure.size(); ++i) {
    const double u = measure.nodes[i];
    const double lead = std::pow(u - x[0], n);
    for (std::size_t j = 0; j < m; ++j) {
      // prod_k (u-x_k)^{beta_k} / (u-x_j) expanded without division
      double v = lead;
      if (j != 0) v *= u - x[0];
      for (std::size_t k = 1; k < m; ++k) {
        if (k != j) v *= u - x[k];
      }
      s.nu[j] += measure.weights[i] * v;
    }
  }
  return s;
}

struct MomentFlowReport {
  std::vector<MomentState> samples;
  IntegratorStats stats;
};

struct MomentFlowOptions {
  double rtol = 1e-9;
  double atol = 1e-12;
  int samples = 20;
  int npts = default_quadrature_points;
};

/// Integrate the flow from arbitrary initial values; the system is linear in nu.
inline MomentFlowReport integrate_moment_flow(const GeneralizedJacobiWeight& w, int n, std::span<const double> nu0,
                                              double t0, double t1, const MomentFlowOptions& opts = {}) {
  const auto beta = moment_exponents(n, w.m());
  const auto times = sample_times(t0, t1, opts.samples);

  MomentFlowReport report;
  report.samples.resize(times.size());
  const OdeRhs rhs = [&](double t, std::span<const double> y, std::span<double> dy) {
    if (!w.trajectory().ordered_at(t))
      throw error(errc::endpoint_collision, "endpoints not strictly increasing at t=" + std::to_string(t));
    MomentState s{n, t, {y.begin(), y.end()}};
    const auto d = moment_rhs(s, node_data(w, t), w.alpha(), beta);
    std::copy(d.begin(), d.end(), dy.begin());
  };
  StepperOptions so;
  so.rtol = opts.rtol;
  so.atol = opts.atol;
  DormandPrince45 stepper(so);
  try {
    stepper.integrate(rhs, times, {nu0.begin(), nu0.end()}, [&](std::size_t i, std::span<const double> y) {
      report.samples[i] = MomentState{n, times[i], {y.begin(), y.end()}};
    });
  } catch (const integration_failure& e) {
    rethrow_with_collision_check(e, w.trajectory(), t0, t1);
  }
  report.stats = stepper.stats();
  return report;
}

inline MomentFlowReport evolve_moments(const GeneralizedJacobiWeight& w, int n, double t0, double t1,
                                       const MomentFlowOptions& opts = {}) {
  const auto init = moments_by_quadrature(w, n, t0, opts.npts);
  return integrate_moment_flow(w, n, init.nu, t0, t1, opts);
}

struct MuIdentity {
  double mu_n = 0.0;
  double nu_n1 = 0.0;
  double gap = 0.0;  ///< |mu_n - nu_{n,1}| / max(|mu_n|, |nu_{n,1}|)
};

/// Measures how far the moment mu_n = int w (u-x_1)^n du is from nu_{n,1}.
inline MuIdentity check_mu_identity(const GeneralizedJacobiWeight& w, int n, double t,
                                    int npts = default_quadrature_points) {
  MuIdentity r;
  r.mu_n = moments(w, t, n, npts)[static_cast<std::size_t>(n)];
  r.nu_n1 = moments_by_quadrature(w, n, t, npts).nu[0];
  const double scale = std::max(std::abs(r.mu_n), std::abs(r.nu_n1));
  r.gap = scale > 0.0 ? std::abs(r.mu_n - r.nu_n1) / scale : 0.0;
  return r;
}

/// Hankel determinants H_1..H_kmax of the moments about x_1 at time t.
inline std::vector<double> hankel_profile(const GeneralizedJacobiWeight& w, double t, int kmax,
                                          int npts = default_quadrature_points) {
  const auto mu = moments(w, t, 2 * kmax - 2 < 0 ? 0 : 2 * kmax - 2, npts);
  std::vector<double> h;
  for (int k = 1; k <= kmax; ++k) h.push_back(hankel_det(mu, k));
  return h;
}

}  // namespace scop
