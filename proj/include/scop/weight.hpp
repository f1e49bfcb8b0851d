#pragma once

/**
 * @file weight.hpp
 * @brief Generalized Jacobi weights with moving endpoints.
 *
 * A weight is piecewise C_j * prod_k |x - x_k(t)|^{alpha_k} on [x_j, x_{j+1}]
 * and zero outside [x_1, x_m]. Only the endpoints move with t; the exponents
 * and piece constants are fixed. The node polynomial is W(x) = prod (x - x_k)
 * and V is the degree <= m-1 polynomial with w'/w = 2V/W, carried as node
 * values V(x_k) = alpha_k W'(x_k) / 2.
 */

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "scop/error.hpp"

namespace scop {

/// Endpoint positions x_k(t) = sum_i c_{k,i} t^i, one coefficient list per endpoint.
class EndpointTrajectory {
 public:
  EndpointTrajectory() = default;

  explicit EndpointTrajectory(std::vector<std::vector<double>> coefficients, double reference_time = 0.0)
      : coeffs_(std::move(coefficients)), t_ref_(reference_time) {
    for (auto& c : coeffs_) {
      if (c.empty()) c.push_back(0.0);
    }
  }

  static EndpointTrajectory fixed(std::span<const double> x) {
    std::vector<std::vector<double>> c;
    for (double xk : x) c.push_back({xk});
    return EndpointTrajectory(std::move(c));
  }

  /// x_k(t) = start_k + velocity_k * t
  static EndpointTrajectory affine(std::span<const double> start, std::span<const double> velocity) {
    if (start.size() != velocity.size())
      throw error(errc::config_error, "affine trajectory: start and velocity lengths differ");
    std::vector<std::vector<double>> c;
    for (std::size_t k = 0; k < start.size(); ++k) c.push_back({start[k], velocity[k]});
    return EndpointTrajectory(std::move(c));
  }

  std::size_t size() const noexcept { return coeffs_.size(); }
  double reference_time() const noexcept { return t_ref_; }
  const std::vector<std::vector<double>>& coefficients() const noexcept { return coeffs_; }

  double position(std::size_t k, double t) const {
    const auto& c = coeffs_[k];
    double v = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * t + *it;
    return v;
  }

  double velocity(std::size_t k, double t) const {
    const auto& c = coeffs_[k];
    double v = 0.0;
    for (std::size_t i = c.size(); i-- > 1;) v = v * t + static_cast<double>(i) * c[i];
    return v;
  }

  std::vector<double> positions(double t) const {
    std::vector<double> x(size());
    for (std::size_t k = 0; k < size(); ++k) x[k] = position(k, t);
    return x;
  }

  std::vector<double> velocities(double t) const {
    std::vector<double> v(size());
    for (std::size_t k = 0; k < size(); ++k) v[k] = velocity(k, t);
    return v;
  }

  bool ordered_at(double t) const {
    auto x = positions(t);
    for (std::size_t k = 1; k < x.size(); ++k) {
      if (!(x[k - 1] < x[k])) return false;
    }
    return true;
  }

 private:
  std::vector<std::vector<double>> coeffs_;
  double t_ref_ = 0.0;
};

/// Endpoint snapshot at one time: positions, velocities and W'(x_j).
struct NodeData {
  double t = 0.0;
  std::vector<double> x;
  std::vector<double> xdot;
  std::vector<double> wprime;

  std::size_t size() const noexcept { return x.size(); }
};

/// W'(x_j) = prod_{k != j} (x_j - x_k)
inline std::vector<double> node_derivatives(std::span<const double> x) {
  std::vector<double> wp(x.size(), 1.0);
  for (std::size_t j = 0; j < x.size(); ++j) {
    for (std::size_t k = 0; k < x.size(); ++k) {
      if (k != j) wp[j] *= x[j] - x[k];
    }
  }
  return wp;
}

/**
 * @brief Barycentric evaluation of the degree <= m-1 interpolant through (x_j, values_j).
 *
 * The barycentric weights for distinct nodes are 1/W'(x_j).
 */
inline double barycentric_eval(std::span<const double> x, std::span<const double> wprime,
                               std::span<const double> values, double at) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double d = at - x[j];
    if (d == 0.0) return values[j];
    const double c = 1.0 / (wprime[j] * d);
    num += c * values[j];
    den += c;
  }
  return num / den;
}

class GeneralizedJacobiWeight {
 public:
  GeneralizedJacobiWeight(std::vector<double> alpha, std::vector<double> pieces, EndpointTrajectory trajectory)
      : alpha_(std::move(alpha)), pieces_(std::move(pieces)), traj_(std::move(trajectory)) {
    const std::size_t m = alpha_.size();
    if (m < 2) throw error(errc::config_error, "a weight needs at least two endpoints");
    if (pieces_.size() != m - 1)
      throw error(errc::config_error, "pieces must have length m-1 (m=" + std::to_string(m) + ")");
    if (traj_.size() != m)
      throw error(errc::config_error, "trajectory must have one entry per endpoint (m=" + std::to_string(m) + ")");
    for (std::size_t k = 0; k < m; ++k) {
      if (!std::isfinite(alpha_[k]) || alpha_[k] <= -1.0)
        throw error(errc::bad_exponent, "alpha[" + std::to_string(k) + "] must exceed -1");
    }
    for (std::size_t j = 0; j + 1 < m; ++j) {
      if (!std::isfinite(pieces_[j]) || pieces_[j] <= 0.0)
        throw error(errc::bad_constant, "pieces[" + std::to_string(j) + "] must be positive");
    }
    if (!traj_.ordered_at(traj_.reference_time()))
      throw error(errc::non_distinct_endpoints,
                  "endpoints not strictly increasing at t=" + std::to_string(traj_.reference_time()));
  }

  std::size_t m() const noexcept { return alpha_.size(); }
  const std::vector<double>& alpha() const noexcept { return alpha_; }
  const std::vector<double>& pieces() const noexcept { return pieces_; }
  const EndpointTrajectory& trajectory() const noexcept { return traj_; }

  double alpha_sum() const noexcept {
    double s = 0.0;
    for (double a : alpha_) s += a;
    return s;
  }

  bool all_exponents_positive() const noexcept {
    for (double a : alpha_) {
      if (!(a > 0.0)) return false;
    }
    return true;
  }

 private:
  std::vector<double> alpha_;
  std::vector<double> pieces_;
  EndpointTrajectory traj_;
};

inline GeneralizedJacobiWeight make_weight(std::vector<double> alpha, std::vector<double> pieces,
                                           EndpointTrajectory trajectory) {
  return GeneralizedJacobiWeight(std::move(alpha), std::move(pieces), std::move(trajectory));
}

inline NodeData node_data(const GeneralizedJacobiWeight& w, double t) {
  NodeData nd;
  nd.t = t;
  nd.x = w.trajectory().positions(t);
  for (std::size_t k = 1; k < nd.x.size(); ++k) {
    if (!(nd.x[k - 1] < nd.x[k]))
      throw error(errc::non_distinct_endpoints, "endpoints not strictly increasing at t=" + std::to_string(t));
  }
  nd.xdot = w.trajectory().velocities(t);
  nd.wprime = node_derivatives(nd.x);
  return nd;
}

/**
 * @brief Evaluate w(x, t).
 *
 * Zero outside [x_1, x_m]. At an endpoint with alpha_k > 0 the value is 0; with
 * alpha_k = 0 the piece to the right of x_k is used (left piece at x_m); with
 * alpha_k < 0 the value is infinite and NonFinite is raised.
 */
inline double eval_weight(const GeneralizedJacobiWeight& w, double x, double t) {
  const auto nodes = w.trajectory().positions(t);
  const std::size_t m = nodes.size();
  if (x < nodes.front() || x > nodes.back()) return 0.0;

  for (std::size_t k = 0; k < m; ++k) {
    if (x == nodes[k]) {
      const double a = w.alpha()[k];
      if (a > 0.0) return 0.0;
      if (a < 0.0) throw error(errc::non_finite, "weight is unbounded at endpoint " + std::to_string(k));
    }
  }

  std::size_t piece = 0;
  while (piece + 2 < m && x >= nodes[piece + 1]) ++piece;

  double v = w.pieces()[piece];
  for (std::size_t k = 0; k < m; ++k) {
    const double d = std::abs(x - nodes[k]);
    if (d != 0.0) v *= std::pow(d, w.alpha()[k]);
  }
  return v;
}

/// V(x_k) = alpha_k W'(x_k) / 2
inline std::vector<double> v_node_values(const GeneralizedJacobiWeight& w, const NodeData& nd) {
  std::vector<double> v(nd.size());
  for (std::size_t k = 0; k < nd.size(); ++k) v[k] = 0.5 * w.alpha()[k] * nd.wprime[k];
  return v;
}

inline double eval_V(const GeneralizedJacobiWeight& w, double x, double t) {
  const auto nd = node_data(w, t);
  const auto vals = v_node_values(w, nd);
  return barycentric_eval(nd.x, nd.wprime, vals, x);
}

struct LogDerivatives {
  double V = 0.0;
  double dlogw_dx = 0.0;
  double dlogw_dt = 0.0;
};

/// V(x) together with d/dx log w = sum alpha_k/(x-x_k) and d/dt log w = -sum alpha_k xdot_k/(x-x_k).
inline LogDerivatives eval_V_and_logderivs(const GeneralizedJacobiWeight& w, double x, double t) {
  const auto nd = node_data(w, t);
  LogDerivatives out;
  out.V = barycentric_eval(nd.x, nd.wprime, v_node_values(w, nd), x);
  for (std::size_t k = 0; k < nd.size(); ++k) {
    const double d = x - nd.x[k];
    if (d == 0.0) throw error(errc::node_collision, "log-derivative requested at node " + std::to_string(k));
    out.dlogw_dx += w.alpha()[k] / d;
    out.dlogw_dt -= w.alpha()[k] * nd.xdot[k] / d;
  }
  return out;
}

/// W(x) = prod (x - x_k)
inline double eval_node_polynomial(std::span<const double> nodes, double x) {
  double v = 1.0;
  for (double xk : nodes) v *= x - xk;
  return v;
}

}  // namespace scop
