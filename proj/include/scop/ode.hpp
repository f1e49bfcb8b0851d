#pragma once

/**
 * @file ode.hpp
 * @brief Dormand-Prince 5(4) integrator with PI step-size control.
 *
 * The integrator visits a list of output times exactly (steps are clipped to
 * land on them) and carries the step size across output segments.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "scop/error.hpp"

namespace scop {

struct StepperOptions {
  double rtol = 1e-9;
  double atol = 1e-12;
  double initial_step = 0.0;          ///< 0 picks a step from the initial slope
  double min_step_fraction = 1e-12;   ///< StepCollapse below this fraction of the span
  std::size_t max_steps = 100000;
};

struct IntegratorStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t rhs_evals = 0;
};

namespace detail {

inline std::string format_time(double t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", t);
  return buf;
}

}  // namespace detail

/// Raised when the step size collapses or the step budget runs out.
class integration_failure : public error {
 public:
  integration_failure(errc code, const std::string& what, double last_t, std::vector<double> last_state)
      : error(code, what), last_t_(last_t), last_state_(std::move(last_state)) {}

  double last_t() const noexcept { return last_t_; }
  const std::vector<double>& last_state() const noexcept { return last_state_; }

 private:
  double last_t_;
  std::vector<double> last_state_;
};

/// Uniform sample times t0..t1 inclusive.
inline std::vector<double> sample_times(double t0, double t1, int samples) {
  const int count = std::max(samples, 2);
  std::vector<double> ts(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) ts[i] = t0 + (t1 - t0) * static_cast<double>(i) / (count - 1);
  ts.back() = t1;
  return ts;
}

/**
 * @brief Reclassify a step failure near a node collision as EndpointCollision.
 *
 * Close to a collision the flow itself is singular, so the step size may
 * collapse before any stage lands past the collision time.
 */
template <class Trajectory>
inline void rethrow_with_collision_check(const integration_failure& e, const Trajectory& traj, double t0, double t1) {
  if (e.code() != errc::step_collapse) throw e;
  const auto x0 = traj.positions(t0);
  const double width = x0.back() - x0.front();
  const double t = e.last_t();
  const auto x = traj.positions(t);
  double gap = width;
  for (std::size_t k = 1; k < x.size(); ++k) gap = std::min(gap, x[k] - x[k - 1]);
  const double probe = t + 1e-6 * (t1 - t0);
  if (gap <= 1e-6 * width || !traj.ordered_at(probe)) {
    throw integration_failure(errc::endpoint_collision,
                              "endpoints collide; last good t=" + detail::format_time(t),
                              t, e.last_state());
  }
  throw e;
}

using OdeRhs = std::function<void(double t, std::span<const double> y, std::span<double> dydt)>;

/// Called after each accepted step with (t, y); may throw to abort. Returns true if it modified y.
using StepObserver = std::function<bool(double t, std::span<double> y)>;

class DormandPrince45 {
 public:
  explicit DormandPrince45(StepperOptions opts = {}) : opts_(opts) {}

  const IntegratorStats& stats() const noexcept { return stats_; }

  /**
   * @brief Integrate from times.front() through every entry of `times`.
   *
   * `on_output(i, y)` receives the state at times[i], including the initial one.
   */
  void integrate(const OdeRhs& rhs, std::span<const double> times, std::vector<double> y,
                 const std::function<void(std::size_t, std::span<const double>)>& on_output,
                 const StepObserver& on_step = {}) {
    if (times.empty()) return;
    const double span = std::abs(times.back() - times.front());
    const double dir = times.back() >= times.front() ? 1.0 : -1.0;
    const std::size_t dim = y.size();
    for (auto& k : k_) k.assign(dim, 0.0);
    ynew_.assign(dim, 0.0);
    tmp_.assign(dim, 0.0);
    err_.assign(dim, 0.0);

    double t = times.front();
    on_output(0, y);
    if (times.size() == 1 || span == 0.0) {
      for (std::size_t i = 1; i < times.size(); ++i) on_output(i, y);
      return;
    }

    eval(rhs, t, y, k_[0]);
    double h = opts_.initial_step > 0.0 ? opts_.initial_step : initial_step(y, span);
    h = std::min(h, span);
    const double h_min = opts_.min_step_fraction * span;
    double err_prev = 1.0;

    for (std::size_t out = 1; out < times.size(); ++out) {
      const double target = times[out];
      while (dir * (target - t) > 0.0) {
        if (stats_.accepted + stats_.rejected >= opts_.max_steps)
          throw integration_failure(errc::step_collapse,
                                    "step budget exhausted; last good t=" + detail::format_time(t), t, y);
        if (h < h_min) {
          if (collided_)
            throw integration_failure(errc::endpoint_collision,
                                      "endpoints collide; last good t=" + detail::format_time(t), t, y);
          throw integration_failure(errc::step_collapse,
                                    "step size " + detail::format_time(h) + " collapsed (pole candidate); last good t=" +
                                        detail::format_time(t),
                                    t, y);
        }
        const double remaining = dir * (target - t);
        const bool clipped = h >= remaining;
        const double step = clipped ? remaining : h;
        const double err = attempt(rhs, t, y, dir * step);
        if (err <= 1.0) {
          t = clipped ? target : t + dir * step;
          std::swap(y, ynew_);
          std::swap(k_[0], k_[6]);  // FSAL
          ++stats_.accepted;
          collided_ = false;
          if (on_step && on_step(t, y)) eval(rhs, t, y, k_[0]);
          double fac = err == 0.0 ? 10.0 : 0.9 * std::pow(err, -0.7 / 5.0) * std::pow(err_prev, 0.4 / 5.0);
          fac = std::clamp(fac, 0.2, 10.0);
          err_prev = std::max(err, 1e-4);
          h = (clipped && fac >= 1.0) ? std::max(h, step * fac) : step * fac;
        } else {
          ++stats_.rejected;
          const double fac = std::isfinite(err) ? std::max(0.2, 0.9 * std::pow(err, -1.0 / 5.0)) : 0.2;
          h = step * fac;
        }
      }
      t = target;
      on_output(out, y);
    }
  }

 private:
  void eval(const OdeRhs& rhs, double t, std::span<const double> y, std::vector<double>& dy) {
    rhs(t, y, dy);
    ++stats_.rhs_evals;
  }

  double initial_step(const std::vector<double>& y, double span) const {
    double d0 = 0.0, d1 = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double sc = opts_.atol + opts_.rtol * std::abs(y[i]);
      d0 += (y[i] / sc) * (y[i] / sc);
      d1 += (k_[0][i] / sc) * (k_[0][i] / sc);
    }
    d0 = std::sqrt(d0 / static_cast<double>(y.size()));
    d1 = std::sqrt(d1 / static_cast<double>(y.size()));
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 * span : 0.01 * d0 / d1;
    h0 = std::min(h0, span);
    return std::max(h0, 1e-6 * span);
  }

  // One trial step of size h from (t, y); k_[0] holds f(t, y) on entry.
  double attempt(const OdeRhs& rhs, double t, const std::vector<double>& y, double h) {
    static constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
    static constexpr double a21 = 1.0 / 5.0;
    static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
    static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
    static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                            a54 = -212.0 / 729.0;
    static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                            a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
    static constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0, b5 = -2187.0 / 6784.0,
                            b6 = 11.0 / 84.0;
    static constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                            e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

    const std::size_t n = y.size();
    auto& k1 = k_[0];
    auto& k2 = k_[1];
    auto& k3 = k_[2];
    auto& k4 = k_[3];
    auto& k5 = k_[4];
    auto& k6 = k_[5];
    auto& k7 = k_[6];

    try {
      for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + h * a21 * k1[i];
      eval(rhs, t + c2 * h, tmp_, k2);
      for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
      eval(rhs, t + c3 * h, tmp_, k3);
      for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
      eval(rhs, t + c4 * h, tmp_, k4);
      for (std::size_t i = 0; i < n; ++i)
        tmp_[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
      eval(rhs, t + c5 * h, tmp_, k5);
      for (std::size_t i = 0; i < n; ++i)
        tmp_[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
      eval(rhs, t + h, tmp_, k6);
      for (std::size_t i = 0; i < n; ++i)
        ynew_[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
      eval(rhs, t + h, ynew_, k7);
    } catch (const error& e) {
      // Stage times outside the admissible region reject the step; the caller shrinks h.
      if (e.code() == errc::endpoint_collision || e.code() == errc::non_distinct_endpoints) {
        collided_ = true;
        return std::numeric_limits<double>::infinity();
      }
      throw;
    }

    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      err_[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double sc = opts_.atol + opts_.rtol * std::max(std::abs(y[i]), std::abs(ynew_[i]));
      const double r = err_[i] / sc;
      acc += r * r;
      if (!std::isfinite(ynew_[i])) return std::numeric_limits<double>::infinity();
    }
    return std::sqrt(acc / static_cast<double>(n));
  }

  StepperOptions opts_;
  IntegratorStats stats_;
  std::array<std::vector<double>, 7> k_;
  std::vector<double> ynew_, tmp_, err_;
  bool collided_ = false;
};

}  // namespace scop
