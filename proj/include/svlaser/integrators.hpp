#pragma once

// Explicit Runge-Kutta steppers for Eigen-valued states (vectors or matrices).

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "svlaser/errors.hpp"

namespace svl {

enum class StepMethod { adaptive, fixed };

struct IntegratorConfig {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  double max_step = std::numeric_limits<double>::infinity();
  double min_step = 1e-12;
  StepMethod method = StepMethod::adaptive;
  // Step for StepMethod::fixed (classical RK4); clipped to max_step.
  double fixed_step = 1e-3;

  void validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw ConfigError("integrator tolerances must be positive");
    if (!(max_step > 0.0)) throw ConfigError("integrator max_step must be positive");
    if (!(min_step > 0.0) || min_step > max_step) throw ConfigError("integrator min_step must lie in (0, max_step]");
    if (method == StepMethod::fixed && !(fixed_step > 0.0)) throw ConfigError("integrator fixed_step must be positive");
  }

  IntegratorConfig halved() const {
    IntegratorConfig c = *this;
    c.rel_tol *= 0.5;
    c.abs_tol *= 0.5;
    c.fixed_step *= 0.5;
    return c;
  }
};

struct IntegratorStats {
  long long accepted = 0;
  long long rejected = 0;
  long long rhs_evals = 0;
  double smallest_step = std::numeric_limits<double>::infinity();
  double largest_step = 0.0;

  void note_step(double h) {
    ++accepted;
    smallest_step = std::min(smallest_step, h);
    largest_step = std::max(largest_step, h);
  }
  void merge(const IntegratorStats& o) {
    accepted += o.accepted;
    rejected += o.rejected;
    rhs_evals += o.rhs_evals;
    smallest_step = std::min(smallest_step, o.smallest_step);
    largest_step = std::max(largest_step, o.largest_step);
  }
};

namespace detail {

template <class State>
double scaled_error(const State& err, const State& y0, const State& y1, double atol, double rtol) {
  const auto scale = (atol + rtol * y0.cwiseAbs().cwiseMax(y1.cwiseAbs()).array());
  return (err.cwiseAbs().array() / scale).maxCoeff();
}

}  // namespace detail

// Dormand-Prince 5(4) from t0 to t1. rhs(t, y, dy) writes dy; post(y) runs
// after every accepted step. h is the step guess on entry and the proposed
// next step on exit.
template <class State, class Rhs, class Post>
void integrate_dopri5(Rhs&& rhs, Post&& post, double t0, double t1, State& y, double& h,
                      const IntegratorConfig& cfg, IntegratorStats& stats) {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;

  if (!(t1 > t0)) return;
  if (!(h > 0.0) || !std::isfinite(h)) h = std::min(cfg.max_step, (t1 - t0));
  h = std::min(h, cfg.max_step);

  State k1, k2, k3, k4, k5, k6, k7, tmp, y1, err;
  double t = t0;
  rhs(t, y, k1);
  ++stats.rhs_evals;
  while (t < t1) {
    bool last = false;
    double step = h;
    if (t + step >= t1 || t1 - (t + step) < 1e-12 * std::abs(t1)) {
      step = t1 - t;
      last = true;
    }
    tmp = y + step * (a21 * k1);
    rhs(t + c2 * step, tmp, k2);
    tmp = y + step * (a31 * k1 + a32 * k2);
    rhs(t + c3 * step, tmp, k3);
    tmp = y + step * (a41 * k1 + a42 * k2 + a43 * k3);
    rhs(t + c4 * step, tmp, k4);
    tmp = y + step * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    rhs(t + c5 * step, tmp, k5);
    tmp = y + step * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    rhs(t + step, tmp, k6);
    y1 = y + step * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    rhs(t + step, y1, k7);
    stats.rhs_evals += 6;
    err = step * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    double e = detail::scaled_error(err, y, y1, cfg.abs_tol, cfg.rel_tol);
    if (!std::isfinite(e)) e = 1e10;
    const double factor = e > 0.0 ? std::clamp(0.9 * std::pow(e, -0.2), 0.2, 5.0) : 5.0;
    if (e <= 1.0) {
      t = last ? t1 : t + step;
      y = std::move(y1);
      post(y);
      stats.note_step(step);
      // FSAL: k7 is f(t, y) unless post() changed y.
      rhs(t, y, k1);
      ++stats.rhs_evals;
      if (!last || step >= h) h = std::min(cfg.max_step, step * factor);
    } else {
      ++stats.rejected;
      h = step * std::max(0.2, factor);
      if (h < cfg.min_step) {
        std::ostringstream os;
        os << "adaptive step fell below min_step = " << cfg.min_step << " at t = " << t
           << " (scaled error " << e << "); the problem is stiff at these tolerances";
        throw StiffnessError(os.str());
      }
    }
  }
}

// Classical RK4 with the largest uniform step <= cfg.fixed_step that divides [t0, t1].
template <class State, class Rhs, class Post>
void integrate_rk4(Rhs&& rhs, Post&& post, double t0, double t1, State& y, const IntegratorConfig& cfg,
                   IntegratorStats& stats) {
  if (!(t1 > t0)) return;
  const double target = std::min(cfg.fixed_step, cfg.max_step);
  const long long n = std::max(1LL, static_cast<long long>(std::ceil((t1 - t0) / target - 1e-9)));
  const double h = (t1 - t0) / static_cast<double>(n);
  State k1, k2, k3, k4, tmp;
  for (long long i = 0; i < n; ++i) {
    const double t = t0 + static_cast<double>(i) * h;
    rhs(t, y, k1);
    tmp = y + (0.5 * h) * k1;
    rhs(t + 0.5 * h, tmp, k2);
    tmp = y + (0.5 * h) * k2;
    rhs(t + 0.5 * h, tmp, k3);
    tmp = y + h * k3;
    rhs(t + h, tmp, k4);
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    stats.rhs_evals += 4;
    post(y);
    stats.note_step(h);
  }
}

template <class State, class Rhs, class Post>
void integrate(Rhs&& rhs, Post&& post, double t0, double t1, State& y, double& h, const IntegratorConfig& cfg,
               IntegratorStats& stats) {
  if (cfg.method == StepMethod::fixed)
    integrate_rk4(rhs, post, t0, t1, y, cfg, stats);
  else
    integrate_dopri5(rhs, post, t0, t1, y, h, cfg, stats);
}

}  // namespace svl
