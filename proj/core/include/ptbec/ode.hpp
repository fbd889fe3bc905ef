#pragma once

// Dormand-Prince 5(4) integrator with embedded error control, shared by the
// master-equation, moment-hierarchy and mean-field engines. The state type is
// any Eigen column vector (real or complex, fixed or dynamic size).

#include "ptbec/errors.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ptbec {

struct OdeOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  double max_step = std::numeric_limits<double>::infinity();
  double initial_step = 0.0;  // 0 selects a step from the initial slope
  long max_steps = 50'000'000;
};

struct OdeStats {
  long accepted = 0;
  long rejected = 0;
  long rhs_evaluations = 0;
};

namespace detail {

template <class Vec>
double scaled_error(const Vec& err, const Vec& y0, const Vec& y1, const OdeOptions& opt) {
  const auto scale = (opt.abs_tol + opt.rel_tol * y0.cwiseAbs().cwiseMax(y1.cwiseAbs()).array()).eval();
  return (err.cwiseAbs().array() / scale).maxCoeff();
}

struct NoPostStep {
  template <class Vec>
  void operator()(double, Vec&) const {}
};

}  // namespace detail

/// Integrates y' = f(t, y) from t0 to t1. `rhs(t, y, dydt)` writes the
/// derivative. `sample(t, y)` is called at t0, at t0 + k * sample_dt, and at
/// t1 (steps are shortened to land exactly on those times; sample_dt <= 0
/// samples only the end points). `post_step(t, y)` may project y after each
/// accepted step. Throws StepUnderflowError when the controller stalls.
template <class Vec, class Rhs, class Sample, class PostStep = detail::NoPostStep>
OdeStats integrate_dopri5(Rhs&& rhs, Vec& y, double t0, double t1, double sample_dt,
                          const OdeOptions& opt, Sample&& sample, PostStep&& post_step = {}) {
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                   a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                   a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                   b6 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                   e6 = 22.0 / 525, e7 = -1.0 / 40;

  if (!(opt.abs_tol > 0.0) || !(opt.rel_tol > 0.0)) {
    throw InvalidArgument("integrator tolerances must be > 0");
  }
  if (!(t1 >= t0)) throw InvalidArgument("integration interval must satisfy t1 >= t0");

  OdeStats stats;
  sample(t0, static_cast<const Vec&>(y));
  if (t1 == t0) return stats;

  Vec k1 = y, k2 = y, k3 = y, k4 = y, k5 = y, k6 = y, k7 = y, tmp = y, y_new = y, err = y;
  rhs(t0, y, k1);
  ++stats.rhs_evaluations;

  double h = opt.initial_step;
  if (!(h > 0.0)) {
    const double d0 = y.cwiseAbs().maxCoeff();
    const double d1 = k1.cwiseAbs().maxCoeff();
    h = (d0 > 1e-5 && d1 > 1e-5) ? 0.01 * d0 / d1 : 1e-6;
    h = std::max(h, 1e-8 * std::max(1.0, std::abs(t1 - t0)));
  }
  h = std::min({h, opt.max_step, t1 - t0});

  long sample_index = 1;
  auto next_sample = [&]() {
    if (!(sample_dt > 0.0)) return t1;
    return std::min(t1, t0 + static_cast<double>(sample_index) * sample_dt);
  };

  double t = t0;
  double target = next_sample();
  long steps = 0;
  while (t < t1) {
    if (++steps > opt.max_steps) {
      throw StepUnderflowError("integrator exceeded the maximum number of steps", t, h);
    }
    bool hits_target = false;
    double step = h;
    if (t + step >= target || target - (t + step) < 1e-12 * std::max(1.0, std::abs(target))) {
      step = target - t;
      hits_target = true;
    }
    const double h_floor = 1e-13 * std::max(1.0, std::abs(t));
    if (step < h_floor) {
      throw StepUnderflowError("step size underflow at t=" + std::to_string(t), t, step);
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
    y_new = y + step * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    rhs(t + step, y_new, k7);
    stats.rhs_evaluations += 6;
    err = step * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    double e = detail::scaled_error(err, y, y_new, opt);
    if (!std::isfinite(e)) e = 1e10;

    if (e <= 1.0) {
      ++stats.accepted;
      t = hits_target ? target : t + step;
      y.swap(y_new);
      post_step(t, y);
      k1.swap(k7);
      if (hits_target) {
        sample(t, static_cast<const Vec&>(y));
        ++sample_index;
        target = next_sample();
      }
      const double grown = step * std::clamp(e > 0.0 ? 0.9 * std::pow(e, -0.2) : 5.0, 0.2, 5.0);
      // A step shortened to land on a sample time says nothing about the
      // controller's natural step; keep the larger proposal.
      h = hits_target ? std::max(h, grown) : grown;
    } else {
      ++stats.rejected;
      h = step * std::clamp(0.9 * std::pow(e, -0.2), 0.1, 0.9);
    }
    h = std::min(h, opt.max_step);
  }
  return stats;
}

}  // namespace ptbec
