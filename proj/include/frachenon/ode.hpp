#pragma once

// Dormand-Prince 5(4) integrator with adaptive step control and a stop predicate.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

namespace frachenon::ode {

struct Options {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double initial_step = 1e-3;
  int max_steps = 200000;
};

enum class Outcome { ReachedEnd, Stopped, StepLimit, StepUnderflow };

template <std::size_t M>
struct Solution {
  double x = 0.0;
  std::array<double, M> y{};
  Outcome outcome = Outcome::ReachedEnd;
  int steps = 0;
};

/// Integrates y' = f(x, y) from x0 to x1 > x0. After every accepted step `stop(x, y)`
/// is consulted; a true return ends the integration with Outcome::Stopped.
template <std::size_t M, typename F, typename Stop>
Solution<M> dopri5(const F& f, double x0, double x1, std::array<double, M> y0, const Options& opt,
                   const Stop& stop) {
  using State = std::array<double, M>;
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  // Difference between the 5th-order and embedded 4th-order weights.
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  Solution<M> sol;
  sol.x = x0;
  sol.y = y0;
  double h = std::min(opt.initial_step, x1 - x0);
  State k1 = f(x0, y0);
  auto axpy = [](const State& y, std::initializer_list<std::pair<double, const State*>> terms,
                 double step) {
    State out = y;
    for (const auto& [c, k] : terms) {
      for (std::size_t i = 0; i < M; ++i) out[i] += step * c * (*k)[i];
    }
    return out;
  };

  while (sol.x < x1) {
    if (sol.steps >= opt.max_steps) {
      sol.outcome = Outcome::StepLimit;
      return sol;
    }
    if (sol.x + h > x1) h = x1 - sol.x;
    if (h <= 1e-15 * std::max(1.0, std::abs(sol.x))) {
      sol.outcome = Outcome::StepUnderflow;
      return sol;
    }
    const double x = sol.x;
    const State& y = sol.y;
    const State k2 = f(x + c2 * h, axpy(y, {{a21, &k1}}, h));
    const State k3 = f(x + c3 * h, axpy(y, {{a31, &k1}, {a32, &k2}}, h));
    const State k4 = f(x + c4 * h, axpy(y, {{a41, &k1}, {a42, &k2}, {a43, &k3}}, h));
    const State k5 = f(x + c5 * h, axpy(y, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}, h));
    const State k6 =
        f(x + h, axpy(y, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}, h));
    const State ynew = axpy(y, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}}, h);
    const State k7 = f(x + h, ynew);

    double err = 0.0;
    for (std::size_t i = 0; i < M; ++i) {
      const double e =
          h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double scale = opt.abs_tol + opt.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      err = std::max(err, std::abs(e) / scale);
    }
    if (err <= 1.0) {
      sol.x = x + h;
      sol.y = ynew;
      k1 = k7;
      ++sol.steps;
      if (stop(sol.x, sol.y)) {
        sol.outcome = Outcome::Stopped;
        return sol;
      }
    }
    const double factor = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
    h *= factor;
  }
  sol.outcome = Outcome::ReachedEnd;
  return sol;
}

}  // namespace frachenon::ode
