#pragma once

// Gamma-function constants of the fractional Laplacian and its extension.

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

#include "frachenon/errors.hpp"
#include "frachenon/ode.hpp"
#include "frachenon/quadrature.hpp"

namespace frachenon {

/// Dimension and fractional order. Requires 0 < s < 1, N >= 1, N > 2s.
struct FracParams {
  int N = 1;
  double s = 0.5;

  /// Empty string when admissible, otherwise the violated constraint.
  std::string violation() const {
    if (auto v = kernel_violation(); !v.empty()) return v;
    if (!(N > 2.0 * s)) return "N > 2s violated";
    return {};
  }
  /// The kernels and C_{N,s} only need 0 < s < 1 and N >= 1.
  std::string kernel_violation() const {
    if (!(s > 0.0 && s < 1.0)) return "0 < s < 1 violated (s = " + fmt(s) + ")";
    if (N < 1) return "N >= 1 violated (N = " + std::to_string(N) + ")";
    return {};
  }
  void validate() const {
    if (auto v = violation(); !v.empty()) throw ParameterError(v);
  }
  void validate_kernel() const {
    if (auto v = kernel_violation(); !v.empty()) throw ParameterError(v);
  }
  /// (N-2s)/2, the right end of the admissible alpha range.
  double alpha_max() const { return 0.5 * (N - 2.0 * s); }

  static std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
  }
};

namespace detail {

// zeta(k) - 1 for k = 2..45.
inline constexpr std::array<double, 44> kZetaMinusOne = {
    6.44934066848226406e-01, 2.02056903159594292e-01, 8.23232337111381857e-02,
    3.69277551433699266e-02, 1.73430619844491402e-02, 8.34927738192282713e-03,
    4.07735619794433960e-03, 2.00839282608221426e-03, 9.94575127818085256e-04,
    4.94188604119464529e-04, 2.46086553308048320e-04, 1.22713347578489145e-04,
    6.12481350587048277e-05, 3.05882363070204933e-05, 1.52822594086518710e-05,
    7.63719763789976257e-06, 3.81729326499984022e-06, 1.90821271655393897e-06,
    9.53962033872796212e-07, 4.76932986787806447e-07, 2.38450502727733004e-07,
    1.19219925965311064e-07, 5.96081890512594801e-08, 2.98035035146522793e-08,
    1.49015548283650427e-08, 7.45071178983543006e-09, 3.72533402478845728e-09,
    1.86265972351304914e-09, 9.31327432419668166e-10, 4.65662906503378366e-10,
    2.32831183367650534e-10, 1.16415501727005193e-10, 5.82077208790270145e-11,
    2.91038504449710001e-11, 1.45519218910419849e-11, 7.27595983505748180e-12,
    3.63797954737865086e-12, 1.81898965030706607e-12, 9.09494784026388841e-13,
    4.54747378304215422e-13, 2.27373684582465244e-13, 1.13686840768022791e-13,
    5.68434198762758542e-14, 2.84217097688930200e-14};

inline constexpr double kEulerGamma = 0.57721566490153286061;

// ln Gamma(1+z) for |z| <= 0.5 via the shifted zeta series.
inline double log_gamma_1p(double z) {
  // sum_k (zeta(k)-1) (-z)^k / k
  double sum = 0.0;
  double pk = -z;
  for (std::size_t i = 0; i < kZetaMinusOne.size(); ++i) {
    pk *= -z;
    const double term = kZetaMinusOne[i] * pk / static_cast<double>(i + 2);
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return -std::log1p(z) + z * (1.0 - kEulerGamma) + sum;
}

// Stirling series for x >= 10.
inline double log_gamma_stirling(double x) {
  static constexpr std::array<double, 10> coeff = {
      1.0 / 12.0,          -1.0 / 360.0,         1.0 / 1260.0,   -1.0 / 1680.0,
      1.0 / 1188.0,        -691.0 / 360360.0,    1.0 / 156.0,    -3617.0 / 122400.0,
      43867.0 / 244188.0,  -174611.0 / 125400.0};
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  double series = 0.0;
  double pw = inv;
  for (double c : coeff) {
    series += c * pw;
    pw *= inv2;
  }
  return (x - 0.5) * std::log(x) - x + 0.5 * std::log(2.0 * std::numbers::pi) + series;
}

}  // namespace detail

/// ln Gamma(x) for x > 0.
inline double log_gamma(double x) {
  if (!(x > 0.0) || std::isnan(x)) throw DomainError("log_gamma requires x > 0");
  if (std::isinf(x)) return x;
  if (x < 0.5) return detail::log_gamma_1p(x) - std::log(x);
  if (x <= 1.5) return detail::log_gamma_1p(x - 1.0);
  if (x <= 2.5) {
    const double w = x - 2.0;
    return std::log1p(w) + detail::log_gamma_1p(w);
  }
  if (x >= 10.0) return detail::log_gamma_stirling(x);
  // Reduce into (1.5, 2.5] by downward recurrence.
  double prod = 1.0;
  double y = x;
  while (y > 2.5) {
    y -= 1.0;
    prod *= y;
  }
  const double w = y - 2.0;
  return std::log(prod) + std::log1p(w) + detail::log_gamma_1p(w);
}

/// lambda(alpha) written in terms of the distance to the right end,
/// gap = (N-2s)/2 - alpha in (0, (N-2s)/2]; exact for tiny gaps.
inline double lambda_gap(const FracParams& fp, double gap) {
  fp.validate();
  const double amax = fp.alpha_max();
  if (!(gap > 0.0) || gap > amax) {
    throw DomainError("lambda: alpha must lie in [0, (N-2s)/2)");
  }
  const double N = fp.N;
  const double s = fp.s;
  const double lg = log_gamma(0.5 * (N - gap)) + log_gamma(s + 0.5 * gap) -
                    log_gamma(0.5 * gap) - log_gamma(0.5 * (N - 2.0 * s - gap));
  return std::exp(2.0 * s * std::numbers::ln2 + lg);
}

/// Spectral constant lambda(alpha), defined on 0 <= alpha < (N-2s)/2.
inline double lambda_alpha(const FracParams& fp, double alpha) {
  fp.validate();
  const double amax = fp.alpha_max();
  if (!(alpha >= 0.0) || !(alpha < amax)) {
    throw DomainError("lambda: alpha must lie in [0, (N-2s)/2)");
  }
  const double N = fp.N;
  const double s = fp.s;
  const double lg = log_gamma(0.25 * (N + 2 * s + 2 * alpha)) +
                    log_gamma(0.25 * (N + 2 * s - 2 * alpha)) -
                    log_gamma(0.25 * (N - 2 * s - 2 * alpha)) -
                    log_gamma(0.25 * (N - 2 * s + 2 * alpha));
  return std::exp(2.0 * s * std::numbers::ln2 + lg);
}

/// Normalisation C_{N,s} of the fractional Laplacian.
inline double frac_laplacian_constant(const FracParams& fp) {
  fp.validate_kernel();
  const double N = fp.N;
  const double s = fp.s;
  const double lg = log_gamma(0.5 * (N + 2 * s)) - log_gamma(2.0 - s);
  return std::exp(2 * s * std::numbers::ln2 - 0.5 * N * std::log(std::numbers::pi) + lg) * s *
         (1.0 - s);
}

/// kappa_s = Gamma(1-s) / (2^{2s-1} Gamma(s)).
inline double kappa_s(double s) {
  if (!(s > 0.0 && s < 1.0)) throw DomainError("kappa_s requires 0 < s < 1");
  if (s == 0.5) return 1.0;
  return std::exp(log_gamma(1.0 - s) - log_gamma(s) - (2.0 * s - 1.0) * std::numbers::ln2);
}

struct KappaOdeResult {
  double kappa = 0.0;
  /// Coefficient c of t^{2s} in theta(t) = 1 + c t^{2s} + ...
  double shooting_coefficient = 0.0;
  int bisection_steps = 0;
};

/// kappa_s from the energy of the decaying solution of
/// theta'' + (1-2s)/t theta' - theta = 0, theta(0) = 1.
///
/// Integrated in tau = ln t with state (theta, w = t^{1-2s} theta', energy).
/// The unknown t^{2s} coefficient c is found by bisection: trajectories that cross
/// zero have c too negative, trajectories that turn upward have c too large.
inline KappaOdeResult kappa_s_ode_detail(double s) {
  if (!(s > 0.0 && s < 1.0)) throw DomainError("kappa_s requires 0 < s < 1");
  constexpr double t0 = 1e-6;
  constexpr double t_max = 40.0;
  using State = std::array<double, 3>;

  auto rhs = [s](double tau, const State& y) {
    const double t = std::exp(tau);
    const double t2s = std::pow(t, 2.0 * s);
    const double t22s = t * t / t2s;
    return State{t2s * y[1], t22s * y[0], t2s * y[1] * y[1] + t22s * y[0] * y[0]};
  };
  auto seed = [s](double c) {
    const double t2 = t0 * t0;
    const double t2s = std::pow(t0, 2.0 * s);
    const double theta = 1.0 + t2 / (4.0 * (1.0 - s)) + c * t2s * (1.0 + t2 / (4.0 * (1.0 + s)));
    const double w = t2 / t2s / (2.0 * (1.0 - s)) + c * (2.0 * s + 0.5 * t2);
    // Energy on (0, t0) from the leading terms of theta and theta'.
    const double energy = 2.0 * s * c * c * t2s + t2 / t2s / (2.0 - 2.0 * s) +
                          s * c * t2 / (1.0 - s);
    return State{theta, w, energy};
  };

  enum class Verdict { Undershoot, Overshoot, Decays };
  ode::Options opt;
  opt.rel_tol = 1e-10;
  opt.abs_tol = 1e-14;
  opt.initial_step = 1e-2;
  auto shoot = [&](double c, double* energy) {
    Verdict v = Verdict::Decays;
    auto stop = [&](double, const State& y) {
      if (y[0] <= 0.0) {
        v = Verdict::Undershoot;
        return true;
      }
      if (y[1] > 0.0) {
        v = Verdict::Overshoot;
        return true;
      }
      return false;
    };
    auto sol = ode::dopri5<3>(rhs, std::log(t0), std::log(t_max), seed(c), opt, stop);
    if (sol.outcome == ode::Outcome::StepLimit || sol.outcome == ode::Outcome::StepUnderflow) {
      throw ConvergenceError("theta_0 integration failed");
    }
    if (energy) *energy = sol.y[2];
    return v;
  };

  double lo = -20.0;
  double hi = 0.0;
  for (int expand = 0; shoot(lo, nullptr) != Verdict::Undershoot; ++expand) {
    if (expand > 10) throw ConvergenceError("could not bracket the decaying theta_0");
    lo *= 4.0;
  }
  if (shoot(hi, nullptr) != Verdict::Overshoot) {
    throw ConvergenceError("could not bracket the decaying theta_0");
  }
  KappaOdeResult out;
  double energy = 0.0;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) break;
    double e = 0.0;
    const Verdict v = shoot(mid, &e);
    ++out.bisection_steps;
    if (v == Verdict::Undershoot) {
      lo = mid;
    } else if (v == Verdict::Overshoot) {
      hi = mid;
    } else {
      lo = hi = mid;
      energy = e;
      break;
    }
    energy = e;
  }
  if (!(std::abs(hi - lo) <= 1e-12 * std::abs(hi) + 1e-300)) {
    throw ConvergenceError("theta_0 shooting did not converge");
  }
  out.kappa = energy;
  out.shooting_coefficient = 0.5 * (lo + hi);
  return out;
}

inline double kappa_s_ode_crosscheck(double s) { return kappa_s_ode_detail(s).kappa; }

/// Closed form of the Poisson normaliser Gamma(N/2+s) / (pi^{N/2} Gamma(s)).
inline double poisson_normalizer_closed_form(const FracParams& fp) {
  fp.validate_kernel();
  return std::exp(log_gamma(0.5 * fp.N + fp.s) - log_gamma(fp.s) -
                  0.5 * fp.N * std::log(std::numbers::pi));
}

/// Mass of t^{2s} (|x|^2+t^2)^{-(N+2s)/2} over R^N, by radial quadrature at height t.
inline quadrature::QuadratureResult poisson_mass_unnormalized(const FracParams& fp, double t,
                                                              quadrature::QuadratureSpec spec = {}) {
  fp.validate_kernel();
  if (!(t > 0.0)) throw DomainError("Poisson kernel requires t > 0");
  const double N = fp.N;
  const double s = fp.s;
  // Radial profile in rho/t; the factor t^{2s} t^N t^{-N-2s} = 1 is applied exactly.
  auto f = [&](double rho) {
    const double u = rho / t;
    const double val = std::pow(u, N - 1.0) * std::pow(1.0 + u * u, -0.5 * (N + 2 * s));
    return val / t;
  };
  spec = spec.with_exponents(N - 1.0, 0.0);
  auto r = quadrature::integrate_to_infinity(f, 0.0, 1.0 + 2.0 * s, spec, {t, 4.0 * t, 16.0 * t});
  const double area = quadrature::sphere_area(fp.N);
  r.value *= area;
  r.error_estimate *= area;
  return r;
}

/// p_{N,s}: the constant making the Poisson kernel a probability density, from quadrature
/// at height t.
inline double poisson_normalizer(const FracParams& fp, double t = 1.0,
                                 quadrature::QuadratureSpec spec = {1e-14, 1e-13, 2000, {}}) {
  auto r = poisson_mass_unnormalized(fp, t, spec);
  if (!r.converged) throw ConvergenceError("Poisson normaliser quadrature did not converge");
  return 1.0 / r.value;
}

}  // namespace frachenon
