#pragma once

// Critical exponents and the regime classification of (N, s, ell, p).

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "frachenon/errors.hpp"
#include "frachenon/special_functions.hpp"

namespace frachenon {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// (N, s, ell) without the nonlinearity exponent.
struct WeightParams {
  int N = 3;
  double s = 0.5;
  double ell = 0.0;

  FracParams frac() const { return {N, s}; }
  std::string violation() const {
    if (auto v = frac().violation(); !v.empty()) return v;
    if (!(ell > -2.0 * s)) {
      return "ell > -2s violated (ell = " + FracParams::fmt(ell) + ", -2s = " + FracParams::fmt(-2.0 * s) + ")";
    }
    return {};
  }
  void validate() const {
    if (auto v = violation(); !v.empty()) throw ParameterError(v);
  }
};

/// Full parameter tuple with 0 < s < 1, ell > -2s, p > 1, N >= 1, N > 2s.
struct ProblemParams {
  int N = 3;
  double s = 0.5;
  double ell = 0.0;
  double p = 2.0;

  FracParams frac() const { return {N, s}; }
  WeightParams weight() const { return {N, s, ell}; }
  std::string violation() const {
    if (auto v = weight().violation(); !v.empty()) return v;
    if (!(p > 1.0)) return "p > 1 violated (p = " + FracParams::fmt(p) + ")";
    return {};
  }
  void validate() const {
    if (auto v = violation(); !v.empty()) throw ParameterError(v);
  }
  /// gamma = 2(2s+ell)/(p-1): twice the decay rate of the singular solution.
  double gamma() const { return 2.0 * (2.0 * s + ell) / (p - 1.0); }
  /// (2s+ell)/(p-1) = (N-2s)/2 - alpha_tilde.
  double gap() const { return (2.0 * s + ell) / (p - 1.0); }
  double alpha_tilde() const { return frac().alpha_max() - gap(); }
};

enum class Regime { Subcritical, Critical, SupercriticalNonexistence, SupercriticalExistenceSide };

inline std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::Subcritical: return "Subcritical";
    case Regime::Critical: return "Critical";
    case Regime::SupercriticalNonexistence: return "SupercriticalNonexistence";
    case Regime::SupercriticalExistenceSide: return "SupercriticalExistenceSide";
  }
  return "?";
}

struct RegimeReport {
  ProblemParams params;
  double p_S = 0.0;
  double alpha_tilde = 0.0;
  /// Present when p >= p_S, where alpha_tilde lies in the domain of lambda.
  std::optional<double> lambda_at_alpha_tilde;
  double lambda_at_zero = 0.0;
  double gamma = 0.0;
  Regime regime = Regime::Subcritical;
  /// Singular-solution constant A with A^{p-1} = lambda(alpha_tilde); present when p >= p_S.
  std::optional<double> amplitude;
};

/// p_S(N, ell) = (N+2s+2ell)/(N-2s).
inline double sobolev_exponent(const WeightParams& wp) {
  wp.validate();
  return (wp.N + 2.0 * wp.s + 2.0 * wp.ell) / (wp.N - 2.0 * wp.s);
}

/// True when p equals p_S within |p - p_S| <= 1e-12 max(1, p_S).
inline bool is_critical(double p, double p_S) {
  return std::abs(p - p_S) <= 1e-12 * std::max(1.0, p_S);
}

/// Classical Joseph-Lundgren exponent p_c(N); infinite for N <= 10.
inline double classical_jl(int N) {
  if (N < 1) throw DomainError("classical_jl requires N >= 1");
  if (N <= 10) return kInfinity;
  const double n = N;
  return ((n - 2) * (n - 2) - 4 * n + 8 * std::sqrt(n - 1)) / ((n - 2) * (n - 10));
}

/// Classical Henon threshold p_+(N, ell); infinite for N <= 10 + 4 ell.
inline double classical_jl_henon(int N, double ell) {
  if (N < 2) throw DomainError("classical_jl_henon: N = 1 is not covered by the classical formula");
  if (!(ell > -2.0)) throw DomainError("classical_jl_henon requires ell > -2");
  const double n = N;
  if (!(n > 10.0 + 4.0 * ell)) return kInfinity;
  const double a = ell + 2.0;
  return ((n - 2) * (n - 2) - 2 * a * (ell + n) + 2 * std::sqrt(a * a * a * (ell + 2 * n - 2))) /
         ((n - 2) * (n - 4 * ell - 10));
}

/// lambda(alpha_tilde(p)) for p > p_S, through the gap form.
inline double lambda_at_alpha_tilde(const ProblemParams& pp) {
  return lambda_gap(pp.frac(), pp.gap());
}

/// p lambda(alpha_tilde) - lambda(0); positive exactly when the JL-type condition holds.
inline double jl_defect(const ProblemParams& pp) {
  return pp.p * lambda_at_alpha_tilde(pp) - lambda_alpha(pp.frac(), 0.0);
}

inline RegimeReport classify(const ProblemParams& pp) {
  pp.validate();
  RegimeReport r;
  r.params = pp;
  r.p_S = sobolev_exponent(pp.weight());
  r.lambda_at_zero = lambda_alpha(pp.frac(), 0.0);
  r.gamma = pp.gamma();
  if (is_critical(pp.p, r.p_S)) {
    r.regime = Regime::Critical;
    r.alpha_tilde = 0.0;
    r.lambda_at_alpha_tilde = r.lambda_at_zero;
    r.amplitude = std::exp(std::log(r.lambda_at_zero) / (pp.p - 1.0));
    return r;
  }
  r.alpha_tilde = pp.alpha_tilde();
  if (pp.p < r.p_S) {
    r.regime = Regime::Subcritical;
    return r;
  }
  const double lam = lambda_at_alpha_tilde(pp);
  r.lambda_at_alpha_tilde = lam;
  r.amplitude = std::exp(std::log(lam) / (pp.p - 1.0));
  r.regime = pp.p * lam > r.lambda_at_zero ? Regime::SupercriticalNonexistence
                                           : Regime::SupercriticalExistenceSide;
  return r;
}

/// A = lambda(alpha_tilde)^{1/(p-1)} for p > p_S.
inline double singular_amplitude(const ProblemParams& pp) {
  pp.validate();
  const double pS = sobolev_exponent(pp.weight());
  if (!(pp.p > pS) || is_critical(pp.p, pS)) {
    throw DomainError("singular_amplitude requires p > p_S (alpha_tilde > 0)");
  }
  return std::exp(std::log(lambda_at_alpha_tilde(pp)) / (pp.p - 1.0));
}

struct ThresholdResult {
  /// Smallest crossing p*; +inf when none is found below the probe cap.
  double p_star = kInfinity;
  /// p* lambda(alpha_tilde(p*)) - lambda(0) at the returned p* (0 when infinite).
  double defect = 0.0;
  double lambda_at_zero = 0.0;
  double p_S = 0.0;
  double probe_cap = 1e8;
  int grid_points = 0;
  int bisection_steps = 0;
  bool finite() const { return std::isfinite(p_star); }
};

struct ThresholdOptions {
  double probe_cap = 1e8;
  int grid_points = 4000;
  double rel_tol = 1e-12;
};

/// Smallest p > p_S at which p lambda(alpha_tilde(p)) = lambda(0), located by a
/// log-spaced scan of (p_S(1+1e-8), probe_cap] and bisection on the first sign change.
inline ThresholdResult jl_threshold(const WeightParams& wp, const ThresholdOptions& opt = {}) {
  wp.validate();
  ThresholdResult out;
  out.p_S = sobolev_exponent(wp);
  out.lambda_at_zero = lambda_alpha(wp.frac(), 0.0);
  out.probe_cap = opt.probe_cap;
  out.grid_points = opt.grid_points;
  auto defect = [&](double p) { return jl_defect({wp.N, wp.s, wp.ell, p}); };

  const double p_lo = out.p_S * (1.0 + 1e-8);
  if (!(opt.probe_cap > p_lo)) return out;
  const double step = std::log(opt.probe_cap / p_lo) / (opt.grid_points - 1);
  double prev_p = p_lo;
  for (int i = 1; i < opt.grid_points; ++i) {
    const double p = i + 1 == opt.grid_points ? opt.probe_cap : p_lo * std::exp(step * i);
    if (defect(p) <= 0.0) {
      double lo = prev_p;
      double hi = p;
      int steps = 0;
      while (hi - lo > opt.rel_tol * hi) {
        const double mid = 0.5 * (lo + hi);
        if (!(mid > lo && mid < hi)) break;
        (defect(mid) > 0.0 ? lo : hi) = mid;
        if (++steps > 400) throw ConvergenceError("jl_threshold bisection stalled");
      }
      out.bisection_steps = steps;
      out.p_star = 0.5 * (lo + hi);
      out.defect = defect(out.p_star);
      if (std::abs(out.defect) > 1e-10 * out.lambda_at_zero) {
        throw ConvergenceError("jl_threshold: defect at the bracketed root exceeds 1e-10 lambda(0)");
      }
      return out;
    }
    prev_p = p;
  }
  return out;
}

}  // namespace frachenon
