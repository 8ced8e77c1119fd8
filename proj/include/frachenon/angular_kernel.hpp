#pragma once

// Sphere averages of (d2 + B (1 - c))^{-nu} over S^{N-1}, c = omega . e.
//
// With A = d2 + B and z = B/A the base is A (1 - z c). Every routine returns values
// scaled by A^{nu} so that callers can combine powers of A without overflow:
//   j0 = A^{mu}   avg (1 - z c)^{-mu}         (times A^{-mu} gives the average)
//   j0p = A^{mu+1} avg of the same at nu = mu+1
//   jw = A^{mu+1} avg (1 - c)(d2 + B(1 - c))^{-(mu+1)}
// The last two feed the t and x derivatives of the Poisson integral.

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "frachenon/special_functions.hpp"
#include "frachenon/quadrature.hpp"

namespace frachenon {

struct KernelSet {
  double j0 = 0.0;
  double j0p = 0.0;
  double jw = 0.0;
};

class AngularKernel {
 public:
  AngularKernel(int N, double mu, double rel_tol = 1e-13) : N_(N), mu_(mu), rel_tol_(rel_tol) {
    if (N >= 2) {
      norm_ = std::exp(0.5 * std::log(std::numbers::pi) + log_gamma(0.5 * (N - 1)) - log_gamma(0.5 * N));
    }
  }

  int N() const { return N_; }
  double mu() const { return mu_; }

  /// Scaled average at exponent mu.
  double j0(double d2, double B) const {
    if (B == 0.0) return 1.0;
    const double A = d2 + B;
    const double z = B / A;
    const double a = d2 / A;  // 1 - z
    if (N_ == 1) return 0.5 * (std::pow(a, -mu_) + std::pow(1.0 + z, -mu_));
    if (z <= kSeriesLimit) return series0(mu_, z);
    if (N_ == 3) return closed3(mu_, a, z);
    return numeric(d2, B, false).j0;
  }

  /// Scaled averages for the Poisson integral and its derivatives.
  KernelSet set(double d2, double B) const {
    const double nu = mu_ + 1.0;
    if (B == 0.0) return {1.0, 1.0, 1.0};
    const double A = d2 + B;
    const double z = B / A;
    const double a = d2 / A;
    if (N_ == 1) {
      return {0.5 * (std::pow(a, -mu_) + std::pow(1.0 + z, -mu_)),
              0.5 * (std::pow(a, -nu) + std::pow(1.0 + z, -nu)), std::pow(1.0 + z, -nu)};
    }
    if (z <= kSeriesLimit) {
      const double s0p = series0(nu, z);
      return {series0(mu_, z), s0p, s0p - series1(nu, z)};
    }
    if (N_ == 3) {
      // jw from avg (1-c) w^{-nu} = (avg w^{1-nu} - a avg w^{-nu}) / z with w = a + z (1 - c).
      const double i_nu = closed3(nu, a, z);
      const double i_mu = closed3(mu_, a, z);
      return {i_mu, i_nu, (i_mu - a * i_nu) / z};
    }
    return numeric(d2, B, true);
  }

 private:
  static constexpr double kSeriesLimit = 0.6;

  // avg (1 - z c)^{-nu} = sum_k (nu)_{2k}/(2k)! (1/2)_k/(N/2)_k z^{2k}
  double series0(double nu, double z) const {
    const double z2 = z * z;
    double term = 1.0, sum = 1.0;
    for (int k = 0; k < 400; ++k) {
      term *= (nu + 2 * k) * (nu + 2 * k + 1) / ((2.0 * k + 2) * (N_ + 2.0 * k)) * z2;
      sum += term;
      if (term < 1e-17 * sum) break;
    }
    return sum;
  }
  // avg c (1 - z c)^{-nu}
  double series1(double nu, double z) const {
    const double z2 = z * z;
    double term = nu * z / N_, sum = term;
    for (int k = 0; k < 400; ++k) {
      term *= (nu + 2 * k + 1) * (nu + 2 * k + 2) / ((2.0 * k + 2) * (N_ + 2.0 * k + 2)) * z2;
      sum += term;
      if (term < 1e-17 * sum) break;
    }
    return sum;
  }
  // N = 3: (1/2) int_0^2 (a + z v)^{-nu} dv.
  static double closed3(double nu, double a, double z) {
    const double b = a + 2.0 * z;
    if (std::abs(nu - 1.0) < 1e-12) return (std::log(b) - std::log(a)) / (2.0 * z);
    return (std::pow(a, 1.0 - nu) - std::pow(b, 1.0 - nu)) / (2.0 * z * (nu - 1.0));
  }

  KernelSet numeric(double d2, double B, bool derivatives) const {
    const double A = d2 + B;
    // Base (d2 + 2B sin^2(phi/2)) / A, exact near phi = 0.
    auto integrand = [&](double phi) {
      const double h = std::sin(0.5 * phi);
      const double v = 2.0 * h * h;  // 1 - cos(phi)
      const double w = (d2 + B * v) / A;
      const double m = N_ == 2 ? 1.0 : std::pow(std::sin(phi), N_ - 2);
      const double wm = std::pow(w, -mu_);
      if (!derivatives) return std::array<double, 3>{m * wm, 0.0, 0.0};
      const double wn = wm / w;
      return std::array<double, 3>{m * wm, m * wn, m * v * wn};
    };
    std::vector<double> bp;
    const double c0 = std::sqrt(d2 / (2.0 * B));
    for (double c = c0; c < 1.0 && bp.size() < 40; c *= 4.0) bp.push_back(2.0 * std::asin(c));
    quadrature::QuadratureSpec spec{1e-300, rel_tol_, 2000, {}};
    auto r = quadrature::integrate_segments_vec<3>(
        integrand, quadrature::make_segments(0.0, std::numbers::pi, bp, {}), spec);
    return {r.value[0] / norm_, r.value[1] / norm_, r.value[2] / norm_};
  }

  int N_;
  double mu_;
  double rel_tol_;
  double norm_ = 2.0;
};

}  // namespace frachenon
