#pragma once

// Poisson kernel of the weighted extension, the extension U = P_s(., t) * u of radial
// profiles, the homogeneous model fields and the principal-value fractional Laplacian.

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "frachenon/angular_kernel.hpp"
#include "frachenon/errors.hpp"
#include "frachenon/profile.hpp"
#include "frachenon/quadrature.hpp"
#include "frachenon/special_functions.hpp"

namespace frachenon {

using quadrature::QuadratureResult;
using quadrature::QuadratureSpec;

/// (|x|, t) in the closed upper half-space.
struct HalfSpacePoint {
  double x_radius = 0.0;
  double t = 0.0;

  double r() const { return std::hypot(x_radius, t); }
  /// t / |X|.
  double sigma() const { return t / r(); }
  void validate() const {
    if (!(x_radius >= 0.0) || !(t >= 0.0) || !std::isfinite(x_radius) || !std::isfinite(t)) {
      throw DomainError("half-space point needs finite |x| >= 0 and t >= 0");
    }
    if (!(r() > 0.0)) throw DomainError("half-space point at the origin");
  }
};

/// U together with its partial derivatives in |x| and t.
struct GradientSample {
  double value = 0.0;
  double dx = 0.0;
  double dt = 0.0;
  std::array<double, 3> error{};
  bool converged = true;
};

/// p_{N,s} t^{2s} (|x|^2 + t^2)^{-(N+2s)/2}. The normaliser is computed by quadrature
/// unless supplied.
inline double poisson_kernel(const FracParams& fp, double x_radius, double t,
                             std::optional<double> normalizer = std::nullopt) {
  fp.validate_kernel();
  if (!(t > 0.0)) throw DomainError("poisson_kernel requires t > 0");
  if (!(x_radius >= 0.0)) throw DomainError("poisson_kernel requires |x| >= 0");
  const double p = normalizer ? *normalizer : poisson_normalizer(fp);
  const double mu = 0.5 * (fp.N + 2.0 * fp.s);
  return p * std::exp(2.0 * fp.s * std::log(t) - mu * std::log(x_radius * x_radius + t * t));
}

/// Total mass of P_s(., t) over R^N by radial quadrature of poisson_kernel.
inline QuadratureResult poisson_kernel_mass(const FracParams& fp, double t,
                                            const QuadratureSpec& spec = {1e-14, 1e-12, 2000, {}}) {
  const double p = poisson_normalizer(fp);
  const double area = quadrature::sphere_area(fp.N);
  auto f = [&](double rho) {
    const double radial = fp.N == 1 ? 1.0 : std::pow(rho, fp.N - 1);
    return area * radial * poisson_kernel(fp, rho, t, p);
  };
  return quadrature::integrate_to_infinity(f, 0.0, 1.0 + 2.0 * fp.s, spec.with_exponents(fp.N - 1.0, 0.0),
                                           {0.25 * t, t, 4.0 * t, 16.0 * t});
}

namespace detail {

/// Radial convolution machinery shared by ExtensionField and extend().
class PoissonIntegral {
 public:
  PoissonIntegral(RadialProfile u, FracParams fp, QuadratureSpec spec)
      : u_(std::move(u)), fp_(fp), spec_(spec), kernel_(fp.N, 0.5 * (fp.N + 2.0 * fp.s)) {
    fp_.validate_kernel();
    spec_.validate();
    if (u_.N() != fp_.N) throw ParameterError("profile dimension does not match N");
    u_.check_admissible(fp_.s);
    mu_ = 0.5 * (fp_.N + 2.0 * fp_.s);
    prefactor_ = poisson_normalizer(fp_) * quadrature::sphere_area(fp_.N);
  }

  const RadialProfile& trace() const { return u_; }
  const FracParams& params() const { return fp_; }

  QuadratureResult value(double x, double t) const {
    HalfSpacePoint{x, t}.validate();
    if (u_.is_constant()) return {u_.value(1.0), 0.0, 0, true};
    if (t == 0.0) return {u_.value(x), 0.0, 0, true};
    const Plan plan = make_plan(x, t);
    const double t2s = std::pow(t, 2.0 * fp_.s);
    auto f = [&](double rho) {
      const double w = weight(plan, x, rho);
      if (w == 0.0) return std::array<double, 1>{0.0};
      const double d = x - rho;
      const double F = radial_factor(rho, x * x + rho * rho + t * t, mu_);
      return std::array<double, 1>{prefactor_ * t2s * F * w * kernel_.j0(d * d + t * t, 2.0 * x * rho)};
    };
    auto r = quadrature::integrate_segments_vec<1>(f, plan.segments, spec_);
    return {plan.base + r.value[0], r.error_estimate[0], r.subdivisions_used, r.converged};
  }

  GradientSample sample(double x, double t) const {
    HalfSpacePoint{x, t}.validate();
    if (u_.is_constant()) return {u_.value(1.0), 0.0, 0.0, {}, true};
    if (t == 0.0) throw DomainError("gradient requested on the boundary t = 0");
    const Plan plan = make_plan(x, t);
    const double two_s = 2.0 * fp_.s;
    const double t2s = std::pow(t, two_s);
    auto f = [&](double rho) {
      const double w = weight(plan, x, rho);
      if (w == 0.0) return std::array<double, 3>{0.0, 0.0, 0.0};
      const double d = x - rho;
      const double A = x * x + rho * rho + t * t;
      const KernelSet k = kernel_.set(d * d + t * t, 2.0 * x * rho);
      const double F = prefactor_ * w * radial_factor(rho, A, mu_);
      const double Fp = F / A;
      return std::array<double, 3>{
          t2s * F * k.j0,
          -2.0 * mu_ * t2s * Fp * (d * k.j0p + rho * k.jw),
          two_s * (t2s / t) * F * k.j0 - 2.0 * mu_ * t2s * t * Fp * k.j0p,
      };
    };
    auto r = quadrature::integrate_segments_vec<3>(f, plan.segments, spec_);
    GradientSample g;
    g.value = plan.base + r.value[0];
    g.dx = r.value[1];
    g.dt = r.value[2];
    g.error = r.error_estimate;
    g.converged = r.converged;
    return g;
  }

 private:
  struct Plan {
    bool subtract = false;
    double base = 0.0;
    std::vector<quadrature::Segment> segments;
  };

  // rho^{N-1} A^{-nu} without overflow.
  double radial_factor(double rho, double A, double nu) const {
    if (fp_.N == 1) return std::exp(-nu * std::log(A));
    return std::exp((fp_.N - 1) * std::log(rho) - nu * std::log(A));
  }

  double weight(const Plan& plan, double x, double rho) const {
    if (!(rho > 0.0)) return 0.0;
    if (plan.subtract) return -u_.difference(x, rho - x);
    return u_.value(rho);
  }

  Plan make_plan(double x, double t) const {
    Plan plan;
    const double ux = x > 0.0 ? u_.value(x) : 0.0;
    plan.subtract = t < x && ux != 0.0;
    plan.base = plan.subtract ? ux : 0.0;

    const double e = u_.origin_exponent();
    const double g = u_.growth_exponent();
    const double left = fp_.N - 1.0 + (plan.subtract ? std::min(e, 0.0) : e);
    const double support = u_.support_radius();
    const bool finite = !plan.subtract && std::isfinite(support);
    const double tail_start = std::max(4.0 * (x + t), 2.0 * u_.extent());
    const double end = finite ? support : tail_start;

    std::vector<double> bp;
    for (double f : u_.features()) bp.push_back(f);
    if (x > 0.0) {
      bp.push_back(x);
      for (double h = t; h < end; h *= 4.0) {
        bp.push_back(x + h);
        if (x - h > 0.0) bp.push_back(x - h);
      }
    }
    if (x < t) {
      for (double h = 0.25 * t; h < end; h *= 4.0) bp.push_back(h);
    }
    std::vector<double> kept;
    for (double b : bp) {
      if (b > 0.0 && b < end * (1.0 - 1e-14)) kept.push_back(b);
    }
    if (finite) {
      plan.segments = quadrature::make_segments(0.0, support, kept, {left, 0.0});
    } else {
      kept.push_back(tail_start);
      const double decay = 1.0 + 2.0 * fp_.s - (plan.subtract ? std::max(g, 0.0) : g);
      plan.segments = quadrature::make_segments(0.0, std::numeric_limits<double>::infinity(), kept,
                                                {left, 0.0}, decay);
    }
    return plan;
  }

  RadialProfile u_;
  FracParams fp_;
  QuadratureSpec spec_;
  AngularKernel kernel_;
  double mu_ = 0.0;
  double prefactor_ = 0.0;
};

}  // namespace detail

/// U = P_s(., t) * u for a radial trace u, or a homogeneous model field.
class ExtensionField {
 public:
  enum class Kind { PoissonOf, HomogeneousModel };

  static ExtensionField poisson_of(RadialProfile u, const FracParams& fp, const QuadratureSpec& spec = {}) {
    return ExtensionField(Kind::PoissonOf, std::move(u), fp, spec, 0.0);
  }

  /// Extension of amplitude * v_alpha. Values are taken on the unit half-sphere and
  /// scaled by the degree -(N-2s)/2 + alpha.
  static ExtensionField homogeneous_model(const FracParams& fp, double alpha, double amplitude = 1.0,
                                          const QuadratureSpec& spec = {}) {
    return ExtensionField(Kind::HomogeneousModel, RadialProfile::model_v_alpha(fp, alpha, amplitude), fp, spec,
                          alpha);
  }

  Kind kind() const { return kind_; }
  const FracParams& params() const { return integral_.params(); }
  const RadialProfile& trace() const { return integral_.trace(); }
  bool is_zero() const { return trace().is_zero(); }
  /// alpha of a homogeneous model (0 for PoissonOf fields).
  double alpha() const { return alpha_; }
  /// Homogeneity degree of a model field.
  double degree() const { return -(params().alpha_max() - alpha_); }

  QuadratureResult value(const HalfSpacePoint& X) const {
    X.validate();
    if (kind_ == Kind::PoissonOf) return integral_.value(X.x_radius, X.t);
    const double r = X.r();
    const double scale = std::pow(r, degree());
    auto v = integral_.value(X.x_radius / r, X.t / r);
    return {scale * v.value, scale * v.error_estimate, v.subdivisions_used, v.converged};
  }

  GradientSample sample(const HalfSpacePoint& X) const {
    X.validate();
    if (kind_ == Kind::PoissonOf) return integral_.sample(X.x_radius, X.t);
    const double r = X.r();
    const double s0 = std::pow(r, degree());
    const double s1 = s0 / r;
    auto g = integral_.sample(X.x_radius / r, X.t / r);
    g.value *= s0;
    g.dx *= s1;
    g.dt *= s1;
    g.error = {g.error[0] * s0, g.error[1] * s1, g.error[2] * s1};
    return g;
  }

 private:
  ExtensionField(Kind kind, RadialProfile u, const FracParams& fp, const QuadratureSpec& spec, double alpha)
      : kind_(kind), integral_(std::move(u), fp, spec), alpha_(alpha) {}

  Kind kind_;
  detail::PoissonIntegral integral_;
  double alpha_ = 0.0;
};

/// U(X) for the extension of u by direct convolution.
inline QuadratureResult extend(const RadialProfile& u, const HalfSpacePoint& X, const FracParams& fp,
                               const QuadratureSpec& spec = {}) {
  return detail::PoissonIntegral(u, fp, spec).value(X.x_radius, X.t);
}

/// v_alpha(|x|) = |x|^{-((N-2s)/2 - alpha)}.
inline double model_v_alpha(const FracParams& fp, double alpha, double x_radius) {
  fp.validate();
  if (!(alpha >= 0.0 && alpha < fp.alpha_max())) throw DomainError("alpha must lie in [0, (N-2s)/2)");
  if (!(x_radius > 0.0)) throw DomainError("v_alpha is singular at the origin");
  return std::pow(x_radius, -(fp.alpha_max() - alpha));
}

struct HomogeneityResidual {
  /// V(lambda X) and lambda^{deg} V(X).
  double scaled = 0.0;
  double reference = 0.0;
  double residual = 0.0;
  double error_estimate = 0.0;
  bool converged = true;
};

/// |V(lambda X) - lambda^{deg} V(X)| / |V(X)| with both values from extend().
inline HomogeneityResidual homogeneity_residual(double alpha, const HalfSpacePoint& X, double lambda_scale,
                                                const FracParams& fp, const QuadratureSpec& spec = {}) {
  if (!(lambda_scale > 0.0)) throw DomainError("scale factor must be positive");
  const RadialProfile v = RadialProfile::model_v_alpha(fp, alpha);
  X.validate();
  const auto base = extend(v, X, fp, spec);
  if (lambda_scale == 1.0) return {base.value, base.value, 0.0, 0.0, base.converged};
  const auto scaled = extend(v, {lambda_scale * X.x_radius, lambda_scale * X.t}, fp, spec);
  const double factor = std::pow(lambda_scale, -(fp.alpha_max() - alpha));
  const double denom = std::abs(base.value);
  return {scaled.value, factor * base.value, std::abs(scaled.value - factor * base.value) / denom,
          (scaled.error_estimate + factor * base.error_estimate) / denom, base.converged && scaled.converged};
}

/// C_{N,s} PV int (u(x) - u(y)) |x - y|^{-N-2s} dy at |x| = x_radius for radial u.
inline QuadratureResult frac_laplacian_pv(const RadialProfile& u, double x_radius, const FracParams& fp,
                                          const QuadratureSpec& spec = {}) {
  fp.validate_kernel();
  if (!(x_radius > 0.0)) throw DomainError("frac_laplacian_pv requires |x| > 0");
  if (u.N() != fp.N) throw ParameterError("profile dimension does not match N");
  u.check_admissible(fp.s);
  if (u.is_constant()) return {0.0, 0.0, 0, true};
  const double r = x_radius;
  const double mu = 0.5 * (fp.N + 2.0 * fp.s);
  const AngularKernel kernel(fp.N, mu);
  const double pref = frac_laplacian_constant(fp) * quadrature::sphere_area(fp.N);
  auto g = [&](double d) {
    const double rho = r + d;
    if (!(rho > 0.0)) return 0.0;
    const double diff = u.difference(r, d);
    if (diff == 0.0) return 0.0;
    const double B = 2.0 * r * rho;
    const double A = d * d + B;
    const double F = fp.N == 1 ? std::exp(-mu * std::log(A))
                               : std::exp((fp.N - 1) * std::log(rho) - mu * std::log(A));
    return pref * F * diff * kernel.j0(d * d, B);
  };
  quadrature::PvOptions opt;
  opt.fold_exponent = 1.0 - 2.0 * fp.s;
  opt.half_width = 0.5 * r;
  opt.tail_decay = 1.0 + 2.0 * fp.s - std::max(u.growth_exponent(), 0.0);
  opt.breakpoints = {0.25 * r, 2.0 * r, 4.0 * r};
  for (double f : u.features()) opt.breakpoints.push_back(f);
  const double e = u.origin_exponent();
  return quadrature::integrate_pv_radial(g, r, spec.with_exponents(fp.N - 1.0 + std::min(e, 0.0), 0.0), opt);
}

}  // namespace frachenon
