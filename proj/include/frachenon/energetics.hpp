#pragma once

// Energy functionals D, H, E on half-balls, the derivative identities for H, both
// Pohozaev identities, the stability margin and the H^s bilinear form.

#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "frachenon/errors.hpp"
#include "frachenon/extension.hpp"
#include "frachenon/profile.hpp"
#include "frachenon/quadrature.hpp"
#include "frachenon/regimes.hpp"
#include "frachenon/special_functions.hpp"

namespace frachenon {

/// Default tolerances for the outer (surface and bulk) integrals.
inline QuadratureSpec energetics_spec() { return {1e-13, 1e-9, 2000, {}}; }

struct EnergyReport {
  double lambda = 0.0;
  double D = 0.0;
  double H = 0.0;
  double E = 0.0;
  double gamma = 0.0;
  double D_error = 0.0;
  double H_error = 0.0;
  double E_error = 0.0;
  bool converged = true;
};

struct IdentityResidual {
  std::string identity_name;
  double lhs = 0.0;
  double rhs = 0.0;
  double abs_residual = 0.0;
  double rel_residual = 0.0;
  double quadrature_error = 0.0;
  bool converged = true;

  static IdentityResidual make(std::string name, double lhs, double rhs, double error, bool converged) {
    IdentityResidual r{std::move(name), lhs, rhs, std::abs(lhs - rhs), 0.0, error, converged};
    r.rel_residual = r.abs_residual / std::max({std::abs(lhs), std::abs(rhs), 1e-300});
    return r;
  }
};

/// Unit-sphere moments at radius lambda: integrals over S^+_1 of sigma_{N+1}^{1-2s} times
/// U^2, U U_r, U_r^2 and |grad U|^2, all evaluated at lambda sigma.
struct SurfaceMoments {
  double uu = 0.0;
  double uur = 0.0;
  double urur = 0.0;
  double grad2 = 0.0;
  std::array<double, 4> error{};
  bool converged = true;
};

inline SurfaceMoments surface_moments(const ExtensionField& field, double lambda,
                                      const QuadratureSpec& spec = energetics_spec()) {
  if (!(lambda > 0.0)) throw DomainError("radius must be positive");
  SurfaceMoments m;
  if (field.is_zero()) return m;
  const FracParams& fp = field.params();
  const double w = 1.0 - 2.0 * fp.s;
  // Pointwise field errors enter relative to the envelope U^2 + |grad U|^2, which
  // dominates every component; this keeps the adaptive rule on smooth integrands.
  std::array<double, 4> ratio{};
  bool fields_ok = true;
  auto h = [&](double c, double sn) {
    std::array<double, 4> out{};
    if (!(c > 0.0)) return out;
    const GradientSample g = field.sample({lambda * sn, lambda * c});
    const double ur = sn * g.dx + c * g.dt;
    const double eur = sn * g.error[1] + c * g.error[2];
    out[0] = g.value * g.value;
    out[1] = g.value * ur;
    out[2] = ur * ur;
    out[3] = g.dx * g.dx + g.dt * g.dt;
    const double env = out[0] + out[3];
    if (env > 0.0) {
      const double au = std::abs(g.value);
      const std::array<double, 4> e{2.0 * au * g.error[0], std::abs(ur) * g.error[0] + au * eur,
                                    2.0 * std::abs(ur) * eur,
                                    2.0 * (std::abs(g.dx) * g.error[1] + std::abs(g.dt) * g.error[2])};
      for (int k = 0; k < 4; ++k) ratio[k] = std::max(ratio[k], e[k] / env);
    }
    fields_ok = fields_ok && g.converged;
    return out;
  };
  auto r = quadrature::integrate_half_sphere_vec<4>(h, w, fp.N, spec, -std::abs(w));
  m.uu = r.value[0];
  m.uur = r.value[1];
  m.urur = r.value[2];
  m.grad2 = r.value[3];
  const double envelope = r.value[0] + r.value[3];
  for (int k = 0; k < 4; ++k) m.error[k] = r.error_estimate[k] + ratio[k] * envelope;
  m.converged = r.converged && fields_ok;
  return m;
}

namespace detail {

inline void require_trace(const ExtensionField& field, const RadialProfile& u) {
  if (u.N() != field.params().N) throw ParameterError("trace profile dimension does not match the field");
  if (field.is_zero() && u.is_zero()) return;
  const auto* a = std::get_if<PowerLaw>(&field.trace().kind());
  const auto* b = std::get_if<PowerLaw>(&u.kind());
  if (a && b) {
    if (a->exponent == b->exponent && a->amplitude == b->amplitude) return;
    throw ParameterError("trace profile does not match the field");
  }
  if (a || b || u.kind().index() != field.trace().kind().index()) {
    throw ParameterError("trace profile does not match the field");
  }
}

/// Homogeneity degree of the field if it is exactly homogeneous.
inline std::optional<double> homogeneous_degree(const ExtensionField& field) {
  if (const auto* p = std::get_if<PowerLaw>(&field.trace().kind())) return p->exponent;
  return std::nullopt;
}

inline void require_params(const ExtensionField& field, const ProblemParams& pp) {
  pp.validate();
  if (field.params().N != pp.N || field.params().s != pp.s) {
    throw ParameterError("field parameters (N, s) do not match the problem parameters");
  }
}

/// Fields for which the solution identities are theorems: the zero field and the
/// extension of the singular solution A |x|^{-(2s+ell)/(p-1)}.
inline void require_solution(const ExtensionField& field, const ProblemParams& pp) {
  if (field.is_zero()) return;
  const auto* p = std::get_if<PowerLaw>(&field.trace().kind());
  const double pS = sobolev_exponent(pp.weight());
  if (p && pp.p > pS && !is_critical(pp.p, pS)) {
    const double A = singular_amplitude(pp);
    if (std::abs(p->exponent + pp.gap()) <= 1e-12 * pp.gap() && std::abs(p->amplitude - A) <= 1e-12 * A) return;
  }
  throw NotASolutionError(
      "identity requested on a field that is not the extension of an exact solution "
      "(only the zero field and the singular solution are accepted)");
}

}  // namespace detail

/// Bulk gradient energy over B^+_lambda with its error.
inline QuadratureResult bulk_gradient_energy(const ExtensionField& field, double lambda,
                                             const QuadratureSpec& spec = energetics_spec()) {
  if (!(lambda > 0.0)) throw DomainError("radius must be positive");
  if (field.is_zero()) return {0.0, 0.0, 0, true};
  const FracParams& fp = field.params();
  const double k = fp.N + 1.0 - 2.0 * fp.s;
  if (auto deg = detail::homogeneous_degree(field)) {
    // G(r) = r^{e-1} G(1), so the radial integral is lambda G(lambda) / e.
    const double e = fp.N - 2.0 * fp.s + 2.0 * *deg;
    if (!(e > 0.0)) {
      throw DivergenceError("bulk gradient integral over B+_lambda diverges at the origin (radial exponent " +
                            FracParams::fmt(e) + " <= 0)");
    }
    const SurfaceMoments m = surface_moments(field, lambda, spec);
    const double scale = std::pow(lambda, k) * lambda / e;
    return {scale * m.grad2, scale * m.error[3], 0, m.converged};
  }
  std::vector<double> bp;
  for (double f : field.trace().features()) bp.push_back(f);
  bool ok = true;
  auto G = [&](double r) {
    const SurfaceMoments m = surface_moments(field, r, spec);
    ok = ok && m.converged;
    return std::pow(r, k) * m.grad2;
  };
  auto r = quadrature::integrate_segments(
      G, quadrature::make_segments(0.0, lambda, bp, {fp.N - 1.0 + 2.0 * fp.s, 0.0}), spec);
  r.converged = r.converged && ok;
  return r;
}

/// Gradient energy over the whole upper half-space.
inline QuadratureResult halfspace_dirichlet_energy(const ExtensionField& field,
                                                   const QuadratureSpec& spec = energetics_spec()) {
  if (field.is_zero() || field.trace().is_constant()) return {0.0, 0.0, 0, true};
  const FracParams& fp = field.params();
  if (detail::homogeneous_degree(field)) {
    throw DivergenceError("half-space gradient energy of a homogeneous field diverges");
  }
  const double g = field.trace().growth_exponent();
  if (!(-g > fp.alpha_max())) {
    throw DivergenceError("half-space gradient energy diverges at infinity: trace decays like r^" +
                          FracParams::fmt(g) + ", need decay faster than r^-(N-2s)/2");
  }
  const double k = fp.N + 1.0 - 2.0 * fp.s;
  const double ext = std::max(field.trace().extent(), 1.0);
  std::vector<double> bp{0.25 * ext, 0.5 * ext, 2.0 * ext, 4.0 * ext};
  for (double f : field.trace().features()) bp.push_back(f);
  bool ok = true;
  auto G = [&](double r) {
    const SurfaceMoments m = surface_moments(field, r, spec);
    ok = ok && m.converged;
    return std::pow(r, k) * m.grad2;
  };
  const double tau = std::min(-g, fp.N - 2.0 * fp.s);
  const double decay = 2.0 * tau + 1.0 + 2.0 * fp.s - fp.N;
  auto r = quadrature::integrate_segments(
      G,
      quadrature::make_segments(0.0, std::numeric_limits<double>::infinity(), bp,
                                {fp.N - 1.0 + 2.0 * fp.s, 0.0}, decay),
      spec);
  r.converged = r.converged && ok;
  return r;
}

/// int_{B_lambda} |x|^ell |u|^{p+1} dx.
inline QuadratureResult potential_integral(const RadialProfile& u, double lambda, const ProblemParams& pp,
                                           const QuadratureSpec& spec = energetics_spec()) {
  if (!(lambda > 0.0)) throw DomainError("radius must be positive");
  if (u.is_zero()) return {0.0, 0.0, 0, true};
  const double e = pp.N + pp.ell + (pp.p + 1.0) * u.origin_exponent();
  if (!(e > 0.0)) {
    throw DivergenceError("potential integral over B_lambda diverges at the origin (radial exponent " +
                          FracParams::fmt(e) + " <= 0)");
  }
  const double area = quadrature::sphere_area(pp.N);
  auto f = [&](double r) {
    return area * std::pow(r, pp.N - 1.0 + pp.ell) * std::pow(std::abs(u.value(r)), pp.p + 1.0);
  };
  return quadrature::integrate_power_weight(f, 0.0, lambda, spec.with_exponents(e - 1.0, 0.0), u.features());
}

/// int_{S_lambda} |x|^ell |u|^{p+1} d omega: the radial value times the sphere area.
inline double surface_potential(const RadialProfile& u, double lambda, const ProblemParams& pp) {
  if (u.is_zero()) return 0.0;
  return quadrature::sphere_area(pp.N) * std::pow(lambda, pp.N - 1.0 + pp.ell) *
         std::pow(std::abs(u.value(lambda)), pp.p + 1.0);
}

/// H = int_{S^+_1} sigma_{N+1}^{1-2s} U(lambda sigma)^2 d sigma.
inline QuadratureResult energy_H(const ExtensionField& field, double lambda, const ProblemParams& pp,
                                 const QuadratureSpec& spec = energetics_spec()) {
  detail::require_params(field, pp);
  const SurfaceMoments m = surface_moments(field, lambda, spec);
  return {m.uu, m.error[0], 0, m.converged};
}

/// D = lambda^{-(N-2s)} [ (1/2) bulk gradient - kappa_s/(p+1) potential ].
inline QuadratureResult energy_D(const ExtensionField& field, const RadialProfile& u, double lambda,
                                 const ProblemParams& pp, const QuadratureSpec& spec = energetics_spec()) {
  detail::require_params(field, pp);
  detail::require_trace(field, u);
  if (field.is_zero()) return {0.0, 0.0, 0, true};
  const auto bulk = bulk_gradient_energy(field, lambda, spec);
  const auto pot = potential_integral(u, lambda, pp, spec);
  const double kappa = kappa_s(pp.s);
  const double scale = std::pow(lambda, -(pp.N - 2.0 * pp.s));
  return {scale * (0.5 * bulk.value - kappa / (pp.p + 1.0) * pot.value),
          scale * (0.5 * bulk.error_estimate + kappa / (pp.p + 1.0) * pot.error_estimate), 0,
          bulk.converged && pot.converged};
}

/// E = lambda^gamma (D + (gamma/4) H).
inline EnergyReport energy_E(const ExtensionField& field, const RadialProfile& u, double lambda,
                             const ProblemParams& pp, const QuadratureSpec& spec = energetics_spec()) {
  EnergyReport rep;
  rep.lambda = lambda;
  rep.gamma = pp.gamma();
  const auto D = energy_D(field, u, lambda, pp, spec);
  const auto H = energy_H(field, lambda, pp, spec);
  rep.D = D.value;
  rep.H = H.value;
  rep.D_error = D.error_estimate;
  rep.H_error = H.error_estimate;
  const double lg = std::pow(lambda, rep.gamma);
  rep.E = lg * (rep.D + 0.25 * rep.gamma * rep.H);
  rep.E_error = lg * (rep.D_error + 0.25 * rep.gamma * rep.H_error);
  rep.converged = D.converged && H.converged;
  return rep;
}

/// dH/dlambda by Richardson-refined central differences against 2 int sigma^{1-2s} U U_r.
inline IdentityResidual dH_dlambda_residual(const ExtensionField& field, double lambda, const ProblemParams& pp,
                                            const QuadratureSpec& spec = energetics_spec()) {
  detail::require_params(field, pp);
  if (!(lambda > 0.0)) throw DomainError("radius must be positive");
  const std::string name = "dH/dlambda surface form";
  if (field.is_zero()) return IdentityResidual::make(name, 0.0, 0.0, 0.0, true);
  const double h = 1e-2 * lambda;
  auto H = [&](double l) { return surface_moments(field, l, spec); };
  const auto p1 = H(lambda + h), m1 = H(lambda - h), p2 = H(lambda + 0.5 * h), m2 = H(lambda - 0.5 * h);
  const double d1 = (p1.uu - m1.uu) / (2.0 * h);
  const double d2 = (p2.uu - m2.uu) / h;
  const double lhs = (4.0 * d2 - d1) / 3.0;
  const double fd_error = std::abs(lhs - d2) +
                          (4.0 * (p2.error[0] + m2.error[0]) / h + (p1.error[0] + m1.error[0]) / (2.0 * h)) / 3.0;
  const auto at = H(lambda);
  const double rhs = 2.0 * at.uur;
  return IdentityResidual::make(name, lhs, rhs, fd_error + 2.0 * at.error[1],
                                p1.converged && m1.converged && p2.converged && m2.converged && at.converged);
}

/// Surface form of dH/dlambda against the bulk form obtained from the solution identity.
inline IdentityResidual dH_solution_form_residual(const ExtensionField& field, const RadialProfile& u,
                                                  double lambda, const ProblemParams& pp,
                                                  const QuadratureSpec& spec = energetics_spec()) {
  detail::require_params(field, pp);
  detail::require_trace(field, u);
  detail::require_solution(field, pp);
  const std::string name = "dH/dlambda bulk form";
  if (field.is_zero()) return IdentityResidual::make(name, 0.0, 0.0, 0.0, true);
  const auto m = surface_moments(field, lambda, spec);
  const auto bulk = bulk_gradient_energy(field, lambda, spec);
  const auto pot = potential_integral(u, lambda, pp, spec);
  const double kappa = kappa_s(pp.s);
  const double scale = 2.0 * std::pow(lambda, -(pp.N + 1.0 - 2.0 * pp.s));
  const double lhs = 2.0 * m.uur;
  const double rhs = scale * (bulk.value - kappa * pot.value);
  return IdentityResidual::make(name, lhs, rhs,
                                2.0 * m.error[1] + scale * (bulk.error_estimate + kappa * pot.error_estimate),
                                m.converged && bulk.converged && pot.converged);
}

/// Both Pohozaev identities on B^+_R: the scaling identity and the multiplier identity.
inline std::pair<IdentityResidual, IdentityResidual> pohozaev_residuals(
    const ExtensionField& field, const RadialProfile& u, double R, const ProblemParams& pp,
    const QuadratureSpec& spec = energetics_spec()) {
  detail::require_params(field, pp);
  detail::require_trace(field, u);
  detail::require_solution(field, pp);
  if (!(R > 0.0)) throw DomainError("radius must be positive");
  const std::string n1 = "pohozaev scaling";
  const std::string n2 = "pohozaev multiplier";
  if (field.is_zero()) {
    return {IdentityResidual::make(n1, 0.0, 0.0, 0.0, true), IdentityResidual::make(n2, 0.0, 0.0, 0.0, true)};
  }
  const double N = pp.N, s = pp.s;
  const double kappa = kappa_s(s);
  const auto m = surface_moments(field, R, spec);
  const auto bulk = bulk_gradient_energy(field, R, spec);
  const auto pot = potential_integral(u, R, pp, spec);
  const double sp = surface_potential(u, R, pp);
  const double sw = std::pow(R, N + 1.0 - 2.0 * s);  // unit-sphere to S^+_R with weight t^{1-2s}
  const double surf_grad = sw * m.grad2;
  const double surf_normal = sw * m.urur;
  const double surf_mixed = sw * m.uur;

  const double c1 = 2.0 * kappa / (N - 2.0 * s) * (N + pp.ell) / (pp.p + 1.0);
  const double lhs1 = -0.5 * (N - 2.0 * s) * (bulk.value - c1 * pot.value) +
                      0.5 * R * (surf_grad - 2.0 * kappa / (pp.p + 1.0) * sp);
  const double rhs1 = R * surf_normal;
  const double err1 = 0.5 * (N - 2.0 * s) * (bulk.error_estimate + c1 * pot.error_estimate) +
                      0.5 * R * sw * m.error[3] + R * sw * m.error[2];

  const double lhs2 = bulk.value - kappa * pot.value;
  const double rhs2 = surf_mixed;
  const double err2 = bulk.error_estimate + kappa * pot.error_estimate + sw * m.error[1];
  const bool ok = m.converged && bulk.converged && pot.converged;
  return {IdentityResidual::make(n1, lhs1, rhs1, err1, ok), IdentityResidual::make(n2, lhs2, rhs2, err2, ok)};
}

/// lambda(0) - p lambda(alpha_tilde): positive on the existence side of the JL-type condition.
inline double stability_margin(const ProblemParams& pp) {
  pp.validate();
  const double pS = sobolev_exponent(pp.weight());
  if (!(pp.p > pS) || is_critical(pp.p, pS)) throw DomainError("stability_margin requires p > p_S");
  return -jl_defect(pp);
}

/// (C_{N,s}/2) int int (f(x)-f(y))(g(x)-g(y)) |x-y|^{-N-2s} dx dy for radial f, g.
inline QuadratureResult hs_bilinear_form(const RadialProfile& f, const RadialProfile& g, const FracParams& fp,
                                         const QuadratureSpec& spec = energetics_spec()) {
  fp.validate();
  if (f.N() != fp.N || g.N() != fp.N) throw ParameterError("profile dimension does not match N");
  if (f.is_constant() || g.is_constant()) return {0.0, 0.0, 0, true};
  const double need = fp.alpha_max();
  for (const RadialProfile* q : {&f, &g}) {
    if (std::holds_alternative<PowerLaw>(q->kind())) {
      throw DivergenceError("H^s bilinear form of a non-constant power law diverges");
    }
    if (!(-q->growth_exponent() > need)) {
      throw DivergenceError("H^s bilinear form diverges at infinity: profile decays like r^" +
                            FracParams::fmt(q->growth_exponent()) + ", need decay faster than r^-(N-2s)/2");
    }
  }
  const double mu = 0.5 * (fp.N + 2.0 * fp.s);
  const AngularKernel kernel(fp.N, mu);
  const double area = quadrature::sphere_area(fp.N);
  const double pref = 0.5 * frac_laplacian_constant(fp) * area * area;
  const double sing = 1.0 - 2.0 * fp.s;
  std::vector<double> features = f.features();
  for (double x : g.features()) features.push_back(x);
  const double ext = std::max(f.extent(), g.extent());
  const double support = std::max(f.support_radius(), g.support_radius());
  const double tau = std::min(-f.growth_exponent(), -g.growth_exponent());
  bool ok = true;

  auto inner = [&](double r) {
    auto h = [&](double rho) {
      if (!(rho > 0.0)) return 0.0;
      const double d = rho - r;
      const double df = f.difference(r, d);
      const double dg = g.difference(r, d);
      if (df == 0.0 || dg == 0.0) return 0.0;
      const double B = 2.0 * r * rho;
      const double A = d * d + B;
      const double F = fp.N == 1 ? std::exp(-mu * std::log(A))
                                 : std::exp((fp.N - 1) * std::log(rho) - mu * std::log(A));
      return F * df * dg * kernel.j0(d * d, B);
    };
    std::vector<double> lo, hi;
    for (double x : features) (x < r ? lo : hi).push_back(x);
    auto a = quadrature::integrate_segments(h, quadrature::make_segments(0.0, r, lo, {fp.N - 1.0, sing}), spec);
    QuadratureResult b;
    const double T = std::max(2.0 * r, 2.0 * ext);
    hi.push_back(T);
    if (r >= support) {
      b = {0.0, 0.0, 0, true};
    } else {
      b = quadrature::integrate_segments(
          h, quadrature::make_segments(r, std::numeric_limits<double>::infinity(), hi, {sing, 0.0}, 1.0 + 2.0 * fp.s),
          spec);
    }
    ok = ok && a.converged && b.converged;
    return (fp.N == 1 ? 1.0 : std::pow(r, fp.N - 1)) * (a.value + b.value);
  };
  std::vector<double> bp = features;
  bp.push_back(2.0 * std::max(ext, 1e-300));
  const double outer_decay = std::min(1.0 + 2.0 * fp.s, 2.0 * tau + 1.0 + 2.0 * fp.s - fp.N);
  auto r = quadrature::integrate_segments(
      inner,
      quadrature::make_segments(0.0, std::numeric_limits<double>::infinity(), bp, {fp.N - 1.0, 0.0},
                                outer_decay),
      spec);
  return {pref * r.value, pref * r.error_estimate, r.subdivisions_used, r.converged && ok};
}

}  // namespace frachenon
