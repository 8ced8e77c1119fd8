#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "frachenon/energetics.hpp"

using namespace frachenon;

namespace {

double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }

ExtensionField singular_field(const ProblemParams& pp) {
  return ExtensionField::homogeneous_model(pp.frac(), pp.alpha_tilde(), singular_amplitude(pp));
}

const ProblemParams kSolution{5, 0.5, 0.0, 3.0};
const ProblemParams kHenon{5, 0.5, 1.0, 4.0};

}  // namespace

TEST(Energy, ZeroField) {
  const auto F = ExtensionField::poisson_of(RadialProfile::zero(3), {3, 0.5});
  const ProblemParams pp{3, 0.5, 0.0, 3.0};
  const auto rep = energy_E(F, F.trace(), 1.0, pp);
  EXPECT_EQ(rep.D, 0.0);
  EXPECT_EQ(rep.H, 0.0);
  EXPECT_EQ(rep.E, 0.0);
  const auto [a, b] = pohozaev_residuals(F, F.trace(), 1.0, pp);
  EXPECT_EQ(a.abs_residual, 0.0);
  EXPECT_EQ(b.abs_residual, 0.0);
  EXPECT_EQ(a.rel_residual, 0.0);
  EXPECT_EQ(dH_dlambda_residual(F, 1.0, pp).abs_residual, 0.0);
  EXPECT_EQ(dH_solution_form_residual(F, F.trace(), 2.0, pp).abs_residual, 0.0);
}

TEST(Energy, ConstantFieldHIsTheWeightedArea) {
  for (auto [N, s] : std::vector<std::pair<int, double>>{{1, 0.3}, {3, 0.5}, {4, 0.9}}) {
    const auto F = ExtensionField::poisson_of(RadialProfile::constant(N, 1.0), {N, s});
    // int_{S^+} sigma^{1-2s} = |S^{N-1}| B(1-s, N/2) / 2.
    const double beta = std::exp(log_gamma(1.0 - s) + log_gamma(0.5 * N) - log_gamma(1.0 - s + 0.5 * N));
    const double want = 0.5 * quadrature::sphere_area(N) * beta;
    const auto H = energy_H(F, 1.7, {N, s, 0.0, 3.0});
    EXPECT_LT(rel_err(H.value, want), 1e-9);
    const auto dh = dH_dlambda_residual(F, 1.0, {N, s, 0.0, 3.0});
    EXPECT_NEAR(dh.lhs, 0.0, 1e-7);
    EXPECT_EQ(dh.rhs, 0.0);
  }
}

TEST(Energy, ReportRecombination) {
  const auto F = singular_field(kSolution);
  const auto rep = energy_E(F, F.trace(), 1.3, kSolution);
  EXPECT_EQ(rep.E, std::pow(1.3, rep.gamma) * (rep.D + 0.25 * rep.gamma * rep.H));
  // gamma / 4 is the coefficient (2s + ell) / (2 (p - 1)).
  EXPECT_DOUBLE_EQ(0.25 * kHenon.gamma(), (2 * kHenon.s + kHenon.ell) / (2 * (kHenon.p - 1)));
}

TEST(Energy, SingularSolutionIsScaleInvariant) {
  for (const ProblemParams& pp : {kSolution, kHenon, ProblemParams{3, 0.3, 0.5, 6.0}}) {
    const auto F = singular_field(pp);
    const auto ref = energy_E(F, F.trace(), 1.0, pp);
    EXPECT_TRUE(ref.converged);
    for (double l : {0.25, 0.5, 2.0, 4.0}) {
      const auto rep = energy_E(F, F.trace(), l, pp);
      const double lg = std::pow(l, pp.gamma());
      EXPECT_LT(rel_err(rep.E, ref.E), 1e-6) << l;
      EXPECT_LT(rel_err(lg * rep.D, ref.D), 1e-6);
      EXPECT_LT(rel_err(lg * rep.H, ref.H), 1e-6);
    }
  }
}

TEST(Energy, MonotonicityIntegrandVanishes) {
  // (2s+ell)/(p-1) U / r + dU/dr = 0 for the homogeneous field.
  const auto F = singular_field(kHenon);
  for (double r : {0.5, 1.0, 3.0}) {
    for (double c : {0.05, 0.5, 0.95}) {
      const double sn = std::sqrt(1 - c * c);
      const auto g = F.sample({r * sn, r * c});
      const double ur = sn * g.dx + c * g.dt;
      EXPECT_NEAR(kHenon.gap() * g.value / r + ur, 0.0, 1e-9 * std::abs(g.value) / r);
    }
  }
}

TEST(Energy, DScalingUnderBlowDown) {
  // lambda^gamma D(U; lambda R) = D(V; R) with V(X) = lambda^{gamma/2} U(lambda X).
  const ProblemParams pp{3, 0.5, 0.0, 3.0};
  const double l = 1.6, R = 0.7;
  const std::vector<double> radii{0.2, 0.5, 0.9, 1.4, 2.0};
  const std::vector<double> values{1.0, 0.8, 0.5, 0.2, 0.1};
  std::vector<double> scaled_r, scaled_v;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    scaled_r.push_back(radii[i] / l);
    scaled_v.push_back(std::pow(l, pp.gap()) * values[i]);
  }
  const auto u = RadialProfile::sampled(3, radii, values, 3.0);
  const auto v = RadialProfile::sampled(3, scaled_r, scaled_v, 3.0);
  const QuadratureSpec spec{1e-11, 1e-7, 2000, {}};
  const auto FU = ExtensionField::poisson_of(u, pp.frac());
  const auto FV = ExtensionField::poisson_of(v, pp.frac());
  const double lhs = std::pow(l, pp.gamma()) * energy_D(FU, u, l * R, pp, spec).value;
  const double rhs = energy_D(FV, v, R, pp, spec).value;
  EXPECT_LT(rel_err(lhs, rhs), 1e-5);
}

TEST(DH, HomogeneousFieldPowerRule) {
  const FracParams fp{3, 0.4};
  const double alpha = 0.3;
  const auto F = ExtensionField::homogeneous_model(fp, alpha);
  const ProblemParams pp{3, 0.4, 0.0, 3.0};
  const double a = fp.alpha_max() - alpha;
  const double H1 = energy_H(F, 1.0, pp).value;
  for (double l : {0.5, 2.0}) {
    const auto r = dH_dlambda_residual(F, l, pp);
    const double want = -2.0 * a * std::pow(l, -2.0 * a - 1.0) * H1;
    EXPECT_LT(rel_err(r.rhs, want), 1e-8);
    EXPECT_LT(rel_err(r.lhs, want), 1e-6);
  }
}

TEST(DH, BumpSurfaceForm) {
  const FracParams fp{3, 0.5};
  const auto F = ExtensionField::poisson_of(RadialProfile::bump(3), fp);
  for (double l : {0.4, 0.9, 1.5}) {
    const auto r = dH_dlambda_residual(F, l, {3, 0.5, 0.0, 3.0});
    EXPECT_TRUE(r.converged);
    EXPECT_LT(r.rel_residual, 1e-4) << l;
  }
}

TEST(DH, SolutionForm) {
  for (const ProblemParams& pp : {kSolution, kHenon}) {
    const auto F = singular_field(pp);
    for (double l : {1.0, 2.0}) {
      const auto r = dH_solution_form_residual(F, F.trace(), l, pp);
      EXPECT_LT(r.rel_residual, 1e-3);
      EXPECT_LT(r.abs_residual, 10.0 * r.quadrature_error);
    }
  }
}

TEST(Identities, RejectNonSolutions) {
  const ProblemParams pp = kSolution;
  const auto bump = ExtensionField::poisson_of(RadialProfile::bump(5), pp.frac());
  EXPECT_THROW(pohozaev_residuals(bump, bump.trace(), 1.0, pp), NotASolutionError);
  EXPECT_THROW(dH_solution_form_residual(bump, bump.trace(), 1.0, pp), NotASolutionError);
  const auto off = ExtensionField::homogeneous_model(pp.frac(), pp.alpha_tilde(), 1.01 * singular_amplitude(pp));
  EXPECT_THROW(pohozaev_residuals(off, off.trace(), 1.0, pp), NotASolutionError);
  const auto F = singular_field(pp);
  EXPECT_THROW(pohozaev_residuals(F, RadialProfile::bump(5), 1.0, pp), ParameterError);
  EXPECT_THROW(energy_H(F, 1.0, {3, 0.5, 0.0, 3.0}), ParameterError);
}

TEST(Identities, DivergentIntegralsAreNamed) {
  // alpha = 0 puts the gradient energy exactly at the divergence threshold.
  const ProblemParams pp{3, 0.5, 0.0, 2.0};
  const auto F = ExtensionField::homogeneous_model(pp.frac(), 0.0, 1.0);
  try {
    energy_D(F, F.trace(), 1.0, pp);
    FAIL() << "expected DivergenceError";
  } catch (const DivergenceError& e) {
    EXPECT_NE(std::string(e.what()).find("gradient"), std::string::npos);
  }
  EXPECT_THROW(potential_integral(RadialProfile::power_law(3, -1.5), 1.0, {3, 0.5, 0.0, 2.0}), DivergenceError);
  EXPECT_THROW(halfspace_dirichlet_energy(F), DivergenceError);
}

TEST(Pohozaev, SingularSolutions) {
  for (const ProblemParams& pp : {kSolution, kHenon}) {
    const auto F = singular_field(pp);
    for (double R : {0.5, 1.0, 2.0}) {
      const auto [a, b] = pohozaev_residuals(F, F.trace(), R, pp);
      EXPECT_TRUE(a.converged && b.converged);
      EXPECT_LT(a.rel_residual, 1e-3) << R;
      EXPECT_LT(b.rel_residual, 1e-3) << R;
      EXPECT_LE(a.abs_residual, 10.0 * a.quadrature_error);
      EXPECT_LE(b.abs_residual, 10.0 * b.quadrature_error);
    }
  }
}

TEST(Pohozaev, TermsAreNotTrivial) {
  // Guard against an identity that holds because every term vanishes.
  const auto F = singular_field(kSolution);
  const auto [a, b] = pohozaev_residuals(F, F.trace(), 1.0, kSolution);
  EXPECT_GT(std::abs(a.lhs), 0.1);
  EXPECT_GT(std::abs(b.lhs), 0.1);
}

TEST(Stability, MarginMatchesClassification) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> us(0.05, 0.95), ue(0.0, 1.0);
  int checked = 0;
  while (checked < 100) {
    const int N = 1 + static_cast<int>(ue(rng) * 20);
    const double s = us(rng);
    if (!(N > 2 * s)) continue;
    const double ell = -2 * s + 0.01 + 2 * ue(rng);
    const double pS = sobolev_exponent({N, s, ell});
    const ProblemParams pp{N, s, ell, pS * (1.0 + 1e-3 + 10 * ue(rng) * ue(rng))};
    const auto rep = classify(pp);
    ASSERT_NE(rep.regime, Regime::Subcritical);
    EXPECT_EQ(stability_margin(pp) < 0.0, rep.regime == Regime::SupercriticalNonexistence);
    ++checked;
  }
}

TEST(Stability, MarginAtThresholdAndExamples) {
  const auto t = jl_threshold({11, 0.999, 0.0});
  EXPECT_LT(std::abs(stability_margin({11, 0.999, 0.0, t.p_star})), 1e-8 * t.lambda_at_zero);
  EXPECT_LT(stability_margin({3, 0.5, 0.0, 3.0}), 0.0);
  EXPECT_THROW(stability_margin({3, 0.5, 0.0, 2.0}), DomainError);
  EXPECT_THROW(stability_margin({3, 0.5, 0.0, 1.5}), DomainError);
}

TEST(BilinearForm, SymmetricAndPositive) {
  const FracParams fp{3, 0.4};
  const auto f = RadialProfile::bump(3, 1.0, 4);
  const auto g = RadialProfile::bump(3, 1.5, 3);
  const auto fg = hs_bilinear_form(f, g, fp);
  const auto gf = hs_bilinear_form(g, f, fp);
  EXPECT_LT(rel_err(fg.value, gf.value), 1e-9);
  EXPECT_GT(hs_bilinear_form(f, f, fp).value, 0.0);
  EXPECT_GT(hs_bilinear_form(g, g, fp).value, 0.0);
  EXPECT_EQ(hs_bilinear_form(f, RadialProfile::constant(3, 2.0), fp).value, 0.0);
  EXPECT_THROW(hs_bilinear_form(f, RadialProfile::power_law(3, -0.5), fp), DivergenceError);
}

TEST(BilinearForm, MatchesPairingWithTheFractionalLaplacian) {
  // <u,u> = int u (-Delta)^s u dx, with the PV operator as independent oracle.
  const FracParams fp{3, 0.5};
  const auto u = RadialProfile::bump(3, 1.0, 4);
  auto f = [&](double r) { return quadrature::sphere_area(3) * r * r * u(r) * frac_laplacian_pv(u, r, fp).value; };
  const auto pairing = quadrature::integrate_power_weight(f, 0.0, 1.0, {1e-12, 1e-9, 400, {2.0, 4.0}});
  EXPECT_LT(rel_err(hs_bilinear_form(u, u, fp).value, pairing.value), 1e-7);
}

TEST(BilinearForm, DirichletTraceIdentity) {
  for (auto [N, s] : std::vector<std::pair<int, double>>{{3, 0.5}, {1, 0.3}}) {
    const FracParams fp{N, s};
    const auto u = RadialProfile::bump(N, 1.0, 4);
    const auto F = ExtensionField::poisson_of(u, fp);
    const auto bulk = halfspace_dirichlet_energy(F, {1e-12, 1e-6, 2000, {}});
    const auto form = hs_bilinear_form(u, u, fp);
    EXPECT_LT(rel_err(bulk.value, kappa_s(s) * form.value), 1e-3) << N;
  }
}
