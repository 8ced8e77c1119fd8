#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "frachenon/extension.hpp"
#include "frachenon/regimes.hpp"

using namespace frachenon;

namespace {

double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }

// avg over S^{N-1} of (d2 + B (1 - c))^{-nu} by Gauss-Legendre in c with the
// (1 - c^2)^{(N-3)/2} density, for moderate peaking only.
double brute_average(int N, double nu, double d2, double B) {
  const auto g = quadrature::gauss_legendre(400);
  double num = 0.0, den = 0.0;
  // c = cos(phi) with phi on [0, pi] avoids the endpoint singularity at N = 2.
  for (int i = 0; i < 400; ++i) {
    const double phi = 0.5 * std::numbers::pi * (g.nodes[i] + 1.0);
    const double c = std::cos(phi);
    const double w = g.weights[i] * std::pow(std::sin(phi), N - 2);
    num += w * std::pow(d2 + B * (1.0 - c), -nu);
    den += w;
  }
  return num / den;
}

const std::vector<std::pair<int, double>> kEigenSet{{2, 0.25}, {3, 0.5}, {5, 0.75}, {11, 0.999}};

}  // namespace

TEST(AngularKernel, MatchesBruteForceAverage) {
  for (int N : {2, 3, 4, 5, 11}) {
    const double mu = 0.5 * (N + 0.8);
    const AngularKernel k(N, mu);
    for (double d2 : {2.0, 0.5, 0.2, 0.08}) {
      for (double B : {0.1, 0.7, 1.0, 1.3}) {
        const double A = d2 + B;
        const double want = brute_average(N, mu, d2, B) * std::pow(A, mu);
        EXPECT_LT(rel_err(k.j0(d2, B), want), 1e-11) << N << " " << d2 << " " << B;
        const KernelSet set = k.set(d2, B);
        EXPECT_LT(rel_err(set.j0, want), 1e-11);
        EXPECT_LT(rel_err(set.j0p, brute_average(N, mu + 1.0, d2, B) * std::pow(A, mu + 1.0)), 1e-11);
      }
    }
  }
}

TEST(AngularKernel, DerivativeAveragesAreConsistent) {
  // jw A^{-(mu+1)} = -(1/mu) d/dB of the average at fixed d2.
  for (int N : {1, 2, 3, 5, 8}) {
    const double mu = 0.5 * (N + 1.2);
    const AngularKernel k(N, mu);
    for (double d2 : {1.0, 0.05, 1e-3}) {
      for (double B : {0.3, 1.0, 2.0}) {
        const double h = 1e-4 * B;
        auto avg = [&](double b) { return k.j0(d2, b) * std::pow(d2 + b, -mu); };
        const double dB = (avg(B + h) - avg(B - h)) / (2.0 * h);
        const KernelSet set = k.set(d2, B);
        const double jw = set.jw * std::pow(d2 + B, -(mu + 1.0));
        EXPECT_LT(rel_err(jw, -dB / mu), 1e-6) << N << " " << d2 << " " << B;
      }
    }
  }
}

TEST(AngularKernel, BranchesAgreeAtTheSeriesLimit) {
  for (int N : {2, 3, 6}) {
    const AngularKernel k(N, 0.5 * N + 0.4);
    for (double z : {0.6 - 1e-12, 0.6 + 1e-12}) {
      const double B = z, d2 = 1.0 - z;
      EXPECT_LT(rel_err(k.j0(d2, B), k.j0(1.0 - 0.6, 0.6)), 1e-11);
    }
  }
}

TEST(PoissonKernel, CauchyValue) {
  EXPECT_NEAR(poisson_kernel({1, 0.5}, 0.0, 1.0), 1.0 / std::numbers::pi, 1e-14);
  EXPECT_NEAR(poisson_kernel({1, 0.5}, 1.0, 1.0), 0.5 / std::numbers::pi, 1e-14);
  EXPECT_THROW(poisson_kernel({3, 0.5}, 1.0, 0.0), DomainError);
}

TEST(PoissonKernel, UnitMass) {
  for (FracParams fp : {FracParams{3, 0.3}, FracParams{1, 0.5}, FracParams{2, 0.9}, FracParams{7, 0.1}}) {
    for (double t : {1e-3, 0.5, 2.0, 40.0}) {
      const auto m = poisson_kernel_mass(fp, t);
      EXPECT_TRUE(m.converged);
      EXPECT_NEAR(m.value, 1.0, 1e-8) << fp.N << " " << fp.s << " " << t;
    }
  }
}

TEST(PoissonKernel, Scaling) {
  const FracParams fp{4, 0.35};
  const double p = poisson_normalizer(fp);
  for (double l : {0.3, 2.0, 7.0}) {
    EXPECT_LT(rel_err(poisson_kernel(fp, l * 0.7, l * 1.3, p), std::pow(l, -4.0) * poisson_kernel(fp, 0.7, 1.3, p)),
              1e-13);
  }
}

TEST(Extend, ConstantIsReproduced) {
  for (auto [N, s] : kEigenSet) {
    const FracParams fp{N, s};
    for (HalfSpacePoint X : {HalfSpacePoint{1, 1}, HalfSpacePoint{0, 2}, HalfSpacePoint{3, 1e-3}}) {
      EXPECT_DOUBLE_EQ(extend(RadialProfile::constant(N, 1.0), X, fp).value, 1.0);
    }
  }
  // The generic path (a bump plus its complement) also sums to one.
  const FracParams fp{3, 0.4};
  const auto one = RadialProfile::sampled(3, {0.5, 1.0, 2.0}, {1.0, 1.0, 1.0}, 0.0);
  EXPECT_NEAR(extend(one, {0.7, 0.9}, fp).value, 1.0, 1e-9);
}

TEST(Extend, TraceRecovery) {
  for (auto [N, s] : kEigenSet) {
    const FracParams fp{N, s};
    const auto v = RadialProfile::model_v_alpha(fp, 0.3 * fp.alpha_max());
    EXPECT_NEAR(extend(v, {1.0, 1e-4}, fp).value, 1.0, 1e-2);
    EXPECT_EQ(extend(v, {1.0, 0.0}, fp).value, 1.0);
    // Refinement in t moves monotonically towards the trace.
    double last = std::abs(extend(v, {1.0, 1e-1}, fp).value - 1.0);
    for (double t : {1e-2, 1e-3, 1e-4, 1e-5}) {
      const double err = std::abs(extend(v, {1.0, t}, fp).value - 1.0);
      EXPECT_LT(err, last) << N << " " << t;
      last = err;
    }
  }
}

TEST(Extend, ModelFieldMatchesDirectConvolution) {
  const FracParams fp{5, 0.75};
  const double alpha = 0.4;
  const auto F = ExtensionField::homogeneous_model(fp, alpha, 2.0);
  const auto u = RadialProfile::model_v_alpha(fp, alpha, 2.0);
  for (HalfSpacePoint X : {HalfSpacePoint{0.3, 2.0}, HalfSpacePoint{4.0, 0.2}, HalfSpacePoint{0.0, 0.5}}) {
    EXPECT_LT(rel_err(F.value(X).value, extend(u, X, fp).value), 1e-9);
  }
  EXPECT_THROW(ExtensionField::homogeneous_model(fp, fp.alpha_max(), 1.0), DomainError);
}

TEST(Extend, GradientMatchesCentralDifferences) {
  const FracParams fp{3, 0.3};
  const QuadratureSpec tight{1e-14, 1e-12, 4000, {}};
  for (const auto& u : {RadialProfile::bump(3, 1.0, 4), RadialProfile::model_v_alpha(fp, 0.5)}) {
    const auto F = ExtensionField::poisson_of(u, fp, tight);
    for (HalfSpacePoint X : {HalfSpacePoint{0.4, 0.3}, HalfSpacePoint{1.5, 0.8}, HalfSpacePoint{0.9, 0.05}}) {
      const double h = 1e-4 * X.r();
      const auto g = F.sample(X);
      const double dx = (F.value({X.x_radius + h, X.t}).value - F.value({X.x_radius - h, X.t}).value) / (2 * h);
      const double dt = (F.value({X.x_radius, X.t + h}).value - F.value({X.x_radius, X.t - h}).value) / (2 * h);
      EXPECT_NEAR(g.dx, dx, 1e-6 * (1.0 + std::abs(dx)));
      EXPECT_NEAR(g.dt, dt, 1e-6 * (1.0 + std::abs(dt)));
      EXPECT_NEAR(g.value, F.value(X).value, 1e-12);
    }
  }
}

TEST(Extend, GradientVanishesOnTheAxis) {
  const FracParams fp{4, 0.6};
  const auto F = ExtensionField::poisson_of(RadialProfile::bump(4, 1.0, 3), fp);
  EXPECT_EQ(F.sample({0.0, 0.7}).dx, 0.0);
}

TEST(Extend, MaximumPrinciple) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> ux(0.0, 3.0), ut(1e-4, 2.0);
  for (auto [N, s] : std::vector<std::pair<int, double>>{{1, 0.3}, {2, 0.5}, {3, 0.8}, {6, 0.2}}) {
    const FracParams fp{N, s};
    const auto u = RadialProfile::bump(N, 1.2, 2);
    for (int i = 0; i < 25; ++i) {
      const HalfSpacePoint X{ux(rng), ut(rng)};
      const auto v = extend(u, X, fp);
      EXPECT_GE(v.value, -v.error_estimate - 1e-15);
      EXPECT_LE(v.value, 1.0 + v.error_estimate);
    }
  }
}

TEST(Extend, ScalingCovariance) {
  // u(lambda .) is the bump of radius R/lambda, so its extension at X is U(lambda X).
  const FracParams fp{3, 0.45};
  for (double l : {0.5, 1.7, 3.0}) {
    for (HalfSpacePoint X : {HalfSpacePoint{0.2, 0.3}, HalfSpacePoint{0.6, 0.01}}) {
      const double a = extend(RadialProfile::bump(3, 1.0 / l), X, fp).value;
      const double b = extend(RadialProfile::bump(3, 1.0), {l * X.x_radius, l * X.t}, fp).value;
      EXPECT_NEAR(a, b, 1e-10 * std::max(1.0, std::abs(b)));
    }
  }
}

TEST(Extend, RejectsDivergentTails) {
  const FracParams fp{3, 0.4};
  EXPECT_THROW(extend(RadialProfile::power_law(3, 0.9), {1, 1}, fp), ParameterError);
  EXPECT_THROW(extend(RadialProfile::sampled(3, {1, 2}, {1, 2}, -1.0), {1, 1}, fp), ParameterError);
  EXPECT_THROW(extend(RadialProfile::power_law(3, -3.0), {1, 1}, fp), ParameterError);
  EXPECT_THROW(extend(RadialProfile::bump(3), {0, 0}, fp), DomainError);
}

TEST(ModelVAlpha, Values) {
  EXPECT_DOUBLE_EQ(model_v_alpha({3, 0.5}, 0.0, 4.0), 0.25);
  EXPECT_DOUBLE_EQ(model_v_alpha({5, 0.5}, 1.0, 2.0), 0.5);
  for (auto [N, s] : kEigenSet) EXPECT_DOUBLE_EQ(model_v_alpha({N, s}, 0.1, 1.0), 1.0);
  EXPECT_THROW(model_v_alpha({3, 0.5}, 0.0, 0.0), DomainError);
  EXPECT_THROW(model_v_alpha({3, 0.5}, 1.0, 1.0), DomainError);
}

TEST(Homogeneity, Examples) {
  EXPECT_EQ(homogeneity_residual(0.3, {1, 1}, 1.0, {3, 0.5}).residual, 0.0);
  EXPECT_LT(homogeneity_residual(0.5, {1, 1}, 2.0, {3, 0.5}).residual, 1e-6);
  for (auto [N, s] : kEigenSet) {
    const FracParams fp{N, s};
    const auto r = homogeneity_residual(0.4 * fp.alpha_max(), {0.0, 1.3}, 3.0, fp);
    EXPECT_LT(r.residual, 1e-6);
    EXPECT_TRUE(r.converged);
  }
}

TEST(FracLaplacian, EigenIdentity) {
  for (auto [N, s] : std::vector<std::pair<int, double>>{{2, 0.25}, {3, 0.5}, {5, 0.75}}) {
    const FracParams fp{N, s};
    for (int i = 0; i <= 9; ++i) {
      const double alpha = 0.1 * i * fp.alpha_max();
      const auto r = frac_laplacian_pv(RadialProfile::model_v_alpha(fp, alpha), 1.0, fp);
      EXPECT_TRUE(r.converged);
      EXPECT_NEAR(r.value, lambda_alpha(fp, alpha), 1e-4) << N << " " << alpha;
    }
  }
}

TEST(FracLaplacian, EigenIdentityAwayFromUnitRadius) {
  const FracParams fp{11, 0.999};
  const double alpha = 0.5 * fp.alpha_max();
  const double x = 2.5;
  const auto r = frac_laplacian_pv(RadialProfile::model_v_alpha(fp, alpha), x, fp);
  const double want = lambda_alpha(fp, alpha) * std::pow(x, -2.0 * fp.s) * model_v_alpha(fp, alpha, x);
  EXPECT_LT(rel_err(r.value, want), 1e-6);
}

TEST(FracLaplacian, ConstantGivesZero) {
  EXPECT_EQ(frac_laplacian_pv(RadialProfile::constant(3, 4.2), 1.0, {3, 0.5}).value, 0.0);
}

TEST(FracLaplacian, SingularSolutionSatisfiesTheEquation) {
  for (ProblemParams pp : {ProblemParams{5, 0.5, 0.0, 3.0}, ProblemParams{3, 0.3, 0.8, 5.0}}) {
    const double A = singular_amplitude(pp);
    const auto u = RadialProfile::power_law(pp.N, -pp.gap(), A);
    const double x = 2.0;
    const double want = std::pow(x, pp.ell) * std::pow(A * std::pow(x, -pp.gap()), pp.p);
    EXPECT_LT(rel_err(frac_laplacian_pv(u, x, pp.frac()).value, want), 1e-8);
  }
}

TEST(FracLaplacian, BumpAgreesWithRichardsonExcision) {
  // Two PV rules on a profile whose Laplacian has no closed form.
  const FracParams fp{3, 0.6};
  const auto u = RadialProfile::bump(3, 1.0, 4);
  const double a = frac_laplacian_pv(u, 0.5, fp).value;
  const double mu = 0.5 * (3 + 1.2);
  const AngularKernel k(3, mu);
  const double pref = frac_laplacian_constant(fp) * quadrature::sphere_area(3);
  auto g = [&](double d) {
    const double rho = 0.5 + d;
    const double B = 2 * 0.5 * rho;
    return pref * rho * rho * std::pow(d * d + B, -mu) * u.difference(0.5, d) * k.j0(d * d, B);
  };
  quadrature::PvOptions opt;
  opt.method = quadrature::PvMethod::ExcisionRichardson;
  opt.fold_exponent = 1 - 1.2;
  opt.tail_decay = 2.2;
  opt.half_width = 0.25;
  opt.breakpoints = {1.0, 2.0};
  const auto b = quadrature::integrate_pv_radial(g, 0.5, {1e-13, 1e-12, 4000, {2.0, 0.0}}, opt);
  EXPECT_LT(rel_err(a, b.value), 1e-6);
}

TEST(ParseProfile, ReadsHeaderAndData) {
  std::istringstream in("# comment\nN=3 tail=2.5\n0.5 1.0\n\n1.0 0.8\n2.0 0.3\n");
  const auto u = parse_profile(in);
  EXPECT_EQ(u.N(), 3);
  EXPECT_DOUBLE_EQ(u.value(1.0), 0.8);
  EXPECT_DOUBLE_EQ(u.value(4.0), 0.3 * std::pow(2.0, -2.5));
  EXPECT_DOUBLE_EQ(u.value(0.1), 1.0);
}

TEST(ParseProfile, ReportsLineNumbers) {
  auto line_of = [](const std::string& text) {
    std::istringstream in(text);
    try {
      parse_profile(in);
    } catch (const FormatError& e) {
      return e.line();
    }
    return -1;
  };
  EXPECT_EQ(line_of("N=3 tail=2\n1 1\n2 oops\n"), 3);
  EXPECT_EQ(line_of("N=3 tail=2\n1 1\n0.5 2\n"), 3);
  EXPECT_EQ(line_of("bad header\n"), 1);
  EXPECT_EQ(line_of("N=3 tail=2\n1 1 1\n"), 2);
  EXPECT_GT(line_of(""), 0);
}

TEST(ParseProfile, SampledTraceRecovery) {
  std::istringstream in("N=3 tail=2\n0.25 1.0\n0.5 0.9\n1.0 0.6\n2.0 0.2\n4.0 0.05\n");
  const auto u = parse_profile(in);
  const FracParams fp{3, 0.5};
  for (double r : {0.25, 0.5, 1.0, 2.0, 4.0}) {
    EXPECT_NEAR(extend(u, {r, 1e-4}, fp).value, u.value(r), 1e-2);
  }
}
