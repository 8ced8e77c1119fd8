#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "frachenon/special_functions.hpp"

using namespace frachenon;

namespace {

double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }

}  // namespace

TEST(LogGamma, TrivialValues) {
  EXPECT_EQ(log_gamma(1.0), 0.0);
  EXPECT_NEAR(log_gamma(2.0), 0.0, 1e-16);
  EXPECT_NEAR(log_gamma(0.5), 0.5 * std::log(std::numbers::pi), 1e-15);
  EXPECT_NEAR(log_gamma(5.0), std::log(24.0), 1e-14);
}

TEST(LogGamma, MatchesExtendedPrecisionReference) {
  // Log-spaced sweep of [1e-6, 1e6] plus points clustered near the zeros at 1 and 2.
  std::vector<double> xs;
  for (int i = 0; i <= 4000; ++i) xs.push_back(std::pow(10.0, -6.0 + 12.0 * i / 4000.0));
  for (int i = 1; i <= 50; ++i) {
    const double d = std::pow(10.0, -i / 5.0);
    for (double c : {1.0, 2.0}) {
      xs.push_back(c + d);
      xs.push_back(c - d);
    }
  }
  double worst = 0.0;
  for (double x : xs) {
    const long double ref = lgammal(static_cast<long double>(x));
    if (ref == 0.0L) continue;
    const double err = static_cast<double>(std::abs((log_gamma(x) - ref) / ref));
    worst = std::max(worst, err);
  }
  EXPECT_LT(worst, 1e-13);
}

TEST(LogGamma, RejectsNonPositive) {
  EXPECT_THROW(log_gamma(0.0), DomainError);
  EXPECT_THROW(log_gamma(-1.5), DomainError);
}

TEST(Lambda, FrozenValues) {
  EXPECT_NEAR(lambda_alpha({3, 0.5}, 0.0), 2.0 / std::numbers::pi, 1e-14);
  EXPECT_NEAR(lambda_alpha({3, 0.5}, 0.5), 0.5, 1e-14);
  EXPECT_LT(rel_err(lambda_alpha({2, 0.25}, 0.3), 0.45946389770799097753), 1e-13);
  EXPECT_LT(rel_err(lambda_alpha({5, 0.75}, 1.2), 1.0730818046034127055), 1e-13);
  EXPECT_LT(rel_err(lambda_alpha({11, 0.999}, 3.0), 11.224343280002635968), 1e-13);
  EXPECT_LT(rel_err(lambda_alpha({5, 0.5}, 1.5), 5.0 / 6.0), 1e-13);
  EXPECT_LT(rel_err(lambda_alpha({1, 0.3}, 0.1), 0.062716147017579079402), 1e-13);
}

TEST(Lambda, GapFormAgrees) {
  for (FracParams fp : {FracParams{2, 0.25}, FracParams{3, 0.5}, FracParams{7, 0.9}}) {
    for (double f : {0.0, 0.2, 0.5, 0.9, 0.999}) {
      const double a = f * fp.alpha_max();
      EXPECT_LT(rel_err(lambda_gap(fp, fp.alpha_max() - a), lambda_alpha(fp, a)), 1e-12);
    }
  }
}

TEST(Lambda, ClassicalLimitAtFive) {
  EXPECT_LT(rel_err(lambda_alpha({5, 1.0 - 1e-6}, 0.0), 2.25), 1e-5);
}

TEST(Lambda, EndpointDecay) {
  const FracParams fp{3, 0.5};
  EXPECT_LT(lambda_alpha(fp, 0.99 * fp.alpha_max()), 0.05 * lambda_alpha(fp, 0.0));
}

TEST(Lambda, SymmetricCollapseAtZero) {
  for (FracParams fp : {FracParams{2, 0.25}, FracParams{4, 0.6}, FracParams{9, 0.1}}) {
    const double r = std::exp(log_gamma(0.25 * (fp.N + 2 * fp.s)) - log_gamma(0.25 * (fp.N - 2 * fp.s)));
    EXPECT_LT(rel_err(lambda_alpha(fp, 0.0), std::pow(2.0, 2 * fp.s) * r * r), 1e-13);
  }
}

TEST(Lambda, StrictlyDecreasingAndPositive) {
  for (FracParams fp : {FracParams{1, 0.1}, FracParams{2, 0.25}, FracParams{3, 0.5},
                        FracParams{5, 0.75}, FracParams{11, 0.999}}) {
    double prev = lambda_alpha(fp, 0.0);
    for (int i = 1; i < 500; ++i) {
      const double v = lambda_alpha(fp, fp.alpha_max() * i / 500.0);
      EXPECT_GT(v, 0.0);
      EXPECT_LT(v, prev);
      prev = v;
    }
  }
}

TEST(Lambda, DomainErrors) {
  const FracParams fp{3, 0.5};
  EXPECT_THROW(lambda_alpha(fp, -0.1), DomainError);
  EXPECT_THROW(lambda_alpha(fp, 1.0), DomainError);
  EXPECT_THROW(lambda_alpha(fp, 1.5), DomainError);
  EXPECT_THROW(lambda_alpha({1, 0.5}, 0.0), ParameterError);
  EXPECT_THROW(lambda_alpha({3, 1.0}, 0.0), ParameterError);
}

TEST(FracLaplacianConstant, FrozenValues) {
  EXPECT_LT(rel_err(frac_laplacian_constant({1, 0.5}), 1.0 / std::numbers::pi), 1e-14);
  EXPECT_LT(rel_err(frac_laplacian_constant({3, 0.5}), 1.0 / (std::numbers::pi * std::numbers::pi)), 1e-14);
  EXPECT_LT(rel_err(frac_laplacian_constant({2, 0.25}), 0.083241983875425065489), 1e-13);
  EXPECT_LT(rel_err(frac_laplacian_constant({5, 0.75}), 0.085263688241535731804), 1e-13);
}

TEST(FracLaplacianConstant, VanishesAtOrderEnds) {
  EXPECT_LT(frac_laplacian_constant({3, 1e-9}), 1e-8);
  EXPECT_LT(frac_laplacian_constant({3, 1.0 - 1e-9}), 1e-8);
}

TEST(Kappa, ClosedForm) {
  EXPECT_EQ(kappa_s(0.5), 1.0);
  EXPECT_LT(rel_err(kappa_s(0.25), 0.47798879748612499536), 1e-13);
  EXPECT_LT(rel_err(kappa_s(0.75), 2.0920992401062032979), 1e-13);
  EXPECT_LT(rel_err(kappa_s(0.1), 0.19557356719531745256), 1e-13);
  EXPECT_LT(rel_err(kappa_s(0.9), 5.1131654156581897812), 1e-13);
  EXPECT_THROW(kappa_s(0.0), DomainError);
  EXPECT_THROW(kappa_s(1.0), DomainError);
}

TEST(Kappa, OdeCrossCheck) {
  for (int i = 1; i <= 9; ++i) {
    const double s = 0.1 * i;
    const auto r = kappa_s_ode_detail(s);
    EXPECT_LT(rel_err(r.kappa, kappa_s(s)), 1e-4) << "s = " << s;
    // The t^{2s} coefficient of the decaying solution is -kappa/(2s).
    EXPECT_LT(rel_err(r.shooting_coefficient, -kappa_s(s) / (2 * s)), 1e-6) << "s = " << s;
  }
}

TEST(PoissonNormalizer, CauchyKernel) {
  EXPECT_LT(rel_err(poisson_normalizer({1, 0.5}), 1.0 / std::numbers::pi), 1e-12);
}

TEST(PoissonNormalizer, MatchesClosedForm) {
  for (FracParams fp : {FracParams{3, 0.3}, FracParams{2, 0.25}, FracParams{5, 0.75},
                        FracParams{1, 0.1}, FracParams{11, 0.999}}) {
    EXPECT_LT(rel_err(poisson_normalizer(fp), poisson_normalizer_closed_form(fp)), 1e-11);
  }
  EXPECT_LT(rel_err(poisson_normalizer_closed_form({3, 0.3}), 0.055911975191893661719), 1e-13);
}

TEST(PoissonNormalizer, IndependentOfHeight) {
  for (FracParams fp : {FracParams{1, 0.5}, FracParams{3, 0.3}, FracParams{4, 0.8}}) {
    EXPECT_LT(rel_err(poisson_normalizer(fp, 10.0), poisson_normalizer(fp, 1.0)), 1e-10);
  }
}
