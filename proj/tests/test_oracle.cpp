#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "vortex/oracle.hpp"
#include "vortex/verify.hpp"

using namespace vortex;

namespace {
double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }
}  // namespace

TEST(TwoVortex, ClosedFormHandValue) {
  ModelParams p{2, 1, 10.0, 1e7, 1.0, 2000.0};
  EXPECT_NEAR(oracle::two_vortex_r2_closed_form(p), 1.75e-4, 1e-18);
}

TEST(TwoVortex, WeakInteractionLimit) {
  ModelParams p{2, 1, 10.0, 1e7, 1e-12, 2000.0};
  EXPECT_NEAR(oracle::two_vortex_r2_closed_form(p), 1.0 / (p.mu * p.length), 1e-15);
}

TEST(TwoVortex, QuadratureAgrees) {
  for (double beta : {0.1, 1.0, 10.0}) {
    ModelParams p{2, 1, 10.0, 1e7, beta, 2000.0};
    EXPECT_LT(rel(oracle::two_vortex_r2_quadrature(p), oracle::two_vortex_r2_closed_form(p)), 1e-8);
  }
}

TEST(TwoVortex, RejectsWrongShape) {
  ModelParams p{3, 1, 10.0, 1e7, 1.0, 2000.0};
  EXPECT_THROW(oracle::two_vortex_r2_closed_form(p), std::domain_error);
  p = {2, 2, 10.0, 1e7, 1.0, 2000.0};
  EXPECT_THROW(oracle::two_vortex_r2_quadrature(p), std::domain_error);
}

TEST(PointVortices, GeneralNReducesToKnownCases) {
  EXPECT_NEAR(oracle::point_vortex_r2_exact(2, 1.0, 2000.0, 10.0),
              oracle::two_vortex_r2_closed_form({2, 1, 10.0, 1e7, 1.0, 2000.0}), 1e-18);
  EXPECT_DOUBLE_EQ(oracle::point_vortex_r2_exact(1, 3.0, 2000.0, 10.0), 5e-5);
}

TEST(NumericSaddle, ReferencePoint) {
  const ScaledParams p{5e5, 0.2, 2000.0, 10.0};
  EXPECT_NEAR(oracle::numeric_saddle_eta(p), 2438.5, 0.1);
}

TEST(NumericSaddle, AgreesWithExplicitOnGrid) {
  for (double a : verify_detail::log_grid(1e3, 1e7, 5))
    for (double b : verify_detail::log_grid(0.05, 50.0, 5))
      for (double m : verify_detail::log_grid(100.0, 1e4, 5)) {
        const ScaledParams p{a, b, m, 1.0};
        EXPECT_LT(rel(oracle::numeric_saddle_eta(p), saddle_eta(p)), 1e-6);
      }
}

TEST(NumericSaddle, DerivativeMatchesStableDifference) {
  const ScaledParams p{5e5, 0.2, 2000.0, 10.0};
  for (double l : {10.0, 1000.0, 3000.0}) {
    const double h = 1e-3;
    EXPECT_NEAR(oracle::ground_free_energy_central_difference(l, h, p),
                oracle::ground_free_energy_derivative(l, p), 1e-6 * std::abs(oracle::ground_free_energy_derivative(l, p)) + 1e-12);
    EXPECT_NEAR(oracle::ground_free_energy_difference(l, l + 1.0, p),
                ground_free_energy(l + 1.0, p) - ground_free_energy(l, p), 1e-10);
  }
}

TEST(AlternateRoot, ExceedsTwoMu) {
  for (double a : {1e3, 5e5, 1e7})
    for (double b : {0.05, 1.0, 50.0}) {
      const ScaledParams p{a, b, 2000.0, 1.0};
      EXPECT_GT(oracle::alternate_eta_root(p), 2.0 * p.mu);
      EXPECT_THROW(ground_free_energy(oracle::alternate_eta_root(p), p), std::domain_error);
    }
}

TEST(RecomputeEnergies, StraightPairAndSingle) {
  std::vector<Vec2> ends{{0, 0}, {0, std::exp(1.0)}};
  ModelParams p{2, 8, 10.0, 1e7, 1.0, 2000.0};
  const auto e = oracle::recompute_energies(FilamentEnsemble::straight(ends, 8), p);
  EXPECT_EQ(e.h_self, 0.0);
  EXPECT_NEAR(e.h_int, -10.0, 1e-12);
  EXPECT_NEAR(e.i_n, 10.0 * std::exp(2.0), 1e-10);
}

TEST(Verify, AllChecksPass) {
  const auto r = run_verify();
  for (const auto& c : r) EXPECT_TRUE(c.passed) << c.name << ": " << c.measured << " " << c.detail;
  EXPECT_TRUE(all_passed(r));
}

TEST(Verify, PerturbedEtaIsReportedAsSaddleFailure) {
  VerifyOptions o;
  o.perturb_eta = 1e-3;
  const auto c = check_saddle_grid(o);
  EXPECT_FALSE(c.passed);
  EXPECT_NEAR(c.measured, 1e-3, 1e-5);
}

TEST(Verify, ReportIncludesRoundTripValues) {
  std::ostringstream os;
  print_report(os, {check_beta0(), check_error_locus()});
  EXPECT_NE(os.str().find("beta0(5e5, 2000) = 0.25198"), std::string::npos);
  EXPECT_NE(os.str().find("E=0.5"), std::string::npos);
}
