#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "vortex/energy.hpp"
#include "vortex/oracle.hpp"

using namespace vortex;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

FilamentEnsemble random_ensemble(std::size_t n, std::size_t m, std::uint64_t seed, double spread = 1.0) {
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> g(0.0, spread);
  FilamentEnsemble e(n, m);
  for (auto& b : e.beads()) b = {g(eng), g(eng)};
  return e;
}

void expect_breakdown_near(const EnergyBreakdown& a, const EnergyBreakdown& b, double tol) {
  EXPECT_LT(rel(a.h_self, b.h_self), tol);
  EXPECT_NEAR(a.h_int, b.h_int, tol * std::max(1.0, std::abs(b.h_int)));
  EXPECT_LT(rel(a.i_n, b.i_n), tol);
}

}  // namespace

TEST(ModelParams, DeltaTimesMIsL) {
  ModelParams p{3, 7, 10.0, 1e7, 1.0, 2000.0};
  EXPECT_DOUBLE_EQ(p.delta() * 7.0, 10.0);
}

TEST(ModelParams, ValidateRejectsBadValues) {
  EXPECT_THROW((ModelParams{0, 1, 1.0, 1.0, 1.0, 1.0}).validate(), std::invalid_argument);
  EXPECT_THROW((ModelParams{1, 0, 1.0, 1.0, 1.0, 1.0}).validate(), std::invalid_argument);
  EXPECT_THROW((ModelParams{1, 1, -1.0, 1.0, 1.0, 1.0}).validate(), std::invalid_argument);
  EXPECT_THROW((ModelParams{1, 1, 1.0, 1.0, 0.0, 1.0}).validate(), std::invalid_argument);
  EXPECT_THROW((ModelParams{1, 1, 1.0, 1.0, 1.0, NAN}).validate(), std::invalid_argument);
}

TEST(FilamentEnsemble, CoincidenceDetection) {
  std::vector<Vec2> ends{{0, 0}, {1, 0}};
  auto e = FilamentEnsemble::straight(ends, 4);
  EXPECT_FALSE(e.has_coincident_beads());
  e.bead(1, 2) = e.bead(0, 2);
  EXPECT_TRUE(e.has_coincident_beads());
  EXPECT_TRUE(e.all_finite());
}

TEST(HSelf, StraightFilamentsAreZero) {
  std::vector<Vec2> ends{{0, 0}, {1, 2}, {-3, 1}};
  ModelParams p{3, 16, 10.0, 1e7, 1.0, 2000.0};
  EXPECT_EQ(h_self(FilamentEnsemble::straight(ends, 16), p), 0.0);
}

TEST(HSelf, Zigzag) {
  const double a = 0.3;
  ModelParams p{1, 8, 10.0, 1e7, 1.0, 2000.0};
  FilamentEnsemble e(1, 8);
  for (std::size_t j = 0; j < 8; ++j) e.bead(0, j) = (j % 2 == 0) ? Vec2{0, 0} : Vec2{a, 0};
  EXPECT_NEAR(h_self(e, p), p.alpha * 8.0 * 8.0 * a * a / (2.0 * p.length), 1e-6);
}

TEST(HSelf, TranslationInvariant) {
  ModelParams p{2, 8, 10.0, 1e7, 1.0, 2000.0};
  auto e = random_ensemble(2, 8, 1);
  const double before = h_self(e, p);
  for (auto& b : e.filament(1)) b += Vec2{3.0, -2.0};
  EXPECT_NEAR(h_self(e, p), before, 1e-12 * before);
}

TEST(HInt, UnitDistanceIsZero) {
  std::vector<Vec2> ends{{0, 0}, {1, 0}};
  ModelParams p{2, 16, 10.0, 1e7, 1.0, 2000.0};
  EXPECT_NEAR(h_int(FilamentEnsemble::straight(ends, 16), p), 0.0, 1e-15);
}

TEST(HInt, DistanceEulerGivesMinusL) {
  std::vector<Vec2> ends{{0, 0}, {0, std::numbers::e}};
  ModelParams p{2, 16, 10.0, 1e7, 1.0, 2000.0};
  EXPECT_NEAR(h_int(FilamentEnsemble::straight(ends, 16), p), -10.0, 1e-12);
}

TEST(HInt, SingleFilamentIsZero) {
  ModelParams p{1, 8, 10.0, 1e7, 1.0, 2000.0};
  EXPECT_EQ(h_int(random_ensemble(1, 8, 2), p), 0.0);
}

TEST(HInt, CoincidentBeadsAreForbidden) {
  ModelParams p{2, 4, 10.0, 1e7, 1.0, 2000.0};
  auto e = random_ensemble(2, 4, 3);
  e.bead(1, 3) = e.bead(0, 3);
  EXPECT_EQ(h_int(e, p), kInfiniteEnergy);
}

TEST(AngularMomentum, StraightFilamentAtRadius) {
  std::vector<Vec2> ends{{0.6, 0.8}};
  ModelParams p{1, 32, 10.0, 1e7, 1.0, 2000.0};
  EXPECT_NEAR(angular_momentum(FilamentEnsemble::straight(ends, 32), p), 10.0, 1e-12);
  std::vector<Vec2> origin{{0, 0}};
  EXPECT_EQ(angular_momentum(FilamentEnsemble::straight(origin, 32), p), 0.0);
}

TEST(AngularMomentum, ScalesQuadratically) {
  ModelParams p{3, 5, 10.0, 1e7, 1.0, 2000.0};
  auto e = random_ensemble(3, 5, 4);
  const double i0 = angular_momentum(e, p);
  for (auto& b : e.beads()) b = 3.0 * b;
  EXPECT_LT(rel(angular_momentum(e, p), 9.0 * i0), 1e-13);
}

TEST(Energies, RotationAboutOriginInvariance) {
  ModelParams p{3, 6, 10.0, 1e7, 1.0, 2000.0};
  auto e = random_ensemble(3, 6, 5);
  const auto before = energy_breakdown(e, p);
  const double c = std::cos(0.7), s = std::sin(0.7);
  for (auto& b : e.beads()) b = {c * b.x - s * b.y, s * b.x + c * b.y};
  expect_breakdown_near(energy_breakdown(e, p), before, 1e-12);
}

TEST(Energies, LabelExchangeInvariance) {
  ModelParams p{3, 6, 10.0, 1e7, 1.0, 2000.0};
  auto e = random_ensemble(3, 6, 6);
  const auto before = energy_breakdown(e, p);
  FilamentEnsemble swapped(3, 6);
  for (std::size_t j = 0; j < 6; ++j) {
    swapped.bead(0, j) = e.bead(2, j);
    swapped.bead(1, j) = e.bead(0, j);
    swapped.bead(2, j) = e.bead(1, j);
  }
  expect_breakdown_near(energy_breakdown(swapped, p), before, 1e-13);
}

TEST(Energies, CyclicLayerShiftInvariance) {
  ModelParams p{3, 6, 10.0, 1e7, 1.0, 2000.0};
  auto e = random_ensemble(3, 6, 7);
  FilamentEnsemble shifted(3, 6);
  for (std::size_t k = 0; k < 3; ++k)
    for (std::size_t j = 0; j < 6; ++j) shifted.bead(k, (j + 1) % 6) = e.bead(k, j);
  expect_breakdown_near(energy_breakdown(shifted, p), energy_breakdown(e, p), 1e-13);
}

TEST(Energies, TotalActionMatchesDefinition) {
  ModelParams p{3, 6, 10.0, 1e7, 0.4, 2000.0};
  const auto e = energy_breakdown(random_ensemble(3, 6, 8), p);
  EXPECT_GE(e.h_self, 0.0);
  EXPECT_DOUBLE_EQ(e.total_action, -p.beta * (e.h_self + e.h_int) - p.mu * e.i_n);
}

TEST(Energies, MatchNaiveRecomputation) {
  std::vector<Vec2> ends{{0, 0}, {0.5, 0.5}};
  ModelParams p2{2, 8, 10.0, 1e7, 1.0, 2000.0};
  expect_breakdown_near(energy_breakdown(FilamentEnsemble::straight(ends, 8), p2),
                        oracle::recompute_energies(FilamentEnsemble::straight(ends, 8), p2), 1e-12);
  ModelParams p{3, 4, 10.0, 1e7, 1.0, 2000.0};
  auto e = random_ensemble(3, 4, 9);
  expect_breakdown_near(energy_breakdown(e, p), oracle::recompute_energies(e, p), 1e-12);
  ModelParams p1{1, 4, 10.0, 1e7, 1.0, 2000.0};
  EXPECT_EQ(oracle::recompute_energies(random_ensemble(1, 4, 10), p1).h_int, 0.0);
}

TEST(DeltaTranslate, ZeroDisplacement) {
  ModelParams p{3, 4, 10.0, 1e7, 1.0, 2000.0};
  const auto d = delta_action_translate(random_ensemble(3, 4, 11), p, 1, {0, 0});
  EXPECT_EQ(d.h_int, 0.0);
  EXPECT_EQ(d.i_n, 0.0);
}

TEST(DeltaTranslate, SingleFilamentHasNoInteractionChange) {
  ModelParams p{1, 4, 10.0, 1e7, 1.0, 2000.0};
  const auto d = delta_action_translate(random_ensemble(1, 4, 12), p, 0, {0.3, -0.1});
  EXPECT_EQ(d.h_int, 0.0);
  EXPECT_NE(d.i_n, 0.0);
}

TEST(DeltaTranslate, MatchesRecomputation) {
  ModelParams p{3, 4, 10.0, 1e7, 1.0, 2000.0};
  std::mt19937_64 eng(13);
  std::normal_distribution<double> g(0.0, 0.5);
  for (int trial = 0; trial < 50; ++trial) {
    auto e = random_ensemble(3, 4, 100 + trial);
    const std::size_t k = trial % 3;
    const Vec2 d{g(eng), g(eng)};
    const auto before = oracle::recompute_energies(e, p);
    const auto delta = delta_action_translate(e, p, k, d);
    for (auto& b : e.filament(k)) b += d;
    const auto after = oracle::recompute_energies(e, p);
    EXPECT_NEAR(delta.h_int, after.h_int - before.h_int, 1e-10 * std::max(1.0, std::abs(after.h_int)));
    EXPECT_NEAR(delta.i_n, after.i_n - before.i_n, 1e-10 * std::max(1.0, after.i_n));
  }
}

TEST(DeltaTranslate, CoincidenceGivesInfinity) {
  std::vector<Vec2> ends{{0, 0}, {1, 0}};
  ModelParams p{2, 4, 10.0, 1e7, 1.0, 2000.0};
  const auto d = delta_action_translate(FilamentEnsemble::straight(ends, 4), p, 1, {-1, 0});
  EXPECT_EQ(d.h_int, kInfiniteEnergy);
}

TEST(DeltaRegrow, IdenticalBeadsGiveZero) {
  ModelParams p{2, 4, 10.0, 1e7, 1.0, 2000.0};
  auto e = random_ensemble(2, 4, 14);
  std::vector<Vec2> same(e.filament(0).begin(), e.filament(0).end());
  EXPECT_EQ(delta_hint_regrow(e, p, 0, same), 0.0);
}

TEST(DeltaRegrow, SingleFilamentIsZero) {
  ModelParams p{1, 4, 10.0, 1e7, 1.0, 2000.0};
  auto e = random_ensemble(1, 4, 15);
  auto fresh = random_ensemble(1, 4, 16);
  EXPECT_EQ(delta_hint_regrow(e, p, 0, fresh.filament(0)), 0.0);
}

TEST(DeltaRegrow, MatchesRecomputation) {
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + trial % 2, m = 2 + trial % 3;
    ModelParams p{n, m, 10.0, 1e7, 1.0, 2000.0};
    auto e = random_ensemble(n, m, 200 + trial);
    auto fresh = random_ensemble(1, m, 300 + trial);
    const std::size_t k = trial % n;
    const auto before = oracle::recompute_energies(e, p);
    const double dh = delta_hint_regrow(e, p, k, fresh.filament(0));
    std::copy(fresh.filament(0).begin(), fresh.filament(0).end(), e.filament(k).begin());
    const auto after = oracle::recompute_energies(e, p);
    EXPECT_NEAR(dh, after.h_int - before.h_int, 1e-10 * std::max(1.0, std::abs(after.h_int)));
  }
}

TEST(DeltaRegrow, CoincidenceGivesInfinityAndBadSizeThrows) {
  ModelParams p{2, 3, 10.0, 1e7, 1.0, 2000.0};
  auto e = random_ensemble(2, 3, 17);
  std::vector<Vec2> nb(e.filament(0).begin(), e.filament(0).end());
  nb[2] = e.bead(1, 2);
  EXPECT_EQ(delta_hint_regrow(e, p, 0, nb), kInfiniteEnergy);
  nb.pop_back();
  EXPECT_THROW(delta_hint_regrow(e, p, 0, nb), std::invalid_argument);
}
