#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "vortex/energy.hpp"
#include "vortex/observables.hpp"

using namespace vortex;

namespace {

FilamentEnsemble random_ensemble(std::size_t n, std::size_t m, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  FilamentEnsemble e(n, m);
  for (auto& b : e.beads()) b = {g(eng), g(eng)};
  return e;
}

FilamentEnsemble zigzag(double a, std::size_t m) {
  FilamentEnsemble e(1, m);
  for (std::size_t j = 0; j < m; ++j) e.bead(0, j) = (j % 2 == 0) ? Vec2{0, 0} : Vec2{a, 0};
  return e;
}

template <class F>
void transform_all(FilamentEnsemble& e, F f) {
  for (auto& b : e.beads()) b = f(b);
}

}  // namespace

TEST(R2mc, ExamplesByHand) {
  std::vector<Vec2> origin{{0, 0}, {0, 0}};
  EXPECT_EQ(r2_mc(FilamentEnsemble::straight(origin, 4)), 0.0);
  std::vector<Vec2> one{{0.6, 0.8}};
  EXPECT_NEAR(r2_mc(FilamentEnsemble::straight(one, 4)), 1.0, 1e-15);
  std::vector<Vec2> two{{1, 0}, {0, 3}};
  EXPECT_NEAR(r2_mc(FilamentEnsemble::straight(two, 4)), 5.0, 1e-15);
}

TEST(AmplitudeSq, StraightAndZigzag) {
  std::vector<Vec2> ends{{1, 0}, {0, 3}};
  EXPECT_EQ(amplitude_sq(FilamentEnsemble::straight(ends, 8)), 0.0);
  EXPECT_NEAR(amplitude_sq(zigzag(0.3, 8)), 0.09 / 2.0, 1e-15);
}

TEST(AmplitudeSqPerSegment, StraightAndZigzag) {
  std::vector<Vec2> ends{{1, 0}, {0, 3}};
  EXPECT_EQ(amplitude_sq_per_segment(FilamentEnsemble::straight(ends, 8)), 0.0);
  EXPECT_NEAR(amplitude_sq_per_segment(zigzag(0.3, 8)), 0.09, 1e-15);
}

TEST(AmplitudeSqPerSegment, IdentityWithSelfEnergy) {
  ModelParams p{3, 7, 10.0, 1e7, 1.0, 2000.0};
  const auto e = random_ensemble(3, 7, 1);
  const double lhs = amplitude_sq_per_segment(e) * 7.0 * 3.0;
  const double rhs = 2.0 * p.delta() / p.alpha * h_self(e, p);
  EXPECT_NEAR(lhs, rhs, 1e-12 * rhs);
}

TEST(NnDistanceSq, TwoStraightFilaments) {
  std::vector<Vec2> ends{{0, 0}, {0.3, 0.4}};
  EXPECT_NEAR(nn_distance_sq(FilamentEnsemble::straight(ends, 4)), 0.25, 1e-15);
}

TEST(NnDistanceSq, ThreeCollinearFilaments) {
  std::vector<Vec2> ends{{0, 0}, {1, 0}, {3, 0}};
  EXPECT_NEAR(nn_distance_sq(FilamentEnsemble::straight(ends, 4)), 2.0, 1e-15);
}

TEST(NnDistanceSq, SingleFilamentUndefined) {
  EXPECT_TRUE(std::isnan(nn_distance_sq(random_ensemble(1, 4, 2))));
}

TEST(NnDistanceSq, PermutationInvariantAndBoundedByWitness) {
  auto e = random_ensemble(4, 6, 3);
  FilamentEnsemble perm(4, 6);
  const std::size_t order[] = {2, 0, 3, 1};
  for (std::size_t k = 0; k < 4; ++k)
    for (std::size_t j = 0; j < 6; ++j) perm.bead(k, j) = e.bead(order[k], j);
  EXPECT_NEAR(nn_distance_sq(perm), nn_distance_sq(e), 1e-14);
  // Each filament's nearest distance is at most the distance to any witness;
  // so the mean is at most the mean of the per-filament witness distances.
  double witness = 0.0;
  for (std::size_t k = 0; k < 4; ++k) witness += norm2(e.bead(k, 2) - e.bead((k + 1) % 4, 2));
  EXPECT_LE(nn_distance_sq(e), witness / 4.0);
}

TEST(Observables, SegmentAmplitudeBoundedByFourTimesAmplitude) {
  for (int s = 0; s < 50; ++s) {
    const auto e = random_ensemble(1 + s % 3, 2 + s % 7, 100 + s);
    EXPECT_LE(amplitude_sq_per_segment(e), 4.0 * amplitude_sq(e) * (1.0 + 1e-12));
  }
}

TEST(Observables, RotationAndTranslationBehaviour) {
  auto e = random_ensemble(3, 5, 4);
  const auto base = measure(e, 0.0);
  auto rot = e;
  const double c = std::cos(1.1), s = std::sin(1.1);
  transform_all(rot, [&](Vec2 b) { return Vec2{c * b.x - s * b.y, s * b.x + c * b.y}; });
  const auto r = measure(rot, 0.0);
  EXPECT_NEAR(r.r2_mc, base.r2_mc, 1e-12);
  EXPECT_NEAR(r.a2_amp, base.a2_amp, 1e-12);
  EXPECT_NEAR(r.a2_seg, base.a2_seg, 1e-12);
  EXPECT_NEAR(r.d2_nn, base.d2_nn, 1e-12);

  auto shifted = e;
  transform_all(shifted, [](Vec2 b) { return b + Vec2{2.0, -1.0}; });
  const auto t = measure(shifted, 0.0);
  EXPECT_NEAR(t.a2_amp, base.a2_amp, 1e-12);
  EXPECT_NEAR(t.a2_seg, base.a2_seg, 1e-12);
  EXPECT_NEAR(t.d2_nn, base.d2_nn, 1e-12);
  EXPECT_GT(std::abs(t.r2_mc - base.r2_mc), 0.1);  // R^2 is not translation invariant
}

TEST(Observables, AmplitudeInvariantUnderSingleFilamentShift) {
  auto e = random_ensemble(3, 5, 5);
  const double a = amplitude_sq(e);
  for (auto& b : e.filament(1)) b += Vec2{5.0, 5.0};
  EXPECT_NEAR(amplitude_sq(e), a, 1e-12);
}

TEST(Blocking, IdenticalSamplesZeroError) {
  std::vector<double> v(100, 2.5);
  const auto b = blocking_analysis(v);
  EXPECT_EQ(b.mean, 2.5);
  EXPECT_EQ(b.std_error, 0.0);
}

TEST(Blocking, TwoSamples) {
  std::vector<double> v{1.0, 3.0};
  EXPECT_EQ(blocking_analysis(v).mean, 2.0);
  std::vector<double> one{1.0};
  EXPECT_THROW(blocking_analysis(one), insufficient_data);
}

TEST(Blocking, WhiteNoiseScalesAsInverseRoot) {
  std::mt19937_64 eng(6);
  std::normal_distribution<double> g;
  std::vector<double> v(1 << 16);
  for (auto& x : v) x = g(eng);
  const auto full = blocking_analysis(v);
  EXPECT_NEAR(full.std_error, 1.0 / std::sqrt(v.size()), 0.1 / std::sqrt(v.size()));
  std::vector<double> quarter(v.begin(), v.begin() + v.size() / 4);
  const auto q = blocking_analysis(quarter);
  EXPECT_NEAR(q.std_error / full.std_error, 2.0, 0.25);
}

TEST(Blocking, Ar1StandardErrorWithin20Percent) {
  const double phi = 0.9, sigma = 1.0;
  const std::size_t n = 1 << 17;
  std::mt19937_64 eng(7);
  std::normal_distribution<double> g;
  std::vector<double> v(n);
  double x = 0.0;
  for (int i = 0; i < 1000; ++i) x = phi * x + sigma * g(eng);
  for (auto& y : v) {
    x = phi * x + sigma * g(eng);
    y = x;
  }
  // Var(mean) -> sigma^2 / (1 - phi)^2 / n for large n.
  const double analytic = sigma / (1.0 - phi) / std::sqrt(static_cast<double>(n));
  const auto b = blocking_analysis(v);
  EXPECT_NEAR(b.std_error, analytic, 0.2 * analytic);
  EXPECT_LT(b.n_effective, n / 5.0);
}

TEST(Aggregate, MeansAndErrors) {
  std::vector<SnapshotObservables> s(2);
  s[0].r2_mc = 1.0;
  s[1].r2_mc = 3.0;
  s[0].d2_nn = s[1].d2_nn = 0.5;
  s[0].energy = 4.0;
  s[1].energy = 6.0;
  const auto r = aggregate(s);
  EXPECT_EQ(r.r2_mc.mean, 2.0);
  EXPECT_EQ(r.d2_nn.mean, 0.5);
  EXPECT_EQ(r.d2_nn.std_error, 0.0);
  EXPECT_EQ(r.energy_mean, 5.0);
  EXPECT_NEAR(r.energy_var, 2.0, 1e-15);
  EXPECT_EQ(r.n_samples, 2u);
  EXPECT_TRUE(r.has_d2());
}

TEST(Aggregate, NeedsTwoSnapshotsAndHandlesSingleFilament) {
  std::vector<SnapshotObservables> one(1);
  EXPECT_THROW(aggregate(one), insufficient_data);
  std::vector<SnapshotObservables> s(3);  // d2 defaults to NaN
  EXPECT_FALSE(aggregate(s).has_d2());
}

TEST(Aggregate, OrderIndependentUpToRounding) {
  std::mt19937_64 eng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<SnapshotObservables> s(1000);
  for (auto& x : s) {
    x.r2_mc = u(eng);
    x.d2_nn = u(eng);
  }
  auto rev = s;
  std::reverse(rev.begin(), rev.end());
  EXPECT_NEAR(aggregate(rev).r2_mc.mean, aggregate(s).r2_mc.mean, 1e-10);
}

TEST(ValidityFlags, StraightFilaments) {
  std::vector<Vec2> ends{{0, 0}, {1, 0}};
  const auto e = FilamentEnsemble::straight(ends, 8);
  std::vector<SnapshotObservables> s{measure(e, 0.0), measure(e, 0.0)};
  ModelParams p{2, 8, 10.0, 1e7, 1.0, 2000.0};
  const auto f = validity_flags(aggregate(s), p);
  EXPECT_TRUE(f.straight_ok);
  EXPECT_TRUE(f.no_braiding);
  EXPECT_EQ(f.threshold_ratio, 0.1);
}

TEST(ValidityFlags, BoundariesAreStrict) {
  ObservableRecord r;
  r.a2_amp.mean = 0.25;
  r.d2_nn.mean = 0.25;
  ModelParams p{2, 10, 10.0, 1e7, 1.0, 2000.0};
  r.a2_seg.mean = 0.01;  // sqrt(a2) M / L = 0.1 exactly
  const auto f = validity_flags(r, p);
  EXPECT_FALSE(f.no_braiding);
  EXPECT_FALSE(f.straight_ok);
  r.d2_nn.mean = 0.2500001;
  EXPECT_TRUE(validity_flags(r, p).no_braiding);
  EXPECT_TRUE(validity_flags(r, p, 0.2).straight_ok);
}
