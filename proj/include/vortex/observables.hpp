#ifndef VORTEX_OBSERVABLES_HPP
#define VORTEX_OBSERVABLES_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "vortex/energy.hpp"
#include "vortex/model.hpp"

namespace vortex {

class insufficient_data : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kUndefined = std::numeric_limits<double>::quiet_NaN();

// ---------------------------------------------------------------------------
// Per-configuration observables

/// (MN)^-1 sum |psi_i(k)|^2
inline double r2_mc(const FilamentEnsemble& ens) {
  const auto b = ens.beads();
  return squared_norms(b) / static_cast<double>(b.size());
}

/// (MN)^-1 sum |psi_i(k) - psi_i(0)|^2
inline double amplitude_sq(const FilamentEnsemble& ens) {
  double s = 0.0;
  for (std::size_t i = 0; i < ens.n_filaments(); ++i) {
    const auto f = ens.filament(i);
    for (auto b : f) s += norm2(b - f[0]);
  }
  return s / static_cast<double>(ens.beads().size());
}

/// (MN)^-1 sum |psi_i(k) - psi_i(k+1)|^2, periodic.
inline double amplitude_sq_per_segment(const FilamentEnsemble& ens) {
  double s = 0.0;
  for (std::size_t i = 0; i < ens.n_filaments(); ++i) s += squared_increments(ens.filament(i));
  return s / static_cast<double>(ens.beads().size());
}

/// N^-1 sum_i min_{j != i, k} |psi_i(k) - psi_j(k)|^2 (same-layer distances).
/// Undefined (NaN) for a single filament.
inline double nn_distance_sq(const FilamentEnsemble& ens) {
  const std::size_t n = ens.n_filaments();
  const std::size_t m = ens.n_segments();
  if (n < 2) return kUndefined;
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < n; ++i) {
    const auto fi = ens.filament(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto fj = ens.filament(j);
      double d = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < m; ++k) d = std::min(d, norm2(fi[k] - fj[k]));
      best[i] = std::min(best[i], d);
      best[j] = std::min(best[j], d);
    }
  }
  double s = 0.0;
  for (double d : best) s += d;
  return s / static_cast<double>(n);
}

struct SnapshotObservables {
  double r2_mc = 0.0;
  double a2_amp = 0.0;
  double a2_seg = 0.0;
  double d2_nn = kUndefined;
  double energy = 0.0;  ///< H_self + H_int
};

inline SnapshotObservables measure(const FilamentEnsemble& ens, double energy) {
  SnapshotObservables s;
  s.r2_mc = r2_mc(ens);
  s.a2_amp = amplitude_sq(ens);
  s.a2_seg = amplitude_sq_per_segment(ens);
  s.d2_nn = nn_distance_sq(ens);
  s.energy = energy;
  return s;
}

// ---------------------------------------------------------------------------
// Correlated-series error analysis

struct BlockingEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  double variance = 0.0;  ///< sample variance of the raw series
  double n_effective = 0.0;
  std::size_t n_samples = 0;
  std::size_t level = 0;  ///< blocking level at which the estimate was taken
};

/// Standard error of the mean of a correlated series by automatic blocking.
///
/// Repeatedly averages neighbouring pairs. At each level the lag-1
/// autocovariance must be compatible with zero for all coarser levels,
/// tested with the statistic M_j = sum_{i>=j} n_i (gamma_i / s_i)^2 against the
/// chi-square 99% quantile on (levels - j) degrees of freedom. An odd trailing
/// element is dropped at each level.
inline BlockingEstimate blocking_analysis(std::span<const double> series) {
  const std::size_t n0 = series.size();
  if (n0 < 2) throw insufficient_data("blocking: need at least two samples");

  BlockingEstimate out;
  out.n_samples = n0;
  double mean = 0.0;
  for (double v : series) mean += v;
  mean /= static_cast<double>(n0);
  out.mean = mean;

  std::vector<double> x(series.begin(), series.end());
  std::vector<double> s2;      // population variance per level
  std::vector<double> gamma;   // lag-1 autocovariance per level
  std::vector<std::size_t> n;  // length per level
  while (x.size() >= 2) {
    const std::size_t len = x.size();
    double lm = 0.0;
    for (double v : x) lm += v;
    lm /= static_cast<double>(len);
    double var = 0.0, cov = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
      var += (x[i] - lm) * (x[i] - lm);
      if (i + 1 < len) cov += (x[i] - lm) * (x[i + 1] - lm);
    }
    s2.push_back(var / static_cast<double>(len));
    gamma.push_back(cov / static_cast<double>(len));
    n.push_back(len);
    const std::size_t half = len / 2;
    for (std::size_t i = 0; i < half; ++i) x[i] = 0.5 * (x[2 * i] + x[2 * i + 1]);
    x.resize(half);
  }

  out.variance = s2[0] * static_cast<double>(n0) / static_cast<double>(n0 - 1);
  if (s2[0] == 0.0) {
    out.std_error = 0.0;
    out.n_effective = static_cast<double>(n0);
    return out;
  }

  const std::size_t d = s2.size();
  std::vector<double> m_stat(d, 0.0);
  double acc = 0.0;
  for (std::size_t i = d; i-- > 0;) {
    const double r = s2[i] > 0.0 ? gamma[i] / s2[i] : 0.0;
    acc += static_cast<double>(n[i]) * r * r;
    m_stat[i] = acc;
  }
  std::size_t level = d - 1;
  for (std::size_t j = 0; j < d; ++j) {
    const boost::math::chi_squared dist(static_cast<double>(d - j));
    if (m_stat[j] < boost::math::quantile(dist, 0.99)) {
      level = j;
      break;
    }
  }
  out.level = level;
  out.std_error = std::sqrt(s2[level] / static_cast<double>(n[level]));
  out.n_effective = out.std_error > 0.0 ? out.variance / (out.std_error * out.std_error)
                                        : static_cast<double>(n0);
  return out;
}

// ---------------------------------------------------------------------------
// Aggregated equilibrium record

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  double n_effective = 0.0;
};

struct ObservableRecord {
  Estimate r2_mc;
  Estimate a2_amp;
  Estimate a2_seg;
  Estimate d2_nn;  ///< NaN mean when the ensemble has one filament
  double energy_mean = 0.0;
  double energy_var = 0.0;
  double energy_std_error = 0.0;
  std::size_t n_samples = 0;

  bool has_d2() const { return !std::isnan(d2_nn.mean); }
};

inline Estimate estimate_of(std::span<const double> v) {
  const auto b = blocking_analysis(v);
  return Estimate{b.mean, b.std_error, b.n_effective};
}

inline ObservableRecord aggregate(std::span<const SnapshotObservables> snaps) {
  if (snaps.size() < 2) throw insufficient_data("aggregate: need at least two snapshots");
  const std::size_t n = snaps.size();
  std::vector<double> col(n);
  auto column = [&](auto member) -> std::span<const double> {
    for (std::size_t i = 0; i < n; ++i) col[i] = snaps[i].*member;
    return col;
  };
  ObservableRecord rec;
  rec.n_samples = n;
  rec.r2_mc = estimate_of(column(&SnapshotObservables::r2_mc));
  rec.a2_amp = estimate_of(column(&SnapshotObservables::a2_amp));
  rec.a2_seg = estimate_of(column(&SnapshotObservables::a2_seg));
  if (std::isnan(snaps[0].d2_nn)) {
    rec.d2_nn = Estimate{kUndefined, kUndefined, 0.0};
  } else {
    rec.d2_nn = estimate_of(column(&SnapshotObservables::d2_nn));
  }
  const auto e = blocking_analysis(column(&SnapshotObservables::energy));
  rec.energy_mean = e.mean;
  rec.energy_var = e.variance;
  rec.energy_std_error = e.std_error;
  return rec;
}

// ---------------------------------------------------------------------------
// Model validity

struct ValidityFlags {
  bool straight_ok = true;
  bool no_braiding = true;
  double threshold_ratio = 0.1;
};

inline constexpr double kDefaultStraightnessRatio = 0.1;

/// straight_ok: sqrt(a^2) M / L < threshold. no_braiding: d^2 > A^2 strictly;
/// a single filament cannot braid.
inline ValidityFlags validity_flags(const ObservableRecord& rec, const ModelParams& p,
                                    double threshold_ratio = kDefaultStraightnessRatio) {
  ValidityFlags f;
  f.threshold_ratio = threshold_ratio;
  f.straight_ok = std::sqrt(rec.a2_seg.mean) * static_cast<double>(p.n_segments) / p.length <
                  threshold_ratio;
  f.no_braiding = rec.has_d2() ? rec.d2_nn.mean > rec.a2_amp.mean : true;
  return f;
}

}  // namespace vortex

#endif  // VORTEX_OBSERVABLES_HPP
