#ifndef VORTEX_ENERGY_HPP
#define VORTEX_ENERGY_HPP

// Discretized KMD Hamiltonian and angular momentum:
//   H_self = alpha sum_{k,j} |psi_k(j+1) - psi_k(j)|^2 / (2 delta)
//   H_int  = -delta sum_j sum_{k<i} log |psi_i(j) - psi_k(j)|
//   I_N    = delta sum_{k,j} |psi_k(j)|^2
// Coincident beads of distinct filaments make H_int = +inf (forbidden state).

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>

#include "vortex/model.hpp"

namespace vortex {

inline constexpr double kInfiniteEnergy = std::numeric_limits<double>::infinity();

struct EnergyBreakdown {
  double h_self = 0.0;
  double h_int = 0.0;
  double i_n = 0.0;
  double total_action = 0.0;  ///< -beta (h_self + h_int) - mu i_n

  double hamiltonian() const { return h_self + h_int; }
};

inline double action_of(double h_self, double h_int, double i_n, const ModelParams& p) {
  return -p.beta * (h_self + h_int) - p.mu * i_n;
}

/// H + (mu/beta) I, the energy conjugate to beta in the Gibbs weight. Used as
/// the burn-in trace: H alone is constant for a single filament under translation.
inline double effective_energy(const EnergyBreakdown& e, const ModelParams& p) {
  return e.hamiltonian() + p.mu / p.beta * e.i_n;
}

/// sum_j |b(j+1) - b(j)|^2 with periodic wraparound.
inline double squared_increments(std::span<const Vec2> b) {
  const std::size_t m = b.size();
  double s = 0.0;
  for (std::size_t j = 0; j + 1 < m; ++j) s += norm2(b[j + 1] - b[j]);
  if (m > 1) s += norm2(b[0] - b[m - 1]);
  return s;
}

/// sum_j |b(j)|^2.
inline double squared_norms(std::span<const Vec2> b) {
  double s = 0.0;
  for (auto v : b) s += norm2(v);
  return s;
}

inline double h_self(const FilamentEnsemble& ens, const ModelParams& p) {
  check_shape(ens, p);
  double s = 0.0;
  for (std::size_t k = 0; k < ens.n_filaments(); ++k) s += squared_increments(ens.filament(k));
  return p.alpha * s / (2.0 * p.delta());
}

inline double h_int(const FilamentEnsemble& ens, const ModelParams& p) {
  check_shape(ens, p);
  const std::size_t n = ens.n_filaments();
  const std::size_t m = ens.n_segments();
  double s = 0.0;  // sum of log |d|^2
  for (std::size_t k = 0; k < n; ++k) {
    const auto fk = ens.filament(k);
    for (std::size_t i = k + 1; i < n; ++i) {
      const auto fi = ens.filament(i);
      for (std::size_t j = 0; j < m; ++j) {
        const double d2 = norm2(fi[j] - fk[j]);
        if (d2 == 0.0) return kInfiniteEnergy;
        s += std::log(d2);
      }
    }
  }
  return -0.5 * p.delta() * s;
}

inline double angular_momentum(const FilamentEnsemble& ens, const ModelParams& p) {
  check_shape(ens, p);
  return p.delta() * squared_norms(ens.beads());
}

inline EnergyBreakdown energy_breakdown(const FilamentEnsemble& ens, const ModelParams& p) {
  EnergyBreakdown e;
  e.h_self = h_self(ens, p);
  e.h_int = h_int(ens, p);
  e.i_n = angular_momentum(ens, p);
  e.total_action = action_of(e.h_self, e.h_int, e.i_n, p);
  return e;
}

struct TranslateDelta {
  double h_int = 0.0;
  double i_n = 0.0;
};

/// Change in H_int and I_N if filament k is rigidly shifted by `d`.
/// H_self is unchanged by construction.
inline TranslateDelta delta_action_translate(const FilamentEnsemble& ens, const ModelParams& p,
                                             std::size_t k, Vec2 d) {
  check_shape(ens, p);
  if (k >= ens.n_filaments()) throw std::out_of_range("filament index");
  const std::size_t n = ens.n_filaments();
  const std::size_t m = ens.n_segments();
  const auto fk = ens.filament(k);

  Vec2 sum{};
  for (auto b : fk) sum += b;
  TranslateDelta out;
  out.i_n = p.delta() * (2.0 * dot(d, sum) + static_cast<double>(m) * norm2(d));

  if (d == Vec2{}) return out;
  double s = 0.0;  // sum of log(|new|^2 / |old|^2)
  for (std::size_t i = 0; i < n; ++i) {
    if (i == k) continue;
    const auto fi = ens.filament(i);
    for (std::size_t j = 0; j < m; ++j) {
      const Vec2 old_sep = fk[j] - fi[j];
      const double new2 = norm2(old_sep + d);
      if (new2 == 0.0) {
        out.h_int = kInfiniteEnergy;
        return out;
      }
      s += std::log(new2 / norm2(old_sep));
    }
  }
  out.h_int = -0.5 * p.delta() * s;
  return out;
}

/// Change in H_int if filament k is replaced by `new_beads`.
inline double delta_hint_regrow(const FilamentEnsemble& ens, const ModelParams& p, std::size_t k,
                                std::span<const Vec2> new_beads) {
  check_shape(ens, p);
  if (k >= ens.n_filaments()) throw std::out_of_range("filament index");
  if (new_beads.size() != ens.n_segments()) {
    throw std::invalid_argument("regrow: new_beads must have one entry per layer");
  }
  const std::size_t n = ens.n_filaments();
  const std::size_t m = ens.n_segments();
  const auto fk = ens.filament(k);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i == k) continue;
    const auto fi = ens.filament(i);
    for (std::size_t j = 0; j < m; ++j) {
      if (new_beads[j] == fk[j]) continue;
      const double new2 = norm2(new_beads[j] - fi[j]);
      if (new2 == 0.0) return kInfiniteEnergy;
      s += std::log(new2 / norm2(fk[j] - fi[j]));
    }
  }
  return -0.5 * p.delta() * s;
}

}  // namespace vortex

#endif  // VORTEX_ENERGY_HPP
