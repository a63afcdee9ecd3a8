#ifndef VORTEX_SAMPLER_HPP
#define VORTEX_SAMPLER_HPP

// Metropolis chain over the Gibbs measure exp(-beta H - mu I) with two moves:
//  * rigid translation of one filament by a vector uniform in [-D, D]^2,
//    accepted on the change of beta H_int + mu I (H_self is invariant);
//  * regrow of beads 1..M-1 of one filament from the exact free measure
//    (self-induction + trap) conditioned on bead 0, accepted on beta H_int only.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "vortex/energy.hpp"
#include "vortex/free_filament.hpp"
#include "vortex/model.hpp"

namespace vortex {

struct SamplerConfig {
  double translation_halfwidth = 0.05;
  std::size_t moves_per_sweep = 0;  ///< 0: one move per filament
  std::size_t burn_in_sweeps = 1000;  ///< minimum before the equilibration test
  std::size_t max_burn_in_sweeps = 100000;
  std::size_t measure_interval = 10;
  std::size_t n_measurements = 1000;
  std::size_t equilibration_window = 500;
  double equilibration_tolerance = 1e-3;
  bool autotune = true;
  double translate_probability = 0.5;
  double init_square_side = 10.0;

  std::size_t sweep_moves(const ModelParams& p) const {
    return moves_per_sweep == 0 ? p.n_filaments : moves_per_sweep;
  }

  void validate() const {
    if (!(translation_halfwidth > 0.0) || !std::isfinite(translation_halfwidth)) {
      throw std::invalid_argument("SamplerConfig: translation_halfwidth must be positive");
    }
    if (measure_interval < 1 || n_measurements < 1 || equilibration_window < 1 ||
        burn_in_sweeps < 1 || max_burn_in_sweeps < burn_in_sweeps) {
      throw std::invalid_argument("SamplerConfig: counts must be >= 1 and max_burn_in >= burn_in");
    }
    if (!(equilibration_tolerance > 0.0 && equilibration_tolerance < 1.0)) {
      throw std::invalid_argument("SamplerConfig: equilibration_tolerance must lie in (0, 1)");
    }
    if (!(translate_probability > 0.0 && translate_probability < 1.0)) {
      throw std::invalid_argument("SamplerConfig: translate_probability must lie in (0, 1)");
    }
    if (!(init_square_side > 0.0)) {
      throw std::invalid_argument("SamplerConfig: init_square_side must be positive");
    }
  }
};

struct MoveCounters {
  std::uint64_t translate_proposed = 0;
  std::uint64_t translate_accepted = 0;
  std::uint64_t regrow_proposed = 0;
  std::uint64_t regrow_accepted = 0;

  std::uint64_t proposed() const { return translate_proposed + regrow_proposed; }
  friend bool operator==(const MoveCounters&, const MoveCounters&) = default;
};

using Engine = std::mt19937_64;

/// Everything that determines the continuation of a chain.
struct ChainState {
  FilamentEnsemble ensemble;
  EnergyBreakdown energy;
  Engine engine;
  std::normal_distribution<double> gauss{0.0, 1.0};
  MoveCounters counters;
  std::uint64_t sweep_index = 0;
  double halfwidth = 0.05;
};

/// Seed for chain `index` of a run with `master_seed`.
inline Engine make_engine(std::uint64_t master_seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed & 0xffffffffu),
                    static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(index & 0xffffffffu),
                    static_cast<std::uint32_t>(index >> 32)};
  return Engine(seq);
}

/// Straight filaments with endpoints uniform in the centred square of side `side`.
inline FilamentEnsemble random_straight_ensemble(const ModelParams& p, double side, Engine& eng) {
  std::uniform_real_distribution<double> u(-0.5 * side, 0.5 * side);
  std::vector<Vec2> ends(p.n_filaments);
  for (auto& e : ends) {
    e.x = u(eng);
    e.y = u(eng);
  }
  return FilamentEnsemble::straight(ends, p.n_segments);
}

class Chain {
 public:
  Chain(ModelParams p, ChainState state) : p_(p), free_(p), s_(std::move(state)) {
    p_.validate();
    check_shape(s_.ensemble, p_);
  }

  Chain(ModelParams p, FilamentEnsemble ens, Engine engine, double halfwidth)
      : Chain(p, make_state(p, std::move(ens), std::move(engine), halfwidth)) {}

  const ModelParams& params() const { return p_; }
  const ChainState& state() const { return s_; }
  ChainState& state() { return s_; }
  const FilamentEnsemble& ensemble() const { return s_.ensemble; }
  const EnergyBreakdown& energy() const { return s_.energy; }
  const MoveCounters& counters() const { return s_.counters; }
  const FreeFilamentSampler& free_sampler() const { return free_; }
  double halfwidth() const { return s_.halfwidth; }
  void set_halfwidth(double h) { s_.halfwidth = h; }

  /// Propose rigid translation of filament k by d; accept if u < A.
  bool try_translate(std::size_t k, Vec2 d, double u) {
    ++s_.counters.translate_proposed;
    const auto delta = delta_action_translate(s_.ensemble, p_, k, d);
    const double log_a = -p_.beta * delta.h_int - p_.mu * delta.i_n;
    if (!accept(log_a, u)) return false;
    for (auto& b : s_.ensemble.filament(k)) b += d;
    s_.energy.h_int += delta.h_int;
    s_.energy.i_n += delta.i_n;
    refresh_action();
    ++s_.counters.translate_accepted;
    return true;
  }

  /// Propose replacing filament k by new_beads (bead 0 held fixed by callers);
  /// accept if u < exp(-beta dH_int).
  bool try_regrow(std::size_t k, std::span<const Vec2> new_beads, double u) {
    ++s_.counters.regrow_proposed;
    const double dh = delta_hint_regrow(s_.ensemble, p_, k, new_beads);
    if (!accept(-p_.beta * dh, u)) return false;
    auto f = s_.ensemble.filament(k);
    const double old_inc = squared_increments(f);
    const double old_norm = squared_norms(f);
    std::copy(new_beads.begin(), new_beads.end(), f.begin());
    s_.energy.h_self += p_.alpha * (squared_increments(f) - old_inc) / (2.0 * p_.delta());
    s_.energy.i_n += p_.delta() * (squared_norms(f) - old_norm);
    s_.energy.h_int += dh;
    refresh_action();
    ++s_.counters.regrow_accepted;
    return true;
  }

  bool translate_move() {
    const std::size_t k = pick_filament();
    std::uniform_real_distribution<double> step(-s_.halfwidth, s_.halfwidth);
    const Vec2 d{step(s_.engine), step(s_.engine)};
    return try_translate(k, d, uniform());
  }

  bool regrow_move() {
    const std::size_t k = pick_filament();
    if (p_.n_segments == 1) {
      ++s_.counters.regrow_proposed;
      ++s_.counters.regrow_accepted;
      return true;
    }
    scratch_.assign(s_.ensemble.filament(k).begin(), s_.ensemble.filament(k).end());
    free_.regrow(scratch_, [this] { return s_.gauss(s_.engine); });
    return try_regrow(k, scratch_, uniform());
  }

  /// One sweep: `moves` moves, each a translation with probability p_translate.
  void sweep(std::size_t moves, double p_translate = 0.5) {
    for (std::size_t i = 0; i < moves; ++i) {
      if (uniform() < p_translate) {
        translate_move();
      } else {
        regrow_move();
      }
    }
    ++s_.sweep_index;
  }

  void sweep(const SamplerConfig& cfg) { sweep(cfg.sweep_moves(p_), cfg.translate_probability); }

  /// Largest relative discrepancy between the cached energies and a fresh evaluation.
  double audit() const {
    const auto fresh = energy_breakdown(s_.ensemble, p_);
    auto rel = [](double cached, double exact, double scale) {
      return std::abs(cached - exact) / std::max({std::abs(exact), scale, 1e-300});
    };
    // H_int can pass through zero; measure it against the summed magnitude scale.
    const double hint_scale = std::abs(fresh.h_self) + std::abs(fresh.i_n) + 1.0;
    return std::max({rel(s_.energy.h_self, fresh.h_self, 0.0),
                     rel(s_.energy.h_int, fresh.h_int, hint_scale),
                     rel(s_.energy.i_n, fresh.i_n, 0.0)});
  }

 private:
  static ChainState make_state(const ModelParams& p, FilamentEnsemble ens, Engine engine,
                               double halfwidth) {
    ChainState s;
    s.energy = energy_breakdown(ens, p);
    s.ensemble = std::move(ens);
    s.engine = std::move(engine);
    s.halfwidth = halfwidth;
    return s;
  }

  static bool accept(double log_a, double u) {
    if (std::isnan(log_a)) return false;
    return log_a >= 0.0 || std::log(u) < log_a;
  }

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(s_.engine); }

  std::size_t pick_filament() {
    if (p_.n_filaments == 1) return 0;
    return std::uniform_int_distribution<std::size_t>(0, p_.n_filaments - 1)(s_.engine);
  }

  void refresh_action() {
    s_.energy.total_action = action_of(s_.energy.h_self, s_.energy.h_int, s_.energy.i_n, p_);
  }

  ModelParams p_;
  FreeFilamentSampler free_;
  ChainState s_;
  std::vector<Vec2> scratch_;
};

// ---------------------------------------------------------------------------
// Equilibration

// The cumulative mean runs from one third into the trace, so the start-up
// transient (straight filaments spread over the init square) drops out as the
// trace grows instead of pinning the mean for ~W/tolerance sweeps.
// `prefix[i]` is the sum of the first i+1 energies.
inline std::optional<bool> cumulative_mean_settled(std::span<const double> prefix, std::size_t window,
                                                   double tolerance) {
  const std::size_t t = prefix.size();
  if (window == 0 || t < 3 * window) return std::nullopt;
  const std::size_t s = t / 3;
  const double base = s == 0 ? 0.0 : prefix[s - 1];
  const double m_now = (prefix[t - 1] - base) / static_cast<double>(t - s);
  const double m_then = (prefix[t - 1 - window] - base) / static_cast<double>(t - window - s);
  const double scale = std::max(std::abs(m_now), 1e-300);
  return std::abs(m_now - m_then) / scale < tolerance;
}

/// nullopt: fewer than 3W entries. Otherwise whether the cumulative mean of
/// the trace (first third dropped) moved by less than the relative tolerance
/// over the last W entries.
inline std::optional<bool> is_equilibrated(std::span<const double> energy_trace, std::size_t window,
                                           double tolerance) {
  std::vector<double> prefix(energy_trace.size());
  double cum = 0.0;
  for (std::size_t i = 0; i < energy_trace.size(); ++i) prefix[i] = cum += energy_trace[i];
  return cumulative_mean_settled(prefix, window, tolerance);
}

inline std::optional<bool> is_equilibrated(std::span<const double> energy_trace,
                                           const SamplerConfig& cfg) {
  return is_equilibrated(energy_trace, cfg.equilibration_window, cfg.equilibration_tolerance);
}

}  // namespace vortex

#endif  // VORTEX_SAMPLER_HPP
