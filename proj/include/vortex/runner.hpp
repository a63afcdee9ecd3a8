#ifndef VORTEX_RUNNER_HPP
#define VORTEX_RUNNER_HPP

// Burn-in / measurement schedule around a Chain. The runner is a resumable
// state machine: everything it holds is written to checkpoints.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <vector>

#include "vortex/observables.hpp"
#include "vortex/sampler.hpp"

namespace vortex {

enum class Phase : std::uint8_t { burn_in = 0, measuring = 1, done = 2 };

struct TuneWindow {
  std::uint64_t proposed_at_start = 0;
  std::uint64_t accepted_at_start = 0;
};

inline constexpr std::uint64_t kTuneProposals = 200;
inline constexpr double kTargetAcceptance = 0.4;

class ChainRunner {
 public:
  using SnapshotHook = std::function<void(const FilamentEnsemble&, const SnapshotObservables&)>;

  /// Fresh chain: straight filaments at random endpoints.
  ChainRunner(const ModelParams& p, const SamplerConfig& cfg, Engine engine)
      : cfg_(cfg), chain_(p, initial_state(p, cfg, std::move(engine))) {
    cfg_.validate();
  }

  /// Restored chain.
  ChainRunner(const ModelParams& p, const SamplerConfig& cfg, ChainState state)
      : cfg_(cfg), chain_(p, std::move(state)) {
    cfg_.validate();
  }

  void set_snapshot_hook(SnapshotHook hook) { hook_ = std::move(hook); }

  /// Advance by one sweep and update the schedule.
  void step() {
    if (phase_ == Phase::done) return;
    chain_.sweep(cfg_);
    if (phase_ == Phase::burn_in) {
      ++burn_in_done_;
      const double e = effective_energy(chain_.energy(), chain_.params());
      energy_prefix_.push_back((energy_prefix_.empty() ? 0.0 : energy_prefix_.back()) + e);
      if (cfg_.autotune) autotune();
      if (burn_in_done_ >= cfg_.burn_in_sweeps && settled()) {
        equilibrated_ = true;
        phase_ = Phase::measuring;
      } else if (burn_in_done_ >= cfg_.max_burn_in_sweeps) {
        equilibrated_ = false;
        phase_ = Phase::measuring;
      }
      return;
    }
    ++since_measure_;
    if (since_measure_ >= cfg_.measure_interval) {
      since_measure_ = 0;
      const auto obs = measure(chain_.ensemble(), chain_.energy().hamiltonian());
      measurements_.push_back(obs);
      if (hook_) hook_(chain_.ensemble(), obs);
      if (measurements_.size() >= cfg_.n_measurements) phase_ = Phase::done;
    }
  }

  void run() {
    while (phase_ != Phase::done) step();
  }

  /// Run until done or until `sweeps` more sweeps have been taken.
  void run_for(std::uint64_t sweeps) {
    for (std::uint64_t i = 0; i < sweeps && phase_ != Phase::done; ++i) step();
  }

  Phase phase() const { return phase_; }
  bool done() const { return phase_ == Phase::done; }
  bool equilibrated() const { return equilibrated_; }
  std::uint64_t burn_in_sweeps_done() const { return burn_in_done_; }
  std::uint64_t sweeps_run() const { return chain_.state().sweep_index; }
  const Chain& chain() const { return chain_; }
  Chain& chain() { return chain_; }
  const SamplerConfig& config() const { return cfg_; }
  const std::vector<SnapshotObservables>& measurements() const { return measurements_; }
  const std::vector<double>& energy_prefix_sums() const { return energy_prefix_; }

  // Restoration hooks for checkpoint readers.
  struct Schedule {
    Phase phase = Phase::burn_in;
    bool equilibrated = false;
    std::uint64_t burn_in_done = 0;
    std::uint64_t since_measure = 0;
    TuneWindow tune;
    std::vector<double> energy_prefix;
    std::vector<SnapshotObservables> measurements;
  };

  Schedule schedule() const {
    return Schedule{phase_, equilibrated_, burn_in_done_, since_measure_, tune_,
                    energy_prefix_, measurements_};
  }

  void restore(Schedule s) {
    phase_ = s.phase;
    equilibrated_ = s.equilibrated;
    burn_in_done_ = s.burn_in_done;
    since_measure_ = s.since_measure;
    tune_ = s.tune;
    energy_prefix_ = std::move(s.energy_prefix);
    measurements_ = std::move(s.measurements);
  }

 private:
  static ChainState initial_state(const ModelParams& p, const SamplerConfig& cfg, Engine engine) {
    p.validate();
    ChainState s;
    s.engine = std::move(engine);
    s.ensemble = random_straight_ensemble(p, cfg.init_square_side, s.engine);
    s.energy = energy_breakdown(s.ensemble, p);
    s.halfwidth = cfg.translation_halfwidth;
    return s;
  }

  bool settled() const {
    return cumulative_mean_settled(energy_prefix_, cfg_.equilibration_window, cfg_.equilibration_tolerance)
        .value_or(false);
  }

  // Multiplicative step-size control toward the target translation acceptance.
  void autotune() {
    const auto& c = chain_.counters();
    const std::uint64_t prop = c.translate_proposed - tune_.proposed_at_start;
    if (prop < kTuneProposals) return;
    const std::uint64_t acc = c.translate_accepted - tune_.accepted_at_start;
    const double rate = static_cast<double>(acc) / static_cast<double>(prop);
    const double factor = std::clamp(rate / kTargetAcceptance, 0.5, 2.0);
    chain_.set_halfwidth(std::clamp(chain_.halfwidth() * factor, 1e-12, 1e6));
    tune_.proposed_at_start = c.translate_proposed;
    tune_.accepted_at_start = c.translate_accepted;
  }

  SamplerConfig cfg_;
  Chain chain_;
  SnapshotHook hook_;
  Phase phase_ = Phase::burn_in;
  bool equilibrated_ = false;
  std::uint64_t burn_in_done_ = 0;
  std::uint64_t since_measure_ = 0;
  TuneWindow tune_;
  std::vector<double> energy_prefix_;
  std::vector<SnapshotObservables> measurements_;
};

struct ChainSummary {
  bool equilibrated = false;
  std::uint64_t sweeps_run = 0;
  std::uint64_t burn_in_sweeps = 0;
  MoveCounters counters;
  double halfwidth = 0.0;
  std::vector<SnapshotObservables> measurements;
};

/// Run a full chain, streaming each measurement snapshot to `hook`.
inline ChainSummary run_chain(const ModelParams& p, const SamplerConfig& cfg, Engine engine,
                              ChainRunner::SnapshotHook hook = {}) {
  ChainRunner r(p, cfg, std::move(engine));
  r.set_snapshot_hook(std::move(hook));
  r.run();
  return ChainSummary{r.equilibrated(), r.sweeps_run(), r.burn_in_sweeps_done(),
                      r.chain().counters(), r.chain().halfwidth(), r.measurements()};
}

inline ChainSummary run_chain(const ModelParams& p, const SamplerConfig& cfg, std::uint64_t seed,
                              ChainRunner::SnapshotHook hook = {}) {
  return run_chain(p, cfg, make_engine(seed, 0), std::move(hook));
}

}  // namespace vortex

#endif  // VORTEX_RUNNER_HPP
