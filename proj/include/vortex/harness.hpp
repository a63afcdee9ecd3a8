#ifndef VORTEX_HARNESS_HPP
#define VORTEX_HARNESS_HPP

// Beta sweeps: configuration, per-beta chain jobs on a local worker pool,
// checkpoint/resume, per-beta record files and merged comparison tables.
//
// Output directory layout:
//   records/beta_NNN.json      one RunRecord per beta index
//   checkpoints/beta_NNN.ckpt  chain checkpoints (removed when a chain finishes)
//   snapshots/beta_NNN.tsv     per-snapshot observables (keep_snapshots only)
//   comparison.tsv             merged table, descending beta
//   r2_curves.tsv              long format: beta, series, value, stderr

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "vortex/io.hpp"
#include "vortex/meanfield.hpp"
#include "vortex/observables.hpp"
#include "vortex/runner.hpp"

namespace vortex {

class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kConfigSchemaVersion = 1;

struct LogSpacedBetas {
  std::size_t count = 0;
  double min = 0.0;
  double max = 0.0;
};

/// count values from min to max, geometric, both endpoints exact.
inline std::vector<double> expand_log_spaced(const LogSpacedBetas& s) {
  if (s.count == 0) return {};
  if (!(s.min > 0.0) || !(s.max > 0.0)) throw config_error("log-spaced betas need positive bounds");
  if (s.count == 1) {
    if (s.min != s.max) throw config_error("a single log-spaced beta needs min == max");
    return {s.min};
  }
  std::vector<double> out(s.count);
  const double lmin = std::log(s.min);
  const double lmax = std::log(s.max);
  for (std::size_t i = 0; i < s.count; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(s.count - 1);
    out[i] = std::exp(lmin + t * (lmax - lmin));
  }
  out.front() = s.min;
  out.back() = s.max;
  return out;
}

inline void validate_betas(const std::vector<double>& betas) {
  if (betas.empty()) throw config_error("no beta values configured");
  for (std::size_t i = 0; i < betas.size(); ++i) {
    if (!(betas[i] > 0.0) || !std::isfinite(betas[i])) throw config_error("beta values must be positive");
    for (std::size_t j = 0; j < i; ++j) {
      if (betas[i] == betas[j]) throw config_error("duplicate beta value");
    }
  }
}

struct SweepConfig {
  ModelParams model;  ///< beta is overwritten per job
  std::vector<double> betas;
  SamplerConfig sampler;
  std::uint64_t master_seed = 1;
  std::filesystem::path output_dir = "vortex_out";
  std::uint64_t checkpoint_interval = 10000;  ///< sweeps; 0 disables
  std::size_t workers = 0;                    ///< 0: hardware concurrency
  bool keep_snapshots = false;
  double straightness_ratio = kDefaultStraightnessRatio;

  ModelParams model_at(std::size_t i) const {
    ModelParams p = model;
    p.beta = betas.at(i);
    return p;
  }

  std::size_t worker_count() const {
    if (workers > 0) return workers;
    return std::max(1u, std::thread::hardware_concurrency());
  }

  void validate() const {
    ModelParams probe = model;
    probe.beta = 1.0;
    try {
      probe.validate();
      sampler.validate();
    } catch (const std::invalid_argument& e) {
      throw config_error(e.what());
    }
    validate_betas(betas);
    if (!(straightness_ratio > 0.0)) throw config_error("straightness_ratio must be positive");
  }
};

// ---------------------------------------------------------------------------
// JSON config

namespace detail {

template <class T>
void get_opt(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace detail

inline SweepConfig parse_sweep_config(const nlohmann::json& j) {
  try {
    SweepConfig c;
    const int version = j.value("schema_version", kConfigSchemaVersion);
    if (version != kConfigSchemaVersion) {
      throw config_error("unsupported config schema_version " + std::to_string(version));
    }
    const auto& m = j.at("model");
    c.model.n_filaments = m.at("n_filaments").get<std::size_t>();
    c.model.n_segments = m.at("n_segments").get<std::size_t>();
    c.model.length = m.at("length").get<double>();
    c.model.alpha = m.at("alpha").get<double>();
    c.model.mu = m.at("mu").get<double>();
    c.model.beta = 1.0;

    const auto& b = j.at("betas");
    if (b.is_array()) {
      c.betas = b.get<std::vector<double>>();
    } else {
      if (b.contains("values")) c.betas = b.at("values").get<std::vector<double>>();
      if (b.contains("log_spaced")) {
        const auto& ls = b.at("log_spaced");
        auto v = expand_log_spaced({ls.at("count").get<std::size_t>(), ls.at("min").get<double>(),
                                    ls.at("max").get<double>()});
        c.betas.insert(c.betas.end(), v.begin(), v.end());
      }
      if (b.contains("extra")) {
        auto v = b.at("extra").get<std::vector<double>>();
        c.betas.insert(c.betas.end(), v.begin(), v.end());
      }
    }

    if (j.contains("sampler")) {
      const auto& s = j.at("sampler");
      auto& o = c.sampler;
      detail::get_opt(s, "translation_halfwidth", o.translation_halfwidth);
      detail::get_opt(s, "moves_per_sweep", o.moves_per_sweep);
      detail::get_opt(s, "burn_in_sweeps", o.burn_in_sweeps);
      detail::get_opt(s, "max_burn_in_sweeps", o.max_burn_in_sweeps);
      detail::get_opt(s, "measure_interval", o.measure_interval);
      detail::get_opt(s, "n_measurements", o.n_measurements);
      detail::get_opt(s, "equilibration_window", o.equilibration_window);
      detail::get_opt(s, "equilibration_tolerance", o.equilibration_tolerance);
      detail::get_opt(s, "autotune", o.autotune);
      detail::get_opt(s, "translate_probability", o.translate_probability);
      detail::get_opt(s, "init_square_side", o.init_square_side);
    }
    detail::get_opt(j, "master_seed", c.master_seed);
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
    detail::get_opt(j, "checkpoint_interval", c.checkpoint_interval);
    detail::get_opt(j, "workers", c.workers);
    detail::get_opt(j, "keep_snapshots", c.keep_snapshots);
    detail::get_opt(j, "straightness_ratio", c.straightness_ratio);
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("config: ") + e.what());
  }
}

inline SweepConfig load_sweep_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw config_error("config " + path.string() + ": " + e.what());
  }
  return parse_sweep_config(j);
}

// ---------------------------------------------------------------------------
// Records

struct RunRecord {
  std::size_t beta_index = 0;
  double beta = 0.0;
  ObservableRecord observables;
  ValidityFlags flags;
  double r2_3d_pred = 0.0;
  double r2_2d_pred = 0.0;
  bool equilibrated = false;
  std::uint64_t sweeps_run = 0;
  std::uint64_t burn_in_sweeps = 0;
  double translate_acceptance = 0.0;
  double regrow_acceptance = 0.0;
  double wall_time = 0.0;
  std::uint64_t seed_index = 0;
  std::uint64_t master_seed = 0;
  std::uint64_t config_hash = 0;
};

struct Predictions {
  double r2_3d = 0.0;
  double r2_2d = 0.0;
};

/// Mean-field predictions for the model point (pure function of the config).
inline Predictions predictions_for(const ModelParams& p) {
  const auto s = p.scaled();
  return Predictions{rsq_3d(s), rsq_2d(s.beta_p, s.mu)};
}

namespace detail {

inline nlohmann::json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

inline double number_or_nan(const nlohmann::json& j) {
  return j.is_null() ? kUndefined : j.get<double>();
}

inline nlohmann::json estimate_json(const Estimate& e) {
  return {{"mean", number_or_null(e.mean)},
          {"std_error", number_or_null(e.std_error)},
          {"n_effective", number_or_null(e.n_effective)}};
}

inline Estimate estimate_from(const nlohmann::json& j) {
  return Estimate{number_or_nan(j.at("mean")), number_or_nan(j.at("std_error")),
                  number_or_nan(j.at("n_effective"))};
}

inline double ratio(std::uint64_t a, std::uint64_t b) {
  return b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(b);
}

}  // namespace detail

inline nlohmann::json to_json(const RunRecord& r) {
  const auto& o = r.observables;
  return {{"beta_index", r.beta_index},
          {"beta", r.beta},
          {"r2_mc", detail::estimate_json(o.r2_mc)},
          {"a2_amp", detail::estimate_json(o.a2_amp)},
          {"a2_seg", detail::estimate_json(o.a2_seg)},
          {"d2_nn", detail::estimate_json(o.d2_nn)},
          {"energy_mean", o.energy_mean},
          {"energy_var", o.energy_var},
          {"energy_std_error", o.energy_std_error},
          {"n_samples", o.n_samples},
          {"straight_ok", r.flags.straight_ok},
          {"no_braiding", r.flags.no_braiding},
          {"threshold_ratio", r.flags.threshold_ratio},
          {"r2_3d_pred", r.r2_3d_pred},
          {"r2_2d_pred", r.r2_2d_pred},
          {"equilibrated", r.equilibrated},
          {"sweeps_run", r.sweeps_run},
          {"burn_in_sweeps", r.burn_in_sweeps},
          {"translate_acceptance", r.translate_acceptance},
          {"regrow_acceptance", r.regrow_acceptance},
          {"wall_time", r.wall_time},
          {"seed_index", r.seed_index},
          {"master_seed", r.master_seed},
          {"config_hash", r.config_hash}};
}

inline RunRecord record_from_json(const nlohmann::json& j) {
  RunRecord r;
  r.beta_index = j.at("beta_index").get<std::size_t>();
  r.beta = j.at("beta").get<double>();
  r.observables.r2_mc = detail::estimate_from(j.at("r2_mc"));
  r.observables.a2_amp = detail::estimate_from(j.at("a2_amp"));
  r.observables.a2_seg = detail::estimate_from(j.at("a2_seg"));
  r.observables.d2_nn = detail::estimate_from(j.at("d2_nn"));
  r.observables.energy_mean = j.at("energy_mean").get<double>();
  r.observables.energy_var = j.at("energy_var").get<double>();
  r.observables.energy_std_error = j.at("energy_std_error").get<double>();
  r.observables.n_samples = j.at("n_samples").get<std::size_t>();
  r.flags.straight_ok = j.at("straight_ok").get<bool>();
  r.flags.no_braiding = j.at("no_braiding").get<bool>();
  r.flags.threshold_ratio = j.at("threshold_ratio").get<double>();
  r.r2_3d_pred = j.at("r2_3d_pred").get<double>();
  r.r2_2d_pred = j.at("r2_2d_pred").get<double>();
  r.equilibrated = j.at("equilibrated").get<bool>();
  r.sweeps_run = j.at("sweeps_run").get<std::uint64_t>();
  r.burn_in_sweeps = j.at("burn_in_sweeps").get<std::uint64_t>();
  r.translate_acceptance = j.at("translate_acceptance").get<double>();
  r.regrow_acceptance = j.at("regrow_acceptance").get<double>();
  r.wall_time = j.at("wall_time").get<double>();
  r.seed_index = j.at("seed_index").get<std::uint64_t>();
  r.master_seed = j.at("master_seed").get<std::uint64_t>();
  r.config_hash = j.at("config_hash").get<std::uint64_t>();
  return r;
}

inline RunRecord make_record(const SweepConfig& cfg, std::size_t i, const ChainRunner& runner,
                             std::uint64_t hash, double wall_time) {
  const ModelParams p = cfg.model_at(i);
  RunRecord r;
  r.beta_index = i;
  r.beta = p.beta;
  r.observables = aggregate(runner.measurements());
  r.flags = validity_flags(r.observables, p, cfg.straightness_ratio);
  const auto pred = predictions_for(p);
  r.r2_3d_pred = pred.r2_3d;
  r.r2_2d_pred = pred.r2_2d;
  r.equilibrated = runner.equilibrated();
  r.sweeps_run = runner.sweeps_run();
  r.burn_in_sweeps = runner.burn_in_sweeps_done();
  const auto& c = runner.chain().counters();
  r.translate_acceptance = detail::ratio(c.translate_accepted, c.translate_proposed);
  r.regrow_acceptance = detail::ratio(c.regrow_accepted, c.regrow_proposed);
  r.wall_time = wall_time;
  r.seed_index = i;
  r.master_seed = cfg.master_seed;
  r.config_hash = hash;
  return r;
}

// ---------------------------------------------------------------------------
// Tables

namespace detail {

inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream s;
  s << std::setprecision(12) << v;
  return s.str();
}

}  // namespace detail

inline const char* kComparisonHeader =
    "beta\tr2_mc\tr2_mc_stderr\tr2_3d_pred\tr2_2d_pred\tA2\ta2\td2\tstraight_ok\tno_braiding\tequilibrated";

inline std::vector<RunRecord> sorted_descending(std::vector<RunRecord> records) {
  std::stable_sort(records.begin(), records.end(),
                   [](const RunRecord& a, const RunRecord& b) { return a.beta > b.beta; });
  return records;
}

inline std::string comparison_table(const std::vector<RunRecord>& records) {
  std::ostringstream out;
  out << kComparisonHeader << '\n';
  for (const auto& r : sorted_descending(records)) {
    const auto& o = r.observables;
    out << detail::fmt(r.beta) << '\t' << detail::fmt(o.r2_mc.mean) << '\t'
        << detail::fmt(o.r2_mc.std_error) << '\t' << detail::fmt(r.r2_3d_pred) << '\t'
        << detail::fmt(r.r2_2d_pred) << '\t' << detail::fmt(o.a2_amp.mean) << '\t'
        << detail::fmt(o.a2_seg.mean) << '\t' << detail::fmt(o.d2_nn.mean) << '\t'
        << (r.flags.straight_ok ? 1 : 0) << '\t' << (r.flags.no_braiding ? 1 : 0) << '\t'
        << (r.equilibrated ? 1 : 0) << '\n';
  }
  return out.str();
}

inline std::string r2_curves_table(const std::vector<RunRecord>& records) {
  std::ostringstream out;
  out << "beta\tseries\tvalue\tstderr\n";
  for (const auto& r : sorted_descending(records)) {
    out << detail::fmt(r.beta) << "\tr2_mc\t" << detail::fmt(r.observables.r2_mc.mean) << '\t'
        << detail::fmt(r.observables.r2_mc.std_error) << '\n';
    out << detail::fmt(r.beta) << "\tr2_3d\t" << detail::fmt(r.r2_3d_pred) << "\t0\n";
    out << detail::fmt(r.beta) << "\tr2_2d\t" << detail::fmt(r.r2_2d_pred) << "\t0\n";
  }
  return out.str();
}

inline void emit_comparison_table(const std::vector<RunRecord>& records,
                                  const std::filesystem::path& dir) {
  if (records.empty()) throw std::invalid_argument("emit_comparison_table: no records");
  std::filesystem::create_directories(dir);
  write_file_atomic(dir / "comparison.tsv", comparison_table(records));
  write_file_atomic(dir / "r2_curves.tsv", r2_curves_table(records));
}

// ---------------------------------------------------------------------------
// Sweep execution

struct SweepOptions {
  bool resume = false;
  /// Stop every chain after this many sweeps in this invocation, writing a
  /// checkpoint (simulates an interrupted run). 0: run to completion.
  std::uint64_t stop_after_sweeps = 0;
};

struct SweepResult {
  std::vector<RunRecord> records;  ///< completed chains, by beta index
  std::size_t interrupted = 0;     ///< chains left with a checkpoint
};

inline std::string job_stem(std::size_t i) {
  std::ostringstream s;
  s << "beta_" << std::setw(3) << std::setfill('0') << i;
  return s.str();
}

struct SweepPaths {
  std::filesystem::path root;
  std::filesystem::path record(std::size_t i) const { return root / "records" / (job_stem(i) + ".json"); }
  std::filesystem::path checkpoint(std::size_t i) const {
    return root / "checkpoints" / (job_stem(i) + ".ckpt");
  }
  std::filesystem::path snapshots(std::size_t i) const {
    return root / "snapshots" / (job_stem(i) + ".tsv");
  }
};

inline void write_record(const std::filesystem::path& path, const RunRecord& r) {
  write_file_atomic(path, to_json(r).dump(2) + "\n");
}

inline RunRecord read_record(const std::filesystem::path& path) {
  try {
    return record_from_json(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::exception& e) {
    throw format_error("corrupt record " + path.string() + ": " + e.what());
  }
}

inline std::string snapshot_rows(const std::vector<SnapshotObservables>& rows) {
  std::ostringstream out;
  out << "r2_mc\ta2_amp\ta2_seg\td2_nn\tenergy\n";
  out << std::setprecision(17);
  for (const auto& s : rows) {
    out << s.r2_mc << '\t' << s.a2_amp << '\t' << s.a2_seg << '\t' << detail::fmt(s.d2_nn) << '\t'
        << s.energy << '\n';
  }
  return out.str();
}

/// One beta point. Returns nullopt if stopped early (checkpoint written).
inline std::optional<RunRecord> run_job(const SweepConfig& cfg, std::size_t i,
                                        const SweepOptions& opt) {
  const SweepPaths paths{cfg.output_dir};
  const ModelParams p = cfg.model_at(i);
  const std::uint64_t hash = chain_config_hash(p, cfg.sampler, cfg.master_seed, i);

  if (opt.resume && std::filesystem::exists(paths.record(i))) {
    auto rec = read_record(paths.record(i));
    if (rec.config_hash != hash) {
      throw format_error("record " + paths.record(i).string() + " belongs to a different configuration");
    }
    return rec;
  }

  double wall_before = 0.0;
  std::optional<ChainRunner> runner;
  if (opt.resume && std::filesystem::exists(paths.checkpoint(i))) {
    auto ck = load_checkpoint(paths.checkpoint(i), hash);
    if (!(ck.params == p)) throw format_error("checkpoint model parameters do not match the config");
    wall_before = ck.wall_time;
    runner.emplace(restore_runner(std::move(ck), cfg.sampler));
  } else {
    runner.emplace(p, cfg.sampler, make_engine(cfg.master_seed, i));
  }

  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return wall_before + std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };
  std::uint64_t done_here = 0;
  std::uint64_t since_ckpt = 0;
  while (!runner->done()) {
    if (opt.stop_after_sweeps > 0 && done_here >= opt.stop_after_sweeps) {
      save_checkpoint(paths.checkpoint(i), *runner, hash, elapsed());
      return std::nullopt;
    }
    runner->step();
    ++done_here;
    if (cfg.checkpoint_interval > 0 && ++since_ckpt >= cfg.checkpoint_interval && !runner->done()) {
      since_ckpt = 0;
      save_checkpoint(paths.checkpoint(i), *runner, hash, elapsed());
    }
  }

  auto rec = make_record(cfg, i, *runner, hash, elapsed());
  if (cfg.keep_snapshots) write_file_atomic(paths.snapshots(i), snapshot_rows(runner->measurements()));
  write_record(paths.record(i), rec);
  std::filesystem::remove(paths.checkpoint(i));
  return rec;
}

/// Run (or resume) every beta point on the worker pool. Jobs are seeded by
/// beta index, so results do not depend on scheduling.
inline SweepResult run_sweep(const SweepConfig& cfg, const SweepOptions& opt = {}) {
  cfg.validate();
  const SweepPaths paths{cfg.output_dir};
  try {
    std::filesystem::create_directories(cfg.output_dir / "records");
    std::filesystem::create_directories(cfg.output_dir / "checkpoints");
    if (cfg.keep_snapshots) std::filesystem::create_directories(cfg.output_dir / "snapshots");
  } catch (const std::filesystem::filesystem_error& e) {
    throw std::runtime_error(std::string("cannot create output directory: ") + e.what());
  }

  const std::size_t n = cfg.betas.size();
  std::vector<std::optional<RunRecord>> results(n);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        results[i] = run_job(cfg, i, opt);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(n);
        return;
      }
    }
  };

  const std::size_t w = std::min(cfg.worker_count(), n);
  if (w <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < w; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  SweepResult out;
  for (auto& r : results) {
    if (r) {
      out.records.push_back(std::move(*r));
    } else {
      ++out.interrupted;
    }
  }
  if (out.interrupted == 0) emit_comparison_table(out.records, cfg.output_dir);
  return out;
}

/// Reload every record in an output directory, ordered by beta index.
inline std::vector<RunRecord> load_records(const std::filesystem::path& dir) {
  const auto rec_dir = dir / "records";
  if (!std::filesystem::is_directory(rec_dir)) {
    throw std::runtime_error("no records directory in " + dir.string());
  }
  std::vector<RunRecord> out;
  for (const auto& entry : std::filesystem::directory_iterator(rec_dir)) {
    if (entry.path().extension() == ".json") out.push_back(read_record(entry.path()));
  }
  std::sort(out.begin(), out.end(),
            [](const RunRecord& a, const RunRecord& b) { return a.beta_index < b.beta_index; });
  return out;
}

}  // namespace vortex

#endif  // VORTEX_HARNESS_HPP
