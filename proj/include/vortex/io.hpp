#ifndef VORTEX_IO_HPP
#define VORTEX_IO_HPP

// Binary formats. All integers and doubles are little-endian, 64-bit.
//
// Ensemble snapshot ("VFEN"):
//   magic[4] version:u8 | N:u64 M:u64 L:f64 alpha:f64 beta:f64 mu:f64 |
//   N*M pairs (x:f64, y:f64), filament-major, layer stride 1
//
// Chain checkpoint ("VFCK"):
//   magic[4] version:u8 config_hash:u64 | snapshot body (as above, without
//   magic/version) | h_self h_int i_n total_action:f64 | halfwidth:f64
//   sweep_index:u64 | 4 x u64 move counters | phase:u8 equilibrated:u8
//   burn_in_done:u64 since_measure:u64 tune_proposed:u64 tune_accepted:u64 |
//   n_prefix:u64 + f64[n_prefix] | n_meas:u64 + 5*f64[n_meas] |
//   engine state: len:u64 + bytes | normal state: len:u64 + bytes | wall_time:f64

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "vortex/runner.hpp"

namespace vortex {

class format_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint8_t kSnapshotVersion = 1;
inline constexpr std::uint8_t kCheckpointVersion = 1;

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ull) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

class ByteWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void raw(std::string_view s) { buf_.append(s); }
  void str(std::string_view s) {
    u64(s.size());
    raw(s);
  }
  const std::string& bytes() const { return buf_; }

 private:
  std::string buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string data) : data_(std::move(data)) {}

  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(data_[pos_++]);
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    }
    pos_ += 8;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string raw(std::size_t n) {
    need(n);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::string str() {
    const auto n = u64();
    return raw(n);
  }
  bool at_end() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) throw format_error("truncated file");
  }
  std::string data_;
  std::size_t pos_ = 0;
};

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Write via a temporary and rename, so an interrupted write never leaves a torn file.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// Ensemble snapshots

inline void write_params(ByteWriter& w, const ModelParams& p) {
  w.u64(p.n_filaments);
  w.u64(p.n_segments);
  w.f64(p.length);
  w.f64(p.alpha);
  w.f64(p.beta);
  w.f64(p.mu);
}

inline ModelParams read_params(ByteReader& r) {
  ModelParams p;
  p.n_filaments = r.u64();
  p.n_segments = r.u64();
  p.length = r.f64();
  p.alpha = r.f64();
  p.beta = r.f64();
  p.mu = r.f64();
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw format_error(std::string("invalid model parameters in file: ") + e.what());
  }
  return p;
}

inline void write_ensemble_body(ByteWriter& w, const ModelParams& p, const FilamentEnsemble& ens) {
  check_shape(ens, p);
  write_params(w, p);
  for (auto b : ens.beads()) {
    w.f64(b.x);
    w.f64(b.y);
  }
}

inline FilamentEnsemble read_ensemble_body(ByteReader& r, ModelParams& p) {
  p = read_params(r);
  if (p.n_filaments > (1u << 24) || p.n_segments > (1u << 24)) {
    throw format_error("implausible ensemble dimensions");
  }
  FilamentEnsemble ens(p.n_filaments, p.n_segments);
  for (auto& b : ens.beads()) {
    b.x = r.f64();
    b.y = r.f64();
  }
  if (!ens.all_finite()) throw format_error("non-finite bead coordinate");
  return ens;
}

inline std::string encode_snapshot(const ModelParams& p, const FilamentEnsemble& ens) {
  ByteWriter w;
  w.raw("VFEN");
  w.u8(kSnapshotVersion);
  write_ensemble_body(w, p, ens);
  return w.bytes();
}

inline FilamentEnsemble decode_snapshot(std::string bytes, ModelParams& p) {
  ByteReader r(std::move(bytes));
  if (r.raw(4) != "VFEN") throw format_error("not an ensemble snapshot");
  if (const auto v = r.u8(); v != kSnapshotVersion) {
    throw format_error("unsupported snapshot version " + std::to_string(v));
  }
  auto ens = read_ensemble_body(r, p);
  if (!r.at_end()) throw format_error("trailing bytes after snapshot");
  return ens;
}

inline void save_snapshot(const std::filesystem::path& path, const ModelParams& p,
                          const FilamentEnsemble& ens) {
  write_file_atomic(path, encode_snapshot(p, ens));
}

inline FilamentEnsemble load_snapshot(const std::filesystem::path& path, ModelParams& p) {
  return decode_snapshot(read_file(path), p);
}

// ---------------------------------------------------------------------------
// Checkpoints

/// Hash of everything that must agree for a checkpoint to be resumable.
inline std::uint64_t chain_config_hash(const ModelParams& p, const SamplerConfig& c,
                                       std::uint64_t master_seed, std::uint64_t chain_index) {
  ByteWriter w;
  write_params(w, p);
  w.f64(c.translation_halfwidth);
  w.u64(c.moves_per_sweep);
  w.u64(c.burn_in_sweeps);
  w.u64(c.max_burn_in_sweeps);
  w.u64(c.measure_interval);
  w.u64(c.n_measurements);
  w.u64(c.equilibration_window);
  w.f64(c.equilibration_tolerance);
  w.u8(c.autotune ? 1 : 0);
  w.f64(c.translate_probability);
  w.f64(c.init_square_side);
  w.u64(master_seed);
  w.u64(chain_index);
  return fnv1a(w.bytes());
}

struct Checkpoint {
  std::uint64_t config_hash = 0;
  ModelParams params;
  ChainState state;
  ChainRunner::Schedule schedule;
  double wall_time = 0.0;
};

inline std::string encode_checkpoint(const ChainRunner& runner, std::uint64_t config_hash,
                                     double wall_time) {
  const auto& st = runner.chain().state();
  const auto sched = runner.schedule();
  ByteWriter w;
  w.raw("VFCK");
  w.u8(kCheckpointVersion);
  w.u64(config_hash);
  write_ensemble_body(w, runner.chain().params(), st.ensemble);
  w.f64(st.energy.h_self);
  w.f64(st.energy.h_int);
  w.f64(st.energy.i_n);
  w.f64(st.energy.total_action);
  w.f64(st.halfwidth);
  w.u64(st.sweep_index);
  w.u64(st.counters.translate_proposed);
  w.u64(st.counters.translate_accepted);
  w.u64(st.counters.regrow_proposed);
  w.u64(st.counters.regrow_accepted);
  w.u8(static_cast<std::uint8_t>(sched.phase));
  w.u8(sched.equilibrated ? 1 : 0);
  w.u64(sched.burn_in_done);
  w.u64(sched.since_measure);
  w.u64(sched.tune.proposed_at_start);
  w.u64(sched.tune.accepted_at_start);
  w.u64(sched.energy_prefix.size());
  for (double v : sched.energy_prefix) w.f64(v);
  w.u64(sched.measurements.size());
  for (const auto& m : sched.measurements) {
    w.f64(m.r2_mc);
    w.f64(m.a2_amp);
    w.f64(m.a2_seg);
    w.f64(m.d2_nn);
    w.f64(m.energy);
  }
  std::ostringstream eng, nd;
  eng << st.engine;
  nd.precision(17);
  nd << st.gauss;
  w.str(eng.str());
  w.str(nd.str());
  w.f64(wall_time);
  return w.bytes();
}

inline Checkpoint decode_checkpoint(std::string bytes) {
  ByteReader r(std::move(bytes));
  if (r.raw(4) != "VFCK") throw format_error("not a chain checkpoint");
  if (const auto v = r.u8(); v != kCheckpointVersion) {
    throw format_error("unsupported checkpoint version " + std::to_string(v));
  }
  Checkpoint c;
  c.config_hash = r.u64();
  c.state.ensemble = read_ensemble_body(r, c.params);
  c.state.energy.h_self = r.f64();
  c.state.energy.h_int = r.f64();
  c.state.energy.i_n = r.f64();
  c.state.energy.total_action = r.f64();
  c.state.halfwidth = r.f64();
  c.state.sweep_index = r.u64();
  c.state.counters.translate_proposed = r.u64();
  c.state.counters.translate_accepted = r.u64();
  c.state.counters.regrow_proposed = r.u64();
  c.state.counters.regrow_accepted = r.u64();
  const auto phase = r.u8();
  if (phase > 2) throw format_error("bad phase tag");
  c.schedule.phase = static_cast<Phase>(phase);
  c.schedule.equilibrated = r.u8() != 0;
  c.schedule.burn_in_done = r.u64();
  c.schedule.since_measure = r.u64();
  c.schedule.tune.proposed_at_start = r.u64();
  c.schedule.tune.accepted_at_start = r.u64();
  const auto n_prefix = r.u64();
  if (n_prefix > (1ull << 32)) throw format_error("implausible trace length");
  c.schedule.energy_prefix.resize(n_prefix);
  for (auto& v : c.schedule.energy_prefix) v = r.f64();
  const auto n_meas = r.u64();
  if (n_meas > (1ull << 32)) throw format_error("implausible measurement count");
  c.schedule.measurements.resize(n_meas);
  for (auto& m : c.schedule.measurements) {
    m.r2_mc = r.f64();
    m.a2_amp = r.f64();
    m.a2_seg = r.f64();
    m.d2_nn = r.f64();
    m.energy = r.f64();
  }
  std::istringstream eng(r.str()), nd(r.str());
  eng >> c.state.engine;
  nd >> c.state.gauss;
  if (eng.fail() || nd.fail()) throw format_error("corrupt random generator state");
  c.wall_time = r.f64();
  if (!r.at_end()) throw format_error("trailing bytes after checkpoint");
  return c;
}

inline void save_checkpoint(const std::filesystem::path& path, const ChainRunner& runner,
                            std::uint64_t config_hash, double wall_time = 0.0) {
  write_file_atomic(path, encode_checkpoint(runner, config_hash, wall_time));
}

/// Load and validate against the expected configuration.
inline Checkpoint load_checkpoint(const std::filesystem::path& path, std::uint64_t expected_hash) {
  auto c = decode_checkpoint(read_file(path));
  if (c.config_hash != expected_hash) {
    throw format_error("checkpoint " + path.string() + " was written for a different configuration");
  }
  return c;
}

inline ChainRunner restore_runner(Checkpoint c, const SamplerConfig& cfg) {
  ChainRunner r(c.params, cfg, std::move(c.state));
  r.restore(std::move(c.schedule));
  return r;
}

}  // namespace vortex

#endif  // VORTEX_IO_HPP
