#ifndef VORTEX_MODEL_HPP
#define VORTEX_MODEL_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "vortex/meanfield.hpp"

namespace vortex {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
  Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
  friend Vec2 operator+(Vec2 a, Vec2 b) { return a += b; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return a -= b; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Vec2, Vec2) = default;
};

inline double norm2(Vec2 v) { return v.x * v.x + v.y * v.y; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }

/// Physical and discretization constants. Circulations are all 1.
struct ModelParams {
  std::size_t n_filaments = 1;
  std::size_t n_segments = 1;
  double length = 10.0;
  double alpha = 1e7;
  double beta = 1.0;
  double mu = 2000.0;

  /// Segment length L/M; derived, never stored.
  double delta() const { return length / static_cast<double>(n_segments); }

  void validate() const {
    if (n_filaments < 1 || n_segments < 1) {
      throw std::invalid_argument("ModelParams: need at least one filament and one segment");
    }
    auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
    if (!positive(length) || !positive(alpha) || !positive(beta) || !positive(mu)) {
      throw std::invalid_argument("ModelParams: L, alpha, beta, mu must be finite and positive");
    }
  }

  ScaledParams scaled() const {
    const double n = static_cast<double>(n_filaments);
    return ScaledParams{alpha / n, beta * n, mu, length};
  }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// N filaments x M beads, filament-major with layer stride 1.
/// Layer index is periodic: bead M wraps onto bead 0.
class FilamentEnsemble {
 public:
  FilamentEnsemble() = default;
  FilamentEnsemble(std::size_t n_filaments, std::size_t n_segments)
      : n_(n_filaments), m_(n_segments), beads_(n_filaments * n_segments) {}

  /// Straight (z-parallel) filaments through the given planar points.
  static FilamentEnsemble straight(std::span<const Vec2> endpoints, std::size_t n_segments) {
    FilamentEnsemble e(endpoints.size(), n_segments);
    for (std::size_t k = 0; k < endpoints.size(); ++k) {
      for (auto& b : e.filament(k)) b = endpoints[k];
    }
    return e;
  }

  std::size_t n_filaments() const { return n_; }
  std::size_t n_segments() const { return m_; }

  Vec2& bead(std::size_t k, std::size_t j) { return beads_[k * m_ + j]; }
  Vec2 bead(std::size_t k, std::size_t j) const { return beads_[k * m_ + j]; }

  std::span<Vec2> filament(std::size_t k) { return {beads_.data() + k * m_, m_}; }
  std::span<const Vec2> filament(std::size_t k) const { return {beads_.data() + k * m_, m_}; }

  std::span<const Vec2> beads() const { return beads_; }
  std::span<Vec2> beads() { return beads_; }

  bool all_finite() const {
    for (auto b : beads_) {
      if (!std::isfinite(b.x) || !std::isfinite(b.y)) return false;
    }
    return true;
  }

  /// True if two distinct filaments share a bead position on some layer.
  bool has_coincident_beads() const {
    for (std::size_t j = 0; j < m_; ++j) {
      for (std::size_t k = 0; k < n_; ++k) {
        for (std::size_t i = k + 1; i < n_; ++i) {
          if (bead(i, j) == bead(k, j)) return true;
        }
      }
    }
    return false;
  }

  friend bool operator==(const FilamentEnsemble&, const FilamentEnsemble&) = default;

 private:
  std::size_t n_ = 0;
  std::size_t m_ = 0;
  std::vector<Vec2> beads_;
};

inline void check_shape(const FilamentEnsemble& ens, const ModelParams& p) {
  if (ens.n_filaments() != p.n_filaments || ens.n_segments() != p.n_segments) {
    throw std::invalid_argument("ensemble shape does not match ModelParams");
  }
}

}  // namespace vortex

#endif  // VORTEX_MODEL_HPP
