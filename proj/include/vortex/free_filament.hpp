#ifndef VORTEX_FREE_FILAMENT_HPP
#define VORTEX_FREE_FILAMENT_HPP

// Exact sampler for the non-interacting filament measure
//
//   exp( - sum_j [ (beta alpha / (2 delta)) |psi(j+1) - psi(j)|^2 + mu delta |psi(j)|^2 ] )
//
// with periodic layers. Per planar component the precision matrix is
// Q = c * Lap + t * I with c = beta alpha / delta, t = 2 mu delta, Lap the
// periodic path Laplacian. Conditioned on bead 0, the remaining M-1 beads are
// Gaussian with the tridiagonal precision Q_rr, which is factorized once.
//
// Since the rows of Lap sum to zero, Q_rr 1 = t 1 - Q_r0, so with w = Q_rr^{-1} 1
// the conditional mean is psi(0) (1 - t w) and the Schur complement of Q_rr is
// t (1 + sum_i (-Q_r0)_i w_i); neither expression suffers cancellation when c >> t.

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "vortex/model.hpp"

namespace vortex {

class FreeFilamentSampler {
 public:
  FreeFilamentSampler() = default;

  explicit FreeFilamentSampler(const ModelParams& p)
      : m_(p.n_segments), coupling_(p.beta * p.alpha / p.delta()), trap_(2.0 * p.mu * p.delta()) {
    p.validate();
    const std::size_t r = m_ - 1;
    if (r == 0) {
      bead0_variance_ = 1.0 / trap_;
      return;
    }
    const double diag = 2.0 * coupling_ + trap_;
    const double off = -coupling_;  // only present for M >= 3
    chol_diag_.resize(r);
    chol_sub_.resize(r > 0 ? r - 1 : 0);
    chol_diag_[0] = std::sqrt(diag);
    for (std::size_t i = 0; i + 1 < r; ++i) {
      chol_sub_[i] = off / chol_diag_[i];
      chol_diag_[i + 1] = std::sqrt(diag - chol_sub_[i] * chol_sub_[i]);
    }

    std::vector<double> w(r, 1.0);
    solve_in_place(w);
    mean_shape_.resize(r);
    for (std::size_t i = 0; i < r; ++i) mean_shape_[i] = 1.0 - trap_ * w[i];

    const double coupling_to_bead0 =
        (r == 1) ? 2.0 * coupling_ * w[0] : coupling_ * (w[0] + w[r - 1]);
    bead0_variance_ = 1.0 / (trap_ * (1.0 + coupling_to_bead0));
  }

  std::size_t n_segments() const { return m_; }
  double coupling() const { return coupling_; }
  double trap() const { return trap_; }

  /// Marginal variance of any single bead, per planar component.
  double bead_variance_per_component() const { return bead0_variance_; }

  /// Conditional mean of bead j (j >= 1) given bead 0, as a multiple of bead 0.
  double conditional_mean_factor(std::size_t j) const { return mean_shape_.at(j - 1); }

  /// Overwrite beads[1..M-1] with an exact draw conditioned on beads[0].
  /// `gauss` returns independent standard normal deviates.
  template <class Gauss>
  void regrow(std::span<Vec2> beads, Gauss&& gauss) const {
    if (beads.size() != m_) throw std::invalid_argument("regrow: wrong bead count");
    const std::size_t r = m_ - 1;
    if (r == 0) return;
    thread_local std::vector<double> zx, zy;
    zx.resize(r);
    zy.resize(r);
    for (std::size_t i = 0; i < r; ++i) {
      zx[i] = gauss();
      zy[i] = gauss();
    }
    back_substitute(zx);
    back_substitute(zy);
    const Vec2 anchor = beads[0];
    for (std::size_t i = 0; i < r; ++i) {
      beads[i + 1] = Vec2{anchor.x * mean_shape_[i] + zx[i], anchor.y * mean_shape_[i] + zy[i]};
    }
  }

  /// Unconditional exact draw of a whole filament.
  template <class Gauss>
  void sample(std::span<Vec2> beads, Gauss&& gauss) const {
    if (beads.size() != m_) throw std::invalid_argument("sample: wrong bead count");
    const double sd = std::sqrt(bead0_variance_);
    const double x = gauss();
    const double y = gauss();
    beads[0] = Vec2{sd * x, sd * y};
    regrow(beads, gauss);
  }

 private:
  // Solve L^T y = z in place, so that y ~ N(0, Q_rr^{-1}) for z ~ N(0, I).
  void back_substitute(std::vector<double>& z) const {
    const std::size_t r = z.size();
    z[r - 1] /= chol_diag_[r - 1];
    for (std::size_t i = r - 1; i-- > 0;) {
      z[i] = (z[i] - chol_sub_[i] * z[i + 1]) / chol_diag_[i];
    }
  }

  // Solve Q_rr x = v in place.
  void solve_in_place(std::vector<double>& v) const {
    const std::size_t r = v.size();
    v[0] /= chol_diag_[0];
    for (std::size_t i = 1; i < r; ++i) {
      v[i] = (v[i] - chol_sub_[i - 1] * v[i - 1]) / chol_diag_[i];
    }
    back_substitute(v);
  }

  std::size_t m_ = 1;
  double coupling_ = 0.0;
  double trap_ = 0.0;
  double bead0_variance_ = 0.0;
  std::vector<double> chol_diag_;
  std::vector<double> chol_sub_;
  std::vector<double> mean_shape_;
};

}  // namespace vortex

#endif  // VORTEX_FREE_FILAMENT_HPP
