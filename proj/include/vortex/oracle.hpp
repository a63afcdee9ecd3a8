#ifndef VORTEX_ORACLE_HPP
#define VORTEX_ORACLE_HPP

// Independent verifiers. Nothing here calls into the sampler or reuses the
// closed forms it is meant to check.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>

#include "vortex/energy.hpp"
#include "vortex/meanfield.hpp"
#include "vortex/model.hpp"

namespace vortex::oracle {

class solver_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Free filament: circulant diagonalization

struct CirculantSpec {
  std::size_t M = 1;
  double coupling = 0.0;  ///< beta alpha / delta
  double trap = 0.0;      ///< 2 mu delta

  static CirculantSpec from(const ModelParams& p) {
    return CirculantSpec{p.n_segments, p.beta * p.alpha / p.delta(), 2.0 * p.mu * p.delta()};
  }

  double eigenvalue(std::size_t q) const {
    const double theta = 2.0 * std::numbers::pi * static_cast<double>(q) / static_cast<double>(M);
    return 2.0 * coupling * (1.0 - std::cos(theta)) + trap;
  }
};

/// <|psi_j|^2> of the free trapped filament, (2/M) sum_q 1/p_q.
inline double free_filament_bead_variance(const ModelParams& p) {
  const auto c = CirculantSpec::from(p);
  double s = 0.0;
  for (std::size_t q = 0; q < c.M; ++q) s += 1.0 / c.eigenvalue(q);
  return 2.0 * s / static_cast<double>(c.M);
}

/// <psi_j . psi_{j+lag}> of the free trapped filament.
inline double free_filament_layer_covariance(const ModelParams& p, std::size_t lag) {
  const auto c = CirculantSpec::from(p);
  double s = 0.0;
  for (std::size_t q = 0; q < c.M; ++q) {
    const double theta = 2.0 * std::numbers::pi * static_cast<double>(q * lag % c.M) /
                         static_cast<double>(c.M);
    s += std::cos(theta) / c.eigenvalue(q);
  }
  return 2.0 * s / static_cast<double>(c.M);
}

// ---------------------------------------------------------------------------
// Point vortices (M = 1)

inline void require_two_point_vortices(const ModelParams& p) {
  p.validate();
  if (p.n_filaments != 2 || p.n_segments != 1) {
    throw std::domain_error("two-vortex oracle needs N = 2, M = 1");
  }
}

/// <R^2_MC> for two unit vortices with weight |psi_1 - psi_2|^{beta L} e^{-mu L (|psi_1|^2+|psi_2|^2)}.
inline double two_vortex_r2_closed_form(const ModelParams& p) {
  require_two_point_vortices(p);
  const double bl = p.beta * p.length;
  return (bl + 4.0) / (4.0 * p.mu * p.length);
}

namespace detail {

// <r^2> under the radial density r^{power} exp(-a r^2) dr on (0, inf), by
// adaptive Gauss-Kronrod on a window around the peak, integrand scaled by its
// peak value so large powers do not underflow.
inline double radial_second_moment(double power, double a) {
  const double peak = std::sqrt(power / (2.0 * a));
  const double log_peak = power > 0.0 ? power * std::log(peak) - a * peak * peak : 0.0;
  auto density = [=](double r) {
    if (r <= 0.0) return 0.0;
    return std::exp(power * std::log(r) - a * r * r - log_peak);
  };
  const double hi = peak + 40.0 / std::sqrt(a);
  using gk = boost::math::quadrature::gauss_kronrod<double, 61>;
  const double z = gk::integrate(density, 0.0, hi, 20, 1e-15);
  const double m2 = gk::integrate([&](double r) { return r * r * density(r); }, 0.0, hi, 20, 1e-15);
  return m2 / z;
}

}  // namespace detail

/// Same average from numeric quadrature of the centre-of-mass and relative
/// radial integrals.
inline double two_vortex_r2_quadrature(const ModelParams& p) {
  require_two_point_vortices(p);
  const double ml = p.mu * p.length;
  // psi_{1,2} = C +- r/2: |psi_1|^2 + |psi_2|^2 = 2|C|^2 + |r|^2/2.
  const double c2 = detail::radial_second_moment(1.0, 2.0 * ml);
  const double r2 = detail::radial_second_moment(p.beta * p.length + 1.0, 0.5 * ml);
  return c2 + 0.25 * r2;
}

/// <R^2_MC> for N rigid unit point vortices (M = 1) from the scaling of the
/// partition function: (1 + beta L (N - 1) / 4) / (mu L).
inline double point_vortex_r2_exact(std::size_t n, double beta, double mu, double L) {
  return (1.0 + beta * L * static_cast<double>(n - 1) / 4.0) / (mu * L);
}

// ---------------------------------------------------------------------------
// Saddle point

/// d f_grnd / d lambda, differentiated term by term.
inline double ground_free_energy_derivative(double lambda, const ScaledParams& p) {
  return 0.5 / std::sqrt(p.alpha_p * p.beta_p * lambda) -
         p.beta_p / (8.0 * (p.mu - 0.5 * lambda));
}

/// f_grnd(l2) - f_grnd(l1), formed per term so no large constant cancels.
inline double ground_free_energy_difference(double l1, double l2, const ScaledParams& p) {
  const double m = p.alpha_p * p.beta_p;
  const double d_sqrt = (l2 - l1) / (m * (std::sqrt(l1 / m) + std::sqrt(l2 / m)));
  // log(mu - l2/2) - log(mu - l1/2)
  const double d_log = std::log1p(-(l2 - l1) / (2.0 * p.mu - l1));
  return d_sqrt + 0.25 * p.beta_p * d_log;
}

/// Central difference of f_grnd at lambda with step h.
inline double ground_free_energy_central_difference(double lambda, double h, const ScaledParams& p) {
  return ground_free_energy_difference(lambda - h, lambda + h, p) / (2.0 * h);
}

/// Stationary point of f_grnd on (eps, 2 mu - eps), eps = 1e-9 mu, by bisection
/// on the derivative (monotone decreasing there). The stationary point is
/// the maximum of f_grnd along real lambda, i.e. the saddle of the tau contour.
inline double numeric_saddle_eta(const ScaledParams& p) {
  p.validate();
  // Deep in the 2-D regime eta is many decades below mu, so the lower end is absolute.
  double lo = 1e-300;
  double hi = 2.0 * p.mu * (1.0 - 1e-12);
  if (!(ground_free_energy_derivative(lo, p) > 0.0) || !(ground_free_energy_derivative(hi, p) < 0.0)) {
    throw solver_error("no interior stationary point of the ground free energy in the bracket");
  }
  for (int it = 0; it < 400; ++it) {
    // Geometric midpoint while the bracket spans decades, arithmetic afterwards.
    const double mid = (hi / lo > 4.0) ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (ground_free_energy_derivative(mid, p) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// argmax over lambda of the finite-L free energy, Brent on (eps, 2 mu - eps).
inline double argmax_free_energy_lambda(const ScaledParams& p) {
  p.validate();
  const double eps = 1e-9 * p.mu;
  auto neg = [&](double l) { return -free_energy_lambda(l, p); };
  return boost::math::tools::brent_find_minima(neg, eps, 2.0 * p.mu - eps, 52).first;
}

/// argmin over beta' of rsq_3d at fixed alpha', mu, searched in log beta'
/// over [lo, hi].
inline double argmin_rsq_3d_over_beta(double alpha_p, double mu, double lo = 1e-8, double hi = 1e8) {
  auto f = [&](double lb) { return std::log(rsq_3d(ScaledParams{alpha_p, std::exp(lb), mu, 1.0})); };
  return std::exp(boost::math::tools::brent_find_minima(f, std::log(lo), std::log(hi), 52).first);
}

/// The discarded root 2 mu - beta'/8 (-a - sqrt(a^2 + b)), which exceeds 2 mu.
inline double alternate_eta_root(const ScaledParams& p) {
  p.validate();
  const double a = p.beta_p * p.beta_p * p.alpha_p;
  const double b = 32.0 * p.alpha_p * p.beta_p * p.mu;
  return 2.0 * p.mu + 0.125 * p.beta_p * (a + std::sqrt(a * a + b));
}

// ---------------------------------------------------------------------------
// From-scratch energies

/// Naive O(N^2 M) evaluation with explicit distances, for auditing caches.
inline EnergyBreakdown recompute_energies(const FilamentEnsemble& ens, const ModelParams& p) {
  const std::size_t n = ens.n_filaments();
  const std::size_t m = ens.n_segments();
  const double delta = p.length / static_cast<double>(m);
  EnergyBreakdown e;
  double self = 0.0, inter = 0.0, ang = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const std::size_t next = (j + 1) % m;
    for (std::size_t k = 0; k < n; ++k) {
      const Vec2 a = ens.bead(k, j);
      const double dx = ens.bead(k, next).x - a.x;
      const double dy = ens.bead(k, next).y - a.y;
      self += 0.5 * (dx * dx + dy * dy) / delta;
      ang += delta * (a.x * a.x + a.y * a.y);
      for (std::size_t i = k + 1; i < n; ++i) {
        const double r = std::hypot(ens.bead(i, j).x - a.x, ens.bead(i, j).y - a.y);
        inter -= delta * std::log(r);
      }
    }
  }
  e.h_self = p.alpha * self;
  e.h_int = inter;
  e.i_n = ang;
  e.total_action = -p.beta * (e.h_self + e.h_int) - p.mu * e.i_n;
  return e;
}

}  // namespace vortex::oracle

#endif  // VORTEX_ORACLE_HPP
