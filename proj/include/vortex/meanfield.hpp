#ifndef VORTEX_MEANFIELD_HPP
#define VORTEX_MEANFIELD_HPP

// Mean-field / spherical-constraint analytics for nearly parallel vortex
// filaments in the non-extensive scaling alpha' = alpha/N, beta' = beta*N.
//
// Throughout, a = beta'^2 alpha' and b = 32 alpha' beta' mu. Every closed form
// below is written so that no two nearly equal quantities are subtracted.

#include <cmath>
#include <stdexcept>
#include <string>

namespace vortex {

/// Raised when rounding pushes a closed-form result outside its proven range.
class numerical_instability : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ScaledParams {
  double alpha_p = 0.0;  ///< alpha' = alpha / N
  double beta_p = 0.0;   ///< beta'  = beta * N
  double mu = 0.0;
  double L = 1.0;

  void validate() const {
    if (!(alpha_p > 0.0) || !(beta_p > 0.0) || !(mu > 0.0) || !(L > 0.0) ||
        !std::isfinite(alpha_p) || !std::isfinite(beta_p) ||
        !std::isfinite(mu) || !std::isfinite(L)) {
      throw std::domain_error("ScaledParams: alpha', beta', mu, L must be finite and positive");
    }
  }
};

struct MeanFieldResult {
  double eta = 0.0;
  double f_grnd = 0.0;
  double r2_3d = 0.0;
  double r2_2d = 0.0;
  double beta0_p = 0.0;
};

namespace detail {

inline void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::domain_error(std::string(what) + " must be finite and positive");
  }
}

inline void require_open_interval(double lambda, double mu) {
  if (!(lambda > 0.0) || !(lambda < 2.0 * mu)) {
    throw std::domain_error("lambda must lie in the open interval (0, 2 mu)");
  }
}

// sqrt(a^2 + b) without overflowing a^2.
inline double surd(const ScaledParams& p) {
  const double a = p.beta_p * p.beta_p * p.alpha_p;
  const double b = 32.0 * p.alpha_p * p.beta_p * p.mu;
  return std::hypot(a, std::sqrt(b));
}

// log(1 - exp(-x)) for x > 0.
inline double log1mexp(double x) {
  return x < 0.6931471805599453 ? std::log(-std::expm1(-x)) : std::log1p(-std::exp(-x));
}

inline double oscillator_frequency(double lambda, const ScaledParams& p) {
  return std::sqrt(lambda / (p.alpha_p * p.beta_p));
}

// -log h for the periodic 2-D oscillator: omega L + 2 log(1 - e^{-omega L}).
inline double minus_log_oscillator_partition(double omega_L) {
  const double v = omega_L + 2.0 * log1mexp(omega_L);
  if (!std::isfinite(v)) {
    throw std::overflow_error("oscillator partition function is not representable (omega L too small)");
  }
  return v;
}

}  // namespace detail

/// 2-D (point-vortex) low temperature mean-square radius beta'/(4 mu).
inline double rsq_2d(double beta_p, double mu) {
  detail::require_positive(beta_p, "beta'");
  detail::require_positive(mu, "mu");
  return beta_p / (4.0 * mu);
}

/// Quasi-2D mean-square radius (a + sqrt(a^2 + b)) / (8 alpha' beta' mu).
inline double rsq_3d(const ScaledParams& p) {
  p.validate();
  const double a = p.beta_p * p.beta_p * p.alpha_p;
  return (a + detail::surd(p)) / (8.0 * p.alpha_p * p.beta_p * p.mu);
}

/// Saddle point of the ground free energy, physical root.
///
/// Rationalized form eta = 2 mu b / (a + sqrt(a^2 + b))^2, which equals
/// 2 mu - beta'/8 (sqrt(a^2 + b) - a) but keeps full precision both when
/// eta is tiny (deep 2-D) and when it approaches 2 mu (floppy filaments).
inline double saddle_eta(const ScaledParams& p) {
  p.validate();
  const double a = p.beta_p * p.beta_p * p.alpha_p;
  const double sqrt_b = std::sqrt(32.0 * p.alpha_p * p.beta_p * p.mu);
  const double ratio = sqrt_b / (a + detail::surd(p));
  const double eta = 2.0 * p.mu * ratio * ratio;
  if (!(eta > 0.0) || !(eta < 2.0 * p.mu)) {
    throw numerical_instability("saddle_eta: rounding placed eta outside (0, 2 mu)");
  }
  return eta;
}

/// R^2 eliminated through dF/dR^2 = 0: beta' / (4 (mu - lambda/2)).
inline double r2_at_lambda(double lambda, const ScaledParams& p) {
  p.validate();
  detail::require_open_interval(lambda, p.mu);
  return p.beta_p / (4.0 * (p.mu - 0.5 * lambda));
}

/// Free energy per unit length in the L -> infinity limit.
inline double ground_free_energy(double lambda, const ScaledParams& p) {
  p.validate();
  detail::require_open_interval(lambda, p.mu);
  const double q = 0.25 * p.beta_p;
  return q + detail::oscillator_frequency(lambda, p) -
         q * std::log(p.beta_p / (4.0 * (p.mu - 0.5 * lambda)));
}

/// Finite-L free energy as a function of lambda and R^2:
/// (mu - lambda/2) L r2 - beta' L log(r2)/4 - log h(omega L).
inline double free_energy_finite_L(double lambda, double r2, const ScaledParams& p) {
  p.validate();
  detail::require_positive(lambda, "lambda");
  detail::require_positive(r2, "R^2");
  const double omega_L = detail::oscillator_frequency(lambda, p) * p.L;
  return (p.mu - 0.5 * lambda) * p.L * r2 - 0.25 * p.beta_p * p.L * std::log(r2) +
         detail::minus_log_oscillator_partition(omega_L);
}

/// Finite-L free energy with R^2 eliminated.
inline double free_energy_lambda(double lambda, const ScaledParams& p) {
  p.validate();
  detail::require_open_interval(lambda, p.mu);
  const double q = 0.25 * p.beta_p * p.L;
  const double omega_L = detail::oscillator_frequency(lambda, p) * p.L;
  return q + detail::minus_log_oscillator_partition(omega_L) -
         q * std::log(p.beta_p / (4.0 * (p.mu - 0.5 * lambda)));
}

/// Turning point of the R^2(beta') "v": beta'_0 = (4 mu / alpha')^(1/3).
inline double beta0(double alpha_p, double mu) {
  detail::require_positive(alpha_p, "alpha'");
  detail::require_positive(mu, "mu");
  return std::cbrt(4.0 * mu / alpha_p);
}

/// beta' at which R^2_3D exceeds R^2_2D by the relative error E.
inline double beta_for_error(double E, double alpha_p, double mu) {
  detail::require_positive(E, "E");
  detail::require_positive(alpha_p, "alpha'");
  detail::require_positive(mu, "mu");
  return std::cbrt(8.0 * mu / (alpha_p * E * (E + 1.0)));
}

/// (R^2_3D - R^2_2D) / R^2_2D evaluated as x / (2 (sqrt(1+x) + 1)),
/// x = 32 mu / (alpha' beta'^3).
inline double relative_error_2d(const ScaledParams& p) {
  p.validate();
  const double x = 32.0 * p.mu / (p.alpha_p * p.beta_p * p.beta_p * p.beta_p);
  return x / (2.0 * (std::sqrt(1.0 + x) + 1.0));
}

inline MeanFieldResult evaluate(const ScaledParams& p) {
  MeanFieldResult r;
  r.eta = saddle_eta(p);
  r.f_grnd = ground_free_energy(r.eta, p);
  r.r2_3d = rsq_3d(p);
  r.r2_2d = rsq_2d(p.beta_p, p.mu);
  r.beta0_p = beta0(p.alpha_p, p.mu);
  return r;
}

}  // namespace vortex

#endif  // VORTEX_MEANFIELD_HPP
