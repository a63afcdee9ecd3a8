#ifndef VORTEX_VERIFY_HPP
#define VORTEX_VERIFY_HPP

// The oracle suite behind `vortexmc verify`: every analytic formula and the
// sampler components checked against an independent route, reduced to
// desk-scale sizes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "vortex/meanfield.hpp"
#include "vortex/observables.hpp"
#include "vortex/oracle.hpp"
#include "vortex/runner.hpp"

namespace vortex {

struct CheckResult {
  std::string name;
  bool passed = false;
  double measured = 0.0;   ///< the worst-case discrepancy found
  double tolerance = 0.0;  ///< passes when measured <= tolerance
  std::string detail;
  double seconds = 0.0;
};

struct VerifyOptions {
  double perturb_eta = 0.0;  ///< relative perturbation of the explicit eta under test
  std::uint64_t seed = 20240611;
};

namespace verify_detail {

inline double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

inline std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
  return v;
}

inline std::vector<ScaledParams> saddle_grid() {
  std::vector<ScaledParams> g;
  for (double a : log_grid(1e3, 1e7, 5))
    for (double b : log_grid(0.05, 50.0, 5))
      for (double m : log_grid(100.0, 1e4, 5)) g.push_back(ScaledParams{a, b, m, 1.0});
  return g;
}

inline std::string fmt(double v, int prec = 6) {
  std::ostringstream s;
  s.precision(prec);
  s << v;
  return s.str();
}

// Mean and blocking standard error of the per-snapshot series `col`.
inline BlockingEstimate series_estimate(const std::vector<SnapshotObservables>& m,
                                        double SnapshotObservables::*col) {
  std::vector<double> v;
  v.reserve(m.size());
  for (const auto& s : m) v.push_back(s.*col);
  return blocking_analysis(v);
}

inline CheckResult within_sigma(std::string name, const BlockingEstimate& e, double exact,
                                double n_sigma = 3.0) {
  CheckResult c;
  c.name = std::move(name);
  c.measured = std::abs(e.mean - exact) / e.std_error;
  c.tolerance = n_sigma;
  c.passed = c.measured <= c.tolerance;
  c.detail = "mc=" + fmt(e.mean, 8) + " +- " + fmt(e.std_error, 3) + " exact=" + fmt(exact, 8) +
             " n_eff=" + fmt(e.n_effective, 5) + " (|z| shown)";
  return c;
}

}  // namespace verify_detail

inline CheckResult check_saddle_grid(const VerifyOptions& o) {
  CheckResult c{"saddle agreement (125-point grid)", false, 0.0, 1e-6, "", 0.0};
  ScaledParams worst{};
  for (const auto& p : verify_detail::saddle_grid()) {
    const double explicit_eta = saddle_eta(p) * (1.0 + o.perturb_eta);
    const double d = verify_detail::rel(explicit_eta, oracle::numeric_saddle_eta(p));
    if (d > c.measured) {
      c.measured = d;
      worst = p;
    }
  }
  c.passed = c.measured <= c.tolerance;
  c.detail = "worst at alpha'=" + verify_detail::fmt(worst.alpha_p) + " beta'=" +
             verify_detail::fmt(worst.beta_p) + " mu=" + verify_detail::fmt(worst.mu);
  return c;
}

inline CheckResult check_stationarity(const VerifyOptions& o) {
  CheckResult c{"stationarity |f'(eta)| / |f(eta)|", false, 0.0, 1e-8, "", 0.0};
  for (const auto& p : verify_detail::saddle_grid()) {
    const double eta = saddle_eta(p) * (1.0 + o.perturb_eta);
    const double h = 1e-4 * std::min(eta, 2.0 * p.mu - eta);
    const double d = oracle::ground_free_energy_central_difference(eta, h, p);
    c.measured = std::max(c.measured, std::abs(d) / std::abs(ground_free_energy(eta, p)));
  }
  c.passed = c.measured <= c.tolerance;
  c.detail = "central difference, step 1e-4 of the distance to the nearer endpoint";
  return c;
}

inline CheckResult check_consistency() {
  CheckResult c{"rsq_3d == beta'/(4(mu - eta/2))", false, 0.0, 1e-10, "", 0.0};
  for (const auto& p : verify_detail::saddle_grid()) {
    c.measured = std::max(c.measured, verify_detail::rel(r2_at_lambda(saddle_eta(p), p), rsq_3d(p)));
  }
  c.passed = c.measured <= c.tolerance;
  return c;
}

inline CheckResult check_2d_limit() {
  CheckResult c{"2D limit alpha' in {1e8, 1e10, 1e12}", false, 0.0, 1e-3, "", 0.0};
  const double bp = 20.0, mu = 2000.0;
  double prev = INFINITY;
  bool decreasing = true;
  std::string vals;
  for (double a : {1e8, 1e10, 1e12}) {
    const double d = verify_detail::rel(rsq_3d({a, bp, mu, 1.0}), rsq_2d(bp, mu));
    decreasing = decreasing && d < prev;
    prev = d;
    c.measured = std::max(c.measured, d);
    vals += verify_detail::fmt(d, 3) + " ";
  }
  // Round trip through the error locus at the largest alpha'.
  const ScaledParams far{1e12, bp, mu, 1.0};
  const double back = beta_for_error(relative_error_2d(far), far.alpha_p, mu);
  const double rt = verify_detail::rel(back, bp);
  c.passed = c.measured <= c.tolerance && decreasing && rt <= 1e-5;
  c.detail = "rel diffs " + vals + (decreasing ? "(decreasing)" : "(NOT decreasing)") +
             "; beta' round trip at 1e12 " + verify_detail::fmt(rt, 3);
  return c;
}

inline CheckResult check_beta0() {
  CheckResult c{"turning point beta'_0 vs numeric argmin", false, 0.0, 1e-4, "", 0.0};
  for (double a : {1e3, 5e5, 1e7}) {
    for (double mu : {100.0, 2000.0}) {
      const double b0 = beta0(a, mu);
      const double num = oracle::argmin_rsq_3d_over_beta(a, mu);
      c.measured = std::max(c.measured, verify_detail::rel(num, b0));
      if (a == 5e5 && mu == 2000.0) {
        c.detail = "beta0(5e5, 2000) = " + verify_detail::fmt(b0, 8) + ", numeric " +
                   verify_detail::fmt(num, 8);
      }
    }
  }
  c.passed = c.measured <= c.tolerance;
  return c;
}

inline CheckResult check_error_locus() {
  CheckResult c{"error locus round trip E in {0.1, 0.5, 1, 2}", false, 0.0, 1e-6, "", 0.0};
  const double a = 5e5, mu = 2000.0;
  for (double E : {0.1, 0.5, 1.0, 2.0}) {
    const ScaledParams p{a, beta_for_error(E, a, mu), mu, 1.0};
    const double r2 = rsq_2d(p.beta_p, mu);
    const double recovered = (rsq_3d(p) - r2) / r2;
    c.measured = std::max(c.measured, verify_detail::rel(recovered, E));
    c.detail += "E=" + verify_detail::fmt(E, 2) + ": beta'=" + verify_detail::fmt(p.beta_p, 8) +
                " -> " + verify_detail::fmt(recovered, 10) + "; ";
  }
  c.passed = c.measured <= c.tolerance;
  return c;
}

inline CheckResult check_finite_L_saddle() {
  CheckResult c{"L=1000 free energy argmax vs eta", false, 0.0, 1e-4, "", 0.0};
  const ScaledParams p{5e5, 0.2, 2000.0, 1000.0};
  const double num = oracle::argmax_free_energy_lambda(p);
  c.measured = verify_detail::rel(num, saddle_eta(p));
  c.passed = c.measured <= c.tolerance;
  c.detail = "argmax " + verify_detail::fmt(num, 8) + ", eta " + verify_detail::fmt(saddle_eta(p), 8);
  return c;
}

inline CheckResult check_two_vortex_quadrature() {
  CheckResult c{"two-vortex quadrature vs closed form", false, 0.0, 1e-8, "", 0.0};
  for (double b : {0.1, 1.0, 10.0}) {
    ModelParams p{2, 1, 10.0, 1e7, b, 2000.0};
    c.measured = std::max(c.measured, verify_detail::rel(oracle::two_vortex_r2_quadrature(p),
                                                         oracle::two_vortex_r2_closed_form(p)));
  }
  c.passed = c.measured <= c.tolerance;
  c.detail = "beta in {0.1, 1, 10}, L=10, mu=2000";
  return c;
}

inline CheckResult check_continuum_limit() {
  CheckResult c{"circulant variance -> 1/sqrt(2 mu alpha beta) as M grows", false, 0.0, 1e-3, "", 0.0};
  ModelParams p{1, 1, 100.0, 1.0, 1.0, 1.0};
  const double target = 1.0 / std::sqrt(2.0 * p.mu * p.alpha * p.beta);
  double prev = INFINITY;
  bool monotone = true;
  for (std::size_t m : {64u, 256u, 1024u, 4096u}) {
    p.n_segments = m;
    const double d = verify_detail::rel(oracle::free_filament_bead_variance(p), target);
    monotone = monotone && d < prev;
    prev = d;
  }
  c.measured = prev;
  // Same limit from the mean-field side: rsq_3d at small beta'.
  const ScaledParams sp{1e7, 1e-6, 2000.0, 10.0};
  const double mf = verify_detail::rel(rsq_3d(sp), 1.0 / std::sqrt(2.0 * sp.alpha_p * sp.beta_p * sp.mu));
  c.passed = monotone && c.measured <= c.tolerance && mf <= 1e-3;
  c.detail = std::string(monotone ? "monotone" : "NOT monotone") + "; mean-field small-beta' rel " +
             verify_detail::fmt(mf, 3);
  return c;
}

inline CheckResult check_direct_sampler(const VerifyOptions& o) {
  ModelParams p{1, 64, 10.0, 1e7, 0.1, 2000.0};
  FreeFilamentSampler s(p);
  Engine eng = make_engine(o.seed, 1);
  std::normal_distribution<double> g;
  std::vector<Vec2> beads(p.n_segments);
  std::vector<double> b0, mid;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    s.sample(beads, [&] { return g(eng); });
    b0.push_back(norm2(beads[0]));
    mid.push_back(norm2(beads[p.n_segments / 2]));
  }
  const double exact = oracle::free_filament_bead_variance(p);
  auto r0 = verify_detail::within_sigma("direct sampler bead 0 vs circulant", blocking_analysis(b0), exact);
  auto r1 = verify_detail::within_sigma("", blocking_analysis(mid), exact);
  r0.name = "direct free-filament sampler vs circulant (beads 0, M/2)";
  r0.measured = std::max(r0.measured, r1.measured);
  r0.passed = r0.measured <= r0.tolerance;
  return r0;
}

inline SamplerConfig small_chain_config() {
  SamplerConfig cfg;
  cfg.burn_in_sweeps = 200;
  cfg.max_burn_in_sweeps = 2000;
  cfg.equilibration_window = 100;
  cfg.measure_interval = 2;
  cfg.n_measurements = 50000;
  return cfg;
}

inline CheckResult check_free_chain(const VerifyOptions& o) {
  ModelParams p{1, 16, 10.0, 1e7, 0.1, 2000.0};
  const auto sum = run_chain(p, small_chain_config(), make_engine(o.seed, 2));
  auto c = verify_detail::within_sigma("N=1 chain <R^2_MC> vs circulant (M=16)",
                                       verify_detail::series_estimate(sum.measurements, &SnapshotObservables::r2_mc),
                                       oracle::free_filament_bead_variance(p));
  return c;
}

inline CheckResult check_point_vortex_chain(const VerifyOptions& o) {
  ModelParams p{1, 1, 10.0, 1e7, 1.0, 2000.0};
  const auto sum = run_chain(p, small_chain_config(), make_engine(o.seed, 3));
  return verify_detail::within_sigma("N=1, M=1 chain <R^2_MC> vs 1/(mu L)",
                                     verify_detail::series_estimate(sum.measurements, &SnapshotObservables::r2_mc),
                                     1.0 / (p.mu * p.length));
}

inline CheckResult check_two_vortex_chain(const VerifyOptions& o) {
  ModelParams p{2, 1, 10.0, 1e7, 1.0, 2000.0};
  const auto sum = run_chain(p, small_chain_config(), make_engine(o.seed, 4));
  return verify_detail::within_sigma("N=2, M=1 chain <R^2_MC> vs (beta L + 4)/(4 mu L)",
                                     verify_detail::series_estimate(sum.measurements, &SnapshotObservables::r2_mc),
                                     oracle::two_vortex_r2_closed_form(p));
}

/// Run every check, in order.
inline std::vector<CheckResult> run_verify(const VerifyOptions& o = {}) {
  const std::vector<std::function<CheckResult()>> checks = {
      [&] { return check_saddle_grid(o); },
      [&] { return check_stationarity(o); },
      [] { return check_consistency(); },
      [] { return check_2d_limit(); },
      [] { return check_beta0(); },
      [] { return check_error_locus(); },
      [] { return check_finite_L_saddle(); },
      [] { return check_two_vortex_quadrature(); },
      [] { return check_continuum_limit(); },
      [&] { return check_direct_sampler(o); },
      [&] { return check_free_chain(o); },
      [&] { return check_point_vortex_chain(o); },
      [&] { return check_two_vortex_chain(o); },
  };
  std::vector<CheckResult> out;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    const auto& f = checks[i];
    const auto t0 = std::chrono::steady_clock::now();
    CheckResult r;
    try {
      r = f();
    } catch (const std::exception& e) {
      r.name = "check " + std::to_string(i + 1);
      r.passed = false;
      r.detail = std::string("threw: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.push_back(std::move(r));
  }
  return out;
}

inline void print_report(std::ostream& os, const std::vector<CheckResult>& results) {
  for (const auto& r : results) {
    os << (r.passed ? "PASS" : "FAIL") << "  " << r.name << ": measured "
       << verify_detail::fmt(r.measured, 3) << " (tol " << verify_detail::fmt(r.tolerance, 3) << ", "
       << verify_detail::fmt(r.seconds, 3) << " s)";
    if (!r.detail.empty()) os << "\n      " << r.detail;
    os << '\n';
  }
}

inline bool all_passed(const std::vector<CheckResult>& results) {
  return std::all_of(results.begin(), results.end(), [](const CheckResult& r) { return r.passed; });
}

}  // namespace vortex

#endif  // VORTEX_VERIFY_HPP
