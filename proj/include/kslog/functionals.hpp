#pragma once

// Integral quantities tracked along a run, the regularized power Phi_eps, the
// Riccati comparison bound, and the per-run FunctionalLedger.

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "kslog/geometry.hpp"
#include "kslog/stepper.hpp"

namespace kslog {

/// Phi_eps(s) = p * int_0^s sigma^(p-1) / (1 + eps sigma) dsigma
///            = p eps^-p B(eps s / (1 + eps s); p, 1 - p)
/// with B the incomplete beta function; s^p at eps = 0.
double phi_eps(double s, double p, double eps);

/// Midpoint of (1, min(p+1, n(p+1)/(2n-2))). Throws when that window is empty.
double select_r(double p, int n_eff);

/// sqrt(b/a) coth(sqrt(ab) t).
double coth_bound(double a, double b, double t);

struct OdeSample {
  double t = 0.0;
  double y = 0.0;
};

/// Integrates y' = -a y^2 + b from (t0, y0) with an adaptive Dormand-Prince
/// scheme and returns the solution at `times` (ascending, >= t0).
std::vector<OdeSample> integrate_riccati(double a, double b, double t0, double y0, std::span<const double> times);

/// True iff every sample with t > 0 satisfies y <= coth_bound(a,b,t) (1 + 1e-6).
bool ode_comparison_check(double a, double b, std::span<const OdeSample> trajectory);

// ---- spatial integrands (face-based, arithmetic face means) ----------------

/// int |grad u^(p/2)|^2 via two-point differences of u^(p/2).
double grad_power_sq(const Field& u, double p);
/// int |grad u^(p/2) - u^(p/2) grad v / (2v)|^2.
double drift_square(const Field& u, const Field& v, double p);
/// int u^(p+1) / v.
double power_over_v(const Field& u, const Field& v, double p);
/// int u^p |grad v|^2 / v^2.
double power_grad_log_v_sq(const Field& u, const Field& v, double p);
/// int u^q (negative entries are treated as 0).
double power_integral(const Field& u, double q);
/// int |grad v|^r with cell gradients averaged from face differences.
double grad_norm_power(const Field& v, double r);

/// int ln max(u, floor); `floored` receives the number of clamped cells.
double log_integral(const Field& u, double floor, std::size_t* floored = nullptr);

/// Empirical ratio int |grad f|^2/f^2 / (int ln(delta/f))^2 when the
/// denominator's base is positive; NaN otherwise. Diagnostic only.
double empirical_log_poincare_ratio(const Field& f, double delta);

inline constexpr double kPositivityFloor = 1e-300;

struct LedgerRow {
  double t = 0.0;
  double mass_u = 0.0;
  double mass_v = 0.0;
  double min_v = 0.0;
  double max_u = 0.0;
  double lemma35 = 0.0;
  double entropy_low = 0.0;
  double A1 = 0.0, A2 = 0.0, A3 = 0.0, A4 = 0.0, A5 = 0.0;

  // In-memory companions (not part of the CSV): running int int u^p,
  // int int Phi_eps(u), and the instantaneous int u^p.
  double acc_power = 0.0;
  double acc_phi = 0.0;
  double power_now = 0.0;
};

class FunctionalLedger {
 public:
  /// `r` may be NaN, which disables A5.
  FunctionalLedger(double p, double r, double eps);

  double p() const { return p_; }
  double r() const { return r_; }
  double eps() const { return eps_; }
  const std::vector<LedgerRow>& rows() const { return rows_; }
  std::size_t floored_cells() const { return floored_cells_; }

  /// Appends the row for `s`; accumulators include the contribution
  /// dt_weight * (spatial integral at s) (left-endpoint rule).
  void record(const StateSnapshot& s, double dt_weight);

  /// Header: t,mass_u,mass_v,min_v,max_u,lemma35,entropy_low,A1,A2,A3,A4,A5
  static const char* csv_header();
  void write_csv(const std::filesystem::path& path) const;
  static std::vector<LedgerRow> read_csv(const std::filesystem::path& path);

 private:
  double p_, r_, eps_;
  std::vector<LedgerRow> rows_;
  std::size_t floored_cells_ = 0;
};

inline void ledger_record(const StateSnapshot& s, FunctionalLedger& ledger, double dt_weight) {
  ledger.record(s, dt_weight);
}

}  // namespace kslog
