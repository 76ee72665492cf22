#pragma once

// One IMEX step of the regularized system
//   u_t = div( grad u - chi u / ((1 + eps u) v) grad v ),  0 = Delta v - v + u
// with zero-flux boundaries: explicit first-order upwind chemotaxis, implicit
// diffusion, then a fresh elliptic solve for v.

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "kslog/elliptic.hpp"
#include "kslog/geometry.hpp"

namespace kslog {

enum class FaceMean { Arithmetic, Harmonic };
enum class UndershootPolicy { Abort, Clamp };

struct Params {
  double chi = 1.0;
  double eps = 0.1;
  double p = 0.5;
  int n_eff = 2;
  double T = 1.0;
  double dt_max = 1e-3;
  double cfl_safety = 0.9;

  FaceMean v_face = FaceMean::Arithmetic;
  UndershootPolicy undershoot = UndershootPolicy::Abort;
  double blowup_ceiling = 1e8;
  double elliptic_tol = 1e-10;
  /// Claims the global-existence regime chi < n/(n-2); when false the run is
  /// exploratory and the chi gates are not enforced.
  bool subcritical_regime = true;
  /// +1 for the model; -1 reverses the chemotactic drift (negative-control
  /// fixtures only).
  double advection_sign = 1.0;

  /// Throws Config errors for violated parameter gates.
  void validate() const;
};

/// Largest admissible chi for the global-existence regime in dimension n
/// (infinity for n = 2).
double critical_chi(int n_eff);

/// Deterministic p with chi < 1/p inside the admissible window: the midpoint
/// of (max(chi,1), n/(n-2)) for n >= 3, of (max(chi,1), 2 max(chi,1)) for n = 2.
double select_p(double chi, int n_eff);

struct StateSnapshot {
  double t = 0.0;
  Field u;
  Field v;
  std::int64_t step_index = 0;
};

/// Per interior face, the flux of u from `left` to `right`.
struct FaceFluxes {
  std::vector<double> diffusive;
  std::vector<double> advective;

  double total(std::size_t f) const { return diffusive[f] + advective[f]; }
};

FaceFluxes chemotactic_flux(const Field& u, const Field& v, const Params& params);

/// Largest dt for which the explicit upwind part keeps u >= 0, times
/// cfl_safety; infinity when there is no drift.
double advective_dt_limit(const Field& u, const Field& v, const Params& params);

struct StepInfo {
  double dt = 0.0;
  SolveStats elliptic;
  std::size_t clamped_cells = 0;
};

class Stepper {
 public:
  Stepper(GridPtr grid, Params params);

  const Params& params() const { return params_; }
  const GridPtr& grid() const { return grid_; }
  const EllipticOperator& elliptic() const { return elliptic_; }

  /// Solves for v at t = 0.
  StateSnapshot initial_state(const Field& u0);

  /// Advances by dt = min(dt_max, CFL limit, dt_cap). Throws Invariant on a
  /// positivity violation and BlowUp when max u exceeds the ceiling.
  StateSnapshot advance(const StateSnapshot& s, double dt_cap = std::numeric_limits<double>::infinity());

  const StepInfo& last_step() const { return last_; }

 private:
  GridPtr grid_;
  Params params_;
  EllipticOperator elliptic_;
  std::optional<EllipticOperator> diffusion_;
  StepInfo last_;
};

/// Single step with a freshly assembled stepper.
StateSnapshot advance(const StateSnapshot& s, const Params& params);

enum class BlowupState { Stable, Growing, Ceiling };

const char* to_string(BlowupState s);

/// Classifies a window of (t, max u) samples: Ceiling if any value reached
/// `ceiling`, Growing if the log-slope across the window exceeds
/// `slope_threshold`, else Stable.
BlowupState detect_blowup(std::span<const double> times, std::span<const double> max_u, double ceiling,
                          double slope_threshold);

}  // namespace kslog
