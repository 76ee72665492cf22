#pragma once

// Discrete residuals of the generalized-solution conditions on stored
// trajectories: the u^p supersolution inequality, the weak identity for v,
// the mass inequality, and the eps-level testing inequality with Phi_eps.
// Test functions are analytic (cosine modes times smooth time profiles), so
// their derivatives and Neumann traces are exact.

#include <array>
#include <span>
#include <string>
#include <vector>

#include "kslog/functionals.hpp"
#include "kslog/geometry.hpp"
#include "kslog/stepper.hpp"

namespace kslog {

enum class TimeKind {
  Constant,  // 1 on [0, T]; only meaningful for the eps-level inequality
  Cutoff,    // 1 on [0, a], smooth C-infinity descent to 0 at b
  Bump,      // C-infinity bump supported in (a, b), peak value 1
};

struct TimePart {
  TimeKind kind = TimeKind::Constant;
  double a = 0.0;
  double b = 0.0;

  double value(double t) const;
  double derivative(double t) const;
  /// First time after which the profile vanishes identically (infinity for
  /// Constant).
  double support_end() const;
  double support_start() const;
};

/// offset + amplitude * cos(kx pi (x - x0)/Lx) * cos(ky pi (y - y0)/Ly) on
/// intervals and rectangles, offset + amplitude * cos(kx pi r / R) on balls.
struct SpatialPart {
  double offset = 1.0;
  double amplitude = 0.0;
  int kx = 0;
  int ky = 0;

  double value(const Domain& d, const Point& x) const;
  std::array<double, 2> gradient(const Domain& d, const Point& x) const;
  double laplacian(const Domain& d, const Point& x) const;
};

struct TestFunction {
  std::string label;
  SpatialPart space;
  TimePart time;
  bool nonneg = true;

  double value(const Domain& d, const Point& x, double t) const { return space.value(d, x) * time.value(t); }
  double time_derivative(const Domain& d, const Point& x, double t) const {
    return space.value(d, x) * time.derivative(t);
  }
  /// Derivative along the face normal at the face midpoint.
  double normal_derivative(const Domain& d, const Face& f, double t) const {
    return space.gradient(d, f.midpoint)[f.axis] * time.value(t);
  }
  double laplacian(const Domain& d, const Point& x, double t) const { return space.laplacian(d, x) * time.value(t); }
};

struct TestBank {
  std::vector<TestFunction> phi;  // nonnegative members
  std::vector<TestFunction> psi;  // phi plus sign-changing members
};

/// Deterministic bank of `count` >= 3 nonnegative test functions on [0, T):
/// a spatially constant member, a low cosine mode with positive offset and a
/// sharply time-localized bump come first. The psi bank appends two
/// sign-changing members.
TestBank build_test_bank(const Grid& grid, double T, std::size_t count);

/// phi = 1 on [0, T], used for the accumulator cross-check.
TestFunction unit_test_function();

using Trajectory = std::vector<StateSnapshot>;

struct ResidualEntry {
  std::string check;  // "supersolution", "weak_v_identity", "eps_testing"
  std::string label;
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
  double tol = 0.0;
  double h = 0.0;
  double dt = 0.0;
  bool pass = false;
  /// Named contributions, in the order they are assembled.
  std::vector<std::pair<std::string, double>> terms;

  double term(const std::string& name) const;
};

/// Frozen output of the calibration suite (kslog_calibrate); mirrored in
/// config/tolerances.conf.
inline constexpr double kCalibratedCIdentity = 0.028;
inline constexpr double kCalibratedCWeak = 0.043;

struct ResidualTolerances {
  /// weak_v_identity passes iff residual <= c_identity * h^2 * scale + solver floor.
  double c_identity = kCalibratedCIdentity;
  /// inequalities pass iff residual >= -c_weak * (h + dt) * scale.
  double c_weak = kCalibratedCWeak;
  double solver_tol = 1e-10;
};

/// |(int int grad v . grad psi + int int v psi) - int int u psi|.
ResidualEntry check_weak_v_identity(const Trajectory& traj, const TestFunction& psi, const ResidualTolerances& tol);

/// lhs - rhs of the u^p supersolution inequality; passes iff >= -tol_weak.
ResidualEntry check_supersolution_ineq(const Trajectory& traj, const TestFunction& phi, const Params& params,
                                       const ResidualTolerances& tol);

/// lhs - rhs of the eps-level testing inequality (with Phi_eps terms and the
/// boundary term at the final snapshot); passes iff >= -tol_weak.
ResidualEntry check_eps_testing_ineq(const Trajectory& traj, const TestFunction& phi, const Params& params,
                                     const ResidualTolerances& tol);

/// True iff mass_u(t) <= mass_u(0) (1 + 1e-10) for every row.
bool check_mass_ineq(std::span<const LedgerRow> rows);

/// min over boundary cells and samples of u^(p/2).
double boundary_trace_min(const Trajectory& traj, double p);

struct ResidualReport {
  double h = 0.0;
  double dt = 0.0;
  Params params;
  std::vector<ResidualEntry> entries;
  bool mass_inequality = true;
  double boundary_trace_min = 0.0;

  bool all_pass() const;
  std::string to_json() const;
  std::string summary_table() const;
};

/// Runs every check over the bank.
ResidualReport evaluate_residuals(const Trajectory& traj, std::span<const LedgerRow> rows, const Params& params,
                                  const TestBank& bank, const ResidualTolerances& tol);

}  // namespace kslog
