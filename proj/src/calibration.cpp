#include "kslog/calibration.hpp"

#include <algorithm>
#include <cmath>

#include "kslog/elliptic.hpp"
#include "kslog/sweep.hpp"
#include "kslog/weak_residual.hpp"

namespace kslog {

namespace {

constexpr double kPi = 3.141592653589793;

// Tolerances whose constants are 1, so that tol / scale-factor is recoverable.
ResidualTolerances unit_tolerances() {
  ResidualTolerances t;
  t.c_identity = 1.0;
  t.c_weak = 1.0;
  t.solver_tol = 0.0;
  return t;
}

void fold_identity(CalibrationCase& c, const ResidualEntry& e) {
  // With c_identity = 1 and no solver floor, tol = h^2 scale.
  if (e.tol > 0.0) c.identity_ratio = std::max(c.identity_ratio, e.residual / e.tol);
}

void fold_weak(CalibrationCase& c, const ResidualEntry& e) {
  if (e.tol > 0.0) c.weak_ratio = std::max(c.weak_ratio, -e.residual / e.tol);
}

CalibrationCase manufactured_case(std::size_t cells) {
  const auto grid = Grid::build(Domain::interval(0.0, kPi), cells);
  const Field u = sample(grid, [](const Point& x) { return 2.0 + 2.0 * std::cos(x[0]); });
  const Field v = solve_v(EllipticOperator::assemble(grid), u, 1e-12);
  Trajectory traj;
  for (int k = 0; k <= 100; ++k) traj.push_back({0.01 * k, u, v, k});
  CalibrationCase c{"manufactured elliptic", cells};
  const TestBank bank = build_test_bank(*grid, 1.0, 6);
  for (const auto& psi : bank.psi) fold_identity(c, check_weak_v_identity(traj, psi, unit_tolerances()));
  return c;
}

CalibrationCase heat_case(std::size_t cells) {
  const auto grid = Grid::build(Domain::interval(0.0, kPi), cells);
  RunSpec spec;
  spec.grid = grid;
  spec.params.chi = 0.0;
  spec.params.p = 0.5;
  spec.params.eps = 1.0 / 512.0;
  spec.params.T = 1.0;
  spec.params.dt_max = 1e-3;
  spec.sample_dt = 1e-2;
  spec.u0 = sample(grid, [](const Point& x) { return 1.0 + 0.5 * std::cos(x[0]); });
  const RunResult r = run_single(spec);
  CalibrationCase c{"heat chi=0", cells};
  const TestBank bank = build_test_bank(*grid, 1.0, 6);
  const auto tol = unit_tolerances();
  for (const auto& psi : bank.psi) fold_identity(c, check_weak_v_identity(r.trajectory, psi, tol));
  for (const auto& phi : bank.phi) {
    fold_weak(c, check_supersolution_ineq(r.trajectory, phi, spec.params, tol));
    fold_weak(c, check_eps_testing_ineq(r.trajectory, phi, spec.params, tol));
  }
  return c;
}

}  // namespace

double round_up_2sig(double x) {
  if (!(x > 0.0)) return 0.0;
  // Divide by a positive power of ten so that e.g. 43 / 1000 is the double 0.043.
  const double k = std::floor(std::log10(x)) - 1.0;
  if (k < 0.0) {
    const double s = std::pow(10.0, -k);
    return std::ceil(x * s * (1.0 - 1e-12)) / s;
  }
  const double s = std::pow(10.0, k);
  return std::ceil(x / s * (1.0 - 1e-12)) * s;
}

CalibrationResult run_calibration_suite() {
  CalibrationResult res;
  for (std::size_t n : {32, 64, 128, 256}) res.cases.push_back(manufactured_case(n));
  for (std::size_t n : {32, 64, 128, 256}) res.cases.push_back(heat_case(n));
  for (const auto& c : res.cases) {
    res.max_identity_ratio = std::max(res.max_identity_ratio, c.identity_ratio);
    res.max_weak_ratio = std::max(res.max_weak_ratio, c.weak_ratio);
  }
  return res;
}

}  // namespace kslog
