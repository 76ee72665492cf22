#pragma once

// Calibration suite for the residual tolerance constants: a steady
// manufactured elliptic pair and chi = 0 heat runs, on which the identity and
// both inequalities hold with equality up to discretization error.

#include <string>
#include <vector>

namespace kslog {

struct CalibrationCase {
  std::string name;
  std::size_t cells = 0;
  /// max over the bank of residual / (h^2 scale) for the v-identity.
  double identity_ratio = 0.0;
  /// max over the bank of -residual / ((h + dt) scale) for the inequalities
  /// (0 when every residual is nonnegative).
  double weak_ratio = 0.0;
};

struct CalibrationResult {
  std::vector<CalibrationCase> cases;
  double max_identity_ratio = 0.0;
  double max_weak_ratio = 0.0;
};

CalibrationResult run_calibration_suite();

/// Frozen constants are this multiple of the suite maxima, rounded up to two
/// significant digits.
inline constexpr double kCalibrationSafety = 4.0;

double round_up_2sig(double x);

}  // namespace kslog
