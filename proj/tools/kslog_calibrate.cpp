// Reruns the tolerance calibration suite and prints the constants to freeze
// in config/tolerances.conf.

#include <cstdio>

#include "kslog/calibration.hpp"

int main() {
  const auto res = kslog::run_calibration_suite();
  std::printf("%-22s %6s %16s %16s\n", "case", "cells", "identity ratio", "weak ratio");
  for (const auto& c : res.cases)
    std::printf("%-22s %6zu %16.6e %16.6e\n", c.name.c_str(), c.cells, c.identity_ratio, c.weak_ratio);
  std::printf("\n# safety factor %.0f over the suite maxima\n", kslog::kCalibrationSafety);
  std::printf("c_identity = %.2g\n", kslog::round_up_2sig(kslog::kCalibrationSafety * res.max_identity_ratio));
  std::printf("c_weak = %.2g\n", kslog::round_up_2sig(kslog::kCalibrationSafety * res.max_weak_ratio));
}
