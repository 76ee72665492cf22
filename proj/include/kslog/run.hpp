#pragma once

// Mode dispatch for a validated RunConfig: simulate, sweep, check and
// compare-ode, with artifacts under <out>/runs/<scenario>/<eps>/.

#include <filesystem>
#include <ostream>
#include <string>

#include "kslog/config.hpp"
#include "kslog/error.hpp"
#include "kslog/sweep.hpp"

namespace kslog {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,  // I/O and unexpected errors
  kExitConfig = 2,
  kExitInvariant = 3,
  kExitBlowUp = 4,
};

int exit_code_for(ErrorCode code);

struct RunOutcome {
  int exit_code = kExitOk;
  /// Set when an exploratory run hit a condition that would fail in CI.
  bool flagged = false;
  std::filesystem::path artifacts;
};

/// $KSLOG_OUT_DIR when set, else the working directory.
std::filesystem::path default_out_dir();

/// Directory name for one eps value (shortest round-trip decimal).
std::string eps_dirname(double eps);

/// Invariant violations of a finished run against the fixed CI thresholds
/// (mass drift 1e-10, elliptic mass gap 1e-8, int |grad v|^2/v^2 <=
/// 1.05 |Omega|, u >= 0, v > 0); empty when clean.
std::vector<std::string> run_violations(const RunResult& r, double measure);

/// Validates `cfg` and executes its mode, logging a human-readable summary.
/// Throws kslog::Error for configuration and I/O problems.
RunOutcome run(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log);

}  // namespace kslog
