#pragma once

// Single-run driver and eps-sweep orchestration with the empirical
// compactness statistics (space-time L1 Cauchy differences, u^r
// equi-integrability, time-variation monitor).

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "kslog/error.hpp"
#include "kslog/functionals.hpp"
#include "kslog/stepper.hpp"
#include "kslog/weak_residual.hpp"

namespace kslog {

struct RunSpec {
  GridPtr grid;
  Params params;
  Field u0;
  /// Exponent for the A5 accumulator; NaN disables it.
  double r = std::numeric_limits<double>::quiet_NaN();
  /// Trajectory samples are taken at k * sample_dt (and at T); steps are
  /// shortened to land on them exactly.
  double sample_dt = 1e-2;
  bool keep_trajectory = true;
  /// Log-slope threshold for the Growing classification.
  double growth_threshold = 1.0;
  /// Trailing ledger rows used for the growth classification (0 = all).
  std::size_t growth_window = 0;
};

enum class RunStatus { Completed, BlowUp, Failed };

const char* to_string(RunStatus s);

struct RunResult {
  RunStatus status = RunStatus::Failed;
  std::string message;
  std::optional<ErrorCode> error;  // set when the run stopped on an exception
  FunctionalLedger ledger{0.5, std::numeric_limits<double>::quiet_NaN(), 0.1};
  Trajectory trajectory;
  BlowupState blowup = BlowupState::Stable;

  std::size_t steps = 0;
  std::size_t clamped_cells = 0;
  int max_elliptic_iterations = 0;
  double floor0 = 0.0;          // min v after the first solve
  double runwide_min_v = 0.0;
  double runwide_min_u = 0.0;
  double peak_max_u = 0.0;
  double max_mass_drift = 0.0;  // max |int u(t) - int u0| / int u0
  double max_mass_gap = 0.0;    // max |int v(t) - int u(t)| / int u(t)
};

/// Runs to T (or until failure); partial results are kept on failure.
RunResult run_single(const RunSpec& spec);

struct SweepPlan {
  std::string scenario = "sweep";
  std::vector<double> eps_list;
  RunSpec shared;  // shared.params.eps is overridden per run

  /// eps strictly decreasing in (0,1); nonempty.
  void validate() const;
};

struct SweepEntry {
  double eps = 0.0;
  RunStatus status = RunStatus::Failed;
  std::string message;
  BlowupState blowup = BlowupState::Stable;
  double A[5] = {0, 0, 0, 0, 0};
  double equi_integrability = 0.0;
  double time_variation = 0.0;
  double floor0 = 0.0;
  double runwide_min_v = 0.0;
  double runwide_min_u = 0.0;
  double peak_max_u = 0.0;
  double max_lemma35 = 0.0;
  double min_entropy = 0.0;
  double max_mass_drift = 0.0;
  double max_mass_gap = 0.0;
};

struct SweepReport {
  std::string scenario;
  double measure = 0.0;
  double p = 0.0;
  double r = 0.0;
  std::vector<SweepEntry> entries;
  /// d_j = ||u_{eps_j} - u_{eps_{j+1}}||_{L1(Omega x (0,T))}; NaN when either
  /// run failed.
  std::vector<double> pairwise_l1;

  std::string to_json() const;
};

/// Runs every eps with up to `workers` threads. `results`, when given,
/// receives the full per-run results in eps_list order.
SweepReport run_sweep(const SweepPlan& plan, int workers, std::vector<RunResult>* results = nullptr);

/// sum_k dt_k sum_i vol_i |uA - uB| over the shared samples (left endpoint).
double l1_spacetime_distance(const Trajectory& a, const Trajectory& b);

/// Space-time integral of u^r with the trajectory's left-endpoint weights.
double equi_integrability_stat(const Trajectory& traj, double r);

/// sum_k || (u+1)^{p/2}(t_{k+1}) - (u+1)^{p/2}(t_k) ||_{L1}.
double time_variation_monitor(const Trajectory& traj, double p);

}  // namespace kslog
