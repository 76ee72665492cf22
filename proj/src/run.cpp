#include "kslog/run.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "json.hpp"
#include "kslog/functionals.hpp"
#include "kslog/io.hpp"
#include "kslog/weak_residual.hpp"

namespace kslog {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::Config:
      return kExitConfig;
    case ErrorCode::Invariant:
    case ErrorCode::NonConvergence:
      return kExitInvariant;
    case ErrorCode::BlowUp:
      return kExitBlowUp;
    case ErrorCode::Io:
      return kExitFailure;
  }
  return kExitFailure;
}

fs::path default_out_dir() {
  const char* env = std::getenv("KSLOG_OUT_DIR");
  return env && *env ? fs::path(env) : fs::current_path();
}

std::string eps_dirname(double eps) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, eps);
  (void)ec;
  return std::string(buf, ptr);
}

std::vector<std::string> run_violations(const RunResult& r, double measure) {
  std::vector<std::string> out;
  char msg[160];
  if (r.max_mass_drift > 1e-10) {
    std::snprintf(msg, sizeof msg, "relative mass drift %.3e exceeds 1e-10", r.max_mass_drift);
    out.emplace_back(msg);
  }
  if (r.max_mass_gap > 1e-8) {
    std::snprintf(msg, sizeof msg, "relative |int v - int u| %.3e exceeds 1e-8", r.max_mass_gap);
    out.emplace_back(msg);
  }
  if (r.runwide_min_u < 0.0) {
    std::snprintf(msg, sizeof msg, "min u = %.3e is negative", r.runwide_min_u);
    out.emplace_back(msg);
  }
  if (!(r.runwide_min_v > 0.0)) {
    std::snprintf(msg, sizeof msg, "min v = %.3e is not positive", r.runwide_min_v);
    out.emplace_back(msg);
  }
  for (const LedgerRow& row : r.ledger.rows()) {
    if (!(row.lemma35 <= 1.05 * measure)) {
      std::snprintf(msg, sizeof msg, "int |grad v|^2/v^2 = %.6g exceeds 1.05 |Omega| at t = %.6g", row.lemma35, row.t);
      out.emplace_back(msg);
      break;
    }
  }
  return out;
}

namespace {

ordered_json result_json(const RunResult& r) {
  auto num = [](double x) { return std::isfinite(x) ? ordered_json(x) : ordered_json(nullptr); };
  ordered_json j;
  j["status"] = to_string(r.status);
  j["message"] = r.message;
  j["blowup"] = to_string(r.blowup);
  j["steps"] = r.steps;
  j["clamped_cells"] = r.clamped_cells;
  j["floored_cells"] = r.ledger.floored_cells();
  j["max_elliptic_iterations"] = r.max_elliptic_iterations;
  j["floor0"] = num(r.floor0);
  j["runwide_min_v"] = num(r.runwide_min_v);
  j["runwide_min_u"] = num(r.runwide_min_u);
  j["peak_max_u"] = num(r.peak_max_u);
  j["max_mass_drift"] = num(r.max_mass_drift);
  j["max_mass_gap"] = num(r.max_mass_gap);
  return j;
}

// The config that reproduces exactly this run: a single-eps simulate.
RunConfig single_run_config(const RunConfig& cfg, double eps) {
  RunConfig c = cfg;
  c.mode = Mode::Simulate;
  c.eps_list = {eps};
  c.run_dir.clear();
  return c;
}

fs::path write_run_artifacts(const fs::path& dir, const RunConfig& cfg, double eps, const RunResult& r,
                             const std::vector<std::string>& violations) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + dir.string() + ": " + ec.message());
  r.ledger.write_csv(dir / "ledger.csv");
  std::string snaps;
  for (const auto& s : r.trajectory) encode_snapshot(s, snaps);
  write_file_atomic(dir / "snaps.bin", snaps);

  const RunConfig c = single_run_config(cfg, eps);
  ordered_json meta;
  meta["schema"] = "kslog.meta/1";
  meta["version"] = kVersion;
  meta["exploratory"] = c.exploratory();
  meta["config"] = ordered_json::parse(c.to_json());
  meta["result"] = result_json(r);
  meta["violations"] = violations;
  write_file_atomic(dir / "meta.json", meta.dump(2) + "\n");
  return dir;
}

struct Verdict {
  int code = kExitOk;
  bool flagged = false;
};

// Folds one run into the verdict: CI fails fast, exploratory only flags.
void judge(Verdict& v, const RunConfig& cfg, const RunResult& r, const std::vector<std::string>& violations) {
  int code = kExitOk;
  if (r.status == RunStatus::BlowUp)
    code = kExitBlowUp;
  else if (r.status == RunStatus::Failed)
    code = r.error ? exit_code_for(*r.error) : kExitFailure;
  else if (!violations.empty())
    code = kExitInvariant;
  if (code == kExitOk) return;
  if (cfg.exploratory()) {
    v.flagged = true;
  } else if (v.code == kExitOk) {
    v.code = code;
  }
}

void log_run(std::ostream& log, double eps, const RunResult& r, const std::vector<std::string>& violations) {
  char line[256];
  std::snprintf(line, sizeof line,
                "eps=%-12s %-9s blowup=%-7s steps=%zu max_u=%.6g min_v=%.6g mass_drift=%.2e", eps_dirname(eps).c_str(),
                to_string(r.status), to_string(r.blowup), r.steps, r.peak_max_u, r.runwide_min_v, r.max_mass_drift);
  log << line << "\n";
  if (!r.message.empty()) log << "  " << r.message << "\n";
  for (const auto& v : violations) log << "  invariant: " << v << "\n";
}

RunOutcome run_simulate(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
  const GridPtr grid = cfg.make_grid();
  Verdict verdict;
  RunOutcome o;
  for (double eps : cfg.eps_list) {
    const RunResult r = run_single(cfg.make_spec(eps, grid));
    const auto violations = run_violations(r, grid->measure());
    o.artifacts = write_run_artifacts(out / "runs" / cfg.scenario / eps_dirname(eps), cfg, eps, r, violations);
    log_run(log, eps, r, violations);
    judge(verdict, cfg, r, violations);
  }
  o.exit_code = verdict.code;
  o.flagged = verdict.flagged;
  return o;
}

RunOutcome run_sweep_mode(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
  const GridPtr grid = cfg.make_grid();
  SweepPlan plan;
  plan.scenario = cfg.scenario;
  plan.eps_list = cfg.eps_list;
  plan.shared = cfg.make_spec(cfg.eps_list.front(), grid);
  std::vector<RunResult> results;
  const SweepReport rep = run_sweep(plan, cfg.workers, &results);

  Verdict verdict;
  const fs::path base = out / "runs" / cfg.scenario;
  for (std::size_t j = 0; j < results.size(); ++j) {
    const auto violations = run_violations(results[j], grid->measure());
    write_run_artifacts(base / eps_dirname(cfg.eps_list[j]), cfg, cfg.eps_list[j], results[j], violations);
    log_run(log, cfg.eps_list[j], results[j], violations);
    judge(verdict, cfg, results[j], violations);
  }
  write_file_atomic(base / "sweep_report.json", rep.to_json() + "\n");
  log << "pairwise L1 distances:";
  for (double d : rep.pairwise_l1) log << " " << d;
  log << "\n";
  RunOutcome o;
  o.exit_code = verdict.code;
  o.flagged = verdict.flagged;
  o.artifacts = base;
  return o;
}

RunOutcome run_check(const RunConfig& cfg, std::ostream& log) {
  const fs::path dir = cfg.run_dir;
  KSLOG_REQUIRE(fs::exists(dir / "meta.json"), ErrorCode::Io, "no meta.json in run directory " + dir.string());
  const RunConfig stored = load_config(dir / "meta.json");
  stored.validate();
  const GridPtr grid = stored.make_grid();
  const Trajectory traj = decode_snapshots(read_file(dir / "snaps.bin"), grid);
  const auto rows = FunctionalLedger::read_csv(dir / "ledger.csv");
  const Params params = stored.make_params(stored.eps_list.front());
  const TestBank bank = build_test_bank(*grid, params.T, static_cast<std::size_t>(cfg.bank_count));
  const ResidualReport rep = evaluate_residuals(traj, rows, params, bank, cfg.tolerances());
  write_file_atomic(dir / "residual_report.json", rep.to_json() + "\n");
  log << rep.summary_table();
  RunOutcome o;
  o.artifacts = dir;
  if (!rep.all_pass()) {
    if (stored.exploratory() || cfg.exploratory())
      o.flagged = true;
    else
      o.exit_code = kExitInvariant;
  }
  return o;
}

RunOutcome run_compare_ode(const RunConfig& cfg, std::ostream& log) {
  const double a = cfg.ode_a, b = cfg.ode_b;
  std::vector<double> times;
  for (double t = 1e-3; t < 5.0; t *= 1.5) times.push_back(t);
  times.push_back(5.0);

  bool ok = true;
  char line[160];
  std::snprintf(line, sizeof line, "coth comparison, a=%g b=%g\n%-14s %-10s %-16s %-16s %s\n", a, b, "t", "y(0)",
                "y(t)", "bound", "y/bound");
  log << line;
  // Near-singular data started at t = 0 must stay below the bound.
  for (double y0 : {1e3, 1e6, 1e9}) {
    std::vector<double> ts = {0.0};
    ts.insert(ts.end(), times.begin(), times.end());
    const auto traj = integrate_riccati(a, b, 0.0, y0, ts);
    ok = ok && ode_comparison_check(a, b, traj);
    for (std::size_t k = 1; k < traj.size(); k += 4) {
      const double bound = coth_bound(a, b, traj[k].t);
      std::snprintf(line, sizeof line, "%-14.6g %-10.0e %-16.10g %-16.10g %.9f\n", traj[k].t, y0, traj[k].y, bound,
                    traj[k].y / bound);
      log << line;
    }
  }
  // The bound itself solves the ODE with equality.
  const double t0 = times.front();
  const auto ext = integrate_riccati(a, b, t0, coth_bound(a, b, t0), times);
  double worst = 0.0;
  for (const auto& s : ext) worst = std::max(worst, std::abs(s.y / coth_bound(a, b, s.t) - 1.0));
  ok = ok && ode_comparison_check(a, b, ext);
  std::snprintf(line, sizeof line, "extremal solution: max |y/bound - 1| = %.3e\n", worst);
  log << line;
  const bool attained = worst <= 1e-6;
  log << "verdict: " << (ok && attained ? "PASS" : "FAIL") << "\n";
  RunOutcome o;
  if (!(ok && attained)) o.exit_code = kExitInvariant;
  return o;
}

}  // namespace

RunOutcome run(const RunConfig& cfg, const fs::path& out_dir, std::ostream& log) {
  cfg.validate();
  const fs::path out = out_dir.empty() ? default_out_dir() : out_dir;
  if (cfg.exploratory()) log << "profile: exploratory (invariant violations are reported, not fatal)\n";
  switch (cfg.mode) {
    case Mode::Simulate:
      return run_simulate(cfg, out, log);
    case Mode::Sweep:
      return run_sweep_mode(cfg, out, log);
    case Mode::Check:
      return run_check(cfg, log);
    case Mode::CompareOde:
      return run_compare_ode(cfg, log);
  }
  return {};
}

}  // namespace kslog
