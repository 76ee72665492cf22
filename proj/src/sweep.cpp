#include "kslog/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "json.hpp"
#include "kslog/error.hpp"

namespace kslog {

const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Completed:
      return "completed";
    case RunStatus::BlowUp:
      return "blowup";
    case RunStatus::Failed:
      return "failed";
  }
  return "?";
}

RunResult run_single(const RunSpec& spec) {
  KSLOG_REQUIRE(spec.sample_dt > 0.0, ErrorCode::InvalidArgument, "sample_dt must be positive");
  const Params& params = spec.params;
  const double T = params.T;
  RunResult res;
  res.ledger = FunctionalLedger(params.p, spec.r, params.eps);

  Stepper stepper(spec.grid, params);
  StateSnapshot s;
  try {
    s = stepper.initial_state(spec.u0);
  } catch (const Error& e) {
    res.status = RunStatus::Failed;
    res.message = e.what();
    res.error = e.code();
    return res;
  }
  const double mass0 = integrate(s.u);
  res.floor0 = min_v(s.v);
  res.runwide_min_v = res.floor0;
  res.runwide_min_u = s.u.min();
  res.peak_max_u = s.u.max();
  res.max_elliptic_iterations = stepper.last_step().elliptic.iterations;
  auto track = [&](const StateSnapshot& x) {
    const double mu = integrate(x.u), mv = integrate(x.v);
    res.max_mass_drift = std::max(res.max_mass_drift, std::abs(mu - mass0) / mass0);
    res.max_mass_gap = std::max(res.max_mass_gap, std::abs(mv - mu) / mu);
    res.runwide_min_v = std::min(res.runwide_min_v, x.v.min());
    res.runwide_min_u = std::min(res.runwide_min_u, x.u.min());
    res.peak_max_u = std::max(res.peak_max_u, x.u.max());
  };
  track(s);
  if (spec.keep_trajectory) res.trajectory.push_back(s);

  const std::size_t n_samples = static_cast<std::size_t>(std::ceil(T / spec.sample_dt - 1e-9));
  auto sample_time = [&](std::size_t k) { return k >= n_samples ? T : static_cast<double>(k) * spec.sample_dt; };
  std::size_t next_sample = 1;
  res.status = RunStatus::Completed;

  while (next_sample <= n_samples) {
    const double target = sample_time(next_sample);
    const double remaining = target - s.t;
    const double limit = std::min(params.dt_max, advective_dt_limit(s.u, s.v, params));
    const double pieces = std::max(1.0, std::ceil(remaining / limit * (1.0 - 1e-12)));
    StateSnapshot next;
    try {
      next = stepper.advance(s, remaining / pieces);
    } catch (const Error& e) {
      res.status = e.code() == ErrorCode::BlowUp ? RunStatus::BlowUp : RunStatus::Failed;
      res.message = e.what();
      res.error = e.code();
      break;
    }
    if (pieces == 1.0) next.t = target;
    res.ledger.record(s, next.t - s.t);
    ++res.steps;
    res.clamped_cells += stepper.last_step().clamped_cells;
    res.max_elliptic_iterations = std::max(res.max_elliptic_iterations, stepper.last_step().elliptic.iterations);
    track(next);
    s = std::move(next);
    if (s.t == target) {
      if (spec.keep_trajectory) res.trajectory.push_back(s);
      ++next_sample;
    }
  }
  res.ledger.record(s, 0.0);

  const auto& rows = res.ledger.rows();
  if (res.status == RunStatus::BlowUp) {
    res.blowup = BlowupState::Ceiling;
  } else if (rows.size() >= 2) {
    const std::size_t w = spec.growth_window == 0 ? rows.size() : std::min(spec.growth_window, rows.size());
    std::vector<double> ts, ms;
    for (std::size_t k = rows.size() - w; k < rows.size(); ++k) {
      ts.push_back(rows[k].t);
      ms.push_back(rows[k].max_u);
    }
    res.blowup = detect_blowup(ts, ms, params.blowup_ceiling, spec.growth_threshold);
  }
  return res;
}

void SweepPlan::validate() const {
  KSLOG_REQUIRE(!eps_list.empty(), ErrorCode::Config, "sweep needs at least one eps");
  for (std::size_t j = 0; j < eps_list.size(); ++j) {
    KSLOG_REQUIRE(eps_list[j] > 0.0 && eps_list[j] < 1.0, ErrorCode::Config, "sweep eps values must lie in (0,1)");
    if (j > 0) KSLOG_REQUIRE(eps_list[j] < eps_list[j - 1], ErrorCode::Config, "sweep eps list must be strictly decreasing");
  }
  KSLOG_REQUIRE(shared.grid != nullptr, ErrorCode::Config, "sweep needs a grid");
}

double l1_spacetime_distance(const Trajectory& a, const Trajectory& b) {
  KSLOG_REQUIRE(a.size() == b.size(), ErrorCode::InvalidArgument, "trajectories have different sample counts");
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    KSLOG_REQUIRE(a[k].t == b[k].t, ErrorCode::InvalidArgument, "trajectories have mismatched sample times");
    require_same_grid(a[k].u, b[k].u);
    if (k + 1 == a.size()) break;
    const double dt = a[k + 1].t - a[k].t;
    const auto vol = a[k].u.grid()->volumes();
    double s = 0.0;
    for (std::size_t i = 0; i < vol.size(); ++i) s += vol[i] * std::abs(a[k].u[i] - b[k].u[i]);
    sum += dt * s;
  }
  return sum;
}

double equi_integrability_stat(const Trajectory& traj, double r) {
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < traj.size(); ++k) sum += (traj[k + 1].t - traj[k].t) * power_integral(traj[k].u, r);
  return sum;
}

double time_variation_monitor(const Trajectory& traj, double p) {
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
    const auto vol = traj[k].u.grid()->volumes();
    for (std::size_t i = 0; i < vol.size(); ++i)
      sum += vol[i] * std::abs(std::pow(traj[k + 1].u[i] + 1.0, 0.5 * p) - std::pow(traj[k].u[i] + 1.0, 0.5 * p));
  }
  return sum;
}

SweepReport run_sweep(const SweepPlan& plan, int workers, std::vector<RunResult>* results) {
  plan.validate();
  const std::size_t n = plan.eps_list.size();
  std::vector<RunResult> runs(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j = next++; j < n; j = next++) {
      RunSpec spec = plan.shared;
      spec.params.eps = plan.eps_list[j];
      spec.keep_trajectory = true;
      try {
        runs[j] = run_single(spec);
      } catch (const std::exception& e) {
        runs[j].status = RunStatus::Failed;
        runs[j].message = e.what();
        if (const auto* ke = dynamic_cast<const Error*>(&e)) runs[j].error = ke->code();
      }
    }
  };
  const int nthreads = std::clamp(workers, 1, static_cast<int>(n));
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < nthreads; ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  SweepReport rep;
  rep.scenario = plan.scenario;
  rep.measure = plan.shared.grid->measure();
  rep.p = plan.shared.params.p;
  rep.r = plan.shared.r;
  for (std::size_t j = 0; j < n; ++j) {
    const RunResult& r = runs[j];
    SweepEntry e;
    e.eps = plan.eps_list[j];
    e.status = r.status;
    e.message = r.message;
    e.blowup = r.blowup;
    if (!r.ledger.rows().empty()) {
      const LedgerRow& last = r.ledger.rows().back();
      e.A[0] = last.A1;
      e.A[1] = last.A2;
      e.A[2] = last.A3;
      e.A[3] = last.A4;
      e.A[4] = last.A5;
      e.max_lemma35 = 0.0;
      e.min_entropy = last.entropy_low;
      for (const LedgerRow& row : r.ledger.rows()) {
        e.max_lemma35 = std::max(e.max_lemma35, row.lemma35);
        e.min_entropy = std::min(e.min_entropy, row.entropy_low);
      }
    }
    const double rr = std::isnan(plan.shared.r) ? 1.0 + 0.5 * plan.shared.params.p : plan.shared.r;
    e.equi_integrability = equi_integrability_stat(r.trajectory, rr);
    e.time_variation = time_variation_monitor(r.trajectory, plan.shared.params.p);
    e.floor0 = r.floor0;
    e.runwide_min_v = r.runwide_min_v;
    e.runwide_min_u = r.runwide_min_u;
    e.peak_max_u = r.peak_max_u;
    e.max_mass_drift = r.max_mass_drift;
    e.max_mass_gap = r.max_mass_gap;
    rep.entries.push_back(e);
  }
  for (std::size_t j = 0; j + 1 < n; ++j) {
    const bool ok = runs[j].status == RunStatus::Completed && runs[j + 1].status == RunStatus::Completed;
    rep.pairwise_l1.push_back(ok ? l1_spacetime_distance(runs[j].trajectory, runs[j + 1].trajectory)
                                 : std::numeric_limits<double>::quiet_NaN());
  }
  if (results) *results = std::move(runs);
  return rep;
}

std::string SweepReport::to_json() const {
  using nlohmann::ordered_json;
  // JSON has no NaN; failed entries are written as null.
  auto num = [](double x) { return std::isfinite(x) ? ordered_json(x) : ordered_json(nullptr); };
  ordered_json j;
  j["schema"] = "kslog.sweep_report/1";
  j["scenario"] = scenario;
  j["measure"] = measure;
  j["p"] = p;
  j["r"] = num(r);
  auto& runs = j["runs"] = ordered_json::array();
  for (const auto& e : entries) {
    ordered_json je;
    je["eps"] = e.eps;
    je["status"] = to_string(e.status);
    je["message"] = e.message;
    je["blowup"] = to_string(e.blowup);
    je["A1"] = num(e.A[0]);
    je["A2"] = num(e.A[1]);
    je["A3"] = num(e.A[2]);
    je["A4"] = num(e.A[3]);
    je["A5"] = num(e.A[4]);
    je["equi_integrability"] = num(e.equi_integrability);
    je["time_variation"] = num(e.time_variation);
    je["floor0"] = num(e.floor0);
    je["runwide_min_v"] = num(e.runwide_min_v);
    je["runwide_min_u"] = num(e.runwide_min_u);
    je["peak_max_u"] = num(e.peak_max_u);
    je["max_lemma35"] = num(e.max_lemma35);
    je["min_entropy"] = num(e.min_entropy);
    je["max_mass_drift"] = num(e.max_mass_drift);
    je["max_mass_gap"] = num(e.max_mass_gap);
    runs.push_back(je);
  }
  auto& d = j["pairwise_l1"] = ordered_json::array();
  for (double x : pairwise_l1) d.push_back(num(x));
  return j.dump(2);
}

}  // namespace kslog
