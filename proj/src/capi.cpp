#include "kslog/kslog.h"

#include <cmath>
#include <iostream>
#include <string>

#include "kslog/config.hpp"
#include "kslog/functionals.hpp"
#include "kslog/run.hpp"

struct kslog_config {
  kslog::RunConfig cfg;
  std::string json;
};

struct kslog_sim {
  explicit kslog_sim(kslog::Stepper st) : stepper(std::move(st)) {}
  kslog::Stepper stepper;
  kslog::StateSnapshot state;
};

namespace {

thread_local std::string g_last_error;

kslog_status fail(kslog_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

kslog_status status_of(kslog::ErrorCode c) { return static_cast<kslog_status>(static_cast<int>(c)); }

template <class Fn>
kslog_status guarded(Fn&& fn) {
  try {
    fn();
    return KSLOG_OK;
  } catch (const kslog::Error& e) {
    return fail(status_of(e.code()), e.what());
  } catch (const std::exception& e) {
    return fail(KSLOG_E_INTERNAL, e.what());
  } catch (...) {
    return fail(KSLOG_E_INTERNAL, "unknown error");
  }
}

kslog_status null_arg(const char* what) { return fail(KSLOG_E_INVALID_ARGUMENT, std::string(what) + " is null"); }

}  // namespace

extern "C" {

const char* kslog_version(void) { return kslog::kVersion; }

const char* kslog_last_error(void) { return g_last_error.c_str(); }

kslog_status kslog_config_new(kslog_config** out) {
  if (!out) return null_arg("out");
  return guarded([&] { *out = new kslog_config(); });
}

kslog_status kslog_config_load(const char* path, kslog_config** out) {
  if (!path) return null_arg("path");
  if (!out) return null_arg("out");
  return guarded([&] {
    auto* c = new kslog_config();
    try {
      c->cfg = kslog::load_config(path);
    } catch (...) {
      delete c;
      throw;
    }
    *out = c;
  });
}

kslog_status kslog_config_set(kslog_config* cfg, const char* key, const char* value) {
  if (!cfg) return null_arg("cfg");
  if (!key || !value) return null_arg("key/value");
  return guarded([&] { cfg->cfg.set(key, value); });
}

kslog_status kslog_config_validate(const kslog_config* cfg) {
  if (!cfg) return null_arg("cfg");
  return guarded([&] { cfg->cfg.validate(); });
}

kslog_status kslog_config_json(kslog_config* cfg, const char** json) {
  if (!cfg) return null_arg("cfg");
  if (!json) return null_arg("json");
  return guarded([&] {
    cfg->json = cfg->cfg.to_json();
    *json = cfg->json.c_str();
  });
}

void kslog_config_free(kslog_config* cfg) { delete cfg; }

kslog_status kslog_run(const kslog_config* cfg, const char* out_dir, int* exit_code, int* flagged) {
  if (!cfg) return null_arg("cfg");
  int code = kslog::kExitOk;
  int flag = 0;
  const kslog_status s = guarded([&] {
    try {
      const auto o = kslog::run(cfg->cfg, out_dir ? out_dir : "", std::cout);
      code = o.exit_code;
      flag = o.flagged ? 1 : 0;
    } catch (const kslog::Error& e) {
      code = kslog::exit_code_for(e.code());
      throw;
    } catch (...) {
      code = kslog::kExitFailure;
      throw;
    }
  });
  std::cout.flush();
  if (exit_code) *exit_code = code;
  if (flagged) *flagged = flag;
  return s;
}

kslog_status kslog_sim_create(const kslog_config* cfg, double eps, kslog_sim** out) {
  if (!cfg) return null_arg("cfg");
  if (!out) return null_arg("out");
  return guarded([&] {
    kslog::RunConfig c = cfg->cfg;
    c.eps_list = {eps};
    c.validate();
    const auto grid = c.make_grid();
    auto sim = std::make_unique<kslog_sim>(kslog::Stepper(grid, c.make_params(eps)));
    sim->state = sim->stepper.initial_state(c.make_u0(grid));
    *out = sim.release();
  });
}

kslog_status kslog_sim_step(kslog_sim* sim, double dt_cap) {
  if (!sim) return null_arg("sim");
  return guarded([&] {
    const double cap = dt_cap > 0.0 ? dt_cap : std::numeric_limits<double>::infinity();
    sim->state = sim->stepper.advance(sim->state, cap);
  });
}

kslog_status kslog_sim_state(const kslog_sim* sim, double* t, size_t* cells, const double** u, const double** v) {
  if (!sim) return null_arg("sim");
  if (t) *t = sim->state.t;
  if (cells) *cells = sim->state.u.size();
  if (u) *u = sim->state.u.values().data();
  if (v) *v = sim->state.v.values().data();
  return KSLOG_OK;
}

void kslog_sim_free(kslog_sim* sim) { delete sim; }

kslog_status kslog_phi_eps(double s, double p, double eps, double* out) {
  if (!out) return null_arg("out");
  return guarded([&] { *out = kslog::phi_eps(s, p, eps); });
}

kslog_status kslog_coth_bound(double a, double b, double t, double* out) {
  if (!out) return null_arg("out");
  return guarded([&] { *out = kslog::coth_bound(a, b, t); });
}

kslog_status kslog_select_p(double chi, int n_eff, double* out) {
  if (!out) return null_arg("out");
  return guarded([&] { *out = kslog::select_p(chi, n_eff); });
}

kslog_status kslog_select_r(double p, int n_eff, double* out) {
  if (!out) return null_arg("out");
  return guarded([&] { *out = kslog::select_r(p, n_eff); });
}

}  // extern "C"
