#ifndef KSLOG_KSLOG_H
#define KSLOG_KSLOG_H

/* C interface to the kslog simulator. Every call returns a kslog_status;
   on failure kslog_last_error() describes the most recent error on the
   calling thread. Handles are opaque and owned by the caller. */

#include <stddef.h>

#if defined(_WIN32)
#define KSLOG_API __declspec(dllexport)
#else
#define KSLOG_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum kslog_status {
  KSLOG_OK = 0,
  KSLOG_E_INVALID_ARGUMENT = 1,
  KSLOG_E_CONFIG = 2,
  KSLOG_E_INVARIANT = 3,
  KSLOG_E_BLOWUP = 4,
  KSLOG_E_IO = 5,
  KSLOG_E_NONCONVERGENCE = 6,
  KSLOG_E_INTERNAL = 7
} kslog_status;

typedef struct kslog_config kslog_config;
typedef struct kslog_sim kslog_sim;

KSLOG_API const char* kslog_version(void);
KSLOG_API const char* kslog_last_error(void);

/* Configuration: defaults, a key = value file, or a meta.json. */
KSLOG_API kslog_status kslog_config_new(kslog_config** out);
KSLOG_API kslog_status kslog_config_load(const char* path, kslog_config** out);
KSLOG_API kslog_status kslog_config_set(kslog_config* cfg, const char* key, const char* value);
KSLOG_API kslog_status kslog_config_validate(const kslog_config* cfg);
/* Resolved configuration as JSON; the string lives until the next call on cfg. */
KSLOG_API kslog_status kslog_config_json(kslog_config* cfg, const char** json);
KSLOG_API void kslog_config_free(kslog_config* cfg);

/* Runs the configured mode. out_dir may be NULL ($KSLOG_OUT_DIR or the
   working directory). The summary goes to stdout; *exit_code receives the
   process exit code (0 ok, 2 config, 3 invariant, 4 blow-up ceiling) and
   *flagged is set for exploratory runs that hit a violation. Errors raised
   before the run starts are returned as a status with *exit_code set too. */
KSLOG_API kslog_status kslog_run(const kslog_config* cfg, const char* out_dir, int* exit_code, int* flagged);

/* Step-by-step simulation of one eps value from the configured data. */
KSLOG_API kslog_status kslog_sim_create(const kslog_config* cfg, double eps, kslog_sim** out);
/* Advances one step of at most dt_cap (<= 0 means no cap). */
KSLOG_API kslog_status kslog_sim_step(kslog_sim* sim, double dt_cap);
/* Current time and cell values; pointers stay valid until the next step. */
KSLOG_API kslog_status kslog_sim_state(const kslog_sim* sim, double* t, size_t* cells, const double** u,
                                       const double** v);
KSLOG_API void kslog_sim_free(kslog_sim* sim);

/* Scalar utilities. */
KSLOG_API kslog_status kslog_phi_eps(double s, double p, double eps, double* out);
KSLOG_API kslog_status kslog_coth_bound(double a, double b, double t, double* out);
KSLOG_API kslog_status kslog_select_p(double chi, int n_eff, double* out);
KSLOG_API kslog_status kslog_select_r(double p, int n_eff, double* out);

#ifdef __cplusplus
}
#endif

#endif
