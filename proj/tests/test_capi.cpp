#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>

#include "kslog/kslog.h"

namespace fs = std::filesystem;

TEST(CApi, VersionAndPureFunctions) {
  EXPECT_STRNE(kslog_version(), "");
  double v = 0.0;
  ASSERT_EQ(kslog_phi_eps(1.0, 0.5, 1.0, &v), KSLOG_OK);
  EXPECT_NEAR(v, std::atan(1.0), 1e-14);
  ASSERT_EQ(kslog_coth_bound(1.0, 1.0, 40.0, &v), KSLOG_OK);
  EXPECT_NEAR(v, 1.0, 1e-15);
  ASSERT_EQ(kslog_select_p(2.0, 3, &v), KSLOG_OK);
  EXPECT_NEAR(v, 0.4, 1e-15);
  ASSERT_EQ(kslog_select_r(0.5, 2, &v), KSLOG_OK);
  EXPECT_NEAR(v, 1.25, 1e-15);
}

TEST(CApi, ErrorsAreCodesWithMessages) {
  double v = 0.0;
  EXPECT_EQ(kslog_select_p(3.0, 3, &v), KSLOG_E_CONFIG);
  EXPECT_NE(std::strlen(kslog_last_error()), 0u);
  EXPECT_EQ(kslog_coth_bound(-1.0, 1.0, 1.0, &v), KSLOG_E_INVALID_ARGUMENT);
  EXPECT_EQ(kslog_phi_eps(1.0, 0.5, 0.1, nullptr), KSLOG_E_INVALID_ARGUMENT);
  EXPECT_EQ(kslog_config_new(nullptr), KSLOG_E_INVALID_ARGUMENT);
  kslog_config* cfg = nullptr;
  EXPECT_EQ(kslog_config_load("/nonexistent.conf", &cfg), KSLOG_E_CONFIG);
  EXPECT_EQ(cfg, nullptr);
}

TEST(CApi, ConfigLifecycle) {
  kslog_config* cfg = nullptr;
  ASSERT_EQ(kslog_config_new(&cfg), KSLOG_OK);
  EXPECT_EQ(kslog_config_set(cfg, "chi", "0.8"), KSLOG_OK);
  EXPECT_EQ(kslog_config_set(cfg, "no_such_key", "1"), KSLOG_E_CONFIG);
  EXPECT_NE(std::string(kslog_last_error()).find("no_such_key"), std::string::npos);
  EXPECT_EQ(kslog_config_validate(cfg), KSLOG_OK);
  const char* js = nullptr;
  ASSERT_EQ(kslog_config_json(cfg, &js), KSLOG_OK);
  EXPECT_NE(std::string(js).find("\"chi\": 0.8"), std::string::npos);
  EXPECT_EQ(kslog_config_set(cfg, "domain", "ball"), KSLOG_OK);
  EXPECT_EQ(kslog_config_set(cfg, "n_eff", "3"), KSLOG_OK);
  EXPECT_EQ(kslog_config_set(cfg, "chi", "3.5"), KSLOG_OK);
  EXPECT_EQ(kslog_config_validate(cfg), KSLOG_E_CONFIG);
  kslog_config_free(cfg);
  kslog_config_free(nullptr);
}

TEST(CApi, SimulationHandle) {
  kslog_config* cfg = nullptr;
  ASSERT_EQ(kslog_config_new(&cfg), KSLOG_OK);
  kslog_config_set(cfg, "cells", "32");
  kslog_config_set(cfg, "u0", "cosine");
  kslog_sim* sim = nullptr;
  ASSERT_EQ(kslog_sim_create(cfg, 0.1, &sim), KSLOG_OK);
  kslog_config_free(cfg);  // the handle keeps its own copy

  double t = -1.0;
  size_t cells = 0;
  const double *u = nullptr, *v = nullptr;
  ASSERT_EQ(kslog_sim_state(sim, &t, &cells, &u, &v), KSLOG_OK);
  EXPECT_EQ(t, 0.0);
  ASSERT_EQ(cells, 32u);
  double m0 = 0.0;
  for (size_t i = 0; i < cells; ++i) m0 += u[i];
  for (int k = 0; k < 50; ++k) ASSERT_EQ(kslog_sim_step(sim, 1e-3), KSLOG_OK);
  ASSERT_EQ(kslog_sim_state(sim, &t, &cells, &u, &v), KSLOG_OK);
  EXPECT_NEAR(t, 0.05, 1e-12);
  double m = 0.0;
  for (size_t i = 0; i < cells; ++i) {
    m += u[i];
    EXPECT_GE(u[i], 0.0);
    EXPECT_GT(v[i], 0.0);
  }
  EXPECT_NEAR(m, m0, 1e-10 * m0);  // uniform cells: the plain sum is the mass up to h
  // a nonpositive cap means "no cap": the step is bounded by dt_max
  ASSERT_EQ(kslog_sim_step(sim, -1.0), KSLOG_OK);
  ASSERT_EQ(kslog_sim_state(sim, &t, &cells, &u, &v), KSLOG_OK);
  EXPECT_GT(t, 0.05);
  EXPECT_LE(t, 0.05 + 1e-3 + 1e-15);
  EXPECT_EQ(kslog_sim_step(nullptr, 1e-3), KSLOG_E_INVALID_ARGUMENT);
  kslog_sim_free(sim);
}

TEST(CApi, RunWritesArtifacts) {
  const fs::path out = fs::temp_directory_path() / "kslog_capi_run";
  fs::remove_all(out);
  kslog_config* cfg = nullptr;
  ASSERT_EQ(kslog_config_new(&cfg), KSLOG_OK);
  kslog_config_set(cfg, "scenario", "capi");
  kslog_config_set(cfg, "cells", "32");
  kslog_config_set(cfg, "T", "0.05");
  kslog_config_set(cfg, "eps", "0.5");
  int code = -1, flagged = -1;
  ASSERT_EQ(kslog_run(cfg, out.c_str(), &code, &flagged), KSLOG_OK);
  EXPECT_EQ(code, 0);
  EXPECT_EQ(flagged, 0);
  EXPECT_TRUE(fs::exists(out / "runs" / "capi" / "0.5" / "meta.json"));
  kslog_config_set(cfg, "chi", "-1");
  EXPECT_EQ(kslog_run(cfg, out.c_str(), &code, &flagged), KSLOG_E_CONFIG);
  EXPECT_EQ(code, 2);
  kslog_config_free(cfg);
}
