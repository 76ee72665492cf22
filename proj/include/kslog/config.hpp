#pragma once

// Run configuration: a flat key = value text format ('#' starts a comment),
// or the "config" object of a meta.json written by an earlier run.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kslog/stepper.hpp"
#include "kslog/sweep.hpp"
#include "kslog/weak_residual.hpp"

namespace kslog {

inline constexpr const char* kVersion = "0.1.0";

inline constexpr double kDefaultCIdentity = kCalibratedCIdentity;
inline constexpr double kDefaultCWeak = kCalibratedCWeak;

enum class Mode { Simulate, Sweep, Check, CompareOde };
enum class Profile { Ci, Exploratory };

const char* to_string(Mode m);
const char* to_string(Profile p);

struct InitialProfile {
  std::string name = "constant";  // constant | cosine | gaussian | spike
  double level = 1.0;
  double amp = 0.5;
  double width = 0.1;
  std::optional<double> center;    // x (or r); defaults to the domain midpoint, r = 0 for balls
  std::optional<double> center_y;
};

struct RunConfig {
  Mode mode = Mode::Simulate;
  Profile profile = Profile::Ci;
  std::string scenario = "default";

  std::string domain = "interval";  // interval | rectangle | ball
  double a = 0.0, b = 3.141592653589793;
  double ax = 0.0, bx = 1.0, ay = 0.0, by = 1.0;
  double R = 1.0;
  int cells = 128;
  int cells_y = 0;  // 0: same as cells
  int n_eff = 2;

  InitialProfile u0;

  double chi = 0.5;
  std::vector<double> eps_list{0.1};
  std::optional<double> p;  // unset: select_p
  double T = 1.0;
  double dt_max = 1e-3;
  double cfl_safety = 0.9;
  double sample_dt = 1e-2;
  double blowup_ceiling = 1e8;
  double growth_threshold = 1.0;
  int growth_window = 0;
  double elliptic_tol = 1e-10;
  std::string v_face = "arithmetic";  // arithmetic | harmonic
  std::string undershoot = "auto";    // auto | abort | clamp
  bool allow_supercritical = false;

  double ode_a = 1.0, ode_b = 1.0;
  int workers = 1;
  int bank_count = 4;
  double c_identity = kDefaultCIdentity;
  double c_weak = kDefaultCWeak;
  std::string run_dir;

  /// Sets one key from its text form; throws Config on unknown keys or
  /// malformed values.
  void set(const std::string& key, const std::string& value);

  /// Checks the initial data and the parameter gates. A supercritical chi
  /// is accepted only with allow_supercritical, which makes the run
  /// exploratory.
  void validate() const;

  /// True for the exploratory profile or an allowed supercritical chi.
  bool exploratory() const;
  /// Explicit p, else select_p; supercritical exploratory runs fall back to
  /// 2 / (3 max(chi, 1)).
  double resolved_p() const;
  /// Exponent for the u^r accumulator; NaN when p leaves no admissible r.
  double resolved_r() const;

  GridPtr make_grid() const;
  Field make_u0(const GridPtr& grid) const;
  Params make_params(double eps) const;
  RunSpec make_spec(double eps, const GridPtr& grid) const;
  ResidualTolerances tolerances() const;

  /// Every key with its resolved value, as a JSON object string.
  std::string to_json() const;
};

const std::vector<std::string>& config_keys();

RunConfig parse_config_text(const std::string& text);
/// Text format, or meta.json when the file parses as JSON.
RunConfig load_config(const std::filesystem::path& path);

}  // namespace kslog
