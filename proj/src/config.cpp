#include "kslog/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <sstream>

#include "json.hpp"
#include "kslog/error.hpp"
#include "kslog/functionals.hpp"
#include "kslog/io.hpp"

namespace kslog {

using nlohmann::ordered_json;

const char* to_string(Mode m) {
  switch (m) {
    case Mode::Simulate:
      return "simulate";
    case Mode::Sweep:
      return "sweep";
    case Mode::Check:
      return "check";
    case Mode::CompareOde:
      return "compare-ode";
  }
  return "?";
}

const char* to_string(Profile p) { return p == Profile::Ci ? "ci" : "exploratory"; }

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* expected) {
  throw Error(ErrorCode::Config, "config key '" + key + "': cannot parse '" + value + "' as " + expected);
}

// Plain decimals, plus "pi" and "2^k" for the usual domain and eps values.
double parse_double(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (v == "pi") return 3.141592653589793;
  if (v.rfind("2^", 0) == 0) {
    int k = 0;
    const char* first = v.data() + 2;
    const char* last = v.data() + v.size();
    auto [ptr, ec] = std::from_chars(first, last, k);
    if (ec != std::errc() || ptr != last) bad_value(key, raw, "a number");
    return std::ldexp(1.0, k);
  }
  double x = 0.0;
  const char* first = v.data();
  const char* last = v.data() + v.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, x);
  if (v.empty() || ec != std::errc() || ptr != last || !std::isfinite(x)) bad_value(key, raw, "a number");
  return x;
}

int parse_int(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  int x = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) bad_value(key, raw, "an integer");
  return x;
}

bool parse_bool(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad_value(key, raw, "a boolean");
}

std::string parse_choice(const std::string& key, const std::string& raw, std::initializer_list<const char*> choices) {
  const std::string v = trim(raw);
  for (const char* c : choices)
    if (v == c) return v;
  std::string msg = "config key '" + key + "': '" + v + "' is not one of";
  for (const char* c : choices) msg += std::string(" ") + c;
  throw Error(ErrorCode::Config, msg);
}

std::vector<double> parse_list(const std::string& key, const std::string& raw) {
  std::vector<double> out;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(key, item));
  if (out.empty()) bad_value(key, raw, "a comma-separated list");
  return out;
}

struct KeySpec {
  std::string name;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<ordered_json(const RunConfig&)> get;
};

#define KS_DOUBLE(field) \
  {#field, [](RunConfig& c, const std::string& v) { c.field = parse_double(#field, v); }, [](const RunConfig& c) { return ordered_json(c.field); }}
#define KS_INT(field) \
  {#field, [](RunConfig& c, const std::string& v) { c.field = parse_int(#field, v); }, [](const RunConfig& c) { return ordered_json(c.field); }}

const std::vector<KeySpec>& key_table() {
  static const std::vector<KeySpec> table = {
      {"mode",
       [](RunConfig& c, const std::string& v) {
         const std::string m = parse_choice("mode", v, {"simulate", "sweep", "check", "compare-ode"});
         c.mode = m == "simulate" ? Mode::Simulate : m == "sweep" ? Mode::Sweep : m == "check" ? Mode::Check : Mode::CompareOde;
       },
       [](const RunConfig& c) { return ordered_json(to_string(c.mode)); }},
      {"profile",
       [](RunConfig& c, const std::string& v) {
         c.profile = parse_choice("profile", v, {"ci", "exploratory"}) == "ci" ? Profile::Ci : Profile::Exploratory;
       },
       [](const RunConfig& c) { return ordered_json(to_string(c.profile)); }},
      {"scenario",
       [](RunConfig& c, const std::string& v) {
         const std::string s = trim(v);
         if (s.empty() || s.find_first_of("/\\") != std::string::npos || s == "." || s == "..")
           bad_value("scenario", v, "a plain directory name");
         c.scenario = s;
       },
       [](const RunConfig& c) { return ordered_json(c.scenario); }},
      {"domain",
       [](RunConfig& c, const std::string& v) {
         std::string d = parse_choice("domain", v, {"interval", "rectangle", "ball", "radial"});
         c.domain = d == "radial" ? "ball" : d;
       },
       [](const RunConfig& c) { return ordered_json(c.domain); }},
      KS_DOUBLE(a),
      KS_DOUBLE(b),
      KS_DOUBLE(ax),
      KS_DOUBLE(bx),
      KS_DOUBLE(ay),
      KS_DOUBLE(by),
      KS_DOUBLE(R),
      KS_INT(cells),
      {"cells_y", [](RunConfig& c, const std::string& v) { c.cells_y = parse_int("cells_y", v); },
       [](const RunConfig& c) { return ordered_json(c.cells_y == 0 ? c.cells : c.cells_y); }},
      KS_INT(n_eff),
      {"u0",
       [](RunConfig& c, const std::string& v) {
         c.u0.name = parse_choice("u0", v, {"constant", "cosine", "gaussian", "spike"});
       },
       [](const RunConfig& c) { return ordered_json(c.u0.name); }},
      {"u0_level", [](RunConfig& c, const std::string& v) { c.u0.level = parse_double("u0_level", v); },
       [](const RunConfig& c) { return ordered_json(c.u0.level); }},
      {"u0_amp", [](RunConfig& c, const std::string& v) { c.u0.amp = parse_double("u0_amp", v); },
       [](const RunConfig& c) { return ordered_json(c.u0.amp); }},
      {"u0_width", [](RunConfig& c, const std::string& v) { c.u0.width = parse_double("u0_width", v); },
       [](const RunConfig& c) { return ordered_json(c.u0.width); }},
      {"u0_center", [](RunConfig& c, const std::string& v) { c.u0.center = parse_double("u0_center", v); },
       [](const RunConfig& c) {
         if (c.u0.center) return ordered_json(*c.u0.center);
         if (c.domain == "ball") return ordered_json(0.0);
         if (c.domain == "rectangle") return ordered_json(0.5 * (c.ax + c.bx));
         return ordered_json(0.5 * (c.a + c.b));
       }},
      {"u0_center_y", [](RunConfig& c, const std::string& v) { c.u0.center_y = parse_double("u0_center_y", v); },
       [](const RunConfig& c) { return ordered_json(c.u0.center_y.value_or(0.5 * (c.ay + c.by))); }},
      KS_DOUBLE(chi),
      {"eps", [](RunConfig& c, const std::string& v) { c.eps_list = {parse_double("eps", v)}; },
       nullptr},
      {"eps_list", [](RunConfig& c, const std::string& v) { c.eps_list = parse_list("eps_list", v); },
       [](const RunConfig& c) { return ordered_json(c.eps_list); }},
      {"p",
       [](RunConfig& c, const std::string& v) {
         if (trim(v) == "auto")
           c.p.reset();
         else
           c.p = parse_double("p", v);
       },
       [](const RunConfig& c) { return ordered_json(c.resolved_p()); }},
      KS_DOUBLE(T),
      KS_DOUBLE(dt_max),
      KS_DOUBLE(cfl_safety),
      KS_DOUBLE(sample_dt),
      KS_DOUBLE(blowup_ceiling),
      KS_DOUBLE(growth_threshold),
      KS_INT(growth_window),
      KS_DOUBLE(elliptic_tol),
      {"v_face", [](RunConfig& c, const std::string& v) { c.v_face = parse_choice("v_face", v, {"arithmetic", "harmonic"}); },
       [](const RunConfig& c) { return ordered_json(c.v_face); }},
      {"undershoot",
       [](RunConfig& c, const std::string& v) { c.undershoot = parse_choice("undershoot", v, {"auto", "abort", "clamp"}); },
       [](const RunConfig& c) {
         return ordered_json(c.make_params(c.eps_list.front()).undershoot == UndershootPolicy::Abort ? "abort" : "clamp");
       }},
      {"allow_supercritical",
       [](RunConfig& c, const std::string& v) { c.allow_supercritical = parse_bool("allow_supercritical", v); },
       [](const RunConfig& c) { return ordered_json(c.allow_supercritical); }},
      KS_DOUBLE(ode_a),
      KS_DOUBLE(ode_b),
      KS_INT(workers),
      KS_INT(bank_count),
      KS_DOUBLE(c_identity),
      KS_DOUBLE(c_weak),
      {"run_dir", [](RunConfig& c, const std::string& v) { c.run_dir = trim(v); },
       [](const RunConfig& c) { return ordered_json(c.run_dir); }},
  };
  return table;
}

#undef KS_DOUBLE
#undef KS_INT

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& s : key_table()) k.push_back(s.name);
    return k;
  }();
  return keys;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  for (const auto& s : key_table()) {
    if (s.name == key) {
      s.set(*this, value);
      return;
    }
  }
  throw Error(ErrorCode::Config, "unknown config key '" + key + "'");
}

bool RunConfig::exploratory() const {
  return profile == Profile::Exploratory || chi >= critical_chi(n_eff);
}

double RunConfig::resolved_p() const {
  if (p) return *p;
  if (chi < critical_chi(n_eff)) return select_p(chi, n_eff);
  return 2.0 / (3.0 * std::max(chi, 1.0));
}

double RunConfig::resolved_r() const {
  const double pp = resolved_p();
  const double hi = std::min(pp + 1.0, n_eff * (pp + 1.0) / (2.0 * n_eff - 2.0));
  if (!(pp > 0.0 && pp < 1.0) || hi <= 1.0) return std::numeric_limits<double>::quiet_NaN();
  return select_r(pp, n_eff);
}

GridPtr RunConfig::make_grid() const {
  KSLOG_REQUIRE(cells >= 4, ErrorCode::Config, "cells must be at least 4");
  try {
    if (domain == "interval") return Grid::build(Domain::interval(a, b), static_cast<std::size_t>(cells));
    if (domain == "rectangle") {
      const int ny = cells_y == 0 ? cells : cells_y;
      KSLOG_REQUIRE(ny >= 4, ErrorCode::Config, "cells_y must be at least 4");
      return Grid::build(Domain::rectangle(ax, bx, ay, by), static_cast<std::size_t>(cells), static_cast<std::size_t>(ny));
    }
    return Grid::build(Domain::radial_ball(R, n_eff), static_cast<std::size_t>(cells));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Config) throw;
    throw Error(ErrorCode::Config, std::string("invalid domain: ") + e.what());
  }
}

Field RunConfig::make_u0(const GridPtr& grid) const {
  const Domain& d = grid->domain();
  const double cx = u0.center.value_or(d.kind == DomainKind::RadialBall ? 0.0 : 0.5 * (d.x0 + d.x1));
  const double cy = u0.center_y.value_or(0.5 * (d.y0 + d.y1));
  const double pi = 3.141592653589793;
  return sample(grid, [&](const Point& x) {
    const double dx = x[0] - cx;
    const double dy = d.kind == DomainKind::Rectangle ? x[1] - cy : 0.0;
    const double dist2 = dx * dx + dy * dy;
    if (u0.name == "constant") return u0.level;
    if (u0.name == "cosine") {
      double m = std::cos(pi * (x[0] - d.x0) / (d.x1 - d.x0));
      if (d.kind == DomainKind::Rectangle) m *= std::cos(pi * (x[1] - d.y0) / (d.y1 - d.y0));
      return u0.level + u0.amp * m;
    }
    if (u0.name == "gaussian") return u0.level + u0.amp * std::exp(-dist2 / (2.0 * u0.width * u0.width));
    // spike: compactly supported C^1 bump of radius `width`
    const double z = 1.0 - dist2 / (u0.width * u0.width);
    return u0.level + u0.amp * (z > 0.0 ? z * z : 0.0);
  });
}

Params RunConfig::make_params(double eps) const {
  Params prm;
  prm.chi = chi;
  prm.eps = eps;
  prm.p = resolved_p();
  prm.n_eff = n_eff;
  prm.T = T;
  prm.dt_max = dt_max;
  prm.cfl_safety = cfl_safety;
  prm.v_face = v_face == "harmonic" ? FaceMean::Harmonic : FaceMean::Arithmetic;
  if (undershoot == "auto")
    prm.undershoot = exploratory() ? UndershootPolicy::Clamp : UndershootPolicy::Abort;
  else
    prm.undershoot = undershoot == "abort" ? UndershootPolicy::Abort : UndershootPolicy::Clamp;
  prm.blowup_ceiling = blowup_ceiling;
  prm.elliptic_tol = elliptic_tol;
  prm.subcritical_regime = chi < critical_chi(n_eff);
  return prm;
}

RunSpec RunConfig::make_spec(double eps, const GridPtr& grid) const {
  RunSpec s;
  s.grid = grid;
  s.params = make_params(eps);
  s.u0 = make_u0(grid);
  s.r = resolved_r();
  s.sample_dt = sample_dt;
  s.growth_threshold = growth_threshold;
  s.growth_window = static_cast<std::size_t>(growth_window);
  return s;
}

ResidualTolerances RunConfig::tolerances() const {
  ResidualTolerances t;
  t.c_identity = c_identity;
  t.c_weak = c_weak;
  t.solver_tol = elliptic_tol;
  return t;
}

void RunConfig::validate() const {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw Error(ErrorCode::Config, msg);
  };
  require(n_eff >= 2, "n_eff must be at least 2");
  if (domain == "ball") require(R > 0.0, "ball radius R must be positive");
  require(chi >= 0.0, "chi must be nonnegative");
  const double crit = critical_chi(n_eff);
  if (chi >= crit && !allow_supercritical) {
    char msg[256];
    std::snprintf(msg, sizeof msg,
                  "chi = %g violates the global-existence gate chi < n/(n-2) = %g for n_eff = %d; "
                  "pass --allow-supercritical (allow_supercritical = true) for an exploratory run",
                  chi, crit, n_eff);
    throw Error(ErrorCode::Config, msg);
  }
  for (std::size_t j = 0; j < eps_list.size(); ++j) {
    require(eps_list[j] > 0.0 && eps_list[j] < 1.0, "eps values must lie in (0,1)");
    if (j > 0) require(eps_list[j] < eps_list[j - 1], "eps_list must be strictly decreasing");
  }
  require(!eps_list.empty(), "eps_list must not be empty");
  require(T > 0.0, "T must be positive");
  require(sample_dt > 0.0 && sample_dt <= T, "sample_dt must lie in (0, T]");
  require(growth_threshold > 0.0, "growth_threshold must be positive");
  require(growth_window >= 0, "growth_window must be nonnegative");
  require(workers >= 1, "workers must be at least 1");
  require(bank_count >= 3, "bank_count must be at least 3");
  require(c_identity > 0.0 && c_weak > 0.0, "c_identity and c_weak must be positive");
  require(ode_a > 0.0 && ode_b > 0.0, "ode_a and ode_b must be positive");
  if (mode == Mode::Check) require(!run_dir.empty(), "check mode needs run_dir");

  // Initial data: nonnegative, continuous and of positive mass.
  require(u0.level >= 0.0, "u0_level must be nonnegative");
  if (u0.name == "cosine") require(std::abs(u0.amp) <= u0.level, "cosine u0 needs |u0_amp| <= u0_level");
  if (u0.name == "gaussian" || u0.name == "spike") {
    require(u0.amp >= 0.0, "u0_amp must be nonnegative");
    require(u0.width > 0.0, "u0_width must be positive");
  }
  const GridPtr grid = make_grid();
  const Field f = make_u0(grid);
  require(f.min() >= 0.0, "u0 must be nonnegative");
  require(integrate(f) > 0.0, "u0 must have positive mass");

  for (double e : eps_list) make_params(e).validate();
}

std::string RunConfig::to_json() const {
  ordered_json j = ordered_json::object();
  for (const auto& s : key_table())
    if (s.get) j[s.name] = s.get(*this);
  return j.dump(2);
}

RunConfig parse_config_text(const std::string& text) {
  RunConfig c;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::Config, "config line " + std::to_string(lineno) + ": expected key = value");
    c.set(trim(std::string_view(t).substr(0, eq)), trim(std::string_view(t).substr(eq + 1)));
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error& e) {
    throw Error(ErrorCode::Config, e.what());
  }
  const std::string head = trim(text.substr(0, 64));
  if (head.empty() || head.front() != '{') return parse_config_text(text);

  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::Config, path.string() + ": invalid JSON: " + e.what());
  }
  const ordered_json& cfg = j.contains("config") ? j["config"] : j;
  KSLOG_REQUIRE(cfg.is_object(), ErrorCode::Config, path.string() + ": expected a config object");
  RunConfig c;
  for (const auto& [key, value] : cfg.items()) {
    std::string s;
    if (value.is_string()) {
      s = value.get<std::string>();
    } else if (value.is_boolean()) {
      s = value.get<bool>() ? "true" : "false";
    } else if (value.is_array()) {
      for (const auto& x : value) s += (s.empty() ? "" : ",") + x.dump();
    } else {
      s = value.dump();
    }
    c.set(key, s);
  }
  return c;
}

}  // namespace kslog
