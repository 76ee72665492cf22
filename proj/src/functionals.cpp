#include "kslog/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <boost/math/special_functions/beta.hpp>
#include <boost/numeric/odeint.hpp>

#include "kslog/error.hpp"
#include "kslog/io.hpp"

namespace kslog {

double phi_eps(double s, double p, double eps) {
  KSLOG_REQUIRE(s >= 0.0, ErrorCode::InvalidArgument, "phi_eps requires s >= 0");
  KSLOG_REQUIRE(p > 0.0 && p < 1.0, ErrorCode::InvalidArgument, "phi_eps requires p in (0,1)");
  KSLOG_REQUIRE(eps >= 0.0, ErrorCode::InvalidArgument, "phi_eps requires eps >= 0");
  if (s == 0.0) return 0.0;
  if (eps == 0.0) return std::pow(s, p);
  // x = eps sigma / (1 + eps sigma) maps the integral onto the incomplete beta
  // function B(x; p, 1-p) scaled by p eps^-p.
  const double x = eps * s / (1.0 + eps * s);
  return p * std::pow(eps, -p) * boost::math::beta(p, 1.0 - p, x);
}

double select_r(double p, int n_eff) {
  KSLOG_REQUIRE(p > 0.0 && p < 1.0, ErrorCode::InvalidArgument, "select_r requires p in (0,1)");
  KSLOG_REQUIRE(n_eff >= 2, ErrorCode::InvalidArgument, "select_r requires n_eff >= 2");
  const double hi = std::min(p + 1.0, n_eff * (p + 1.0) / (2.0 * n_eff - 2.0));
  KSLOG_REQUIRE(hi > 1.0, ErrorCode::InvalidArgument, "empty window for r: p too small for the u^r diagnostic");
  return 0.5 * (1.0 + hi);
}

double coth_bound(double a, double b, double t) {
  KSLOG_REQUIRE(a > 0.0 && b > 0.0 && t > 0.0, ErrorCode::InvalidArgument, "coth_bound requires a, b, t > 0");
  return std::sqrt(b / a) / std::tanh(std::sqrt(a * b) * t);
}

std::vector<OdeSample> integrate_riccati(double a, double b, double t0, double y0, std::span<const double> times) {
  namespace odeint = boost::numeric::odeint;
  KSLOG_REQUIRE(!times.empty() && times.front() >= t0, ErrorCode::InvalidArgument, "sample times must start at t0");
  using State = double;
  auto rhs = [a, b](const State& y, State& dydt, double) { dydt = -a * y * y + b; };
  auto stepper = odeint::make_dense_output(1e-13, 1e-13, odeint::runge_kutta_dopri5<State>());
  std::vector<OdeSample> out;
  out.reserve(times.size());
  State y = y0;
  const double dt0 = std::min(1e-3, 1e-3 / (a * std::abs(y0) + std::sqrt(a * b) + 1.0));
  odeint::integrate_times(stepper, rhs, y, times.begin(), times.end(), dt0,
                          [&out](const State& x, double t) { out.push_back({t, x}); });
  return out;
}

bool ode_comparison_check(double a, double b, std::span<const OdeSample> trajectory) {
  for (const OdeSample& s : trajectory) {
    if (s.t <= 0.0) continue;
    if (!(s.y <= coth_bound(a, b, s.t) * (1.0 + 1e-6))) return false;
  }
  return true;
}

namespace {

double pos_pow(double x, double q) { return x > 0.0 ? std::pow(x, q) : 0.0; }

}  // namespace

double grad_power_sq(const Field& u, double p) {
  double sum = 0.0;
  for (const Face& f : u.grid()->faces()) {
    const double d = pos_pow(u[f.right], 0.5 * p) - pos_pow(u[f.left], 0.5 * p);
    sum += f.trans() * d * d;
  }
  return sum;
}

double drift_square(const Field& u, const Field& v, double p) {
  require_same_grid(u, v);
  double sum = 0.0;
  for (const Face& f : u.grid()->faces()) {
    const double wl = pos_pow(u[f.left], 0.5 * p), wr = pos_pow(u[f.right], 0.5 * p);
    const double vf = 0.5 * (v[f.left] + v[f.right]);
    const double g = (wr - wl) / f.distance - 0.5 * (wl + wr) * (v[f.right] - v[f.left]) / (f.distance * 2.0 * vf);
    sum += f.diamond() * g * g;
  }
  return sum;
}

double power_over_v(const Field& u, const Field& v, double p) {
  require_same_grid(u, v);
  const auto vol = u.grid()->volumes();
  double sum = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) sum += vol[i] * pos_pow(u[i], p + 1.0) / v[i];
  return sum;
}

double power_grad_log_v_sq(const Field& u, const Field& v, double p) {
  require_same_grid(u, v);
  double sum = 0.0;
  for (const Face& f : u.grid()->faces()) {
    const double upf = 0.5 * (pos_pow(u[f.left], p) + pos_pow(u[f.right], p));
    const double vf = 0.5 * (v[f.left] + v[f.right]);
    const double g = (v[f.right] - v[f.left]) / (f.distance * vf);
    sum += f.diamond() * upf * g * g;
  }
  return sum;
}

double power_integral(const Field& u, double q) {
  const auto vol = u.grid()->volumes();
  double sum = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) sum += vol[i] * pos_pow(u[i], q);
  return sum;
}

double grad_norm_power(const Field& v, double r) {
  const auto& grid = *v.grid();
  const std::size_t n = grid.size();
  // Per cell and axis: mean of the normal differences over its two faces
  // (boundary faces contribute zero).
  std::vector<std::array<double, 2>> g(n, {0.0, 0.0});
  for (const Face& f : grid.faces()) {
    const double d = 0.5 * (v[f.right] - v[f.left]) / f.distance;
    g[f.left][f.axis] += d;
    g[f.right][f.axis] += d;
  }
  const auto vol = grid.volumes();
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += vol[i] * std::pow(std::hypot(g[i][0], g[i][1]), r);
  return sum;
}

double log_integral(const Field& u, double floor, std::size_t* floored) {
  const auto vol = u.grid()->volumes();
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    double x = u[i];
    if (x < floor) {
      x = floor;
      ++count;
    }
    sum += vol[i] * std::log(x);
  }
  if (floored) *floored = count;
  return sum;
}

double empirical_log_poincare_ratio(const Field& f, double delta) {
  const auto vol = f.grid()->volumes();
  double base = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) base += vol[i] * std::log(delta / f[i]);
  if (!(base > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return gradient_sq_over_sq(f, std::min(f.min(), delta) * 0.5) / (base * base);
}

FunctionalLedger::FunctionalLedger(double p, double r, double eps) : p_(p), r_(r), eps_(eps) {
  KSLOG_REQUIRE(p > 0.0 && p < 1.0, ErrorCode::InvalidArgument, "ledger requires p in (0,1)");
}

void FunctionalLedger::record(const StateSnapshot& s, double dt_weight) {
  KSLOG_REQUIRE(dt_weight >= 0.0, ErrorCode::InvalidArgument, "dt_weight must be nonnegative");
  LedgerRow row = rows_.empty() ? LedgerRow{} : rows_.back();
  if (rows_.empty()) row.A5 = std::isnan(r_) ? std::numeric_limits<double>::quiet_NaN() : 0.0;
  row.t = s.t;
  row.mass_u = integrate(s.u);
  row.mass_v = integrate(s.v);
  row.min_v = min_v(s.v);
  row.max_u = s.u.max();
  row.lemma35 = gradient_sq_over_sq(s.v, std::min(row.min_v, 1.0) * 0.5);
  std::size_t floored = 0;
  row.entropy_low = log_integral(s.u, kPositivityFloor, &floored);
  floored_cells_ += floored;
  row.power_now = power_integral(s.u, p_);

  if (dt_weight > 0.0) {
    row.A1 += dt_weight * grad_power_sq(s.u, p_);
    row.A2 += dt_weight * drift_square(s.u, s.v, p_);
    row.A3 += dt_weight * power_over_v(s.u, s.v, p_);
    row.A4 += dt_weight * power_grad_log_v_sq(s.u, s.v, p_);
    if (!std::isnan(r_)) row.A5 += dt_weight * power_integral(s.u, r_);
    row.acc_power += dt_weight * row.power_now;
    double phi_sum = 0.0;
    const auto vol = s.u.grid()->volumes();
    for (std::size_t i = 0; i < s.u.size(); ++i) phi_sum += vol[i] * phi_eps(std::max(s.u[i], 0.0), p_, eps_);
    row.acc_phi += dt_weight * phi_sum;
  }
  rows_.push_back(row);
}

const char* FunctionalLedger::csv_header() {
  return "t,mass_u,mass_v,min_v,max_u,lemma35,entropy_low,A1,A2,A3,A4,A5";
}

void FunctionalLedger::write_csv(const std::filesystem::path& path) const {
  std::string out = std::string(csv_header()) + "\n";
  char buf[512];
  for (const LedgerRow& r : rows_) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.t,
                  r.mass_u, r.mass_v, r.min_v, r.max_u, r.lemma35, r.entropy_low, r.A1, r.A2, r.A3, r.A4, r.A5);
    out += buf;
  }
  write_file_atomic(path, out);
}

std::vector<LedgerRow> FunctionalLedger::read_csv(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  std::getline(in, line);
  KSLOG_REQUIRE(line == csv_header(), ErrorCode::Io, "unexpected ledger header in " + path.string());
  std::vector<LedgerRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> vals;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) vals.push_back(std::strtod(cell.c_str(), nullptr));
    KSLOG_REQUIRE(vals.size() == 12, ErrorCode::Io, "malformed ledger row in " + path.string());
    LedgerRow r;
    r.t = vals[0];
    r.mass_u = vals[1];
    r.mass_v = vals[2];
    r.min_v = vals[3];
    r.max_u = vals[4];
    r.lemma35 = vals[5];
    r.entropy_low = vals[6];
    r.A1 = vals[7];
    r.A2 = vals[8];
    r.A3 = vals[9];
    r.A4 = vals[10];
    r.A5 = vals[11];
    rows.push_back(r);
  }
  return rows;
}

}  // namespace kslog
