#include "kslog/weak_residual.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>

#include "json.hpp"

#include "kslog/error.hpp"

namespace kslog {

namespace {

constexpr double kPi = std::numbers::pi;

// exp(-1/s) for s > 0, else 0.
double smooth_step_kernel(double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; }

}  // namespace

double TimePart::value(double t) const {
  switch (kind) {
    case TimeKind::Constant:
      return 1.0;
    case TimeKind::Cutoff: {
      if (t <= a) return 1.0;
      if (t >= b) return 0.0;
      const double s = (t - a) / (b - a);
      const double A = smooth_step_kernel(1.0 - s), B = smooth_step_kernel(s);
      return A / (A + B);
    }
    case TimeKind::Bump: {
      if (t <= a || t >= b) return 0.0;
      const double z = (2.0 * t - a - b) / (b - a);
      return std::exp(1.0 - 1.0 / (1.0 - z * z));
    }
  }
  return 0.0;
}

double TimePart::derivative(double t) const {
  switch (kind) {
    case TimeKind::Constant:
      return 0.0;
    case TimeKind::Cutoff: {
      if (t <= a || t >= b) return 0.0;
      const double s = (t - a) / (b - a);
      const double A = smooth_step_kernel(1.0 - s), B = smooth_step_kernel(s);
      const double denom = (A + B) * (A + B);
      const double ds = -A * B * (1.0 / ((1.0 - s) * (1.0 - s)) + 1.0 / (s * s)) / denom;
      return ds / (b - a);
    }
    case TimeKind::Bump: {
      if (t <= a || t >= b) return 0.0;
      const double z = (2.0 * t - a - b) / (b - a);
      const double w = 1.0 - z * z;
      return value(t) * (-2.0 * z / (w * w)) * (2.0 / (b - a));
    }
  }
  return 0.0;
}

double TimePart::support_end() const {
  return kind == TimeKind::Constant ? std::numeric_limits<double>::infinity() : b;
}

double TimePart::support_start() const { return kind == TimeKind::Bump ? a : 0.0; }

namespace {

struct ModeEval {
  double c = 1.0;             // product of cosines
  std::array<double, 2> g{};  // gradient of the product
  double lap = 0.0;           // Laplacian of the product
};

ModeEval eval_mode(const SpatialPart& s, const Domain& d, const Point& x) {
  ModeEval m;
  if (d.kind == DomainKind::RadialBall) {
    const double k = s.kx * kPi / d.radius();
    const double r = x[0];
    m.c = std::cos(k * r);
    const double dr = -k * std::sin(k * r);
    m.g = {dr, 0.0};
    const double radial_term = r > 0.0 ? (d.dim - 1) * dr / r : -(d.dim - 1) * k * k;
    m.lap = -k * k * m.c + radial_term;
    return m;
  }
  const double kx = s.kx * kPi / (d.x1 - d.x0);
  const double cx = std::cos(kx * (x[0] - d.x0)), sx = std::sin(kx * (x[0] - d.x0));
  if (d.kind == DomainKind::Interval) {
    m.c = cx;
    m.g = {-kx * sx, 0.0};
    m.lap = -kx * kx * cx;
    return m;
  }
  const double ky = s.ky * kPi / (d.y1 - d.y0);
  const double cy = std::cos(ky * (x[1] - d.y0)), sy = std::sin(ky * (x[1] - d.y0));
  m.c = cx * cy;
  m.g = {-kx * sx * cy, -ky * cx * sy};
  m.lap = -(kx * kx + ky * ky) * cx * cy;
  return m;
}

}  // namespace

double SpatialPart::value(const Domain& d, const Point& x) const {
  return offset + amplitude * eval_mode(*this, d, x).c;
}

std::array<double, 2> SpatialPart::gradient(const Domain& d, const Point& x) const {
  const auto g = eval_mode(*this, d, x).g;
  return {amplitude * g[0], amplitude * g[1]};
}

double SpatialPart::laplacian(const Domain& d, const Point& x) const {
  return amplitude * eval_mode(*this, d, x).lap;
}

TestBank build_test_bank(const Grid& grid, double T, std::size_t count) {
  KSLOG_REQUIRE(count >= 3, ErrorCode::InvalidArgument, "test bank needs at least 3 members");
  KSLOG_REQUIRE(T > 0.0, ErrorCode::InvalidArgument, "test bank needs T > 0");
  const bool rect = grid.domain().kind == DomainKind::Rectangle;
  TestBank bank;
  auto add = [&](std::string label, SpatialPart s, TimePart t) {
    bank.phi.push_back({std::move(label), s, t, true});
  };
  add("const*cutoff", {1.0, 0.0, 0, 0}, {TimeKind::Cutoff, 0.5 * T, 0.9 * T});
  add("(1.5+cos1)*cutoff", {1.5, 1.0, 1, 0}, {TimeKind::Cutoff, 0.3 * T, 0.8 * T});
  add("const*sharp_bump", {1.0, 0.0, 0, 0}, {TimeKind::Bump, 0.45 * T, 0.6 * T});
  // Extra members cycle through higher modes and shifted time windows.
  for (std::size_t i = 3; i < count; ++i) {
    const int k = static_cast<int>(i - 1);
    const double start = 0.05 * T * static_cast<double>((i - 3) % 4);
    SpatialPart s{1.0, 0.6, k, rect ? static_cast<int>(i % 2) : 0};
    TimePart t = (i % 2 == 1) ? TimePart{TimeKind::Bump, start, start + 0.6 * T}
                              : TimePart{TimeKind::Cutoff, 0.2 * T + start, 0.85 * T};
    char label[64];
    std::snprintf(label, sizeof label, "(1+0.6cos%d)*%s[%.3g,%.3g]", k, t.kind == TimeKind::Bump ? "bump" : "cutoff",
                  t.a, t.b);
    add(label, s, t);
  }
  bank.psi = bank.phi;
  bank.psi.push_back({"cos1*cutoff", {0.0, 1.0, 1, rect ? 1 : 0}, {TimeKind::Cutoff, 0.3 * T, 0.8 * T}, false});
  bank.psi.push_back({"(0.2+cos2)*bump", {0.2, 1.0, 2, 0}, {TimeKind::Bump, 0.1 * T, 0.7 * T}, false});
  return bank;
}

TestFunction unit_test_function() { return {"one", {1.0, 0.0, 0, 0}, {TimeKind::Constant, 0.0, 0.0}, true}; }

double ResidualEntry::term(const std::string& name) const {
  for (const auto& [n, v] : terms)
    if (n == name) return v;
  throw Error(ErrorCode::InvalidArgument, "no residual term named " + name);
}

namespace {

// Left-endpoint weights t_{k+1} - t_k; the final sample gets weight 0.
std::vector<double> time_weights(const Trajectory& traj) {
  std::vector<double> w(traj.size(), 0.0);
  for (std::size_t k = 0; k + 1 < traj.size(); ++k) w[k] = traj[k + 1].t - traj[k].t;
  return w;
}

double max_spacing(const Trajectory& traj) {
  double m = 0.0;
  for (std::size_t k = 0; k + 1 < traj.size(); ++k) m = std::max(m, traj[k + 1].t - traj[k].t);
  return m;
}

void require_coverage(const Trajectory& traj, const TestFunction& fn) {
  KSLOG_REQUIRE(traj.size() >= 2, ErrorCode::InvalidArgument, "trajectory needs at least two snapshots");
  KSLOG_REQUIRE(traj.front().t == 0.0, ErrorCode::InvalidArgument, "trajectory must start at t = 0");
  const double end = fn.time.support_end();
  if (std::isfinite(end))
    KSLOG_REQUIRE(traj.back().t >= end * (1.0 - 1e-12), ErrorCode::InvalidArgument,
                  "snapshots do not cover the support of " + fn.label);
  const double lo = fn.time.support_start();
  const double hi = std::min(end, traj.back().t);
  std::size_t inside = 0;
  for (const auto& s : traj)
    if (s.t >= lo && s.t <= hi) ++inside;
  KSLOG_REQUIRE(inside >= 9, ErrorCode::InvalidArgument,
                "insufficient snapshot cadence inside the support of " + fn.label);
}

double pos_pow(double x, double q) { return x > 0.0 ? std::pow(x, q) : 0.0; }

// Space-time sums shared by the two u^p inequalities.
struct InequalityTerms {
  double time = 0.0;        // int int u^p phi_t
  double initial = 0.0;     // int u0^p phi(.,0)
  double final_ = 0.0;      // int u^p(T) phi(.,T)
  double grad = 0.0;        // int int |grad u^{p/2}|^2 phi
  double lap = 0.0;         // int int u^p Delta phi
  double square = 0.0;      // int int |grad u^{p/2} - u^{p/2} grad v/(2v)|^2 phi
  double power = 0.0;       // int int u^p phi
  double over_v = 0.0;      // int int u^{p+1}/v phi
  double phi_eps = 0.0;     // int int Phi_eps(u) phi
  double cross = 0.0;       // int int u^p/v grad v . grad phi
  double cross_phi = 0.0;   // int int Phi_eps(u)/v grad v . grad phi
  double cross_reg = 0.0;   // int int u^p/((1+eps u) v) grad v . grad phi
};

InequalityTerms assemble_terms(const Trajectory& traj, const TestFunction& fn, const Params& params,
                               bool with_eps) {
  require_coverage(traj, fn);
  KSLOG_REQUIRE(params.p > 0.0 && params.p < 1.0, ErrorCode::InvalidArgument, "p must lie in (0,1)");
  const double p = params.p;
  const auto w = time_weights(traj);
  InequalityTerms T;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const auto& s = traj[k];
    const auto& grid = *s.u.grid();
    const Domain& d = grid.domain();
    const auto c = grid.centers();
    const auto vol = grid.volumes();
    const double t = s.t;
    const bool active = fn.time.value(t) != 0.0 || fn.time.derivative(t) != 0.0;

    if (k == 0)
      for (std::size_t i = 0; i < s.u.size(); ++i) T.initial += vol[i] * pos_pow(s.u[i], p) * fn.value(d, c[i], 0.0);
    if (k + 1 == traj.size())
      for (std::size_t i = 0; i < s.u.size(); ++i) T.final_ += vol[i] * pos_pow(s.u[i], p) * fn.value(d, c[i], t);
    if (w[k] == 0.0 || !active) continue;

    std::vector<double> up(s.u.size()), phi_u;
    for (std::size_t i = 0; i < s.u.size(); ++i) up[i] = pos_pow(s.u[i], p);
    if (with_eps) {
      phi_u.resize(s.u.size());
      for (std::size_t i = 0; i < s.u.size(); ++i) phi_u[i] = phi_eps(std::max(s.u[i], 0.0), p, params.eps);
    }
    bool touches = false;
    for (std::size_t i = 0; i < s.u.size(); ++i) {
      const double ph = fn.value(d, c[i], t);
      if (ph != 0.0 && !(s.v[i] > kPositivityFloor)) touches = true;
      T.time += w[k] * vol[i] * up[i] * fn.time_derivative(d, c[i], t);
      T.lap += w[k] * vol[i] * up[i] * fn.laplacian(d, c[i], t);
      T.power += w[k] * vol[i] * up[i] * ph;
      T.over_v += w[k] * vol[i] * up[i] * s.u[i] / s.v[i] * ph;
      if (with_eps) T.phi_eps += w[k] * vol[i] * phi_u[i] * ph;
    }
    KSLOG_REQUIRE(!touches, ErrorCode::Invariant, "v below the positivity floor inside the test-function support");
    for (const Face& f : grid.faces()) {
      const double ph = fn.value(d, f.midpoint, t);
      const double dn = fn.normal_derivative(d, f, t);
      const double wl = std::sqrt(up[f.left]), wr = std::sqrt(up[f.right]);
      const double vf = 0.5 * (s.v[f.left] + s.v[f.right]);
      const double dv = (s.v[f.right] - s.v[f.left]) / f.distance;
      const double dw = (wr - wl) / f.distance;
      const double g = dw - 0.5 * (wl + wr) * dv / (2.0 * vf);
      T.grad += w[k] * f.diamond() * dw * dw * ph;
      T.square += w[k] * f.diamond() * g * g * ph;
      const double upf = 0.5 * (up[f.left] + up[f.right]);
      T.cross += w[k] * f.diamond() * upf * dv / vf * dn;
      if (with_eps) {
        const double phif = 0.5 * (phi_u[f.left] + phi_u[f.right]);
        const double regf = 0.5 * (up[f.left] / (1.0 + params.eps * s.u[f.left]) +
                                   up[f.right] / (1.0 + params.eps * s.u[f.right]));
        T.cross_phi += w[k] * f.diamond() * phif * dv / vf * dn;
        T.cross_reg += w[k] * f.diamond() * regf * dv / vf * dn;
      }
    }
  }
  return T;
}

ResidualEntry finish_inequality(std::string check, const TestFunction& fn, const Trajectory& traj,
                                std::vector<std::pair<std::string, double>> lhs_terms,
                                std::vector<std::pair<std::string, double>> rhs_terms, const ResidualTolerances& tol) {
  ResidualEntry e;
  e.check = std::move(check);
  e.label = fn.label;
  e.h = traj.front().u.grid()->h();
  e.dt = max_spacing(traj);
  double scale = 0.0;
  for (const auto& [n, v] : lhs_terms) {
    e.lhs += v;
    scale += std::abs(v);
  }
  for (const auto& [n, v] : rhs_terms) {
    e.rhs += v;
    scale += std::abs(v);
  }
  e.terms = std::move(lhs_terms);
  e.terms.insert(e.terms.end(), rhs_terms.begin(), rhs_terms.end());
  e.residual = e.lhs - e.rhs;
  e.tol = tol.c_weak * (e.h + e.dt) * scale;
  e.pass = e.residual >= -e.tol;
  return e;
}

}  // namespace

ResidualEntry check_weak_v_identity(const Trajectory& traj, const TestFunction& psi, const ResidualTolerances& tol) {
  require_coverage(traj, psi);
  const auto w = time_weights(traj);
  double grad = 0.0, vpsi = 0.0, upsi = 0.0, scale = 0.0;
  for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
    const auto& s = traj[k];
    const auto& grid = *s.u.grid();
    const Domain& d = grid.domain();
    const auto c = grid.centers();
    const auto vol = grid.volumes();
    for (std::size_t i = 0; i < s.u.size(); ++i) {
      const double ps = psi.value(d, c[i], s.t);
      vpsi += w[k] * vol[i] * s.v[i] * ps;
      upsi += w[k] * vol[i] * s.u[i] * ps;
      scale += w[k] * vol[i] * (std::abs(s.v[i]) + std::abs(s.u[i])) * std::abs(ps);
    }
    for (const Face& f : grid.faces()) {
      const double g = f.diamond() * (s.v[f.right] - s.v[f.left]) / f.distance * psi.normal_derivative(d, f, s.t);
      grad += w[k] * g;
      scale += w[k] * std::abs(g);
    }
  }
  ResidualEntry e;
  e.check = "weak_v_identity";
  e.label = psi.label;
  e.h = traj.front().u.grid()->h();
  e.dt = max_spacing(traj);
  // Integrating Delta v * psi by parts with zero-flux boundaries gives
  // +grad v . grad psi; this is the sign consistent with 0 = Delta v - v + u.
  e.lhs = grad + vpsi;
  e.rhs = upsi;
  e.terms = {{"grad_v_grad_psi", grad}, {"v_psi", vpsi}, {"u_psi", upsi}};
  e.residual = std::abs(e.lhs - e.rhs);
  e.tol = tol.c_identity * e.h * e.h * scale + 10.0 * tol.solver_tol * scale;
  e.pass = e.residual <= e.tol;
  return e;
}

ResidualEntry check_supersolution_ineq(const Trajectory& traj, const TestFunction& phi, const Params& params,
                                       const ResidualTolerances& tol) {
  KSLOG_REQUIRE(phi.nonneg, ErrorCode::InvalidArgument, "supersolution check needs a nonnegative test function");
  KSLOG_REQUIRE(params.p * params.chi < 1.0, ErrorCode::InvalidArgument, "supersolution check needs p chi < 1");
  KSLOG_REQUIRE(std::isfinite(phi.time.support_end()), ErrorCode::InvalidArgument,
                "supersolution check needs a test function with compact time support");
  const InequalityTerms T = assemble_terms(traj, phi, params, false);
  const double p = params.p, chi = params.chi;
  return finish_inequality("supersolution", phi, traj, {{"-u^p phi_t", -T.time}, {"-u0^p phi(0)", -T.initial}},
                           {{"grad u^{p/2}", 4.0 * (1 - p) * (1 - p * chi) / p * T.grad},
                            {"u^p lap phi", T.lap},
                            {"drift square", 4.0 * (1 - p) * chi * T.square},
                            {"u^p", -(1 - p) * chi * T.power},
                            {"u^{p+1}/v", (1 - p) * chi * T.over_v},
                            {"u^p grad v/v . grad phi", -(1 - 2 * p) * chi * T.cross}},
                           tol);
}

ResidualEntry check_eps_testing_ineq(const Trajectory& traj, const TestFunction& phi, const Params& params,
                                     const ResidualTolerances& tol) {
  const InequalityTerms T = assemble_terms(traj, phi, params, true);
  const double p = params.p, chi = params.chi;
  return finish_inequality("eps_testing", phi, traj,
                           {{"-u^p phi_t", -T.time}, {"u^p(T) phi(T)", T.final_}, {"-u0^p phi(0)", -T.initial}},
                           {{"grad u^{p/2}", 4.0 * (1 - p) * (1 - p * chi) / p * T.grad},
                            {"u^p lap phi", T.lap},
                            {"drift square", 4.0 * (1 - p) * chi * T.square},
                            {"Phi_eps(u)", (1 - p) * chi * T.phi_eps},
                            {"u^p", -2.0 * (1 - p) * chi * T.power},
                            {"u^{p+1}/v", (1 - p) * chi * T.over_v},
                            {"Phi_eps(u) grad v/v . grad phi", (1 - p) * chi * T.cross_phi},
                            {"u^p/(1+eps u) grad v/v . grad phi", p * chi * T.cross_reg},
                            {"u^p grad v/v . grad phi", -2.0 * (1 - p) * chi * T.cross}},
                           tol);
}

bool check_mass_ineq(std::span<const LedgerRow> rows) {
  if (rows.empty()) return true;
  const double m0 = rows.front().mass_u;
  return std::all_of(rows.begin(), rows.end(), [m0](const LedgerRow& r) { return r.mass_u <= m0 * (1.0 + 1e-10); });
}

double boundary_trace_min(const Trajectory& traj, double p) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& s : traj)
    for (const BoundaryFace& b : s.u.grid()->boundary_faces()) m = std::min(m, pos_pow(s.u[b.cell], 0.5 * p));
  return m;
}

bool ResidualReport::all_pass() const {
  return mass_inequality && std::all_of(entries.begin(), entries.end(), [](const ResidualEntry& e) { return e.pass; });
}

std::string ResidualReport::to_json() const {
  nlohmann::ordered_json j;
  j["schema"] = "kslog.residual_report/1";
  j["h"] = h;
  j["dt"] = dt;
  j["chi"] = params.chi;
  j["eps"] = params.eps;
  j["p"] = params.p;
  j["mass_inequality"] = mass_inequality;
  j["boundary_trace_min"] = boundary_trace_min;
  j["all_pass"] = all_pass();
  auto& arr = j["entries"] = nlohmann::ordered_json::array();
  for (const auto& e : entries) {
    nlohmann::ordered_json je;
    je["check"] = e.check;
    je["test_function"] = e.label;
    je["lhs"] = e.lhs;
    je["rhs"] = e.rhs;
    je["residual"] = e.residual;
    je["tol"] = e.tol;
    je["ratio"] = e.tol > 0.0 ? e.residual / e.tol : 0.0;
    je["h"] = e.h;
    je["dt"] = e.dt;
    je["pass"] = e.pass;
    auto& terms = je["terms"] = nlohmann::ordered_json::object();
    for (const auto& [n, v] : e.terms) terms[n] = v;
    arr.push_back(je);
  }
  return j.dump(2);
}

std::string ResidualReport::summary_table() const {
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-16s %-34s %13s %13s %9s %s\n", "check", "test function", "residual", "tol",
                "ratio", "result");
  out << buf;
  for (const auto& e : entries) {
    std::snprintf(buf, sizeof buf, "%-16s %-34s %13.5e %13.5e %9.3f %s\n", e.check.c_str(), e.label.c_str(),
                  e.residual, e.tol, e.tol > 0.0 ? e.residual / e.tol : 0.0, e.pass ? "PASS" : "FAIL");
    out << buf;
  }
  out << "mass inequality: " << (mass_inequality ? "PASS" : "FAIL") << "\n";
  std::snprintf(buf, sizeof buf, "boundary trace min u^(p/2): %.6e\n", boundary_trace_min);
  out << buf;
  return out.str();
}

ResidualReport evaluate_residuals(const Trajectory& traj, std::span<const LedgerRow> rows, const Params& params,
                                  const TestBank& bank, const ResidualTolerances& tol) {
  ResidualReport r;
  r.params = params;
  r.h = traj.front().u.grid()->h();
  r.dt = max_spacing(traj);
  for (const auto& psi : bank.psi) r.entries.push_back(check_weak_v_identity(traj, psi, tol));
  for (const auto& phi : bank.phi) r.entries.push_back(check_supersolution_ineq(traj, phi, params, tol));
  for (const auto& phi : bank.phi) r.entries.push_back(check_eps_testing_ineq(traj, phi, params, tol));
  r.entries.push_back(check_eps_testing_ineq(traj, unit_test_function(), params, tol));
  r.mass_inequality = check_mass_ineq(rows);
  r.boundary_trace_min = boundary_trace_min(traj, params.p);
  return r;
}

}  // namespace kslog
