#include "kslog/stepper.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kslog/error.hpp"

namespace kslog {

double critical_chi(int n_eff) {
  if (n_eff <= 2) return std::numeric_limits<double>::infinity();
  return static_cast<double>(n_eff) / (n_eff - 2);
}

void Params::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::Config, msg); };
  if (!(chi >= 0.0) || !std::isfinite(chi)) fail("chi must be a finite nonnegative number");
  if (!(eps > 0.0 && eps < 1.0)) fail("eps must lie in (0,1)");
  if (!(p > 0.0 && p < 1.0)) fail("p must lie in (0,1)");
  if (n_eff < 2) fail("n_eff must be at least 2");
  if (!(T > 0.0) || !std::isfinite(T)) fail("T must be positive");
  if (!(dt_max > 0.0)) fail("dt_max must be positive");
  if (!(cfl_safety > 0.0 && cfl_safety <= 1.0)) fail("cfl_safety must lie in (0,1]");
  if (!(blowup_ceiling > 0.0)) fail("blowup_ceiling must be positive");
  if (!(elliptic_tol > 1e-14 && elliptic_tol < 1e-6)) fail("elliptic_tol must lie in (1e-14,1e-6)");
  if (subcritical_regime) {
    if (chi >= critical_chi(n_eff)) {
      std::ostringstream msg;
      msg << "chi = " << chi << " violates the global-existence gate chi < n/(n-2) = " << critical_chi(n_eff)
          << " for n_eff = " << n_eff << " (pass --allow-supercritical for an exploratory run)";
      fail(msg.str());
    }
    if (chi * p >= 1.0) {
      std::ostringstream msg;
      msg << "chi = " << chi << " and p = " << p << " violate chi < 1/p";
      fail(msg.str());
    }
  }
}

double select_p(double chi, int n_eff) {
  KSLOG_REQUIRE(n_eff >= 2, ErrorCode::InvalidArgument, "n_eff must be at least 2");
  KSLOG_REQUIRE(chi >= 0.0 && std::isfinite(chi), ErrorCode::InvalidArgument, "chi must be nonnegative");
  const double lo = std::max(chi, 1.0);
  double hi;
  if (n_eff == 2) {
    hi = 2.0 * lo;
  } else {
    hi = critical_chi(n_eff);
    if (chi >= hi) {
      std::ostringstream msg;
      msg << "supercritical chi: chi = " << chi << " >= n/(n-2) = " << hi << " leaves no admissible p";
      throw Error(ErrorCode::Config, msg.str());
    }
  }
  return 1.0 / (0.5 * (lo + hi));
}

namespace {

double face_mean(double a, double b, FaceMean mean) {
  if (mean == FaceMean::Harmonic) return 2.0 * a * b / (a + b);
  return 0.5 * (a + b);
}

// Signed drift speed across a face (left -> right), without the 1/(1+eps u)
// factor of the upwind cell.
double drift(const Face& f, const Field& v, const Params& params) {
  const double vf = face_mean(v[f.left], v[f.right], params.v_face);
  return params.advection_sign * params.chi * (v[f.right] - v[f.left]) / (f.distance * vf);
}

}  // namespace

FaceFluxes chemotactic_flux(const Field& u, const Field& v, const Params& params) {
  require_same_grid(u, v);
  KSLOG_REQUIRE(v.min() > 0.0, ErrorCode::Invariant, "chemotactic flux requires v > 0");
  KSLOG_REQUIRE(params.eps >= 0.0, ErrorCode::InvalidArgument, "eps must be nonnegative");
  const auto faces = u.grid()->faces();
  FaceFluxes out;
  out.diffusive.resize(faces.size());
  out.advective.resize(faces.size());
  for (std::size_t k = 0; k < faces.size(); ++k) {
    const Face& f = faces[k];
    out.diffusive[k] = -f.trans() * (u[f.right] - u[f.left]);
    const double c = drift(f, v, params);
    const double up = c >= 0.0 ? u[f.left] : u[f.right];
    out.advective[k] = f.area * c * up / (1.0 + params.eps * up);
  }
  return out;
}

double advective_dt_limit(const Field& u, const Field& v, const Params& params) {
  const auto grid = u.grid();
  std::vector<double> out_rate(grid->size(), 0.0);
  for (const Face& f : grid->faces()) {
    const double c = drift(f, v, params);
    if (c > 0.0)
      out_rate[f.left] += f.area * c / (1.0 + params.eps * u[f.left]);
    else if (c < 0.0)
      out_rate[f.right] += f.area * (-c) / (1.0 + params.eps * u[f.right]);
  }
  const auto vol = grid->volumes();
  double rate = 0.0;
  for (std::size_t i = 0; i < out_rate.size(); ++i) rate = std::max(rate, out_rate[i] / vol[i]);
  if (rate == 0.0) return std::numeric_limits<double>::infinity();
  return params.cfl_safety / rate;
}

Stepper::Stepper(GridPtr grid, Params params)
    : grid_(std::move(grid)), params_(params), elliptic_(EllipticOperator::assemble(grid_, 1.0)) {}

StateSnapshot Stepper::initial_state(const Field& u0) {
  require_same_grid(u0, Field(grid_));
  KSLOG_REQUIRE(u0.min() >= 0.0, ErrorCode::InvalidArgument, "initial data must be nonnegative");
  KSLOG_REQUIRE(integrate(u0) > 0.0, ErrorCode::InvalidArgument, "initial data must have positive mass");
  StateSnapshot s;
  s.t = 0.0;
  s.u = u0;
  s.v = solve_v(elliptic_, u0, params_.elliptic_tol, &last_.elliptic);
  s.step_index = 0;
  return s;
}

StateSnapshot Stepper::advance(const StateSnapshot& s, double dt_cap) {
  // A cap within 1e-10 of the stability limit is taken as is so that callers
  // can land exactly on sample times.
  const double limit = std::min(params_.dt_max, advective_dt_limit(s.u, s.v, params_));
  const double dt = dt_cap <= limit * (1.0 + 1e-10) ? dt_cap : limit;
  KSLOG_REQUIRE(dt > 0.0, ErrorCode::InvalidArgument, "time step must be positive");

  // Explicit upwind drift.
  const auto faces = grid_->faces();
  const auto vol = grid_->volumes();
  Field star = s.u;
  if (params_.chi != 0.0) {
    const FaceFluxes flux = chemotactic_flux(s.u, s.v, params_);
    std::vector<double> net(grid_->size(), 0.0);
    for (std::size_t k = 0; k < faces.size(); ++k) {
      net[faces[k].left] += flux.advective[k];
      net[faces[k].right] -= flux.advective[k];
    }
    for (std::size_t i = 0; i < star.size(); ++i) star[i] -= dt * net[i] / vol[i];
  }

  // Implicit diffusion.
  if (!diffusion_ || diffusion_->diffusion() != dt) diffusion_ = EllipticOperator::assemble(grid_, dt);
  Field next = diffusion_->solve(star, 1e-12);

  // Floating-point undershoot hygiene.
  last_.clamped_cells = 0;
  const double umax = std::max(1.0, next.max());
  const double hard = -1e-13 * umax;
  double lowest = 0.0;
  for (std::size_t i = 0; i < next.size(); ++i) lowest = std::min(lowest, next[i]);
  if (lowest < 0.0) {
    if (lowest < hard && params_.undershoot == UndershootPolicy::Abort) {
      std::ostringstream msg;
      msg << "positivity violation: min u = " << lowest << " at t = " << s.t + dt;
      throw Error(ErrorCode::Invariant, msg.str());
    }
    const double before = integrate(next);
    for (std::size_t i = 0; i < next.size(); ++i) {
      if (next[i] < 0.0) {
        next[i] = 0.0;
        ++last_.clamped_cells;
      }
    }
    const double after = integrate(next);
    if (after > 0.0)
      for (std::size_t i = 0; i < next.size(); ++i) next[i] *= before / after;
  }

  if (!(next.max() <= params_.blowup_ceiling)) {
    std::ostringstream msg;
    msg << "blow-up suspected: max u = " << next.max() << " exceeds ceiling " << params_.blowup_ceiling
        << " at t = " << s.t + dt;
    throw Error(ErrorCode::BlowUp, msg.str());
  }

  StateSnapshot out;
  out.t = s.t + dt;
  out.step_index = s.step_index + 1;
  out.v = solve_v(elliptic_, next, params_.elliptic_tol, &last_.elliptic);
  out.u = std::move(next);
  KSLOG_REQUIRE(out.v.min() > 0.0, ErrorCode::Invariant, "v lost strict positivity");
  last_.dt = dt;
  return out;
}

StateSnapshot advance(const StateSnapshot& s, const Params& params) {
  Stepper stepper(s.u.grid(), params);
  return stepper.advance(s, params.T - s.t);
}

const char* to_string(BlowupState s) {
  switch (s) {
    case BlowupState::Stable:
      return "Stable";
    case BlowupState::Growing:
      return "Growing";
    case BlowupState::Ceiling:
      return "Ceiling";
  }
  return "?";
}

BlowupState detect_blowup(std::span<const double> times, std::span<const double> max_u, double ceiling,
                          double slope_threshold) {
  KSLOG_REQUIRE(times.size() == max_u.size() && max_u.size() >= 2, ErrorCode::InvalidArgument,
                "detect_blowup needs at least two (t, max u) samples");
  for (double m : max_u)
    if (!(m < ceiling)) return BlowupState::Ceiling;
  const double span = times.back() - times.front();
  if (span <= 0.0) return BlowupState::Stable;
  const double slope = (std::log(max_u.back()) - std::log(max_u.front())) / span;
  return slope > slope_threshold ? BlowupState::Growing : BlowupState::Stable;
}

}  // namespace kslog
