#include "kslog/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "kslog/error.hpp"

namespace kslog {

Domain Domain::interval(double a, double b) {
  KSLOG_REQUIRE(std::isfinite(a) && std::isfinite(b) && b > a, ErrorCode::InvalidArgument,
                "interval requires b > a");
  Domain d;
  d.kind = DomainKind::Interval;
  d.x0 = a;
  d.x1 = b;
  d.dim = 1;
  return d;
}

Domain Domain::rectangle(double ax, double bx, double ay, double by) {
  KSLOG_REQUIRE(bx > ax && by > ay, ErrorCode::InvalidArgument, "rectangle requires bx > ax and by > ay");
  Domain d;
  d.kind = DomainKind::Rectangle;
  d.x0 = ax;
  d.x1 = bx;
  d.y0 = ay;
  d.y1 = by;
  d.dim = 2;
  return d;
}

Domain Domain::radial_ball(double radius, int n) {
  KSLOG_REQUIRE(radius > 0.0 && std::isfinite(radius), ErrorCode::InvalidArgument, "ball radius must be positive");
  KSLOG_REQUIRE(n >= 2, ErrorCode::InvalidArgument, "radial ball requires dimension n >= 2");
  Domain d;
  d.kind = DomainKind::RadialBall;
  d.x0 = 0.0;
  d.x1 = radius;
  d.dim = n;
  return d;
}

double unit_ball_volume(int n) {
  return std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
}

double Domain::measure() const {
  switch (kind) {
    case DomainKind::Interval:
      return x1 - x0;
    case DomainKind::Rectangle:
      return (x1 - x0) * (y1 - y0);
    case DomainKind::RadialBall:
      return unit_ball_volume(dim) * std::pow(x1, dim);
  }
  return 0.0;
}

std::string Domain::describe() const {
  char buf[160];
  switch (kind) {
    case DomainKind::Interval:
      std::snprintf(buf, sizeof buf, "interval(%.17g,%.17g)", x0, x1);
      break;
    case DomainKind::Rectangle:
      std::snprintf(buf, sizeof buf, "rectangle(%.17g,%.17g,%.17g,%.17g)", x0, x1, y0, y1);
      break;
    case DomainKind::RadialBall:
      std::snprintf(buf, sizeof buf, "ball(R=%.17g,n=%d)", x1, dim);
      break;
  }
  return buf;
}

std::shared_ptr<const Grid> Grid::build(const Domain& domain, std::size_t nx, std::size_t ny) {
  KSLOG_REQUIRE(nx >= 4, ErrorCode::InvalidArgument, "resolution must be at least 4 cells per axis");
  // Re-run the domain constructors' checks for hand-assembled descriptors.
  switch (domain.kind) {
    case DomainKind::Interval:
      (void)Domain::interval(domain.x0, domain.x1);
      break;
    case DomainKind::Rectangle:
      (void)Domain::rectangle(domain.x0, domain.x1, domain.y0, domain.y1);
      KSLOG_REQUIRE(ny >= 4, ErrorCode::InvalidArgument, "resolution must be at least 4 cells per axis");
      break;
    case DomainKind::RadialBall:
      (void)Domain::radial_ball(domain.x1, domain.dim);
      KSLOG_REQUIRE(domain.x0 == 0.0, ErrorCode::InvalidArgument, "radial ball must start at r = 0");
      break;
  }

  std::shared_ptr<Grid> g(new Grid());
  g->domain_ = domain;
  g->nx_ = nx;
  g->hx_ = (domain.x1 - domain.x0) / static_cast<double>(nx);

  if (domain.kind == DomainKind::Rectangle) {
    g->ny_ = ny;
    g->hy_ = (domain.y1 - domain.y0) / static_cast<double>(ny);
    g->h_ = std::hypot(g->hx_, g->hy_);
    const double hx = g->hx_, hy = g->hy_;
    g->centers_.reserve(nx * ny);
    for (std::size_t j = 0; j < ny; ++j)
      for (std::size_t i = 0; i < nx; ++i)
        g->centers_.push_back({domain.x0 + (i + 0.5) * hx, domain.y0 + (j + 0.5) * hy});
    g->volumes_.assign(nx * ny, hx * hy);
    auto id = [nx](std::size_t i, std::size_t j) { return i + nx * j; };
    for (std::size_t j = 0; j < ny; ++j) {
      for (std::size_t i = 0; i + 1 < nx; ++i)
        g->faces_.push_back({id(i, j), id(i + 1, j), hy, hx, 0,
                             {domain.x0 + (i + 1) * hx, domain.y0 + (j + 0.5) * hy}});
      g->boundary_faces_.push_back({id(0, j), hy, 0});
      g->boundary_faces_.push_back({id(nx - 1, j), hy, 0});
    }
    for (std::size_t j = 0; j + 1 < ny; ++j)
      for (std::size_t i = 0; i < nx; ++i)
        g->faces_.push_back({id(i, j), id(i, j + 1), hx, hy, 1,
                             {domain.x0 + (i + 0.5) * hx, domain.y0 + (j + 1) * hy}});
    for (std::size_t i = 0; i < nx; ++i) {
      g->boundary_faces_.push_back({id(i, 0), hx, 1});
      g->boundary_faces_.push_back({id(i, ny - 1), hx, 1});
    }
    return g;
  }

  const double h = g->hx_;
  g->h_ = h;
  g->centers_.reserve(nx);
  for (std::size_t i = 0; i < nx; ++i) g->centers_.push_back({domain.x0 + (i + 0.5) * h, 0.0});

  if (domain.kind == DomainKind::Interval) {
    g->volumes_.assign(nx, h);
    for (std::size_t i = 0; i + 1 < nx; ++i)
      g->faces_.push_back({i, i + 1, 1.0, h, 0, {domain.x0 + (i + 1) * h, 0.0}});
    g->boundary_faces_.push_back({0, 1.0, 0});
    g->boundary_faces_.push_back({nx - 1, 1.0, 0});
    return g;
  }

  // Radial: exact shell volumes omega_n (r_{i+1}^n - r_i^n) so the volumes
  // telescope to the ball volume; face areas are sphere surfaces n omega_n r^{n-1}.
  const int n = domain.dim;
  const double wn = unit_ball_volume(n);
  g->volumes_.resize(nx);
  for (std::size_t i = 0; i < nx; ++i) {
    const double ri = i * h, ro = (i + 1) * h;
    g->volumes_[i] = wn * (std::pow(ro, n) - std::pow(ri, n));
  }
  for (std::size_t i = 0; i + 1 < nx; ++i) {
    const double rf = (i + 1) * h;
    g->faces_.push_back({i, i + 1, n * wn * std::pow(rf, n - 1), h, 0, {rf, 0.0}});
  }
  g->boundary_faces_.push_back({nx - 1, n * wn * std::pow(domain.x1, n - 1), 0});
  return g;
}

std::string Grid::descriptor() const {
  std::string s = domain_.describe() + ";nx=" + std::to_string(nx_);
  if (domain_.kind == DomainKind::Rectangle) s += ";ny=" + std::to_string(ny_);
  return s;
}

std::uint64_t Grid::hash() const {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : descriptor()) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

Field::Field(GridPtr grid, double value) : grid_(std::move(grid)) {
  KSLOG_REQUIRE(grid_ != nullptr, ErrorCode::InvalidArgument, "field requires a grid");
  values_.assign(grid_->size(), value);
}

Field::Field(GridPtr grid, std::vector<double> values) : grid_(std::move(grid)), values_(std::move(values)) {
  KSLOG_REQUIRE(grid_ != nullptr, ErrorCode::InvalidArgument, "field requires a grid");
  KSLOG_REQUIRE(values_.size() == grid_->size(), ErrorCode::InvalidArgument,
                "field length does not match the grid cell count");
}

double Field::min() const { return *std::min_element(values_.begin(), values_.end()); }
double Field::max() const { return *std::max_element(values_.begin(), values_.end()); }

void require_same_grid(const Field& a, const Field& b) {
  KSLOG_REQUIRE(a.grid() && b.grid(), ErrorCode::InvalidArgument, "field without grid");
  if (a.grid() == b.grid()) return;
  KSLOG_REQUIRE(a.grid()->hash() == b.grid()->hash(), ErrorCode::InvalidArgument, "fields live on different grids");
}

double integrate(const Field& f) {
  const auto vol = f.grid()->volumes();
  double sum = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) sum += f[i] * vol[i];
  return sum;
}

double gradient_sq_over_sq(const Field& f, double floor) {
  KSLOG_REQUIRE(floor > 0.0, ErrorCode::InvalidArgument, "floor must be positive");
  for (std::size_t i = 0; i < f.size(); ++i)
    KSLOG_REQUIRE(f[i] >= floor, ErrorCode::InvalidArgument, "field value below floor in gradient_sq_over_sq");
  double sum = 0.0;
  for (const Face& face : f.grid()->faces()) {
    const double fl = f[face.left], fr = f[face.right];
    const double mean = std::max(0.5 * (fl + fr), floor);
    const double diff = (fr - fl) / mean;
    sum += face.trans() * diff * diff;
  }
  return sum;
}

Field neumann_laplacian_apply(const Field& f) {
  Field out(f.grid());
  const auto vol = f.grid()->volumes();
  for (const Face& face : f.grid()->faces()) {
    const double flux = face.trans() * (f[face.right] - f[face.left]);
    out[face.left] += flux;
    out[face.right] -= flux;
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i] /= vol[i];
  return out;
}

}  // namespace kslog
