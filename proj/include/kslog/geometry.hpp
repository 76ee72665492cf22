#pragma once

// Uniform finite-volume grids on intervals, rectangles and radially symmetric
// balls, with the conservative two-point operators used by every other module.

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace kslog {

enum class DomainKind { Interval, Rectangle, RadialBall };

struct Domain {
  DomainKind kind = DomainKind::Interval;
  double x0 = 0.0, x1 = 1.0;  // interval ends / rectangle x-range / [0, R] for balls
  double y0 = 0.0, y1 = 1.0;  // rectangle only
  int dim = 1;                // ambient dimension n (2 for rectangles)

  static Domain interval(double a, double b);
  static Domain rectangle(double ax, double bx, double ay, double by);
  static Domain radial_ball(double radius, int n);

  double radius() const { return x1; }
  /// Analytic measure |Omega| (n-ball volume for radial balls).
  double measure() const;
  std::string describe() const;
};

/// Volume of the unit n-ball, pi^(n/2) / Gamma(n/2 + 1).
double unit_ball_volume(int n);

using Point = std::array<double, 2>;

/// An interior face between cells `left` < `right`; the normal points from
/// left to right along `axis`.
struct Face {
  std::size_t left = 0;
  std::size_t right = 0;
  double area = 0.0;
  double distance = 0.0;
  int axis = 0;
  Point midpoint{};

  /// Two-point transmissibility area / distance.
  double trans() const { return area / distance; }
  /// Diamond volume area * distance carried by this face.
  double diamond() const { return area * distance; }
};

struct BoundaryFace {
  std::size_t cell = 0;
  double area = 0.0;
  int axis = 0;
};

class Grid {
 public:
  /// Builds a uniform grid; `nx` cells along x (or r), `ny` along y for
  /// rectangles. Throws on fewer than 4 cells per axis or bad domains.
  static std::shared_ptr<const Grid> build(const Domain& domain, std::size_t nx, std::size_t ny = 0);

  const Domain& domain() const { return domain_; }
  std::size_t size() const { return volumes_.size(); }
  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }
  std::span<const Point> centers() const { return centers_; }
  std::span<const double> volumes() const { return volumes_; }
  std::span<const Face> faces() const { return faces_; }
  std::span<const BoundaryFace> boundary_faces() const { return boundary_faces_; }
  /// Max cell diameter.
  double h() const { return h_; }
  double spacing(int axis) const { return axis == 0 ? hx_ : hy_; }
  double measure() const { return domain_.measure(); }
  bool radial() const { return domain_.kind == DomainKind::RadialBall; }

  /// Canonical text descriptor and its FNV-1a 64-bit hash; identifies the grid
  /// in snapshot files.
  std::string descriptor() const;
  std::uint64_t hash() const;

 private:
  Grid() = default;

  Domain domain_;
  std::size_t nx_ = 0, ny_ = 0;
  double hx_ = 0.0, hy_ = 0.0, h_ = 0.0;
  std::vector<Point> centers_;
  std::vector<double> volumes_;
  std::vector<Face> faces_;
  std::vector<BoundaryFace> boundary_faces_;
};

using GridPtr = std::shared_ptr<const Grid>;

/// Cell-averaged values on a grid.
class Field {
 public:
  Field() = default;
  explicit Field(GridPtr grid, double value = 0.0);
  Field(GridPtr grid, std::vector<double> values);

  const GridPtr& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  double min() const;
  double max() const;

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

/// Sum_i f_i vol_i.
double integrate(const Field& f);

/// Face-based discrete integral of |grad f|^2 / f^2. Face values of f are the
/// arithmetic mean, with the denominator clamped at `floor`. Throws if any
/// f_i < floor.
double gradient_sq_over_sq(const Field& f, double floor);

/// Two-point Neumann Laplacian: divergence of face fluxes, zero flux across
/// boundary faces.
Field neumann_laplacian_apply(const Field& f);

/// Samples a point function at cell centers.
template <class Fn>
Field sample(const GridPtr& grid, Fn&& fn) {
  Field out(grid);
  const auto c = grid->centers();
  for (std::size_t i = 0; i < grid->size(); ++i) out[i] = fn(c[i]);
  return out;
}

void require_same_grid(const Field& a, const Field& b);

}  // namespace kslog
