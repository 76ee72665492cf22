#pragma once

// Discrete screened operator  a I - c Delta_h  with Neumann fluxes. The
// elliptic step uses a = c = 1 (0 = Delta v - v + u); the stepper reuses the
// same machinery with c = dt for implicit diffusion.

#include <cstddef>
#include <vector>

#include "kslog/geometry.hpp"

namespace kslog {

struct SolveStats {
  int iterations = 0;
  double residual = 0.0;  // max-norm residual of the row-form equations
};

class EllipticOperator {
 public:
  /// Assembles I - diffusion * Delta_h. One-dimensional and radial grids get a
  /// tridiagonal factorization, rectangles a Jacobi-preconditioned CG.
  static EllipticOperator assemble(GridPtr grid, double diffusion = 1.0);

  const GridPtr& grid() const { return grid_; }
  double diffusion() const { return diffusion_; }
  double assembly_h() const { return grid_->h(); }
  bool direct() const { return direct_; }

  /// Row-form action (I - c Delta_h) x.
  Field apply(const Field& x) const;
  /// Row-form matrix entry (i, j); zero outside the stencil.
  double entry(std::size_t i, std::size_t j) const;

  /// Solves (I - c Delta_h) x = rhs to max-norm residual tol * |rhs|, plus
  /// the rounding floor 64 eps_mach |A| |x| of evaluating the residual.
  /// Throws NonConvergence with the achieved residual otherwise.
  Field solve(const Field& rhs, double tol, SolveStats* stats = nullptr) const;

 private:
  EllipticOperator() = default;

  double entry_sym(std::size_t i, std::size_t j) const;
  Field solve_tridiagonal(const Field& rhs) const;
  Field solve_cg(const Field& rhs, double tol, int& iterations) const;

  GridPtr grid_;
  double diffusion_ = 1.0;
  bool direct_ = false;

  // Symmetric (volume-scaled) form  V - c L  in CSR.
  std::vector<std::size_t> row_ptr_;
  std::vector<std::size_t> col_;
  std::vector<double> val_;
  std::vector<double> diag_;
  double norm_inf_ = 0.0;

  // Thomas factorization of the symmetric tridiagonal form.
  std::vector<double> lower_;    // sub-diagonal, lower_[i] couples i and i-1
  std::vector<double> pivot_;    // modified diagonal
};

/// Solves 0 = Delta_h v - v + u. Requires u >= 0 and tol in (1e-14, 1e-6).
Field solve_v(const EllipticOperator& op, const Field& u, double tol = 1e-10, SolveStats* stats = nullptr);

/// Componentwise minimum; returned even when nonpositive.
double min_v(const Field& v);

}  // namespace kslog
