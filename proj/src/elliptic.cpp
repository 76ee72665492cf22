#include "kslog/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "kslog/error.hpp"

namespace kslog {

EllipticOperator EllipticOperator::assemble(GridPtr grid, double diffusion) {
  KSLOG_REQUIRE(grid != nullptr, ErrorCode::InvalidArgument, "assemble requires a grid");
  KSLOG_REQUIRE(diffusion >= 0.0 && std::isfinite(diffusion), ErrorCode::InvalidArgument,
                "diffusion coefficient must be nonnegative");
  EllipticOperator op;
  op.grid_ = grid;
  op.diffusion_ = diffusion;
  const std::size_t n = grid->size();
  const auto vol = grid->volumes();

  std::vector<std::vector<std::pair<std::size_t, double>>> rows(n);
  op.diag_.assign(vol.begin(), vol.end());
  for (const Face& f : grid->faces()) {
    const double t = diffusion * f.trans();
    op.diag_[f.left] += t;
    op.diag_[f.right] += t;
    rows[f.left].emplace_back(f.right, -t);
    rows[f.right].emplace_back(f.left, -t);
  }
  op.row_ptr_.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    rows[i].emplace_back(i, op.diag_[i]);
    std::sort(rows[i].begin(), rows[i].end());
    op.row_ptr_[i + 1] = op.row_ptr_[i] + rows[i].size();
    for (auto [j, a] : rows[i]) {
      op.col_.push_back(j);
      op.val_.push_back(a);
    }
  }

  // Row-form infinity norm: sum_j |a_ij| / vol_i.
  op.norm_inf_ = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double r = 0.0;
    for (std::size_t k = op.row_ptr_[i]; k < op.row_ptr_[i + 1]; ++k) r += std::abs(op.val_[k]);
    op.norm_inf_ = std::max(op.norm_inf_, r / vol[i]);
  }

  op.direct_ = grid->domain().kind != DomainKind::Rectangle;
  if (op.direct_) {
    op.lower_.assign(n, 0.0);
    op.pivot_.assign(n, 0.0);
    op.pivot_[0] = op.diag_[0];
    for (std::size_t i = 1; i < n; ++i) {
      const double off = op.entry_sym(i, i - 1);
      op.lower_[i] = off / op.pivot_[i - 1];
      op.pivot_[i] = op.diag_[i] - op.lower_[i] * off;
    }
  }
  return op;
}

double EllipticOperator::entry_sym(std::size_t i, std::size_t j) const {
  for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
    if (col_[k] == j) return val_[k];
  return 0.0;
}

double EllipticOperator::entry(std::size_t i, std::size_t j) const {
  return entry_sym(i, j) / grid_->volumes()[i];
}

Field EllipticOperator::apply(const Field& x) const {
  require_same_grid(x, Field(grid_));
  Field y(grid_);
  const auto vol = grid_->volumes();
  for (std::size_t i = 0; i < y.size(); ++i) {
    double s = 0.0;
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += val_[k] * x[col_[k]];
    y[i] = s / vol[i];
  }
  return y;
}

Field EllipticOperator::solve_tridiagonal(const Field& rhs) const {
  const std::size_t n = grid_->size();
  const auto vol = grid_->volumes();
  std::vector<double> z(n);
  z[0] = vol[0] * rhs[0];
  for (std::size_t i = 1; i < n; ++i) z[i] = vol[i] * rhs[i] - lower_[i] * z[i - 1];
  Field x(grid_);
  x[n - 1] = z[n - 1] / pivot_[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = (z[i] - entry_sym(i, i + 1) * x[i + 1]) / pivot_[i];
  return x;
}

Field EllipticOperator::solve_cg(const Field& rhs, double tol, int& iterations) const {
  const std::size_t n = grid_->size();
  const auto vol = grid_->volumes();
  std::vector<double> b(n), x(n, 0.0), r(n), z(n), p(n), q(n);
  double bnorm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    b[i] = vol[i] * rhs[i];
    bnorm += b[i] * b[i];
    x[i] = rhs[i];  // constants are exact; a good initial guess in general
  }
  bnorm = std::sqrt(bnorm);
  auto matvec = [&](const std::vector<double>& in, std::vector<double>& out) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += val_[k] * in[col_[k]];
      out[i] = s;
    }
  };
  matvec(x, q);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - q[i];
  double rz = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    z[i] = r[i] / diag_[i];
    p[i] = z[i];
    rz += r[i] * z[i];
  }
  const int max_iter = static_cast<int>(10 * n + 100);
  iterations = 0;
  if (bnorm == 0.0) return Field(grid_, 0.0);
  for (; iterations < max_iter; ++iterations) {
    double rnorm = 0.0;
    for (double ri : r) rnorm += ri * ri;
    if (std::sqrt(rnorm) <= tol * bnorm) break;
    matvec(p, q);
    double pq = 0.0;
    for (std::size_t i = 0; i < n; ++i) pq += p[i] * q[i];
    const double alpha = rz / pq;
    double rz_new = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * q[i];
      z[i] = r[i] / diag_[i];
      rz_new += r[i] * z[i];
    }
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  return Field(grid_, std::move(x));
}

Field EllipticOperator::solve(const Field& rhs, double tol, SolveStats* stats) const {
  require_same_grid(rhs, Field(grid_));
  int iterations = 0;
  Field x = direct_ ? solve_tridiagonal(rhs) : solve_cg(rhs, 0.05 * tol, iterations);
  const Field ax = apply(x);
  double res = 0.0, scale = 0.0, xmax = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    res = std::max(res, std::abs(ax[i] - rhs[i]));
    scale = std::max(scale, std::abs(rhs[i]));
    xmax = std::max(xmax, std::abs(x[i]));
  }
  // Evaluating the residual itself costs about eps_mach ||A|| ||x||, which
  // grows like 1/h^2; tolerances below that floor are not certifiable.
  const double floor = 64.0 * std::numeric_limits<double>::epsilon() * norm_inf_ * xmax;
  if (stats) {
    stats->iterations = iterations;
    stats->residual = res;
  }
  if (res > tol * scale + floor) {
    std::ostringstream msg;
    msg << "elliptic solve did not converge: residual " << res << " > " << tol << " * " << scale << " after "
        << iterations << " iterations";
    throw Error(ErrorCode::NonConvergence, msg.str());
  }
  return x;
}

Field solve_v(const EllipticOperator& op, const Field& u, double tol, SolveStats* stats) {
  KSLOG_REQUIRE(tol > 1e-14 && tol < 1e-6, ErrorCode::InvalidArgument, "solve_v tolerance must lie in (1e-14, 1e-6)");
  KSLOG_REQUIRE(op.diffusion() == 1.0, ErrorCode::InvalidArgument, "solve_v requires the operator I - Delta_h");
  for (std::size_t i = 0; i < u.size(); ++i)
    KSLOG_REQUIRE(u[i] >= 0.0, ErrorCode::InvalidArgument, "solve_v requires a nonnegative source");
  return op.solve(u, tol, stats);
}

double min_v(const Field& v) { return v.min(); }

}  // namespace kslog
