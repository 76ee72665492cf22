#include <gtest/gtest.h>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <filesystem>
#include <random>

#include "kslog/error.hpp"
#include "kslog/functionals.hpp"

using namespace kslog;

namespace {

constexpr double kPi = 3.141592653589793;

// Independent oracle: direct quadrature of p * sigma^(p-1) / (1 + eps sigma)
// over (0, s); tanh-sinh copes with the endpoint singularity.
double phi_oracle(double s, double p, double eps) {
  if (s == 0.0) return 0.0;
  boost::math::quadrature::tanh_sinh<double> ts;
  return ts.integrate([&](double x) { return p * std::pow(x, p - 1.0) / (1.0 + eps * x); }, 0.0, s);
}

}  // namespace

TEST(PhiEps, ClosedFormAtHalf) {
  EXPECT_EQ(phi_eps(0.0, 0.5, 0.3), 0.0);
  EXPECT_NEAR(phi_eps(1.0, 0.5, 1.0), kPi / 4.0, 1e-14);
  EXPECT_NEAR(phi_eps(4.0, 0.5, 1e-8), 2.0, 1e-6);
  for (double eps : {0.9, 0.25, 1e-3}) {
    for (double s : {1e-6, 0.3, 1.0, 17.0, 1e5}) {
      const double exact = std::atan(std::sqrt(eps * s)) / std::sqrt(eps);
      EXPECT_NEAR(phi_eps(s, 0.5, eps), exact, 1e-12 * exact);
    }
  }
}

TEST(PhiEps, MatchesQuadratureForGeneralP) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> P(0.05, 0.95), E(-6.0, -0.05), S(-4.0, 4.0);
  for (int k = 0; k < 200; ++k) {
    const double p = P(rng), eps = std::pow(10.0, E(rng)), s = std::pow(10.0, S(rng));
    const double ref = phi_oracle(s, p, eps);
    EXPECT_NEAR(phi_eps(s, p, eps), ref, 1e-10 * ref) << "s=" << s << " p=" << p << " eps=" << eps;
  }
}

TEST(PhiEps, BoundsAndMonotonicity) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> P(0.05, 0.95), E(-8.0, -0.01), S(-5.0, 6.0);
  for (int k = 0; k < 1000; ++k) {
    const double p = P(rng), eps = std::pow(10.0, E(rng)), s = std::pow(10.0, S(rng));
    const double f = phi_eps(s, p, eps);
    EXPECT_GE(f, 0.0);
    EXPECT_LE(f, std::pow(s, p) * (1.0 + 1e-14));
    EXPECT_GE(phi_eps(1.1 * s, p, eps), f);
    EXPECT_LE(phi_eps(s, p, 1.1 * std::min(eps, 0.9)), f * (1.0 + 1e-14));
  }
}

TEST(PhiEps, ConvergesMonotonicallyToPower) {
  for (double p : {0.2, 0.5, 2.0 / 3.0}) {
    for (double s : {0.5, 3.0, 100.0}) {
      double prev = INFINITY;
      for (int k = 1; k <= 20; ++k) {
        const double gap = std::abs(phi_eps(s, p, std::ldexp(1.0, -k)) - std::pow(s, p));
        EXPECT_LT(gap, prev);
        prev = gap;
      }
      EXPECT_LT(prev, 1e-3 * std::pow(s, p));
    }
  }
  EXPECT_DOUBLE_EQ(phi_eps(9.0, 0.5, 0.0), 3.0);
}

TEST(SelectR, WindowMidpoints) {
  EXPECT_NEAR(select_r(0.9, 3), 1.2125, 1e-14);
  EXPECT_NEAR(select_r(0.5, 2), 1.25, 1e-14);
  EXPECT_NEAR(select_r(0.35, 3), 1.00625, 1e-14);
  EXPECT_THROW(select_r(0.3, 3), Error);  // 3 * 1.3 / 4 < 1
  EXPECT_THROW(select_r(1.0, 2), Error);
}

TEST(CothBound, Values) {
  EXPECT_NEAR(coth_bound(1.0, 4.0, 1.0), 2.0 * (std::exp(4.0) + 1.0) / (std::exp(4.0) - 1.0), 1e-14);
  EXPECT_NEAR(coth_bound(1.0, 4.0, 1.0), 2.0746294, 1e-7);
  EXPECT_NEAR(coth_bound(1.0, 1.0, 50.0), 1.0, 1e-15);
  // small argument: ~ 1 / (a t)
  EXPECT_NEAR(coth_bound(2.0, 3.0, 1e-9) * 2.0 * 1e-9, 1.0, 1e-9);
  double prev = INFINITY;
  for (double t = 0.01; t < 5.0; t *= 1.3) {
    const double c = coth_bound(4.0, 1.0, t);
    EXPECT_LT(c, prev);
    prev = c;
  }
  EXPECT_THROW(coth_bound(0.0, 1.0, 1.0), Error);
}

TEST(Riccati, LargeDataRespectsBound) {
  std::vector<double> times;
  for (double t = 1e-6; t < 5.0; t *= 1.2) times.push_back(t);
  const auto traj = integrate_riccati(1.0, 1.0, 1e-6, 1e6, times);
  EXPECT_TRUE(ode_comparison_check(1.0, 1.0, traj));
}

TEST(Riccati, ExtremalSolutionAttainsBound) {
  for (auto [a, b] : {std::pair{1.0, 1.0}, std::pair{1.0, 4.0}, std::pair{4.0, 1.0}}) {
    const double t0 = 1e-3;
    std::vector<double> times;
    for (double t = t0; t < 4.0; t *= 1.25) times.push_back(t);
    const auto traj = integrate_riccati(a, b, t0, coth_bound(a, b, t0), times);
    for (const auto& s : traj) EXPECT_NEAR(s.y / coth_bound(a, b, s.t), 1.0, 1e-6) << a << "," << b << " t=" << s.t;
  }
}

TEST(Riccati, FromZeroApproachesEquilibriumFromBelow) {
  std::vector<double> times{0.0, 0.5, 1.0, 2.0, 5.0, 10.0};
  const auto traj = integrate_riccati(1.0, 1.0, 0.0, 0.0, times);
  for (const auto& s : traj) {
    EXPECT_NEAR(s.y, std::tanh(s.t), 1e-9);
    EXPECT_LT(s.y, 1.0);
  }
  EXPECT_TRUE(ode_comparison_check(1.0, 1.0, traj));
  // A trajectory above the bound is rejected.
  std::vector<OdeSample> bad{{1.0, 2.0}};
  EXPECT_FALSE(ode_comparison_check(1.0, 1.0, bad));
}

TEST(Integrands, VanishOnConstantState) {
  const auto g = Grid::build(Domain::interval(0, kPi), 32);
  const Field c(g, 2.0);
  EXPECT_EQ(grad_power_sq(c, 0.5), 0.0);
  EXPECT_EQ(drift_square(c, c, 0.5), 0.0);
  EXPECT_EQ(power_grad_log_v_sq(c, c, 0.5), 0.0);
  EXPECT_NEAR(power_over_v(c, c, 0.5), std::pow(2.0, 1.5) / 2.0 * kPi, 1e-12);
  EXPECT_NEAR(power_integral(c, 0.7), std::pow(2.0, 0.7) * kPi, 1e-12);
  EXPECT_NEAR(log_integral(c, kPositivityFloor), std::log(2.0) * kPi, 1e-12);
}

TEST(Integrands, GradPowerSquareConverges) {
  // u = (2 + cos x)^2, p = 1: |grad u^(1/2)|^2 = sin^2 x, integral pi / 2.
  double e_prev = 0.0;
  for (std::size_t n : {32, 64, 128}) {
    const auto g = Grid::build(Domain::interval(0, kPi), n);
    const Field u = sample(g, [](const Point& x) { return std::pow(2.0 + std::cos(x[0]), 2); });
    const double e = std::abs(grad_power_sq(u, 1.0) - kPi / 2.0);
    if (e_prev > 0.0) EXPECT_GT(e_prev / e, 3.5);
    e_prev = e;
  }
}

TEST(Integrands, LogIntegralFloors) {
  const auto g = Grid::build(Domain::interval(0, 1), 10);
  Field u(g, 1.0);
  u[3] = 0.0;
  std::size_t floored = 0;
  const double v = log_integral(u, 1e-300, &floored);
  EXPECT_EQ(floored, 1u);
  EXPECT_NEAR(v, 0.1 * std::log(1e-300), 1e-9);
}

TEST(Ledger, ConstantStateRows) {
  const auto g = Grid::build(Domain::interval(0, kPi), 64);
  const double c = 3.0, p = 0.5, dt = 0.01;
  FunctionalLedger L(p, 1.25, 0.1);
  StateSnapshot s{0.0, Field(g, c), Field(g, c), 0};
  for (int k = 0; k < 5; ++k) {
    s.t = k * dt;
    L.record(s, dt);
  }
  const auto& r = L.rows().back();
  EXPECT_NEAR(r.mass_u, c * kPi, 1e-12);
  EXPECT_NEAR(r.mass_v, c * kPi, 1e-12);
  EXPECT_EQ(r.min_v, c);
  EXPECT_EQ(r.max_u, c);
  EXPECT_EQ(r.lemma35, 0.0);
  EXPECT_NEAR(r.entropy_low, kPi * std::log(c), 1e-12);
  EXPECT_EQ(r.A1, 0.0);
  EXPECT_EQ(r.A2, 0.0);
  EXPECT_EQ(r.A4, 0.0);
  // u^(p+1)/v = c^p
  EXPECT_NEAR(r.A3, 5 * dt * std::pow(c, p) * kPi, 1e-12);
  EXPECT_NEAR(r.A5, 5 * dt * std::pow(c, 1.25) * kPi, 1e-12);
  EXPECT_NEAR(r.acc_phi, 5 * dt * kPi * std::atan(std::sqrt(0.1 * c)) / std::sqrt(0.1), 1e-11);
}

TEST(Ledger, AccumulatorsNondecreasingAndA5Disabled) {
  const auto g = Grid::build(Domain::interval(0, kPi), 32);
  FunctionalLedger L(0.5, NAN, 0.1);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> U(0.1, 5.0);
  for (int k = 0; k < 10; ++k) {
    Field u(g), v(g);
    for (std::size_t i = 0; i < u.size(); ++i) {
      u[i] = U(rng);
      v[i] = U(rng);
    }
    L.record(StateSnapshot{0.1 * k, u, v, k}, 0.1);
  }
  const auto& rows = L.rows();
  for (std::size_t k = 1; k < rows.size(); ++k) {
    EXPECT_GE(rows[k].A1, rows[k - 1].A1);
    EXPECT_GE(rows[k].A2, rows[k - 1].A2);
    EXPECT_GE(rows[k].A3, rows[k - 1].A3);
    EXPECT_GE(rows[k].A4, rows[k - 1].A4);
    EXPECT_TRUE(std::isnan(rows[k].A5));
  }
  EXPECT_THROW(L.record(StateSnapshot{1.0, Field(g, 1.0), Field(g, 1.0), 0}, -1.0), Error);
}

TEST(Ledger, CsvRoundTrip) {
  const auto g = Grid::build(Domain::interval(0, kPi), 16);
  FunctionalLedger L(0.5, 1.25, 0.1);
  for (int k = 0; k < 3; ++k)
    L.record(StateSnapshot{0.1 * k, sample(g, [k](const Point& x) { return 1.0 + k + std::cos(x[0]); }),
                           Field(g, 2.0 + k), k},
             0.1);
  const auto path = std::filesystem::temp_directory_path() / "kslog_ledger_roundtrip.csv";
  L.write_csv(path);
  const auto back = FunctionalLedger::read_csv(path);
  ASSERT_EQ(back.size(), 3u);
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_EQ(back[k].t, L.rows()[k].t);
    EXPECT_EQ(back[k].mass_u, L.rows()[k].mass_u);
    EXPECT_EQ(back[k].A2, L.rows()[k].A2);
    EXPECT_EQ(back[k].A5, L.rows()[k].A5);
    EXPECT_EQ(back[k].entropy_low, L.rows()[k].entropy_low);
  }
  std::filesystem::remove(path);
}
