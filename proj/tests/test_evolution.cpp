#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "acoustream/evolution.hpp"

using namespace acoustream;

namespace {

constexpr double kPi = std::numbers::pi;

double max_diff(const ScalarField& a, const ScalarField& b) { return (a - b).max_abs(); }

ScalarField sine_line(std::size_t n, double amp = 1.0, int k = 1) {
  const Grid g = Grid::line_y(n, 2.0 * kPi);
  return ScalarField::sample(g, [&](double, double y, double) { return amp * std::sin(k * y); });
}

// Cole-Hopf solution of u_t + u_y + a u u_y = nu u_yy with u(y, 0) = A sin y.
double cole_hopf(double A, double a, double nu, double y, double t) {
  const double r = a * A / (2.0 * nu);
  const double s = y - t;
  double th = std::cyl_bessel_i(0.0, r), thy = 0.0;
  for (int n = 1; n < 60; ++n) {
    const double c = 2.0 * std::cyl_bessel_i(static_cast<double>(n), r) * std::exp(-nu * n * n * t);
    th += c * std::cos(n * s);
    thy -= c * n * std::sin(n * s);
  }
  return -2.0 * nu / a * thy / th;
}

// Implicit inviscid solution u = A sin(y - t - a u t), by Newton.
double earnshaw(double A, double a, double y, double t) {
  double u = A * std::sin(y - t);
  for (int it = 0; it < 50; ++it) {
    const double ph = y - t - a * u * t;
    const double f = u - A * std::sin(ph);
    const double df = 1.0 + A * std::cos(ph) * a * t;
    const double du = f / df;
    u -= du;
    if (std::abs(du) < 1e-15) break;
  }
  return u;
}

}  // namespace

TEST(LinearAcoustic, Advection) {
  const auto p = DimensionlessParams::from_deltas(0.0, 0.0, 0, 0, 0, 0);
  const auto rho = sine_line(64, 1.0, 3);
  const double t = 0.7;
  const auto right = evolve_linear_acoustic(rho, p, Direction::rightward, t);
  const auto left = evolve_linear_acoustic(rho, p, Direction::leftward, t);
  const auto er = ScalarField::sample(rho.grid, [&](double, double y, double) { return std::sin(3 * (y - t)); });
  const auto el = ScalarField::sample(rho.grid, [&](double, double y, double) { return std::sin(3 * (y + t)); });
  EXPECT_LT(max_diff(right, er), 1e-12);
  EXPECT_LT(max_diff(left, el), 1e-12);
  EXPECT_DOUBLE_EQ(right.time_stamp, t);
}

TEST(LinearAcoustic, Decay) {
  const auto p = DimensionlessParams::from_beta(0.0, 0.0, 0.1);
  const auto rho = sine_line(64, 1.0, 2);
  const auto out = evolve_linear_acoustic(rho, p, Direction::rightward, 2.0);
  const double amp = std::exp(-0.5 * 0.1 * 4.0 * 2.0);
  const auto ex = ScalarField::sample(rho.grid, [&](double, double y, double) { return amp * std::sin(2 * (y - 2.0)); });
  EXPECT_LT(max_diff(out, ex), 1e-12);
}

TEST(LinearAcoustic, GaussianBeamDiffraction) {
  // rho0 = exp(-x^2) cos y; the envelope obeys A_t = -(i mu / 2) A_xx.
  const double mu = 0.1, t = 3.0;
  const auto p = DimensionlessParams::from_deltas(mu, 0.0, 0, 0, 0, 0);
  const Grid g = Grid::plane_xy(128, 32.0, 16, 2.0 * kPi);
  const auto rho = ScalarField::sample(g, [](double x, double y, double) { return std::exp(-x * x) * std::cos(y); });
  const auto out = evolve_linear_acoustic(rho, p, Direction::rightward, t);
  const std::complex<double> w(1.0, -2.0 * mu * t);
  const auto ex = ScalarField::sample(g, [&](double x, double y, double) {
    const auto A = std::exp(-x * x / w) / std::sqrt(w);
    return (A * std::polar(1.0, -(y - t))).real();
  });
  EXPECT_LT(max_diff(out, ex), 1e-10);
}

TEST(LinearAcoustic, TransverseMeanNote) {
  const auto p = DimensionlessParams::from_deltas(0.1, 0.0, 0, 0, 0, 0);
  const Grid g = Grid::plane_xy(16, 8.0, 16, 2.0 * kPi);
  const auto rho = ScalarField::sample(g, [](double x, double, double) { return std::cos(kPi * x / 4.0); });
  const auto out = evolve_linear_acoustic(rho, p, Direction::rightward, 1.0);
  ASSERT_FALSE(out.notes.empty());
  EXPECT_NE(out.notes[0].find("gauge"), std::string::npos);
  EXPECT_LT(max_diff(out, rho), 1e-12);
}

TEST(DiffusiveModes, EntropyDecay) {
  const auto p = DimensionlessParams::from_deltas(0.0, 0.0, 0.05, 0.0, 0.0, -0.02);
  const auto v = sine_line(32);
  const auto out = evolve_diffusive_mode(v, p, DiffusiveMode::entropy, 5.0);
  EXPECT_NEAR(out.max_abs(), std::exp(-0.02 * 5.0), 1e-3);
  EXPECT_LT(max_diff(out, std::exp(-0.1) * v), 1e-12);
}

TEST(DiffusiveModes, VorticalVarianceRate) {
  const double d12 = 0.03, t = 4.0;
  const auto p = DimensionlessParams::from_deltas(0.0, 0.0, 0.0, d12, 0.0, 0.0);
  const auto v = sine_line(32);
  const auto out = evolve_diffusive_mode(v, p, DiffusiveMode::vortical, t);
  const double v0 = v.l2() * v.l2(), v1 = out.l2() * out.l2();
  EXPECT_NEAR(std::log(v1 / v0) / t, -2.0 * d12, 1e-12);
}

TEST(DiffusiveModes, WrongSignRejected) {
  const auto v = sine_line(16);
  const auto pe = DimensionlessParams::from_deltas(0.0, 0.0, 0.0, 0.0, 0.1, 0.02);
  EXPECT_THROW(evolve_diffusive_mode(v, pe, DiffusiveMode::entropy, 1.0), StabilityError);
  auto pv = DimensionlessParams::from_deltas(0.0, 0.0, 0.1, 0.0, 0.0, 0.0);
  pv.delta12 = -0.01;
  EXPECT_THROW(evolve_diffusive_mode(v, pv, DiffusiveMode::vortical, 1.0), StabilityError);
}

TEST(Burgers, ColeHopf) {
  const double beta = 0.1, eps = 0.1, t = 2.0;
  const auto p = DimensionlessParams::from_beta(0.0, eps, beta);
  const double a = eps * p.eps_nl, nu = 0.5 * beta;
  const auto rho = sine_line(1024);
  EvolutionConfig cfg;
  cfg.dt = 1e-3;
  const auto run = evolve_burgers_run(rho, p, cfg, t);
  EXPECT_FALSE(run.shock_stop);
  const auto ex = ScalarField::sample(rho.grid, [&](double, double y, double) { return cole_hopf(1.0, a, nu, y, t); });
  EXPECT_LT(max_diff(run.field, ex), 1e-4);
}

TEST(Burgers, EarnshawBeforeShock) {
  const double eps = 0.1, t = 4.0;
  const auto p = DimensionlessParams::from_deltas(0.0, eps, 0, 0, 0, 0);
  const double a = eps * p.eps_nl;
  const auto rho = sine_line(1024);
  EvolutionConfig cfg;
  cfg.dt = 1e-3;
  const auto out = evolve_burgers(rho, p, cfg, t);
  const auto ex = ScalarField::sample(rho.grid, [&](double, double y, double) { return earnshaw(1.0, a, y, t); });
  EXPECT_LT(max_diff(out, ex), 1e-5);
}

TEST(Burgers, StopsAtShock) {
  const double eps = 0.1;
  const auto p = DimensionlessParams::from_deltas(0.0, eps, 0, 0, 0, 0);
  const auto rho = sine_line(256);
  EvolutionConfig cfg;
  cfg.dt = 2e-3;
  const double ts = 1.0 / (eps * p.eps_nl);
  const auto run = evolve_burgers_run(rho, p, cfg, 2.0 * ts);
  EXPECT_TRUE(run.shock_stop);
  EXPECT_LT(run.t_reached, 1.05 * ts);
  EXPECT_GT(run.t_reached, 0.5 * ts);
}

TEST(Burgers, CflGuard) {
  const auto p = DimensionlessParams::from_deltas(0.0, 0.2, 0.01, 0, 0, 0);
  const auto rho = sine_line(1024, 5.0);
  EvolutionConfig cfg;
  cfg.dt = 0.05;
  EXPECT_THROW(evolve_burgers(rho, p, cfg, 1.0), StabilityError);
}

TEST(Burgers, NeedsLineGrid) {
  const auto p = DimensionlessParams::from_beta(0.0, 0.1, 0.1);
  const Grid g = Grid::plane_xy(8, 8.0, 16, 2.0 * kPi);
  EXPECT_THROW(evolve_burgers(ScalarField(g), p, EvolutionConfig{}, 1.0), DomainError);
}

TEST(Equivalence, BurgersWithoutNonlinearityIsLinear) {
  const auto p0 = DimensionlessParams::from_beta(0.0, 0.0, 0.05);
  const auto rho = sine_line(128, 1.0, 2);
  EvolutionConfig cfg;
  cfg.dt = 0.01;
  EXPECT_LT(max_diff(evolve_burgers(rho, p0, cfg, 1.5), evolve_linear_acoustic(rho, p0, Direction::rightward, 1.5)),
            1e-12);
}

TEST(Equivalence, KzkOnLineIsBurgers) {
  const auto p = DimensionlessParams::from_beta(0.2, 0.05, 0.05);
  const auto rho = sine_line(256);
  EvolutionConfig cfg;
  cfg.dt = 5e-3;
  EXPECT_LT(max_diff(evolve_kzk(rho, p, cfg, Direction::rightward, 2.0), evolve_burgers(rho, p, cfg, 2.0)), 1e-13);
}

TEST(Equivalence, KzkWithoutNonlinearityIsLinear) {
  const auto p = DimensionlessParams::from_beta(0.1, 0.0, 0.02);
  const Grid g = Grid::plane_xy(64, 16.0, 32, 2.0 * kPi);
  const auto rho = ScalarField::sample(g, [](double x, double y, double) { return std::exp(-x * x) * std::sin(y); });
  EvolutionConfig cfg;
  cfg.dt = 0.1;
  EXPECT_LT(max_diff(evolve_kzk(rho, p, cfg, Direction::leftward, 2.0),
                     evolve_linear_acoustic(rho, p, Direction::leftward, 2.0)),
            1e-12);
}

TEST(Equivalence, SplitAndIntegratingFactorAgree) {
  const auto p = DimensionlessParams::from_beta(0.0, 0.1, 0.05);
  const auto rho = sine_line(256);
  EvolutionConfig a, b;
  a.dt = b.dt = 2e-3;
  b.scheme = Scheme::explicit_split;
  EXPECT_LT(max_diff(evolve_burgers(rho, p, a, 2.0), evolve_burgers(rho, p, b, 2.0)), 1e-5);
}

TEST(Equivalence, SecondOrderInTime) {
  const auto p = DimensionlessParams::from_beta(0.0, 0.1, 0.05);
  const auto rho = sine_line(256);
  EvolutionConfig fine;
  fine.dt = 1e-4;
  const auto ref = evolve_burgers(rho, p, fine, 2.0);
  EvolutionConfig c1, c2;
  c1.dt = 0.02;
  c2.dt = 0.01;
  const double e1 = max_diff(evolve_burgers(rho, p, c1, 2.0), ref);
  const double e2 = max_diff(evolve_burgers(rho, p, c2, 2.0), ref);
  EXPECT_GT(e1 / e2, 3.4);
  EXPECT_LT(e1 / e2, 4.6);
}

TEST(Coupled1D, ReducesToBurgersNonlinearity) {
  const auto p = DimensionlessParams::from_beta(0.0, 0.1, 0.0);
  const auto r1 = sine_line(64);
  const ScalarField zero(r1.grid);
  const auto rhs = coupled_1d_rhs(r1, zero, zero, p);
  const auto ex = -(p.eps_amp * p.eps_nl) * (r1 * dy(r1));
  EXPECT_LT(max_diff(rhs, ex), 1e-13);
}

TEST(Coupled1D, HandExpansionOnEightPoints) {
  auto p = DimensionlessParams::from_deltas(0.0, 0.2, 0, 0, 0, 0, -1.1, 0.3);
  const Grid g = Grid::line_y(8, 2.0 * kPi);
  const auto r1 = ScalarField::sample(g, [](double, double y, double) { return std::sin(y); });
  const auto r2 = ScalarField::sample(g, [](double, double y, double) { return 0.5 * std::cos(2 * y); });
  const auto r3 = ScalarField::sample(g, [](double, double y, double) { return 0.3 * std::sin(y); });
  const auto rhs = coupled_1d_rhs(r1, r2, r3, p);
  for (std::size_t j = 0; j < 8; ++j) {
    const double y = g.y(j);
    const double a = std::sin(y), ay = std::cos(y);
    const double b = 0.5 * std::cos(2 * y), by = -std::sin(2 * y);
    const double c = 0.3 * std::sin(y);
    const double v = a - b, vy = ay - by, pr = a + b, py = ay + by, rho = a + b + c;
    const double ex = 0.1 * (-v * vy + rho * py - v * py + (-1.1 * pr + 0.3 * rho) * vy);
    EXPECT_NEAR(rhs(0, 0, j), ex, 1e-13) << j;
  }
}

namespace {

FieldState planar_mode1(std::size_t n) {
  const Grid g = Grid::line_y(n, 2.0 * kPi);
  FieldState f(g);
  const auto r = ScalarField::sample(g, [](double, double y, double) { return std::sin(y); });
  f.set(Component::vy, r);
  f.set(Component::p, r);
  f.set(Component::rho, r);
  return f;
}

}  // namespace

TEST(FullSystem, LinearMatchesModalPropagation) {
  const auto p = DimensionlessParams::from_beta(0.0, 0.0, 0.01);
  const auto psi0 = decompose(planar_mode1(32), p).modes[0];
  EvolutionConfig cfg;
  cfg.dt = 0.1;
  const auto out = integrate_full_system(psi0, p, cfg, 2.0);
  const auto m0 = decompose(psi0, p).modes[0].component(Component::rho);
  const auto m1 = decompose(out, p).modes[0].component(Component::rho);
  // one-way propagator is exact to first order in beta; beta^2 t = 2e-4
  EXPECT_LT(max_diff(m1, evolve_linear_acoustic(m0, p, Direction::rightward, 2.0)), 1e-4);
  for (int j = 1; j < 5; ++j) EXPECT_LT(decompose(out, p).modes[j].max_abs(), 1e-3) << j;
}

TEST(FullSystem, ZeroStaysZero) {
  const auto p = DimensionlessParams::from_beta(0.0, 0.05, 0.01);
  const Grid g = Grid::line_y(32, 2.0 * kPi);
  EvolutionConfig cfg;
  cfg.dt = 0.05;
  EXPECT_EQ(integrate_full_system(FieldState(g), p, cfg, 1.0).max_abs(), 0.0);
}

TEST(FullSystem, MassMeanConserved) {
  const auto p = DimensionlessParams::from_beta(0.1, 0.05, 0.01);
  const Grid g = Grid::plane_xy(16, 2.0 * kPi, 32, 2.0 * kPi);
  FieldState f(g);
  f.set(Component::rho, ScalarField::sample(g, [](double x, double y, double) { return 0.2 + std::sin(y) * std::cos(x); }));
  f.set(Component::vy, ScalarField::sample(g, [](double x, double y, double) { return std::sin(y) + 0.1 * std::sin(x); }));
  f.set(Component::p, ScalarField::sample(g, [](double, double y, double) { return std::sin(y); }));
  EvolutionConfig cfg;
  cfg.dt = 0.02;
  cfg.dealias = true;
  auto mean = [](const FieldState& s) {
    double m = 0.0;
    for (double v : s[Component::rho]) m += v;
    return m / static_cast<double>(s[Component::rho].size());
  };
  const auto f0 = [&] {
    FieldState d = f;
    SpectralField s = forward_transform(d);
    for (int c = 0; c < 5; ++c) {
      auto sc = s.component(c);
      dealias(sc);
      s.set(c, sc);
    }
    return inverse_transform(s);
  }();
  const auto out = integrate_full_system(f, p, cfg, 1.0);
  EXPECT_NEAR(mean(out), mean(f0), 1e-13);
}

TEST(FullSystem, RejectsLargeEps) {
  const auto p = DimensionlessParams::from_beta(0.0, 0.15, 0.01);
  EXPECT_THROW(integrate_full_system(planar_mode1(16), p, EvolutionConfig{}, 0.1), DomainError);
}
