#pragma once

// Time integration: exact per-mode linear propagators, Burgers and KZK
// one-mode equations, the coupled 1-D right side and a direct integrator
// of the full dimensionless system.

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "error.hpp"
#include "grid.hpp"
#include "material.hpp"
#include "modes.hpp"
#include "quadratic.hpp"
#include "spectral.hpp"

namespace acoustream {

enum class Scheme { explicit_split, integrating_factor };
enum class Direction { rightward, leftward };
enum class DiffusiveMode { entropy, vortical };

struct EvolutionConfig {
  double dt = 1e-3;
  double t_end = 1.0;
  Scheme scheme = Scheme::integrating_factor;
  bool dealias = true;
  double cfl_safety = 0.5;
  // Front steeper than this many grid cells per unit amplitude counts as a
  // shock for inviscid runs; see evolve_kzk.
  double shock_cells = 4.0;
  // integrate_full_system refuses eps_amp above this.
  double max_eps = 0.1;

  void validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("evolution: dt must be > 0");
    if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw DomainError("evolution: t_end must be >= 0");
    if (!(cfl_safety > 0.0 && cfl_safety <= 1.0))
      throw DomainError("evolution: cfl_safety must lie in (0, 1]");
  }
};

inline double direction_sign(Direction d) { return d == Direction::rightward ? 1.0 : -1.0; }

namespace detail {

inline std::size_t step_count(double t, double dt) {
  if (t <= 0.0) return 0;
  return static_cast<std::size_t>(std::ceil(t / dt - 1e-12));
}

// exp(a t) symbol of the one-way paraxial operator; the diffraction term
// is gauged to zero on ky = 0.
inline cplx one_way_rate(double kx, double ky, double kz, double mu, double beta, double sign) {
  if (ky == 0.0) return cplx(0.0, 0.0);
  const double disp = ky + mu * (kx * kx + kz * kz) / (2.0 * ky);
  return cplx(-0.5 * beta * ky * ky, sign * disp);
}

inline bool has_transverse_mean(const SpectralScalar& s) {
  const Grid& g = s.grid;
  double mean = 0.0, total = 0.0;
  for (std::size_t iz = 0; iz < g.nz; ++iz)
    for (std::size_t ix = 0; ix < g.nx; ++ix)
      for (std::size_t iy = 0; iy < g.nyc(); ++iy) {
        const double e = detail::parseval_weight(g, iy) * std::norm(s(iz, ix, iy));
        total += e;
        if (iy == 0 && (ix != 0 || iz != 0)) mean += e;
      }
  return total > 0.0 && mean > kGaugeTolerance * total;
}

}  // namespace detail

// d rho/dt +- d rho/dy +- (mu/2) int Delta_perp rho dy - (beta/2) rho_yy = 0,
// solved exactly per wavevector.
inline ScalarField evolve_linear_acoustic(const ScalarField& rho, const DimensionlessParams& p,
                                          Direction dir, double t) {
  SpectralScalar s = forward(rho);
  if (p.mu > 0.0 && detail::has_transverse_mean(s))
    s.notes.push_back("gauge: diffraction term set to zero on the ky=0 plane");
  const double sg = direction_sign(dir);
  apply_multiplier(
      s,
      [&](double kx, double ky, double kz) {
        return std::exp(detail::one_way_rate(kx, ky, kz, p.mu, p.beta_total, sg) * t);
      },
      false, true, false);
  // the y Nyquist plane has no real propagator and is dropped
  auto out = inverse(s);
  out.time_stamp = rho.time_stamp + t;
  return out;
}

// Entropy: decays as exp(delta22 ky^2 t) for delta22 < 0, the sign fixed
// by the entropy root. Vortical: exp(-delta12 ky^2 t).
inline ScalarField evolve_diffusive_mode(const ScalarField& v, const DimensionlessParams& p,
                                         DiffusiveMode which, double t) {
  double rate = 0.0;  // multiplier exp(rate ky^2 t)
  if (which == DiffusiveMode::entropy) {
    if (p.delta22 > 0.0) throw StabilityError("entropy mode grows: delta22 > 0");
    rate = p.delta22;
  } else {
    if (p.delta12 < 0.0) throw StabilityError("vortical mode grows: delta12 < 0");
    rate = -p.delta12;
  }
  SpectralScalar s = forward(v);
  apply_multiplier(
      s, [&](double, double ky, double) { return cplx(std::exp(rate * ky * ky * t), 0.0); }, false,
      false, false);
  auto out = inverse(s);
  out.time_stamp = v.time_stamp + t;
  return out;
}

struct NonlinearRun {
  ScalarField field;
  double t_reached = 0.0;
  std::size_t steps = 0;
  bool shock_stop = false;
};

// KZK-type equation with the one-way linear part and nonlinearity
// -+ eps E rho rho_y. With mu = 0 on a 1-D grid this is Burgers.
inline NonlinearRun evolve_kzk_run(const ScalarField& rho, const DimensionlessParams& p,
                                   const EvolutionConfig& cfg, Direction dir, double t) {
  cfg.validate();
  const Grid& g = rho.grid;
  const double sg = direction_sign(dir);
  const double a = p.eps_amp * p.eps_nl;
  const std::size_t n = detail::step_count(t, cfg.dt);
  const double h = n ? t / static_cast<double>(n) : 0.0;

  SpectralScalar u = forward(rho);
  std::vector<std::string> notes = rho.notes;
  if (p.mu > 0.0 && detail::has_transverse_mean(u))
    notes.push_back("gauge: diffraction term set to zero on the ky=0 plane");
  if (cfg.dealias && a != 0.0) dealias(u);

  const std::size_t ns = g.spectral_size();
  std::vector<cplx> E(ns), Eh(ns);
  for (std::size_t iz = 0; iz < g.nz; ++iz)
    for (std::size_t ix = 0; ix < g.nx; ++ix)
      for (std::size_t iy = 0; iy < g.nyc(); ++iy) {
        const std::size_t m = g.spectral_index(iz, ix, iy);
        const cplx r = detail::one_way_rate(g.kx(ix), g.ky(iy), g.kz(iz), p.mu, p.beta_total, sg);
        const bool nyq = Grid::is_nyquist(iy, g.ny);
        E[m] = nyq ? cplx(0.0) : std::exp(r * h);
        Eh[m] = nyq ? cplx(0.0) : std::exp(r * 0.5 * h);
      }

  // N(u) = -sg a d/dy (u^2 / 2)
  auto N = [&](const SpectralScalar& us) {
    ScalarField f = inverse(us, 1e-8);
    for (double& x : f.data) x = 0.5 * x * x;
    SpectralScalar q = apply_operator(forward(f), SpectralOp::d_dy);
    for (auto& c : q.data) c *= -sg * a;
    if (cfg.dealias) dealias(q);
    return q;
  };

  auto cfl_check = [&](const SpectralScalar& us) {
    if (a == 0.0) return;
    const double umax = inverse(us, 1e-8).max_abs();
    const double c = h * std::abs(a) * umax / g.dy();
    if (c > cfg.cfl_safety)
      throw StabilityError("nonlinear CFL number " + std::to_string(c) + " exceeds cfl_safety " +
                           std::to_string(cfg.cfl_safety) + " (dt * eps E max|rho| / dy)");
  };

  NonlinearRun run;
  std::size_t k = 0;
  for (; k < n; ++k) {
    if (a != 0.0) {
      const ScalarField cur = inverse(u, 1e-8);
      if (p.beta_total == 0.0) {
        const ScalarField d = dy(cur);
        const double amp = std::max(cur.max_abs(), 1e-300);
        if (d.max_abs() * g.dy() * cfg.shock_cells > amp) {
          run.shock_stop = true;
          notes.push_back("stopped at shock: steepest front spans fewer than " +
                          std::to_string(cfg.shock_cells) + " cells at t = " +
                          std::to_string(static_cast<double>(k) * h));
          break;
        }
      }
      cfl_check(u);
    }
    if (a == 0.0) {
      for (std::size_t m = 0; m < ns; ++m) u.data[m] *= E[m];
      continue;
    }
    if (cfg.scheme == Scheme::integrating_factor) {
      // Heun in the integrating-factor frame
      const SpectralScalar n0 = N(u);
      SpectralScalar us = u;
      for (std::size_t m = 0; m < ns; ++m) us.data[m] = E[m] * (u.data[m] + h * n0.data[m]);
      const SpectralScalar n1 = N(us);
      for (std::size_t m = 0; m < ns; ++m)
        u.data[m] = E[m] * u.data[m] + 0.5 * h * (E[m] * n0.data[m] + n1.data[m]);
    } else {
      // Strang: half linear, Heun on the nonlinear part, half linear
      for (std::size_t m = 0; m < ns; ++m) u.data[m] *= Eh[m];
      const SpectralScalar n0 = N(u);
      SpectralScalar us = u;
      for (std::size_t m = 0; m < ns; ++m) us.data[m] += h * n0.data[m];
      const SpectralScalar n1 = N(us);
      for (std::size_t m = 0; m < ns; ++m)
        u.data[m] = Eh[m] * (u.data[m] + 0.5 * h * (n0.data[m] + n1.data[m]));
    }
  }
  run.steps = k;
  run.t_reached = static_cast<double>(k) * h;
  run.field = inverse(u, 1e-8);
  run.field.time_stamp = rho.time_stamp + run.t_reached;
  run.field.notes = notes;
  for (double v : run.field.data)
    if (!std::isfinite(v)) throw DivergenceError("nonlinear run produced non-finite values");
  return run;
}

inline ScalarField evolve_kzk(const ScalarField& rho, const DimensionlessParams& p,
                              const EvolutionConfig& cfg, Direction dir, double t) {
  return evolve_kzk_run(rho, p, cfg, dir, t).field;
}

inline NonlinearRun evolve_burgers_run(const ScalarField& rho, const DimensionlessParams& p,
                                       const EvolutionConfig& cfg, double t) {
  if (rho.grid.nx != 1 || rho.grid.nz != 1) throw DomainError("evolve_burgers needs a 1-D grid");
  DimensionlessParams q = p;
  q.mu = 0.0;
  return evolve_kzk_run(rho, q, cfg, Direction::rightward, t);
}

inline ScalarField evolve_burgers(const ScalarField& rho, const DimensionlessParams& p,
                                  const EvolutionConfig& cfg, double t) {
  return evolve_burgers_run(rho, p, cfg, t).field;
}

// Right side of the rho_1 equation with v, p, rho summed over the three
// planar modes. Mode relations at leading order: v1 = p1 = rho1,
// v2 = -rho2, p2 = rho2, v3 = p3 = 0.
inline ScalarField coupled_1d_rhs(const ScalarField& rho1, const ScalarField& rho2,
                                  const ScalarField& rho3, const DimensionlessParams& p) {
  const ScalarField v = rho1 - rho2;
  const ScalarField pr = rho1 + rho2;
  const ScalarField rho = rho1 + rho2 + rho3;
  const ScalarField vy = dy(v), py = dy(pr);
  ScalarField out(rho1.grid);
  for (std::size_t i = 0; i < out.data.size(); ++i)
    out.data[i] = 0.5 * p.eps_amp *
                  (-v.data[i] * vy.data[i] + rho.data[i] * py.data[i] - v.data[i] * py.data[i] +
                   (p.q_const * pr.data[i] + p.s_const * rho.data[i]) * vy.data[i]);
  out.time_stamp = rho1.time_stamp;
  return out;
}

namespace detail {

inline double spectral_energy(const SpectralField& s) {
  double e = 0.0;
  const Grid& g = s.grid;
  for (int c = 0; c < 5; ++c)
    for (std::size_t iz = 0; iz < g.nz; ++iz)
      for (std::size_t ix = 0; ix < g.nx; ++ix)
        for (std::size_t iy = 0; iy < g.nyc(); ++iy)
          e += parseval_weight(g, iy) * std::norm(s.c[c][g.spectral_index(iz, ix, iy)]);
  return e;
}

inline void zero_nyquist(SpectralField& s) {
  const Grid& g = s.grid;
  for (std::size_t iz = 0; iz < g.nz; ++iz)
    for (std::size_t ix = 0; ix < g.nx; ++ix)
      for (std::size_t iy = 0; iy < g.nyc(); ++iy)
        if (Grid::is_nyquist(ix, g.nx) || Grid::is_nyquist(iy, g.ny) || Grid::is_nyquist(iz, g.nz))
          for (int c = 0; c < 5; ++c) s.c[c][g.spectral_index(iz, ix, iy)] = 0.0;
}

}  // namespace detail

// d psi/dt + L psi = eps (phi + phi_tv), L exact per wavevector (matrix
// exponential), the quadratic columns by Heun in the integrating-factor
// frame.
inline FieldState integrate_full_system(const FieldState& psi0, const DimensionlessParams& p,
                                        const EvolutionConfig& cfg, double t,
                                        const std::function<void(const FieldState&)>& observe = {}) {
  cfg.validate();
  if (p.eps_amp > cfg.max_eps)
    throw DomainError("integrate_full_system: eps_amp " + std::to_string(p.eps_amp) +
                      " exceeds the allowed " + std::to_string(cfg.max_eps));
  const Grid& g = psi0.grid;
  const std::size_t n = detail::step_count(t, cfg.dt);
  const double h = n ? t / static_cast<double>(n) : 0.0;
  const std::size_t ns = g.spectral_size();

  std::vector<Mat5> E(ns);
  for (std::size_t iz = 0; iz < g.nz; ++iz)
    for (std::size_t ix = 0; ix < g.nx; ++ix)
      for (std::size_t iy = 0; iy < g.nyc(); ++iy) {
        const Mat5 L = l_symbol({g.kx(ix), g.ky(iy), g.kz(iz)}, p);
        E[g.spectral_index(iz, ix, iy)] = (-h * L).exp();
      }

  SpectralField u = forward_transform(psi0);
  detail::zero_nyquist(u);
  if (cfg.dealias)
    for (int c = 0; c < 5; ++c) {
      auto s = u.component(c);
      dealias(s);
      u.set(c, s);
    }
  const double e0 = detail::spectral_energy(u);

  auto to_phys = [&](const SpectralField& s) {
    FieldState f(g);
    for (int c = 0; c < 5; ++c) f.c[c] = inverse(s.component(c), 1e-8).data;
    return f;
  };
  auto N = [&](const SpectralField& s) {
    const auto q = quadratic_columns(to_phys(s), p);
    SpectralField r(g);
    for (int c = 0; c < 5; ++c) {
      ScalarField sum = q.phi.component(c) + q.phi_tv.component(c);
      auto sp = forward(sum);
      for (auto& v : sp.data) v *= p.eps_amp;
      if (cfg.dealias) dealias(sp);
      r.set(c, sp);
    }
    detail::zero_nyquist(r);
    return r;
  };
  auto apply_E = [&](SpectralField& s) {
    for (std::size_t m = 0; m < ns; ++m) {
      Vec5 v;
      for (int c = 0; c < 5; ++c) v(c) = s.c[c][m];
      const Vec5 w = E[m] * v;
      for (int c = 0; c < 5; ++c) s.c[c][m] = w(c);
    }
  };

  const bool nonlinear = p.eps_amp != 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (!nonlinear) {
      apply_E(u);
    } else {
      const SpectralField n0 = N(u);
      SpectralField us = u;
      for (int c = 0; c < 5; ++c)
        for (std::size_t m = 0; m < ns; ++m) us.c[c][m] += h * n0.c[c][m];
      apply_E(us);
      const SpectralField n1 = N(us);
      SpectralField en0 = n0;
      apply_E(en0);
      apply_E(u);
      for (int c = 0; c < 5; ++c)
        for (std::size_t m = 0; m < ns; ++m)
          u.c[c][m] += 0.5 * h * (en0.c[c][m] + n1.c[c][m]);
    }
    const double e = detail::spectral_energy(u);
    if (!std::isfinite(e) || (e0 > 0.0 && e > 10.0 * e0) || (e0 == 0.0 && e > 0.0))
      throw DivergenceError("integrate_full_system: energy grew from " + std::to_string(e0) +
                            " to " + std::to_string(e) + " at step " + std::to_string(k + 1));
    if (observe) {
      FieldState f = to_phys(u);
      f.time_stamp = psi0.time_stamp + static_cast<double>(k + 1) * h;
      observe(f);
    }
  }
  FieldState out = to_phys(u);
  out.time_stamp = psi0.time_stamp + t;
  out.notes = psi0.notes;
  out.require_finite();
  return out;
}

}  // namespace acoustream
