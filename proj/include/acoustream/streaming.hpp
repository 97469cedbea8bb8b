#pragma once

// Radiation force on the vortical modes from a dominant rightward acoustic
// mode, and the streaming velocity it drives.
//
// Integrals along y come in two gauges. zero_mean is the plain i/ky
// multiplier (periodic fields). far_field fixes the constant so the result
// vanishes at the far y edge; an AxialWindow tapers the integrand and the
// result, and values are trusted only between window.valid_from() and
// window.valid_to().

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "error.hpp"
#include "evolution.hpp"
#include "grid.hpp"
#include "material.hpp"
#include "quadratic.hpp"
#include "spectral.hpp"

namespace acoustream {

struct AxialGauge {
  enum class Kind { zero_mean, far_field };
  Kind kind = Kind::zero_mean;
  AxialWindow window;

  static AxialGauge zero_mean() { return {}; }
  static AxialGauge far_field(const AxialWindow& w = {}) { return {Kind::far_field, w}; }

  bool windowed() const {
    return kind == Kind::far_field && (window.lower_width > 0.0 || window.upper_width > 0.0);
  }
  ScalarField integrate(const ScalarField& f) const {
    if (kind == Kind::zero_mean) return zero_mean_integral_y(f);
    return far_field_integral_y(f, windowed() ? &window : nullptr);
  }
  ScalarField taper(const ScalarField& f) const { return windowed() ? window.apply(f) : f; }
  double valid_from(const Grid& g) const { return windowed() ? std::max(window.valid_from(), g.y0) : g.y0; }
  double valid_to(const Grid& g) const {
    return windowed() && window.upper_width > 0.0 ? window.valid_to(g) : g.y0 + g.ly;
  }
};

// ---------------------------------------------------------------- sources

inline double quasi_periodic_density(const std::function<double(double)>& theta, double beta,
                                     double x, double y, double t, double rho0 = 1.0) {
  if (!(beta > 0.0)) throw DomainError("quasi-periodic source needs beta > 0");
  return rho0 * theta(x) * std::exp(-0.5 * beta * y) * std::sin(t - y);
}

inline double monopole_density(double C, double eps_nl, double beta, double x, double y, double t) {
  if (!(C > 1.0)) throw DomainError("monopole: shape constant C must exceed 1");
  if (!(y > 0.0)) throw DomainError("monopole: y must be > 0 (far-field form)");
  if (!(beta > 0.0)) throw DomainError("monopole: beta must be > 0");
  if (eps_nl == 0.0) throw DomainError("monopole: eps_nl must be nonzero");
  const double xi = beta * y;
  const double tau = t - y;
  // C - erf(z) written as (C - 1) + erfc(z) to keep digits for large z
  const double den = eps_nl * std::sqrt(xi / beta) * ((C - 1.0) + std::erfc(tau / std::sqrt(2.0 * xi)));
  return -std::sqrt(2.0 * beta / std::numbers::pi) * std::exp(-x * x) *
         std::exp(-tau * tau / (2.0 * xi)) / den;
}

enum class SourceKind { quasi_periodic_beam, monopole, gridded };

struct AcousticSource {
  SourceKind kind = SourceKind::quasi_periodic_beam;
  std::function<double(double)> theta = [](double x) { return std::exp(-x * x); };
  double beta = 0.05;
  double shape_c = 2.0;
  double eps_nl = 1.2;
  std::vector<ScalarField> snapshots;  // gridded: time_stamp of each is its time

  static AcousticSource quasi_periodic(double beta,
                                       std::function<double(double)> theta = {}) {
    AcousticSource s;
    s.kind = SourceKind::quasi_periodic_beam;
    s.beta = beta;
    if (theta) s.theta = std::move(theta);
    s.validate();
    return s;
  }
  static AcousticSource monopole(double C, double eps_nl, double beta) {
    AcousticSource s;
    s.kind = SourceKind::monopole;
    s.shape_c = C;
    s.eps_nl = eps_nl;
    s.beta = beta;
    s.validate();
    return s;
  }
  static AcousticSource gridded(std::vector<ScalarField> snaps) {
    AcousticSource s;
    s.kind = SourceKind::gridded;
    s.snapshots = std::move(snaps);
    s.validate();
    return s;
  }

  void validate() const {
    switch (kind) {
      case SourceKind::quasi_periodic_beam:
        if (!(beta > 0.0)) throw DomainError("quasi-periodic source needs beta > 0");
        if (!theta) throw DomainError("quasi-periodic source needs a transverse profile");
        break;
      case SourceKind::monopole:
        if (!(shape_c > 1.0)) throw DomainError("monopole: shape constant C must exceed 1");
        if (!(beta > 0.0)) throw DomainError("monopole: beta must be > 0");
        break;
      case SourceKind::gridded:
        if (snapshots.empty()) throw DomainError("gridded source has no snapshots");
        for (std::size_t i = 1; i < snapshots.size(); ++i) {
          if (!snapshots[i].grid.same_shape(snapshots[0].grid))
            throw DomainError("gridded source: snapshots on different grids");
          if (!(snapshots[i].time_stamp > snapshots[i - 1].time_stamp))
            throw DomainError("gridded source: snapshot times must increase");
        }
        break;
    }
  }

  ScalarField sample(const Grid& g, double t) const {
    switch (kind) {
      case SourceKind::quasi_periodic_beam: {
        auto f = ScalarField::sample(g, [&](double x, double y, double) {
          return quasi_periodic_density(theta, beta, x, y, t);
        });
        f.time_stamp = t;
        return f;
      }
      case SourceKind::monopole: {
        if (!(g.y0 > 0.0)) throw DomainError("monopole grids must start at y > 0");
        auto f = ScalarField::sample(g, [&](double x, double y, double) {
          return monopole_density(shape_c, eps_nl, beta, x, y, t);
        });
        f.time_stamp = t;
        return f;
      }
      case SourceKind::gridded:
        break;
    }
    if (!snapshots.front().grid.same_shape(g)) throw DomainError("gridded source: grid mismatch");
    if (t <= snapshots.front().time_stamp) return snapshots.front();
    if (t >= snapshots.back().time_stamp) return snapshots.back();
    std::size_t i = 1;
    while (snapshots[i].time_stamp < t) ++i;
    const auto& a = snapshots[i - 1];
    const auto& b = snapshots[i];
    const double w = (t - a.time_stamp) / (b.time_stamp - a.time_stamp);
    ScalarField f = (1.0 - w) * a + w * b;
    f.time_stamp = t;
    return f;
  }
};

// ------------------------------------------------------------ mode-1 lift

// Five-component column of the rightward acoustic mode built from its
// density. With inviscid set, the beta and delta2 corrections are left out.
inline FieldState lift_acoustic_mode(const ScalarField& rho1, const DimensionlessParams& p,
                                     const AxialGauge& gauge = {}, bool inviscid = false) {
  const Grid& g = rho1.grid;
  const double sm = std::sqrt(p.mu);
  const double beta = inviscid ? 0.0 : p.beta_total;
  const double d2 = inviscid ? 0.0 : p.delta2();
  const ScalarField rho = gauge.taper(rho1);
  const ScalarField ir = gauge.integrate(rho);
  const ScalarField ry = dy(rho);
  FieldState f(g);
  f.time_stamp = rho1.time_stamp;
  f.set(Component::vx, sm * dx(ir));
  f.set(Component::vz, sm * dz(ir));
  const ScalarField lap_t = derivative(rho, SpectralOp::transverse_laplacian);
  const ScalarField diff = gauge.integrate(gauge.integrate(lap_t));
  f.set(Component::vy, rho - (0.5 * p.mu) * diff - (0.5 * beta) * ry);
  f.set(Component::p, rho - d2 * ry);
  f.set(Component::rho, rho);
  for (const auto& n : ir.notes) f.notes.push_back(n);
  return f;
}

// Row (1 - mu d2/dx2 II, -sqrt(mu) d/dx I, -mu d2/dxdz II, 0, 0) applied to
// a column.
inline ScalarField vortical_force_row(const FieldState& col, const DimensionlessParams& p,
                                      const AxialGauge& gauge = {}) {
  const Grid& g = col.grid;
  const double sm = std::sqrt(p.mu);
  const ScalarField c1 = col.component(Component::vx);
  ScalarField out = c1;
  if (g.nx > 1) {
    const ScalarField ii1 = gauge.integrate(gauge.integrate(c1));
    out = out - p.mu * dx(dx(ii1));
    out = out - sm * dx(gauge.integrate(col.component(Component::vy)));
    if (g.nz > 1) {
      const ScalarField ii3 = gauge.integrate(gauge.integrate(col.component(Component::vz)));
      out = out - p.mu * dx(dz(ii3));
    }
  }
  out.time_stamp = col.time_stamp;
  return out;
}

// ---------------------------------------------------------------- norms

inline double l2_between(const ScalarField& f, double ylo, double yhi) {
  const Grid& g = f.grid;
  double s = 0.0;
  for (std::size_t iz = 0; iz < g.nz; ++iz)
    for (std::size_t ix = 0; ix < g.nx; ++ix)
      for (std::size_t iy = 0; iy < g.ny; ++iy) {
        const double y = g.y(iy);
        if (y < ylo || y > yhi) continue;
        const double v = f(iz, ix, iy);
        s += v * v;
      }
  return std::sqrt(s);
}

struct VanishingReport {
  double numerator = 0.0;    // |row phi(inviscid lift)|
  double denominator = 0.0;  // |row phi_tv(full lift)|
  std::optional<double> ratio;
  double full_lift_ratio = 0.0;  // |row phi(full lift)| / denominator, diagnostic
  double y_from = 0.0, y_to = 0.0;
};

// Norms are taken over [valid_from + margin, valid_to - margin].
inline VanishingReport inviscid_vanishing_residual(const ScalarField& rho1,
                                                   const DimensionlessParams& p,
                                                   const AxialGauge& gauge = {},
                                                   double margin = 0.0) {
  const Grid& g = rho1.grid;
  VanishingReport r;
  r.y_from = gauge.valid_from(g) + margin;
  r.y_to = gauge.valid_to(g) - margin;
  const auto inv = lift_acoustic_mode(rho1, p, gauge, true);
  const auto full = lift_acoustic_mode(rho1, p, gauge, false);
  const auto qi = quadratic_columns(inv, p);
  const auto qf = quadratic_columns(full, p);
  r.numerator = l2_between(vortical_force_row(qi.phi, p, gauge), r.y_from, r.y_to);
  r.denominator = l2_between(vortical_force_row(qf.phi_tv, p, gauge), r.y_from, r.y_to);
  const double full_num = l2_between(vortical_force_row(qf.phi, p, gauge), r.y_from, r.y_to);
  if (r.denominator > 0.0) {
    r.ratio = r.numerator / r.denominator;
    r.full_lift_ratio = full_num / r.denominator;
  }
  return r;
}

// ------------------------------------------------------- radiation force

enum class ForceVariant { simplified, expanded, expanded_uncorrected, projected };

inline const char* force_variant_name(ForceVariant v) {
  switch (v) {
    case ForceVariant::simplified: return "simplified";
    case ForceVariant::expanded: return "expanded";
    case ForceVariant::expanded_uncorrected: return "expanded_uncorrected";
    case ForceVariant::projected: return "projected";
  }
  return "?";
}

inline ForceVariant parse_force_variant(const std::string& s) {
  for (auto v : {ForceVariant::simplified, ForceVariant::expanded,
                 ForceVariant::expanded_uncorrected, ForceVariant::projected})
    if (s == force_variant_name(v)) return v;
  throw DomainError("unknown force variant '" + s + "'");
}

struct RadiationForceField {
  ScalarField F1x;
  double gauge_constant = 0.0;  // largest per-line shift from the zero-mean primitive
  ForceVariant variant = ForceVariant::simplified;
  double valid_from = 0.0, valid_to = 0.0;
  std::vector<std::string> notes;
};

namespace detail {

inline void require_decay(const ScalarField& rho, const AxialGauge& gauge) {
  if (gauge.windowed() && gauge.window.upper_width > 0.0) return;
  const Grid& g = rho.grid;
  const double m = rho.max_abs();
  if (m == 0.0) return;
  double edge = 0.0;
  for (std::size_t iz = 0; iz < g.nz; ++iz)
    for (std::size_t ix = 0; ix < g.nx; ++ix) edge = std::max(edge, std::abs(rho(iz, ix, g.ny - 1)));
  if (edge > 1e-6 * m)
    throw GaugeError("radiation force: rho1 does not decay at the far y edge (|rho1| = " +
                     std::to_string(edge / m) +
                     " of its maximum); extend the domain or add an upper taper");
}

}  // namespace detail

// The last term's constant is fixed so that F1x -> 0 at the far y edge.
inline RadiationForceField radiation_force(const ScalarField& rho1, const DimensionlessParams& p,
                                           ForceVariant variant = ForceVariant::simplified,
                                           const AxialWindow& window = {}) {
  const Grid& g = rho1.grid;
  const AxialGauge gauge = AxialGauge::far_field(window);
  detail::require_decay(rho1, gauge);
  RadiationForceField out;
  out.variant = variant;
  out.valid_from = gauge.valid_from(g);
  out.valid_to = gauge.valid_to(g);
  const double sm = std::sqrt(p.mu);
  const double beta = p.beta_total;

  const ScalarField rho = gauge.taper(rho1);
  const ScalarField rx = dx(rho), ry = dy(rho);
  const ScalarField rxy = dx(ry);
  const ScalarField ry2 = ry * ry;
  const ScalarField J2 = dx(gauge.integrate(ry2));
  {
    const ScalarField z = zero_mean_integral_y(gauge.taper(ry2));
    for (std::size_t iz = 0; iz < g.nz; ++iz)
      for (std::size_t ix = 0; ix < g.nx; ++ix)
        out.gauge_constant = std::max(out.gauge_constant, std::abs(z(iz, ix, g.ny - 1)));
  }

  switch (variant) {
    case ForceVariant::simplified:
      out.F1x = (sm * beta) * (rx * ry - 0.5 * (rho * rxy) - J2);
      break;
    case ForceVariant::expanded:
    case ForceVariant::expanded_uncorrected: {
      const ScalarField J1 = dx(gauge.integrate(rho * dy(ry)));
      const ScalarField K = J1 - rho * rxy;
      // thermoviscous terms of the lift
      ScalarField b1 = (0.5 * beta) * (rx * ry - J1 - J2) + p.delta2() * K;
      // thermoviscous terms of phi_tv
      double c2 = p.delta1();
      if (variant == ForceVariant::expanded_uncorrected) c2 += beta;
      out.F1x = sm * (b1 + c2 * K);
      break;
    }
    case ForceVariant::projected: {
      const auto col = lift_acoustic_mode(rho1, p, gauge);
      const auto q = quadratic_columns(col, p);
      FieldState sum = q.phi + q.phi_tv;
      out.F1x = vortical_force_row(sum, p, gauge);
      break;
    }
  }
  out.F1x.time_stamp = rho1.time_stamp;
  out.notes = rho1.notes;
  return out;
}

inline ScalarField gusev_rudenko_force(const std::function<double(double)>& theta, double beta,
                                       const Grid& g, double mu, double rho0 = 1.0) {
  const auto half_sq = ScalarField::sample(g, [&](double x, double, double) {
    const double t = theta(x);
    return 0.5 * t * t;
  });
  const ScalarField d = dx(half_sq);
  ScalarField out(g);
  for (std::size_t iz = 0; iz < g.nz; ++iz)
    for (std::size_t ix = 0; ix < g.nx; ++ix)
      for (std::size_t iy = 0; iy < g.ny; ++iy)
        out(iz, ix, iy) = std::sqrt(mu) * rho0 * rho0 * d(iz, ix, iy) * std::exp(-beta * g.y(iy));
  return out;
}

struct TimeAverageReport {
  ScalarField mean_force;
  ScalarField reference;    // gusev_rudenko_force
  ScalarField deviation;    // mean_force - reference
  double rel_l2_error = 0.0;
  // fit of F/<F> - 1 = a sin(2(t - y)) + b cos(2(t - y))
  double ripple_sin = 0.0, ripple_cos = 0.0, ripple_amplitude = 0.0;
  double y_from = 0.0, y_to = 0.0;
  std::size_t samples = 0;
};

inline TimeAverageReport time_average_force(const AcousticSource& src, const DimensionlessParams& p,
                                            const Grid& g, double n_periods,
                                            const AxialWindow& window, double margin = 0.0,
                                            std::size_t samples_per_period = 64,
                                            ForceVariant variant = ForceVariant::simplified) {
  if (src.kind != SourceKind::quasi_periodic_beam)
    throw DomainError("time_average_force needs the quasi-periodic source");
  if (!(n_periods >= 1.0) || std::floor(n_periods) != n_periods)
    throw DomainError("time_average_force: averaging needs a whole number of periods >= 1");
  if (samples_per_period < 64) throw DomainError("time_average_force: need >= 64 samples per period");
  DimensionlessParams q = p;
  if (std::abs(q.beta_total - src.beta) > 1e-14 * std::max(1.0, src.beta))
    throw DomainError("time_average_force: params beta differs from the source beta");
  const AxialGauge gauge = AxialGauge::far_field(window);
  TimeAverageReport r;
  r.y_from = gauge.valid_from(g) + margin;
  r.y_to = gauge.valid_to(g) - margin;
  const std::size_t n = static_cast<std::size_t>(n_periods) * samples_per_period;
  r.samples = n;
  const double T = 2.0 * std::numbers::pi;
  std::vector<ScalarField> inst;
  inst.reserve(n);
  r.mean_force = ScalarField(g);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = T * static_cast<double>(k) / static_cast<double>(samples_per_period);
    auto F = radiation_force(src.sample(g, t), q, variant, window).F1x;
    F.time_stamp = t;
    for (std::size_t i = 0; i < g.size(); ++i) r.mean_force.data[i] += F.data[i] / static_cast<double>(n);
    inst.push_back(std::move(F));
  }
  r.reference = gusev_rudenko_force(src.theta, src.beta, g, p.mu);
  r.deviation = r.mean_force - r.reference;
  const double ref = l2_between(r.reference, r.y_from, r.y_to);
  r.rel_l2_error = ref > 0.0 ? l2_between(r.deviation, r.y_from, r.y_to) / ref : 0.0;

  // least squares over points where the mean force is not small
  const double fmax = r.mean_force.max_abs();
  double ss = 0, sc = 0, cc = 0, rs = 0, rc = 0;
  for (const auto& F : inst)
    for (std::size_t iz = 0; iz < g.nz; ++iz)
      for (std::size_t ix = 0; ix < g.nx; ++ix)
        for (std::size_t iy = 0; iy < g.ny; ++iy) {
          const double y = g.y(iy);
          if (y < r.y_from || y > r.y_to) continue;
          const double m = r.mean_force(iz, ix, iy);
          if (std::abs(m) < 0.1 * fmax) continue;
          const double rel = F(iz, ix, iy) / m - 1.0;
          const double s = std::sin(2.0 * (F.time_stamp - y)), c = std::cos(2.0 * (F.time_stamp - y));
          ss += s * s;
          sc += s * c;
          cc += c * c;
          rs += rel * s;
          rc += rel * c;
        }
  const double det = ss * cc - sc * sc;
  if (det > 0.0) {
    r.ripple_sin = (rs * cc - rc * sc) / det;
    r.ripple_cos = (rc * ss - rs * sc) / det;
    r.ripple_amplitude = std::hypot(r.ripple_sin, r.ripple_cos);
  }
  return r;
}

// ------------------------------------------------------------- streaming

struct StreamingState {
  ScalarField vx, vy, vz;
  double time_stamp = 0.0;
  std::vector<std::string> notes;
};

// Force snapshots in time order; linear interpolation in between, held
// constant outside.
struct ForceSeries {
  std::vector<ScalarField> snapshots;

  static ForceSeries constant(ScalarField f) {
    ForceSeries s;
    s.snapshots.push_back(std::move(f));
    return s;
  }
  void validate() const {
    if (snapshots.empty()) throw DomainError("force series is empty");
    for (std::size_t i = 1; i < snapshots.size(); ++i) {
      if (!snapshots[i].grid.same_shape(snapshots[0].grid))
        throw DomainError("force series: snapshots on different grids");
      if (!(snapshots[i].time_stamp > snapshots[i - 1].time_stamp))
        throw DomainError("force series: times must increase");
    }
  }
  ScalarField at(double t) const {
    if (snapshots.size() == 1 || t <= snapshots.front().time_stamp) return snapshots.front();
    if (t >= snapshots.back().time_stamp) return snapshots.back();
    std::size_t i = 1;
    while (snapshots[i].time_stamp < t) ++i;
    const auto& a = snapshots[i - 1];
    const auto& b = snapshots[i];
    const double w = (t - a.time_stamp) / (b.time_stamp - a.time_stamp);
    return (1.0 - w) * a + w * b;
  }
};

namespace detail {

// phi1(z) = (e^z - 1)/z, phi2(z) = (e^z - 1 - z)/z^2
inline double etd_phi1(double z) { return std::abs(z) < 1e-5 ? 1.0 + z / 2.0 + z * z / 6.0 : std::expm1(z) / z; }
inline double etd_phi2(double z) {
  return std::abs(z) < 1e-3 ? 0.5 + z / 6.0 + z * z / 24.0 + z * z * z / 120.0
                            : (std::expm1(z) - z) / (z * z);
}

}  // namespace detail

// dVx/dt - delta12 Vx_yy = eps F1x [- eps (V.grad) Vx], ETD2RK with the
// diffusion exact. Vy = -sqrt(mu) d/dx I Vx from the stream function; Vz
// is not evolved (it would need the z force, dropped at this order).
inline std::vector<StreamingState> solve_streaming(const ForceSeries& force,
                                                   const DimensionlessParams& p,
                                                   const EvolutionConfig& cfg, double t_end,
                                                   bool self_advection,
                                                   std::size_t output_every = 0,
                                                   const AxialGauge& gauge = {},
                                                   const ScalarField* vx0 = nullptr) {
  cfg.validate();
  force.validate();
  if (p.delta12 < 0.0) throw StabilityError("streaming: delta12 < 0 makes the diffusion unstable");
  const Grid& g = force.snapshots.front().grid;
  const double eps = p.eps_amp;
  const double sm = std::sqrt(p.mu);
  const std::size_t n = detail::step_count(t_end, cfg.dt);
  const double h = n ? t_end / static_cast<double>(n) : 0.0;
  const double t0 = force.snapshots.front().time_stamp > 0.0 && force.snapshots.size() > 1
                        ? force.snapshots.front().time_stamp
                        : 0.0;

  const std::size_t ns = g.spectral_size();
  std::vector<double> ez(ns), f1(ns), f2(ns);
  for (std::size_t iz = 0; iz < g.nz; ++iz)
    for (std::size_t ix = 0; ix < g.nx; ++ix)
      for (std::size_t iy = 0; iy < g.nyc(); ++iy) {
        const std::size_t m = g.spectral_index(iz, ix, iy);
        const double ky = g.ky(iy);
        const double z = -p.delta12 * ky * ky * h;
        ez[m] = std::exp(z);
        f1[m] = h * detail::etd_phi1(z);
        f2[m] = h * detail::etd_phi2(z);
      }

  auto vy_of = [&](const ScalarField& vx) {
    if (g.nx == 1) return ScalarField(g);
    return -sm * dx(gauge.integrate(vx));
  };
  auto N = [&](const SpectralScalar& u, double t) {
    ScalarField rhs = eps * force.at(t);
    if (self_advection && eps != 0.0) {
      const ScalarField vx = inverse(u, 1e-8);
      const ScalarField vy = vy_of(vx);
      ScalarField adv = vy * dy(vx);
      if (g.nx > 1) adv = adv + sm * (vx * dx(vx));
      rhs = rhs - eps * adv;
    }
    auto s = forward(rhs);
    if (self_advection && cfg.dealias) dealias(s);
    return s;
  };
  auto snapshot = [&](const SpectralScalar& u, double t) {
    StreamingState st;
    st.vx = inverse(u, 1e-8);
    st.vy = vy_of(st.vx);
    st.vz = ScalarField(g);
    st.vx.time_stamp = st.vy.time_stamp = st.vz.time_stamp = t;
    st.time_stamp = t;
    return st;
  };

  SpectralScalar u = vx0 ? forward(*vx0) : SpectralScalar(g);
  std::vector<StreamingState> out;
  out.push_back(snapshot(u, t0));
  auto energy = [&](const SpectralScalar& s) {
    double e = 0.0;
    for (std::size_t iz = 0; iz < g.nz; ++iz)
      for (std::size_t ix = 0; ix < g.nx; ++ix)
        for (std::size_t iy = 0; iy < g.nyc(); ++iy)
          e += detail::parseval_weight(g, iy) * std::norm(s(iz, ix, iy));
    return e;
  };
  const bool unforced = [&] {
    for (const auto& f : force.snapshots)
      if (f.max_abs() != 0.0) return false;
    return true;
  }();
  double e_prev = energy(u);

  for (std::size_t k = 0; k < n; ++k) {
    const double t = t0 + static_cast<double>(k) * h;
    const SpectralScalar n0 = N(u, t);
    SpectralScalar a = u;
    for (std::size_t m = 0; m < ns; ++m) a.data[m] = ez[m] * u.data[m] + f1[m] * n0.data[m];
    const SpectralScalar n1 = N(a, t + h);
    for (std::size_t m = 0; m < ns; ++m) u.data[m] = a.data[m] + f2[m] * (n1.data[m] - n0.data[m]);
    const double e = energy(u);
    if (!std::isfinite(e)) throw DivergenceError("streaming: non-finite velocity");
    if (unforced && e > e_prev * (1.0 + 1e-12) + 1e-300)
      throw StabilityError("streaming: energy grew without forcing at step " + std::to_string(k + 1));
    e_prev = e;
    const bool last = k + 1 == n;
    if (last || (output_every > 0 && (k + 1) % output_every == 0))
      out.push_back(snapshot(u, t + h));
  }
  return out;
}

// ---------------------------------------------------------- figure data

struct FigureConstants {
  double C = 2.0;
  double eps_nl = 1.2;
  double beta = 0.1;
  double x = std::numbers::sqrt2 / 2.0;
  double mu = 0.01;  // cancels in F1x / (sqrt(mu) beta)
  std::size_t nx = 256;
  double lx = 16.0;
  std::size_t ny = 512;
  double ly = 25.6;  // dy = 0.05 puts y = 1 and y = 3 on nodes
  double y0 = 0.1;
  double lower_taper = 0.4;
  double t_min = 0.1, t_max = 8.0;
  std::size_t nt = 160;
  double y_max_plot = 12.0;

  Grid grid() const { return Grid::plane_xy(nx, lx, ny, ly, y0); }
  AxialWindow window() const { return AxialWindow{y0, lower_taper, 0.0}; }
  DimensionlessParams params() const {
    auto p = DimensionlessParams::from_beta(mu, 0.0, beta);
    return p;
  }
};

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

// Value of a field at transverse position x for every y (and z index 0),
// by evaluating the x Fourier series. The series is linear in the nodal
// values, so it collapses to one real kernel over ix shared by all rows.
inline std::vector<double> sample_at_x(const ScalarField& f, double x) {
  const Grid& g = f.grid;
  std::vector<double> out(g.ny, 0.0);
  if (g.nx == 1) {
    for (std::size_t iy = 0; iy < g.ny; ++iy) out[iy] = f(0, 0, iy);
    return out;
  }
  const double N = static_cast<double>(g.nx);
  std::vector<double> kernel(g.nx, 0.0);
  for (std::size_t m = 0; m < g.nx; ++m) {
    const long h = Grid::harmonic(m, g.nx);
    const double arg = 2.0 * std::numbers::pi * static_cast<double>(h) * (x - g.x0) / g.lx;
    for (std::size_t ix = 0; ix < g.nx; ++ix) {
      const double node = 2.0 * std::numbers::pi * static_cast<double>(h) * (g.x(ix) - g.x0) / g.lx;
      // Nyquist term as a cosine so the series stays real
      kernel[ix] += Grid::is_nyquist(m, g.nx) ? std::cos(node) * std::cos(arg) / N
                                              : std::cos(arg - node) / N;
    }
  }
  for (std::size_t iy = 0; iy < g.ny; ++iy) {
    double acc = 0.0;
    for (std::size_t ix = 0; ix < g.nx; ++ix) acc += kernel[ix] * f(0, ix, iy);
    out[iy] = acc;
  }
  return out;
}

inline std::size_t nearest_y_index(const Grid& g, double y) {
  const double u = (y - g.y0) / g.dy();
  if (u < 0.0 || u > static_cast<double>(g.ny - 1)) throw DomainError("y outside the grid");
  return static_cast<std::size_t>(std::lround(u));
}

// Figures 1-2: F1x/(sqrt(mu) beta) and rho1 against y at t = 1, 3.
// Figures 3-4: the same against t at y = 1, 3. All at x = k.x.
inline Table emit_figure_data(int fig, const FigureConstants& k = {}) {
  if (fig < 1 || fig > 4) throw DomainError("figure index must be 1..4");
  const Grid g = k.grid();
  const auto src = AcousticSource::monopole(k.C, k.eps_nl, k.beta);
  const auto p = k.params();
  const double norm = std::sqrt(p.mu) * p.beta_total;
  Table t;
  if (fig <= 2) {
    const double time = fig == 1 ? 1.0 : 3.0;
    const auto rho = src.sample(g, time);
    const auto F = radiation_force(rho, p, ForceVariant::simplified, k.window());
    const auto fx = sample_at_x(F.F1x, k.x);
    t.columns = {"y", "force_normalized", "rho1"};
    for (std::size_t iy = 0; iy < g.ny; ++iy) {
      const double y = g.y(iy);
      if (y < F.valid_from || y > k.y_max_plot) continue;
      t.rows.push_back({y, fx[iy] / norm, monopole_density(k.C, k.eps_nl, k.beta, k.x, y, time)});
    }
  } else {
    const double y = fig == 3 ? 1.0 : 3.0;
    const std::size_t iy = nearest_y_index(g, y);
    if (std::abs(g.y(iy) - y) > 1e-9 * std::max(1.0, y))
      throw DomainError("figure grid must contain y = " + std::to_string(y) + " as a node");
    t.columns = {"t", "force_normalized", "rho1"};
    for (std::size_t j = 0; j < k.nt; ++j) {
      const double time =
          k.t_min + (k.t_max - k.t_min) * static_cast<double>(j) / static_cast<double>(k.nt - 1);
      const auto F = radiation_force(src.sample(g, time), p, ForceVariant::simplified, k.window());
      const auto fx = sample_at_x(F.F1x, k.x);
      t.rows.push_back({time, fx[iy] / norm, monopole_density(k.C, k.eps_nl, k.beta, k.x, y, time)});
    }
  }
  return t;
}

}  // namespace acoustream
