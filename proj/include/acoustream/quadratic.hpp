#pragma once

// Quadratic right-hand columns phi (inviscid) and phi_tv (thermoviscous)
// of the dimensionless system, evaluated pseudo-spectrally: derivatives in
// k-space, products on the grid.
//
// Scaled gradient D = (sqrt(mu) d/dx, d/dy, sqrt(mu) d/dz), applied to
// every component; Delta = D.D.

#include <array>
#include <cmath>

#include "grid.hpp"
#include "material.hpp"
#include "spectral.hpp"

namespace acoustream {

struct QuadraticColumns {
  FieldState phi;
  FieldState phi_tv;
};

namespace detail {

inline ScalarField scaled_derivative(const SpectralScalar& s, int axis, double mu) {
  const cplx I(0.0, 1.0);
  const double w = axis == 1 ? 1.0 : std::sqrt(mu);
  SpectralScalar d = s;
  apply_multiplier(
      d,
      [&](double kx, double ky, double kz) {
        const double k = axis == 0 ? kx : (axis == 1 ? ky : kz);
        return -I * w * k;
      },
      axis == 0, axis == 1, axis == 2);
  return inverse(d);
}

}  // namespace detail

// Terms are taken from the full column psi; pass the lifted mode-1 field to
// get the single-mode columns.
inline QuadraticColumns quadratic_columns(const FieldState& psi, const DimensionlessParams& p) {
  const Grid& g = psi.grid;
  const double mu = p.mu;
  const std::size_t n = g.size();
  std::array<SpectralScalar, 5> s;
  for (int c = 0; c < 5; ++c) s[c] = forward(psi.component(c));

  // D[c][a]: derivative of component c along axis a. Axes with one point
  // contribute zero, which the multiplier gives for free (k = 0).
  std::array<std::array<ScalarField, 3>, 5> D;
  for (int c = 0; c < 5; ++c)
    for (int a = 0; a < 3; ++a) D[c][a] = detail::scaled_derivative(s[c], a, mu);

  // Delta v_i and D_i (div v), formed in k-space.
  const cplx I(0.0, 1.0);
  const double sm = std::sqrt(mu);
  SpectralScalar div(g);
  for (std::size_t iz = 0; iz < g.nz; ++iz)
    for (std::size_t ix = 0; ix < g.nx; ++ix)
      for (std::size_t iy = 0; iy < g.nyc(); ++iy) {
        const std::size_t m = g.spectral_index(iz, ix, iy);
        const bool nyq = Grid::is_nyquist(ix, g.nx) || Grid::is_nyquist(iy, g.ny) ||
                         Grid::is_nyquist(iz, g.nz);
        div.data[m] = nyq ? cplx(0.0)
                          : -I * (sm * g.kx(ix) * s[0].data[m] + g.ky(iy) * s[1].data[m] +
                                  sm * g.kz(iz) * s[2].data[m]);
      }
  std::array<ScalarField, 3> lap, grad_div;
  for (int c = 0; c < 3; ++c) {
    SpectralScalar l = s[c];
    apply_multiplier(
        l,
        [&](double kx, double ky, double kz) {
          return cplx(-(mu * kx * kx + ky * ky + mu * kz * kz), 0.0);
        },
        false, false, false);
    lap[c] = inverse(l);
    grad_div[c] = detail::scaled_derivative(div, c, mu);
  }
  const ScalarField divv = inverse(div);

  QuadraticColumns out{FieldState(g), FieldState(g)};
  out.phi.time_stamp = out.phi_tv.time_stamp = psi.time_stamp;
  const auto& v = psi.c;
  const double d11 = p.delta11, d12 = p.delta12;
  for (std::size_t i = 0; i < n; ++i) {
    const double vv[3] = {v[0][i], v[1][i], v[2][i]};
    const double pr = v[3][i], rho = v[4][i];
    auto adv = [&](int c) {
      return vv[0] * D[c][0].data[i] + vv[1] * D[c][1].data[i] + vv[2] * D[c][2].data[i];
    };
    const double dv = divv.data[i];
    for (int c = 0; c < 3; ++c) {
      out.phi.c[c][i] = -adv(c) + rho * D[3][c].data[i];
      out.phi_tv.c[c][i] = -d12 * rho * lap[c].data[i] - d11 * rho * grad_div[c].data[i];
    }
    out.phi.c[3][i] = (p.q_const * pr + p.s_const * rho) * dv - adv(3);
    out.phi.c[4][i] = -rho * dv - adv(4);
    // dissipation function
    double shear = 0.0;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        double e = D[a][b].data[i] + D[b][a].data[i];
        if (a == b) e -= 2.0 / 3.0 * dv;
        shear += e * e;
      }
    out.phi_tv.c[3][i] = ((d11 - d12 / 3.0) * dv * dv + 0.5 * d12 * shear) / p.e1;
    out.phi_tv.c[4][i] = 0.0;
  }
  return out;
}

}  // namespace acoustream
