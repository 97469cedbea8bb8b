#pragma once

// Per-wavevector linear algebra of the five modes: the symbol of L, the
// dispersion roots, eigenvector columns M_i, dual rows M_i^-1 and the
// projectors P_i = M_i M_i^-1; plus modal decomposition of grid fields.
//
// Ordering used for truncation: with a = sqrt(mu) kx/ky, g = sqrt(mu) kz/ky
// and q = a^2 + g^2, sqrt(mu) counts as weight 1/2 and every delta as
// weight 1. Three variants are provided:
//   as_printed   - the weight-1 tables verbatim, including
//                  their misprints;
//   first_order  - the weight-1 tables with the misprints corrected;
//   three_halves - columns and rows kept through weight 3/2, projectors
//                  formed as their outer products without re-truncation.
// Only three_halves makes the projector identities hold to second order.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "error.hpp"
#include "grid.hpp"
#include "material.hpp"
#include "spectral.hpp"

namespace acoustream {

using Vec5 = Eigen::Matrix<cplx, 5, 1>;
using Row5 = Eigen::Matrix<cplx, 1, 5>;
using Mat5 = Eigen::Matrix<cplx, 5, 5>;

struct Wavevector {
  double kx = 0.0, ky = 0.0, kz = 0.0;
};

enum class Truncation { as_printed, first_order, three_halves };

inline const char* truncation_name(Truncation t) {
  switch (t) {
    case Truncation::as_printed: return "as_printed";
    case Truncation::first_order: return "first_order";
    case Truncation::three_halves: return "three_halves";
  }
  return "?";
}

inline Truncation parse_truncation(const std::string& s) {
  if (s == "as_printed") return Truncation::as_printed;
  if (s == "first_order") return Truncation::first_order;
  if (s == "three_halves") return Truncation::three_halves;
  throw DomainError("unknown truncation '" + s + "'");
}

// Symbol of L with d/dx -> -i kx etc.; the scaled gradient is
// (sqrt(mu) d/dx, d/dy, sqrt(mu) d/dz).
inline Mat5 l_symbol(const Wavevector& k, const DimensionlessParams& p) {
  const double s = std::sqrt(p.mu);
  const double kap[3] = {s * k.kx, k.ky, s * k.kz};
  const double k2 = kap[0] * kap[0] + kap[1] * kap[1] + kap[2] * kap[2];
  const cplx I(0.0, 1.0);
  Mat5 L = Mat5::Zero();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) L(i, j) = p.delta11 * kap[i] * kap[j];
    L(i, i) += p.delta12 * k2;
    L(i, 3) = -I * kap[i];
    L(3, i) = -I * kap[i];
    L(4, i) = -I * kap[i];
  }
  L(3, 3) = p.delta21 * k2;
  L(3, 4) = p.delta22 * k2;
  return L;
}

struct DispersionRoots {
  std::array<cplx, 5> omega;
  double big_omega = 0.0;
};

inline void require_paraxial(const Wavevector& k, const char* who) {
  if (k.ky == 0.0) throw ParaxialSingularity(std::string(who) + ": ky = 0");
}

inline DispersionRoots dispersion_roots(const Wavevector& k, const DimensionlessParams& p) {
  require_paraxial(k, "dispersion_roots");
  const double W = k.ky + p.mu * (k.kx * k.kx + k.kz * k.kz) / (2.0 * k.ky);
  const double W2 = W * W;
  DispersionRoots r;
  r.big_omega = W;
  r.omega[0] = cplx(W, 0.5 * p.beta_total * W2);
  r.omega[1] = cplx(-W, 0.5 * p.beta_total * W2);
  r.omega[2] = cplx(0.0, -p.delta22 * W2);
  r.omega[3] = cplx(0.0, p.delta12 * W2);
  r.omega[4] = cplx(0.0, p.delta12 * W2);
  return r;
}

struct ModeBasis {
  std::array<Vec5, 5> columns;
  std::array<Row5, 5> rows;
  Truncation order = Truncation::three_halves;

  Mat5 column_matrix() const {
    Mat5 m;
    for (int i = 0; i < 5; ++i) m.col(i) = columns[i];
    return m;
  }
  Mat5 row_matrix() const {
    Mat5 m;
    for (int i = 0; i < 5; ++i) m.row(i) = rows[i];
    return m;
  }
};

namespace detail {

struct Ratios {
  double a, g, q, ky, b, d2, d21, d22;
  Ratios(const Wavevector& k, const DimensionlessParams& p) {
    const double s = std::sqrt(p.mu);
    ky = k.ky;
    a = s * k.kx / k.ky;
    g = s * k.kz / k.ky;
    q = a * a + g * g;
    b = p.beta_total;
    d2 = p.delta2();
    d21 = p.delta21;
    d22 = p.delta22;
  }
};

}  // namespace detail

inline ModeBasis mode_basis(const Wavevector& k, const DimensionlessParams& p,
                            Truncation order = Truncation::three_halves) {
  require_paraxial(k, "mode_basis");
  const detail::Ratios r(k, p);
  const cplx I(0.0, 1.0);
  const double s = std::sqrt(p.mu);
  const double a = r.a, g = r.g, q = r.q, ky = r.ky;
  ModeBasis B;
  B.order = order;

  for (int m = 0; m < 2; ++m) {
    const double sg = m == 0 ? 1.0 : -1.0;
    const cplx c = sg * (1.0 - 0.5 * q) + I * r.b * ky / 2.0;
    const cplx pp = 1.0 + I * sg * r.d2 * ky;
    const cplx rp = 0.5 * (1.0 - I * sg * (r.b / 2.0 + r.d22) * ky);
    const cplx rr = I * sg * r.d22 * ky / 2.0;
    if (order == Truncation::three_halves) {
      const cplx ry = 0.5 * (sg * (1.0 - 0.5 * q) - I * r.d2 * ky);
      B.columns[m] << a * c, c, g * c, pp, 1.0;
      B.rows[m] << a * ry, ry, g * ry, rp, rr;
    } else {
      B.columns[m] << sg * a, c, sg * g, pp, 1.0;
      if (order == Truncation::first_order) {
        const cplx ry = 0.5 * (sg * (1.0 - 0.5 * q) - I * r.d2 * ky);
        B.rows[m] << sg * a / 2.0, ry, sg * g / 2.0, rp, rr;
      } else {
        // Printed: x, z entries without the 1/2 and mu k_perp^2/(2 ky).
        const double qp = p.mu * (k.kx * k.kx + k.kz * k.kz) / (2.0 * ky);
        const cplx ry = 0.5 * (sg - I * r.d2 * ky - sg * qp);
        B.rows[m] << sg * a, ry, sg * g, rp, rr;
      }
    }
  }

  if (order == Truncation::three_halves) {
    B.columns[2] << -I * r.d22 * a * ky, -I * r.d22 * ky, -I * r.d22 * g * ky, 0.0, 1.0;
    B.rows[2] << I * r.d2 * a * ky, I * r.d2 * ky, I * r.d2 * g * ky, -1.0, 1.0;
  } else {
    B.columns[2] << 0.0, -I * r.d22 * ky, 0.0, 0.0, 1.0;
    const double half = order == Truncation::as_printed ? 0.5 : 1.0;
    B.rows[2] << 0.0, half * I * r.d2 * ky, 0.0, -1.0, 1.0;
  }

  B.columns[3] << I * ky, -I * s * k.kx, 0.0, 0.0, 0.0;
  B.columns[4] << 0.0, -I * s * k.kz, I * ky, 0.0, 0.0;
  const cplx f = -I / ky;
  switch (order) {
    case Truncation::three_halves:
      B.rows[3] << f * (1.0 - a * a), -f * a * (1.0 - q), -f * a * g, 0.0, 0.0;
      B.rows[4] << -f * a * g, -f * g * (1.0 - q), f * (1.0 - g * g), 0.0, 0.0;
      break;
    case Truncation::first_order:
      B.rows[3] << f * (1.0 - a * a), -f * a, -f * a * g, 0.0, 0.0;
      B.rows[4] << -f * a * g, -f * g, f * (1.0 - g * g), 0.0, 0.0;
      break;
    case Truncation::as_printed:
      // Printed with the opposite overall sign.
      B.rows[3] << -f * (1.0 - a * a), f * a, f * a * g, 0.0, 0.0;
      B.rows[4] << f * a * g, f * g, -f * (1.0 - g * g), 0.0, 0.0;
      break;
  }
  return B;
}

inline Mat5 build_projector(int mode, const Wavevector& k, const DimensionlessParams& p,
                            Truncation order = Truncation::three_halves) {
  if (mode < 1 || mode > 5) throw DomainError("build_projector: mode index must be 1..5");
  require_paraxial(k, "build_projector");
  if (order == Truncation::three_halves) {
    const ModeBasis B = mode_basis(k, p, order);
    return B.columns[mode - 1] * B.rows[mode - 1];
  }
  const detail::Ratios r(k, p);
  const cplx I(0.0, 1.0);
  const double a = r.a, g = r.g, q = r.q, ky = r.ky;
  const bool printed = order == Truncation::as_printed;
  Mat5 P = Mat5::Zero();
  if (mode <= 2) {
    const double sg = mode == 1 ? 1.0 : -1.0;
    const cplx yy = printed ? 0.5 * (1.0 + I * sg * (r.b / 2.0 - r.d2) * ky - 0.5 * q)
                            : 0.5 * (1.0 - q + I * sg * (r.b / 2.0 - r.d2) * ky);
    const cplx yp = printed ? 0.5 * (sg - I * r.d22 * ky - 0.5 * q)
                            : 0.5 * (sg - I * r.d22 * ky - 0.5 * sg * q);
    const cplx dr = I * r.d22 * ky / 2.0;
    P.row(0) << a * a / 2.0, a / 2.0, a * g / 2.0, sg * a / 2.0, 0.0;
    P.row(1) << a / 2.0, yy, g / 2.0, yp, dr;
    P.row(2) << a * g / 2.0, g / 2.0, g * g / 2.0, sg * g / 2.0, 0.0;
    P.row(3) << sg * a / 2.0, 0.5 * sg * (1.0 - 0.5 * q), sg * g / 2.0,
        0.5 * (1.0 - I * sg * (r.b / 2.0 - r.d21) * ky), sg * dr;
    P.row(4) << sg * a / 2.0, 0.5 * (sg - I * r.d2 * ky - 0.5 * sg * q), sg * g / 2.0,
        0.5 * (1.0 - I * sg * (r.b / 2.0 + r.d22) * ky), sg * dr;
  } else if (mode == 3) {
    P(1, 3) = I * r.d22 * ky;
    P(1, 4) = -I * r.d22 * ky;
    P(4, 1) = I * r.d2 * ky;
    P(4, 3) = -1.0;
    P(4, 4) = 1.0;
  } else if (mode == 4) {
    P.row(0) << 1.0 - a * a, -a, -a * g, 0.0, 0.0;
    P.row(1) << -a, a * a, 0.0, 0.0, 0.0;
  } else {
    P.row(1) << 0.0, g * g, -g, 0.0, 0.0;
    P.row(2) << -a * g, printed ? g : -g, 1.0 - g * g, 0.0, 0.0;
  }
  return P;
}

struct ProjectorSet {
  std::array<Mat5, 5> P;
  Truncation order = Truncation::three_halves;
};

inline ProjectorSet projector_set(const Wavevector& k, const DimensionlessParams& p,
                                  Truncation order = Truncation::three_halves) {
  ProjectorSet S;
  S.order = order;
  if (order == Truncation::three_halves) {
    const ModeBasis B = mode_basis(k, p, order);
    for (int i = 0; i < 5; ++i) S.P[i] = B.columns[i] * B.rows[i];
  } else {
    for (int i = 0; i < 5; ++i) S.P[i] = build_projector(i + 1, k, p, order);
  }
  return S;
}

// Max-norm residuals of the projector identities at one wavevector.
struct ProjectorResiduals {
  double completeness = 0.0;    // |sum P - I|
  double orthogonality = 0.0;   // max_{i != j} |P_i P_j|
  double idempotence = 0.0;     // max_i |P_i^2 - P_i|
  double commutation = 0.0;     // max_i |P_i L - L P_i|
};

inline ProjectorResiduals projector_residuals(const ProjectorSet& S, const Mat5& L) {
  ProjectorResiduals r;
  Mat5 sum = Mat5::Zero();
  for (int i = 0; i < 5; ++i) sum += S.P[i];
  r.completeness = (sum - Mat5::Identity()).cwiseAbs().maxCoeff();
  for (int i = 0; i < 5; ++i) {
    r.idempotence = std::max(r.idempotence, (S.P[i] * S.P[i] - S.P[i]).cwiseAbs().maxCoeff());
    r.commutation = std::max(r.commutation, (S.P[i] * L - L * S.P[i]).cwiseAbs().maxCoeff());
    for (int j = 0; j < 5; ++j)
      if (i != j)
        r.orthogonality = std::max(r.orthogonality, (S.P[i] * S.P[j]).cwiseAbs().maxCoeff());
  }
  return r;
}

// Wavevectors with |ky| in [ky_min, ky_max] (random sign) and kx, kz in
// [-kt, kt]. mt19937_64 with a hand-rolled unit draw so the sample is the
// same on every platform.
inline std::vector<Wavevector> sample_wavevectors(std::size_t n, std::uint64_t seed,
                                                  double ky_min = 0.5, double ky_max = 4.0,
                                                  double kt = 2.0) {
  if (!(ky_min > 0.0) || !(ky_max >= ky_min)) throw DomainError("wavevector sample: bad ky range");
  std::mt19937_64 rng(seed);
  auto unit = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  std::vector<Wavevector> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double kx = kt * (2.0 * unit() - 1.0);
    const double ky = ky_min + (ky_max - ky_min) * unit();
    const double kz = kt * (2.0 * unit() - 1.0);
    out.push_back({kx, unit() < 0.5 ? -ky : ky, kz});
  }
  return out;
}

inline ProjectorResiduals worst_residuals(const std::vector<Wavevector>& ks,
                                          const DimensionlessParams& p, Truncation order) {
  ProjectorResiduals w;
  for (const auto& k : ks) {
    const auto r = projector_residuals(projector_set(k, p, order), l_symbol(k, p));
    w.completeness = std::max(w.completeness, r.completeness);
    w.orthogonality = std::max(w.orthogonality, r.orthogonality);
    w.idempotence = std::max(w.idempotence, r.idempotence);
    w.commutation = std::max(w.commutation, r.commutation);
  }
  return w;
}

// Modal parts of a grid field. Coefficients on the ky = 0 plane and on
// Nyquist planes have no projector and go to axial_residual.
struct ModalParts {
  std::array<FieldState, 5> modes;
  FieldState axial_residual;
  std::vector<std::string> notes;

  FieldState sum() const {
    FieldState s = axial_residual;
    for (const auto& m : modes) s = s + m;
    return s;
  }
};

inline bool has_projector(const Grid& g, std::size_t iz, std::size_t ix, std::size_t iy) {
  return iy != 0 && !Grid::is_nyquist(iy, g.ny) && !Grid::is_nyquist(ix, g.nx) &&
         !Grid::is_nyquist(iz, g.nz);
}

// Applies P_mode in place at every wavevector that has a projector;
// the others are zeroed.
inline void project_spectral(SpectralField& s, int mode, const DimensionlessParams& p,
                             Truncation order = Truncation::three_halves) {
  const Grid& g = s.grid;
  for (std::size_t iz = 0; iz < g.nz; ++iz)
    for (std::size_t ix = 0; ix < g.nx; ++ix)
      for (std::size_t iy = 0; iy < g.nyc(); ++iy) {
        const std::size_t n = g.spectral_index(iz, ix, iy);
        if (!has_projector(g, iz, ix, iy)) {
          for (int c = 0; c < 5; ++c) s.c[c][n] = 0.0;
          continue;
        }
        const Wavevector k{g.kx(ix), g.ky(iy), g.kz(iz)};
        const Mat5 P = build_projector(mode, k, p, order);
        Vec5 v;
        for (int c = 0; c < 5; ++c) v(c) = s.c[c][n];
        const Vec5 w = P * v;
        for (int c = 0; c < 5; ++c) s.c[c][n] = w(c);
      }
}

inline ModalParts decompose(const FieldState& f, const DimensionlessParams& p,
                            Truncation order = Truncation::three_halves) {
  const Grid& g = f.grid;
  const SpectralField in = forward_transform(f);
  std::array<SpectralField, 5> parts;
  for (auto& q : parts) q = SpectralField(g);
  SpectralField resid(g);
  double e_total = 0.0, e_resid = 0.0;
  for (std::size_t iz = 0; iz < g.nz; ++iz)
    for (std::size_t ix = 0; ix < g.nx; ++ix)
      for (std::size_t iy = 0; iy < g.nyc(); ++iy) {
        const std::size_t n = g.spectral_index(iz, ix, iy);
        Vec5 v;
        double e = 0.0;
        for (int c = 0; c < 5; ++c) {
          v(c) = in.c[c][n];
          e += detail::parseval_weight(g, iy) * std::norm(v(c));
        }
        e_total += e;
        if (!has_projector(g, iz, ix, iy)) {
          e_resid += e;
          for (int c = 0; c < 5; ++c) resid.c[c][n] = v(c);
          continue;
        }
        const ProjectorSet S = projector_set(Wavevector{g.kx(ix), g.ky(iy), g.kz(iz)}, p, order);
        for (int m = 0; m < 5; ++m) {
          const Vec5 w = S.P[m] * v;
          for (int c = 0; c < 5; ++c) parts[m].c[c][n] = w(c);
        }
      }
  ModalParts out;
  for (int m = 0; m < 5; ++m) {
    out.modes[m] = inverse_transform(parts[m]);
    out.modes[m].time_stamp = f.time_stamp;
  }
  out.axial_residual = inverse_transform(resid);
  out.axial_residual.time_stamp = f.time_stamp;
  out.notes = f.notes;
  if (e_total > 0.0 && e_resid > kGaugeTolerance * e_total)
    out.notes.push_back("gauge: " + std::to_string(e_resid / e_total) +
                        " of the energy sits on ky=0 or Nyquist planes (axial residual)");
  return out;
}

}  // namespace acoustream
