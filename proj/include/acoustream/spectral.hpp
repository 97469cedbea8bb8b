#pragma once

// Real-to-complex transforms (FFTW) and the diagonal spectral operators.
//
// Coefficients are normalised so that f(x) = sum_k f~(k) exp(-i k.x) with the
// wavevectors of Grid::kx/ky/kz; d/dx is multiplication by -i kx. Only the
// ky <= 0 half of the spectrum is stored (ky = 0 ... Nyquist).

#include <fftw3.h>

#include <algorithm>
#include <complex>
#include <cstring>
#include <map>
#include <mutex>
#include <string>
#include <tuple>
#include <vector>

#include "error.hpp"
#include "grid.hpp"

namespace acoustream {

using cplx = std::complex<double>;

struct SpectralScalar {
  Grid grid;
  std::vector<cplx> data;
  double time_stamp = 0.0;
  std::vector<std::string> notes;

  SpectralScalar() = default;
  explicit SpectralScalar(const Grid& g) : grid(g), data(g.spectral_size(), cplx(0.0, 0.0)) {}

  cplx& operator()(std::size_t iz, std::size_t ix, std::size_t iy) {
    return data[grid.spectral_index(iz, ix, iy)];
  }
  cplx operator()(std::size_t iz, std::size_t ix, std::size_t iy) const {
    return data[grid.spectral_index(iz, ix, iy)];
  }
};

struct SpectralField {
  Grid grid;
  std::array<std::vector<cplx>, 5> c;
  double time_stamp = 0.0;
  std::vector<std::string> notes;

  SpectralField() = default;
  explicit SpectralField(const Grid& g) : grid(g) {
    for (auto& v : c) v.assign(g.spectral_size(), cplx(0.0, 0.0));
  }

  SpectralScalar component(int k) const {
    SpectralScalar s(grid);
    s.data = c[k];
    return s;
  }
  void set(int k, const SpectralScalar& s) { c[k] = s.data; }
};

namespace detail {

class FftPlans {
 public:
  struct Pair {
    fftw_plan r2c = nullptr;
    fftw_plan c2r = nullptr;
  };

  static FftPlans& instance() {
    static FftPlans p;
    return p;
  }

  // Planning is not thread safe in FFTW; execution with the new-array
  // interface is. FFTW_ESTIMATE keeps results independent of timing.
  Pair get(const Grid& g) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto key = std::make_tuple(g.nz, g.nx, g.ny);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    const int n[3] = {static_cast<int>(g.nz), static_cast<int>(g.nx), static_cast<int>(g.ny)};
    std::vector<double> rbuf(g.size());
    std::vector<cplx> cbuf(g.spectral_size());
    auto* cb = reinterpret_cast<fftw_complex*>(cbuf.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    Pair p;
    p.r2c = fftw_plan_dft_r2c(3, n, rbuf.data(), cb, flags);
    p.c2r = fftw_plan_dft_c2r(3, n, cb, rbuf.data(), flags | FFTW_DESTROY_INPUT);
    if (!p.r2c || !p.c2r) throw Error("FFTW planning failed");
    plans_.emplace(key, p);
    return p;
  }

 private:
  FftPlans() = default;
  ~FftPlans() {
    for (auto& [k, p] : plans_) {
      fftw_destroy_plan(p.r2c);
      fftw_destroy_plan(p.c2r);
    }
  }
  std::mutex mutex_;
  std::map<std::tuple<std::size_t, std::size_t, std::size_t>, Pair> plans_;
};

// Weight of a stored coefficient in Parseval sums (the unstored conjugate
// half counts twice).
inline double parseval_weight(const Grid& g, std::size_t iy) {
  return (iy == 0 || Grid::is_nyquist(iy, g.ny)) ? 1.0 : 2.0;
}

}  // namespace detail

inline SpectralScalar forward(const ScalarField& f) {
  const Grid& g = f.grid;
  g.validate();
  for (std::size_t i = 0; i < f.data.size(); ++i)
    if (!std::isfinite(f.data[i]))
      throw DomainError("forward transform: non-finite input at flat index " + std::to_string(i));
  SpectralScalar s(g);
  s.time_stamp = f.time_stamp;
  s.notes = f.notes;
  auto plans = detail::FftPlans::instance().get(g);
  std::vector<double> in = f.data;
  fftw_execute_dft_r2c(plans.r2c, in.data(), reinterpret_cast<fftw_complex*>(s.data.data()));
  // FFTW computes sum f exp(-2 pi i m j/n); with k = -2 pi m/L this is the
  // convention above after dividing by the point count.
  const double norm = 1.0 / static_cast<double>(g.size());
  for (auto& v : s.data) v *= norm;
  return s;
}

// Largest |c(k) - conj(c(-k))| over the self-conjugate planes, relative to
// the largest coefficient.
inline double hermitian_defect(const SpectralScalar& s) {
  const Grid& g = s.grid;
  double cmax = 0.0;
  for (const auto& v : s.data) cmax = std::max(cmax, std::abs(v));
  if (cmax == 0.0) return 0.0;
  double worst = 0.0;
  std::vector<std::size_t> planes = {0};
  if (Grid::is_nyquist(g.ny / 2, g.ny)) planes.push_back(g.ny / 2);
  for (std::size_t iy : planes)
    for (std::size_t iz = 0; iz < g.nz; ++iz)
      for (std::size_t ix = 0; ix < g.nx; ++ix) {
        const std::size_t jz = (g.nz - iz) % g.nz;
        const std::size_t jx = (g.nx - ix) % g.nx;
        worst = std::max(worst, std::abs(s(iz, ix, iy) - std::conj(s(jz, jx, iy))));
      }
  return worst / cmax;
}

inline ScalarField inverse(const SpectralScalar& s, double tolerance = 1e-10) {
  const Grid& g = s.grid;
  if (s.data.size() != g.spectral_size()) throw DomainError("inverse transform: size mismatch");
  const double defect = hermitian_defect(s);
  if (defect > tolerance)
    throw SymmetryError("inverse transform: Hermitian symmetry broken (relative defect " +
                        std::to_string(defect) + ")");
  ScalarField f(g);
  f.time_stamp = s.time_stamp;
  f.notes = s.notes;
  auto plans = detail::FftPlans::instance().get(g);
  std::vector<cplx> tmp = s.data;
  fftw_execute_dft_c2r(plans.c2r, reinterpret_cast<fftw_complex*>(tmp.data()), f.data.data());
  return f;
}

inline SpectralField forward_transform(const FieldState& f) {
  SpectralField s(f.grid);
  s.time_stamp = f.time_stamp;
  s.notes = f.notes;
  for (int k = 0; k < 5; ++k) {
    try {
      s.c[k] = forward(f.component(k)).data;
    } catch (const DomainError& e) {
      throw DomainError(std::string(e.what()) + " (component " + component_name(k) + ")");
    }
  }
  return s;
}

inline FieldState inverse_transform(const SpectralField& s) {
  FieldState f(s.grid);
  f.time_stamp = s.time_stamp;
  f.notes = s.notes;
  for (int k = 0; k < 5; ++k) f.c[k] = inverse(s.component(k)).data;
  return f;
}

// Applies m(kx, ky, kz) to every stored coefficient. When `odd` is set the
// Nyquist planes are zeroed, since an odd multiplier cannot be represented
// on them by a real field.
template <class M>
void apply_multiplier(SpectralScalar& s, M&& m, bool odd_x, bool odd_y, bool odd_z) {
  const Grid& g = s.grid;
  for (std::size_t iz = 0; iz < g.nz; ++iz) {
    const double kz = g.kz(iz);
    const bool nz_ = odd_z && Grid::is_nyquist(iz, g.nz);
    for (std::size_t ix = 0; ix < g.nx; ++ix) {
      const double kx = g.kx(ix);
      const bool nx_ = odd_x && Grid::is_nyquist(ix, g.nx);
      for (std::size_t iy = 0; iy < g.nyc(); ++iy) {
        cplx& v = s(iz, ix, iy);
        if (nz_ || nx_ || (odd_y && Grid::is_nyquist(iy, g.ny))) {
          v = 0.0;
          continue;
        }
        v *= m(kx, g.ky(iy), kz);
      }
    }
  }
}

enum class SpectralOp { d_dx, d_dy, d_dz, transverse_laplacian, laplacian_beam };

inline SpectralScalar apply_operator(SpectralScalar s, SpectralOp op, double mu = 0.0) {
  const cplx I(0.0, 1.0);
  switch (op) {
    case SpectralOp::d_dx:
      apply_multiplier(s, [&](double kx, double, double) { return -I * kx; }, true, false, false);
      break;
    case SpectralOp::d_dy:
      apply_multiplier(s, [&](double, double ky, double) { return -I * ky; }, false, true, false);
      break;
    case SpectralOp::d_dz:
      apply_multiplier(s, [&](double, double, double kz) { return -I * kz; }, false, false, true);
      break;
    case SpectralOp::transverse_laplacian:
      apply_multiplier(
          s, [&](double kx, double, double kz) { return cplx(-(kx * kx + kz * kz), 0.0); }, false,
          false, false);
      break;
    case SpectralOp::laplacian_beam:
      apply_multiplier(
          s,
          [&](double kx, double ky, double kz) {
            return cplx(-(mu * kx * kx + ky * ky + mu * kz * kz), 0.0);
          },
          false, false, false);
      break;
  }
  return s;
}

inline SpectralField apply_operator(SpectralField s, SpectralOp op, double mu = 0.0) {
  for (int k = 0; k < 5; ++k) s.set(k, apply_operator(s.component(k), op, mu));
  return s;
}

// Fraction of the (Parseval) energy carried by the ky = 0 plane.
inline double axial_mean_fraction(const SpectralScalar& s) {
  const Grid& g = s.grid;
  double total = 0.0, mean = 0.0;
  for (std::size_t iz = 0; iz < g.nz; ++iz)
    for (std::size_t ix = 0; ix < g.nx; ++ix)
      for (std::size_t iy = 0; iy < g.nyc(); ++iy) {
        const double e = detail::parseval_weight(g, iy) * std::norm(s(iz, ix, iy));
        total += e;
        if (iy == 0) mean += e;
      }
  return total > 0.0 ? mean / total : 0.0;
}

inline constexpr double kGaugeTolerance = 1e-8;

// Multiplies by 1/(-i ky); the ky = 0 plane is set to zero, so the result
// has zero mean along y. A note is attached when the discarded plane held
// more than kGaugeTolerance of the energy.
inline SpectralScalar antiderivative_y(SpectralScalar s) {
  const double frac = axial_mean_fraction(s);
  if (frac > kGaugeTolerance)
    s.notes.push_back("gauge: zero-mean antiderivative discarded a ky=0 plane holding " +
                      std::to_string(frac) + " of the energy");
  const cplx I(0.0, 1.0);
  apply_multiplier(
      s, [&](double, double ky, double) { return ky == 0.0 ? cplx(0.0) : I / ky; }, false, true,
      false);
  return s;
}

inline SpectralField antiderivative_y(SpectralField s) {
  for (int k = 0; k < 5; ++k) {
    auto r = antiderivative_y(s.component(k));
    s.set(k, r);
    for (auto& n : r.notes) s.notes.push_back(std::string(component_name(k)) + ": " + n);
  }
  return s;
}

// 2/3-rule truncation: harmonics with |m| > n/3 are removed on every
// transformed axis.
inline void dealias(SpectralScalar& s) {
  const Grid& g = s.grid;
  auto cut = [](std::size_t i, std::size_t n) {
    return n > 1 && 3 * std::abs(Grid::harmonic(i, n)) > static_cast<long>(n);
  };
  for (std::size_t iz = 0; iz < g.nz; ++iz)
    for (std::size_t ix = 0; ix < g.nx; ++ix)
      for (std::size_t iy = 0; iy < g.nyc(); ++iy)
        if (cut(iz, g.nz) || cut(ix, g.nx) || (g.ny > 1 && 3 * iy > g.ny)) s(iz, ix, iy) = 0.0;
}

// Physical-space conveniences.
inline ScalarField derivative(const ScalarField& f, SpectralOp op, double mu = 0.0) {
  auto r = inverse(apply_operator(forward(f), op, mu));
  r.notes = f.notes;
  return r;
}

inline ScalarField dx(const ScalarField& f) { return derivative(f, SpectralOp::d_dx); }
inline ScalarField dy(const ScalarField& f) { return derivative(f, SpectralOp::d_dy); }
inline ScalarField dz(const ScalarField& f) { return derivative(f, SpectralOp::d_dz); }

inline ScalarField zero_mean_integral_y(const ScalarField& f) {
  return inverse(antiderivative_y(forward(f)));
}

// Integral along y with the constant fixed at the far edge:
//   result(y) = -int_y^{y_last} f dy',
// so result(y_last) = 0. The window, if given, is applied to the integrand
// (to make it periodic and smooth) and again to the result. Exact for
// periodic smooth integrands: the zero-mean part is integrated spectrally
// and the y-mean of each line contributes a linear ramp.
inline ScalarField far_field_integral_y(const ScalarField& f, const AxialWindow* window = nullptr) {
  const Grid& g = f.grid;
  ScalarField in = window ? window->apply(f) : f;
  std::vector<double> mean(g.nz * g.nx, 0.0);
  for (std::size_t iz = 0; iz < g.nz; ++iz)
    for (std::size_t ix = 0; ix < g.nx; ++ix) {
      double s = 0.0;
      for (std::size_t iy = 0; iy < g.ny; ++iy) s += in(iz, ix, iy);
      mean[iz * g.nx + ix] = s / static_cast<double>(g.ny);
    }
  SpectralScalar sp = forward(in);
  const cplx I(0.0, 1.0);
  apply_multiplier(
      sp, [&](double, double ky, double) { return ky == 0.0 ? cplx(0.0) : I / ky; }, false, true,
      false);
  ScalarField out = inverse(sp);
  const double ye = g.y_last();
  for (std::size_t iz = 0; iz < g.nz; ++iz)
    for (std::size_t ix = 0; ix < g.nx; ++ix) {
      const double m = mean[iz * g.nx + ix];
      const double se = out(iz, ix, g.ny - 1);
      for (std::size_t iy = 0; iy < g.ny; ++iy)
        out(iz, ix, iy) = out(iz, ix, iy) - se + m * (g.y(iy) - ye);
    }
  out.notes = f.notes;
  out.time_stamp = f.time_stamp;
  return window ? window->apply(std::move(out)) : out;
}

}  // namespace acoustream
