#pragma once

// Uniform periodic grids and the physical-space containers.
// Storage order is [iz][ix][iy]: y, the propagation axis, is contiguous.

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "error.hpp"

namespace acoustream {

struct Grid {
  std::size_t nx = 1, ny = 1, nz = 1;
  double lx = 1.0, ly = 1.0, lz = 1.0;  // periods
  double x0 = 0.0, y0 = 0.0, z0 = 0.0;  // coordinate of index 0

  static Grid line_y(std::size_t ny, double ly, double y0 = 0.0) {
    Grid g;
    g.ny = ny;
    g.ly = ly;
    g.y0 = y0;
    g.validate();
    return g;
  }

  // x centred on 0, y starting at y0.
  static Grid plane_xy(std::size_t nx, double lx, std::size_t ny, double ly, double y0 = 0.0) {
    Grid g;
    g.nx = nx;
    g.lx = lx;
    g.x0 = -0.5 * lx;
    g.ny = ny;
    g.ly = ly;
    g.y0 = y0;
    g.validate();
    return g;
  }

  static Grid box(std::size_t nx, double lx, std::size_t ny, double ly, std::size_t nz, double lz,
                  double y0 = 0.0) {
    Grid g = plane_xy(nx, lx, ny, ly, y0);
    g.nz = nz;
    g.lz = lz;
    g.z0 = -0.5 * lz;
    g.validate();
    return g;
  }

  void validate() const {
    for (std::size_t n : {nx, ny, nz}) {
      if (n < 1) throw DomainError("grid: point counts must be >= 1");
      if (n > 1 && n % 2 != 0) throw DomainError("grid: transformed axes need even point counts");
    }
    for (double l : {lx, ly, lz})
      if (!(l > 0.0) || !std::isfinite(l)) throw DomainError("grid: periods must be > 0");
    for (double o : {x0, y0, z0})
      if (!std::isfinite(o)) throw DomainError("grid: origins must be finite");
  }

  std::size_t size() const { return nx * ny * nz; }
  std::size_t index(std::size_t iz, std::size_t ix, std::size_t iy) const {
    return (iz * nx + ix) * ny + iy;
  }

  double dx() const { return lx / static_cast<double>(nx); }
  double dy() const { return ly / static_cast<double>(ny); }
  double dz() const { return lz / static_cast<double>(nz); }
  double x(std::size_t i) const { return x0 + static_cast<double>(i) * dx(); }
  double y(std::size_t j) const { return y0 + static_cast<double>(j) * dy(); }
  double z(std::size_t k) const { return z0 + static_cast<double>(k) * dz(); }
  double y_last() const { return y(ny - 1); }

  // Half-spectrum along y (real-to-complex layout).
  std::size_t nyc() const { return ny / 2 + 1; }
  std::size_t spectral_size() const { return nz * nx * nyc(); }
  std::size_t spectral_index(std::size_t iz, std::size_t ix, std::size_t iy) const {
    return (iz * nx + ix) * nyc() + iy;
  }

  // Signed harmonic number of a full-length axis index.
  static long harmonic(std::size_t i, std::size_t n) {
    return i <= n / 2 ? static_cast<long>(i) : static_cast<long>(i) - static_cast<long>(n);
  }
  static bool is_nyquist(std::size_t i, std::size_t n) { return n > 1 && n % 2 == 0 && i == n / 2; }

  // Wavenumbers in the convention f = sum f~ exp(-i k.x), so d/dx -> -i kx.
  // They are the negatives of the usual DFT wavenumbers.
  double kx(std::size_t ix) const {
    return -2.0 * std::numbers::pi * static_cast<double>(harmonic(ix, nx)) / lx;
  }
  double ky(std::size_t iy) const {
    return -2.0 * std::numbers::pi * static_cast<double>(iy) / ly;
  }
  double kz(std::size_t iz) const {
    return -2.0 * std::numbers::pi * static_cast<double>(harmonic(iz, nz)) / lz;
  }

  bool same_shape(const Grid& o) const {
    return nx == o.nx && ny == o.ny && nz == o.nz && lx == o.lx && ly == o.ly && lz == o.lz &&
           x0 == o.x0 && y0 == o.y0 && z0 == o.z0;
  }
};

struct ScalarField {
  Grid grid;
  std::vector<double> data;
  double time_stamp = 0.0;
  std::vector<std::string> notes;

  ScalarField() = default;
  explicit ScalarField(const Grid& g, double value = 0.0) : grid(g), data(g.size(), value) {}

  template <class F>
  static ScalarField sample(const Grid& g, F&& f) {
    ScalarField s(g);
    for (std::size_t iz = 0; iz < g.nz; ++iz)
      for (std::size_t ix = 0; ix < g.nx; ++ix)
        for (std::size_t iy = 0; iy < g.ny; ++iy)
          s.data[g.index(iz, ix, iy)] = f(g.x(ix), g.y(iy), g.z(iz));
    return s;
  }

  double& operator()(std::size_t iz, std::size_t ix, std::size_t iy) {
    return data[grid.index(iz, ix, iy)];
  }
  double operator()(std::size_t iz, std::size_t ix, std::size_t iy) const {
    return data[grid.index(iz, ix, iy)];
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : data) m = std::max(m, std::abs(v));
    return m;
  }
  double l2() const {
    double s = 0.0;
    for (double v : data) s += v * v;
    return std::sqrt(s);
  }
};

namespace detail {
inline void require_same(const ScalarField& a, const ScalarField& b) {
  if (!a.grid.same_shape(b.grid) || a.data.size() != b.data.size())
    throw DomainError("field arithmetic on different grids");
}
}  // namespace detail

inline ScalarField operator+(ScalarField a, const ScalarField& b) {
  detail::require_same(a, b);
  for (std::size_t i = 0; i < a.data.size(); ++i) a.data[i] += b.data[i];
  return a;
}
inline ScalarField operator-(ScalarField a, const ScalarField& b) {
  detail::require_same(a, b);
  for (std::size_t i = 0; i < a.data.size(); ++i) a.data[i] -= b.data[i];
  return a;
}
inline ScalarField operator*(ScalarField a, const ScalarField& b) {
  detail::require_same(a, b);
  for (std::size_t i = 0; i < a.data.size(); ++i) a.data[i] *= b.data[i];
  return a;
}
inline ScalarField operator*(double c, ScalarField a) {
  for (double& v : a.data) v *= c;
  return a;
}
inline ScalarField operator-(ScalarField a) {
  for (double& v : a.data) v = -v;
  return a;
}

enum class Component : int { vx = 0, vy = 1, vz = 2, p = 3, rho = 4 };

inline const char* component_name(int c) {
  static const char* names[] = {"vx", "vy", "vz", "p", "rho"};
  return names[c];
}

// The five-component perturbation column (vx, vy, vz, p, rho).
struct FieldState {
  Grid grid;
  std::array<std::vector<double>, 5> c;
  double time_stamp = 0.0;
  std::vector<std::string> notes;

  FieldState() = default;
  explicit FieldState(const Grid& g) : grid(g) {
    for (auto& v : c) v.assign(g.size(), 0.0);
  }

  std::vector<double>& operator[](Component k) { return c[static_cast<int>(k)]; }
  const std::vector<double>& operator[](Component k) const { return c[static_cast<int>(k)]; }

  ScalarField component(int k) const {
    ScalarField s(grid);
    s.data = c[k];
    s.time_stamp = time_stamp;
    return s;
  }
  ScalarField component(Component k) const { return component(static_cast<int>(k)); }

  void set(int k, const ScalarField& s) {
    if (!s.grid.same_shape(grid)) throw DomainError("FieldState::set: grid mismatch");
    c[k] = s.data;
  }
  void set(Component k, const ScalarField& s) { set(static_cast<int>(k), s); }

  void require_finite() const {
    for (int k = 0; k < 5; ++k)
      for (std::size_t i = 0; i < c[k].size(); ++i)
        if (!std::isfinite(c[k][i]))
          throw DomainError(std::string("non-finite value in component ") + component_name(k) +
                            " at flat index " + std::to_string(i));
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& v : c)
      for (double x : v) m = std::max(m, std::abs(x));
    return m;
  }
};

inline FieldState operator+(FieldState a, const FieldState& b) {
  if (!a.grid.same_shape(b.grid)) throw DomainError("field arithmetic on different grids");
  for (int k = 0; k < 5; ++k)
    for (std::size_t i = 0; i < a.c[k].size(); ++i) a.c[k][i] += b.c[k][i];
  return a;
}
inline FieldState operator-(FieldState a, const FieldState& b) {
  if (!a.grid.same_shape(b.grid)) throw DomainError("field arithmetic on different grids");
  for (int k = 0; k < 5; ++k)
    for (std::size_t i = 0; i < a.c[k].size(); ++i) a.c[k][i] -= b.c[k][i];
  return a;
}

// Smooth C-infinity step: 0 for u <= 0, 1 for u >= 1.
inline double smooth_step(double u) {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / u);
  const double b = std::exp(-1.0 / (1.0 - u));
  return a / (a + b);
}

// Window along y that brings a field smoothly to zero near the lower edge
// (over [lower_start, lower_start + lower_width]) and near the upper edge
// of the period (over the last upper_width). Widths of 0 disable a side.
// Far-field integrals only look towards +y, so the window spoils results
// below valid_from() and nothing above it.
struct AxialWindow {
  double lower_start = 0.0;
  double lower_width = 0.0;
  double upper_width = 0.0;

  double operator()(const Grid& g, double y) const {
    double w = 1.0;
    if (lower_width > 0.0) w *= smooth_step((y - lower_start) / lower_width);
    if (upper_width > 0.0) w *= smooth_step((g.y0 + g.ly - y) / upper_width);
    return w;
  }
  double valid_from() const { return lower_start + lower_width; }
  double valid_to(const Grid& g) const { return g.y0 + g.ly - upper_width; }

  ScalarField apply(ScalarField f) const {
    const Grid& g = f.grid;
    std::vector<double> w(g.ny);
    for (std::size_t iy = 0; iy < g.ny; ++iy) w[iy] = (*this)(g, g.y(iy));
    for (std::size_t iz = 0; iz < g.nz; ++iz)
      for (std::size_t ix = 0; ix < g.nx; ++ix)
        for (std::size_t iy = 0; iy < g.ny; ++iy) f(iz, ix, iy) *= w[iy];
    return f;
  }
};

}  // namespace acoustream
