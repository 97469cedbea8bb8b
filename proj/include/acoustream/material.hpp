#pragma once

// Thermodynamic model, nonlinearity constants and the dimensionless
// parameter set. MaterialModel is SI; everything else is dimensionless.

#include <cmath>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "error.hpp"
#include "keyvalue.hpp"

namespace acoustream {

struct MaterialModel {
  double rho0 = 0.0;                  // kg/m^3
  double p0 = 0.0;                    // Pa
  double shear_viscosity = 0.0;       // eta, Pa s
  double bulk_viscosity = 0.0;        // zeta, Pa s
  double thermal_conductivity = 0.0;  // chi, W/(m K)
  double cv = 0.0;                    // J/(kg K)
  // Energy expansion
  //   rho0 e' = E1 p' + E2 p0/rho0 rho' + E3/p0 p'^2
  //             + E4 p0/rho0^2 rho'^2 + E5/rho0 p' rho'
  double E1 = 0.0, E2 = 0.0, E3 = 0.0, E4 = 0.0, E5 = 0.0;
  // Temperature expansion T' = Theta1 p'/(rho0 cv) + Theta2 p0 rho'/(rho0^2 cv)
  double Theta1 = 0.0, Theta2 = 0.0;
  std::optional<double> k_isothermal;  // (1/rho0)(dp/drho)_T
  std::optional<double> beta_thermal;  // -(1/rho0)(drho/dT)

  // e = p/((gamma-1) rho) expanded about (p0, rho0).
  static MaterialModel ideal_gas(double gamma, double p0, double rho0, double eta, double zeta,
                                 double chi, double cv) {
    if (!(gamma > 1.0)) throw DomainError("ideal gas needs gamma > 1");
    MaterialModel m;
    m.rho0 = rho0;
    m.p0 = p0;
    m.shear_viscosity = eta;
    m.bulk_viscosity = zeta;
    m.thermal_conductivity = chi;
    m.cv = cv;
    const double g1 = 1.0 / (gamma - 1.0);
    m.E1 = g1;
    m.E2 = -g1;
    m.E3 = 0.0;
    m.E4 = g1;
    m.E5 = -g1;
    // T = p/(rho R) with R = (gamma-1) cv.
    m.Theta1 = g1;
    m.Theta2 = -g1;
    m.validate();
    return m;
  }

  void validate() const {
    auto need = [](bool ok, const char* what) {
      if (!ok) throw DomainError(std::string("material: ") + what);
    };
    for (double v : {rho0, p0, shear_viscosity, bulk_viscosity, thermal_conductivity, cv, E1, E2,
                     E3, E4, E5, Theta1, Theta2})
      need(std::isfinite(v), "all coefficients must be finite");
    need(rho0 > 0.0, "rho0 > 0 violated");
    need(p0 > 0.0, "p0 > 0 violated");
    need(cv > 0.0, "cv > 0 violated");
    need(shear_viscosity >= 0.0, "shear_viscosity >= 0 violated");
    need(bulk_viscosity >= 0.0, "bulk_viscosity >= 0 violated");
    need(thermal_conductivity >= 0.0, "thermal_conductivity >= 0 violated");
    need(E1 > 0.0, "E1 > 0 violated");
    need(E2 < 1.0, "E2 < 1 violated");
    if (k_isothermal.has_value() != beta_thermal.has_value())
      throw DomainError("material: k_isothermal and beta_thermal must be given together");
    if (k_isothermal) {
      need(*beta_thermal != 0.0, "beta_thermal must be nonzero");
      const double t1 = rho0 * cv * *k_isothermal / *beta_thermal;
      const double t2 = -rho0 * cv * *beta_thermal / p0;
      auto close = [](double a, double b) {
        return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b));
      };
      need(close(Theta1, t1), "Theta1 != rho0 cv k_isothermal / beta_thermal");
      need(close(Theta2, t2), "Theta2 != -rho0 cv beta_thermal / p0");
    }
  }
};

inline double sound_speed(const MaterialModel& m) {
  if (!(m.E1 > 0.0)) throw DomainError("sound_speed: E1 > 0 violated");
  if (!(m.E2 < 1.0)) throw DomainError("sound_speed: E2 < 1 violated");
  return std::sqrt(m.p0 * (1.0 - m.E2) / (m.rho0 * m.E1));
}

struct NonlinearityConstants {
  double q = 0.0;
  double s = 0.0;
};

inline NonlinearityConstants nonlinearity_constants(const MaterialModel& m) {
  if (m.E1 == 0.0) throw DomainError("nonlinearity_constants: E1 = 0");
  if (m.E2 == 1.0) throw DomainError("nonlinearity_constants: E2 = 1");
  const double r = (1.0 - m.E2) / m.E1;
  NonlinearityConstants c;
  c.q = (-1.0 + 2.0 * r * m.E3 + m.E5) / m.E1;
  c.s = (1.0 + m.E2 + 2.0 * m.E4 + r * m.E5) / (1.0 - m.E2);
  return c;
}

struct DimensionlessParams {
  double mu = 0.0;
  double eps_amp = 0.0;
  double delta11 = 0.0, delta12 = 0.0, delta21 = 0.0, delta22 = 0.0;
  double beta_total = 0.0;
  double q_const = -1.4;
  double s_const = 0.0;
  double eps_nl = 1.2;
  // 1/E1 weights the dissipation function in the pressure row of phi_tv.
  double e1 = 2.5;
  double sound_speed = 0.0;   // m/s, informational
  double length_scale = 0.0;  // m, informational
  std::vector<std::string> warnings;

  double delta1() const { return delta11 + delta12; }
  double delta2() const { return delta21 + delta22; }

  // Direct construction for dimensionless studies. Q, S and E1 default to
  // the gamma = 1.4 ideal gas.
  static DimensionlessParams from_deltas(double mu, double eps, double d11, double d12,
                                         double d21, double d22, double q = -1.4, double s = 0.0,
                                         double e1 = 2.5) {
    DimensionlessParams p;
    p.mu = mu;
    p.eps_amp = eps;
    p.delta11 = d11;
    p.delta12 = d12;
    p.delta21 = d21;
    p.delta22 = d22;
    p.q_const = q;
    p.s_const = s;
    p.e1 = e1;
    p.finalize();
    return p;
  }

  // Splits a total beta over the four deltas in fixed proportions
  // (0.4, 0.3, 0.5, -0.2), which keeps delta22 < 0.
  static DimensionlessParams from_beta(double mu, double eps, double beta) {
    return from_deltas(mu, eps, 0.4 * beta, 0.3 * beta, 0.5 * beta, -0.2 * beta);
  }

  // Recomputes the derived entries and the warning list.
  void finalize() {
    beta_total = delta11 + delta12 + delta21 + delta22;
    eps_nl = (-q_const - s_const + 1.0) / 2.0;
    validate();
  }

  void validate() {
    const std::pair<const char*, double> named[] = {
        {"mu", mu},           {"eps_amp", eps_amp}, {"delta11", delta11}, {"delta12", delta12},
        {"delta21", delta21}, {"delta22", delta22}, {"q_const", q_const}, {"s_const", s_const},
        {"e1", e1}};
    for (const auto& [name, v] : named)
      if (!std::isfinite(v)) throw DomainError(std::string("non-finite parameter ") + name);
    if (mu < 0.0) throw DomainError("mu must be >= 0");
    if (eps_amp < 0.0) throw DomainError("eps_amp must be >= 0");
    if (!(e1 > 0.0)) throw DomainError("e1 must be > 0");
    if (beta_total < 0.0) throw DomainError("beta_total < 0: anti-dissipative parameters");
    warnings.clear();
    if (beta_total == 0.0) warnings.push_back("beta_total = 0: inviscid limit");
    if (delta22 > 0.0) warnings.push_back("delta22 > 0: entropy mode is not decaying");
    if (delta12 < 0.0) warnings.push_back("delta12 < 0: vortical modes are not decaying");
    if (mu > 0.3) warnings.push_back("mu > 0.3: paraxial ordering is doubtful");
    if (eps_amp > 0.3) warnings.push_back("eps_amp > 0.3: weak nonlinearity is doubtful");
  }
};

inline DimensionlessParams to_dimensionless(const MaterialModel& m, double length, double eps,
                                            double mu) {
  if (!(length > 0.0) || !std::isfinite(length))
    throw DomainError("to_dimensionless: length scale must be > 0");
  m.validate();
  const double c = sound_speed(m);
  const auto nl = nonlinearity_constants(m);
  const double scale = m.rho0 * c * length;
  DimensionlessParams p;
  p.mu = mu;
  p.eps_amp = eps;
  p.delta11 = (m.bulk_viscosity + m.shear_viscosity / 3.0) / scale;
  p.delta12 = m.shear_viscosity / scale;
  p.delta21 = m.thermal_conductivity * m.Theta1 / (scale * m.cv * m.E1);
  p.delta22 = m.thermal_conductivity * m.Theta2 / (scale * m.cv * (1.0 - m.E2));
  const std::pair<const char*, double> deltas[] = {
      {"delta11", p.delta11}, {"delta12", p.delta12}, {"delta21", p.delta21}, {"delta22", p.delta22}};
  for (const auto& [name, v] : deltas)
    if (!std::isfinite(v)) throw DomainError(std::string("to_dimensionless: non-finite ") + name);
  p.q_const = nl.q;
  p.s_const = nl.s;
  p.e1 = m.E1;
  p.sound_speed = c;
  p.length_scale = length;
  p.finalize();
  return p;
}

// Material file: "key = value" lines, keys equal to the MaterialModel field
// names, SI units. See materials/schema.txt.
inline MaterialModel parse_material(const KvDocument& doc) {
  const KvSection& s = doc.section_or_empty("");
  for (const auto& sec : doc.sections())
    if (!sec.name().empty())
      throw SchemaError("material files have no sections, found [" + sec.name() + "]", sec.line());
  s.expect_only({"rho0", "p0", "shear_viscosity", "bulk_viscosity", "thermal_conductivity", "cv",
                 "E1", "E2", "E3", "E4", "E5", "Theta1", "Theta2", "k_isothermal",
                 "beta_thermal"});
  MaterialModel m;
  m.rho0 = s.get_double("rho0");
  m.p0 = s.get_double("p0");
  m.shear_viscosity = s.get_double("shear_viscosity");
  m.bulk_viscosity = s.get_double("bulk_viscosity");
  m.thermal_conductivity = s.get_double("thermal_conductivity");
  m.cv = s.get_double("cv");
  m.E1 = s.get_double("E1");
  m.E2 = s.get_double("E2");
  m.E3 = s.get_double("E3");
  m.E4 = s.get_double("E4");
  m.E5 = s.get_double("E5");
  m.Theta1 = s.get_double("Theta1");
  m.Theta2 = s.get_double("Theta2");
  m.k_isothermal = s.find_double("k_isothermal");
  m.beta_thermal = s.find_double("beta_thermal");
  m.validate();
  return m;
}

inline MaterialModel load_material(const std::filesystem::path& path) {
  return parse_material(KvDocument::load(path));
}

}  // namespace acoustream
