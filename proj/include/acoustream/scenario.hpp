#pragma once

// Scenario files and the pipelines behind the command-line front end.
// Format: docs/scenario_format.md. Every pipeline writes its data files,
// then manifest.json listing inputs and outputs with FNV-1a 64 hashes.

#include <fftw3.h>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "evolution.hpp"
#include "field_io.hpp"
#include "grid.hpp"
#include "keyvalue.hpp"
#include "material.hpp"
#include "modes.hpp"
#include "spectral.hpp"
#include "streaming.hpp"

namespace acoustream {

inline constexpr const char* kVersion = "1.0.0";

using Json = nlohmann::ordered_json;

inline const std::vector<std::string>& scenario_commands() {
  static const std::vector<std::string> c = {"material", "dispersion", "project",
                                             "evolve",   "force",      "stream",
                                             "figures",  "verify-projectors", "verify-limit"};
  return c;
}

inline std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline std::string read_file_bytes(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw Error("cannot open '" + p.string() + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline std::string table_csv(const Table& t) {
  std::string out;
  for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + t.columns[i];
  out += '\n';
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + format_double(r[i]);
    out += '\n';
  }
  return out;
}

struct Scenario {
  KvDocument doc;
  std::string name = "scenario";          // file name, used in the manifest
  std::filesystem::path base_dir = ".";   // relative paths resolve here
  std::string text;                       // raw bytes, hashed into the manifest
  std::string command;
  std::uint64_t seed = 20240601;

  const KvSection& top() const { return doc.section_or_empty(""); }
  const KvSection& sec(const std::string& n) const { return doc.section_or_empty(n); }
  std::filesystem::path resolve(const std::string& p) const {
    const std::filesystem::path q(p);
    return q.is_absolute() ? q : base_dir / q;
  }
};

namespace detail {

inline const std::map<std::string, std::vector<std::string>>& allowed_keys() {
  static const std::map<std::string, std::vector<std::string>> m = {
      {"", {"command", "material", "seed", "description"}},
      {"params", {"mu", "eps", "beta", "delta11", "delta12", "delta21", "delta22", "q", "s", "e1",
                  "length"}},
      {"grid", {"nx", "lx", "ny", "ly", "nz", "lz", "x0", "y0"}},
      {"window", {"lower_start", "lower_width", "upper_width"}},
      {"source", {"kind", "C", "eps_nl", "width", "fields"}},
      {"output", {"encoding"}},
      {"dispersion", {"samples", "ky_min", "ky_max", "kt"}},
      {"project", {"field", "profile", "amplitude", "wavenumber", "width", "truncation"}},
      {"evolve", {"equation", "profile", "field", "amplitude", "wavenumber", "width", "direction",
                  "dt", "t_end", "output_every", "scheme", "dealias", "cfl_safety", "mode"}},
      {"force", {"times", "variant", "stride_x", "stride_y"}},
      {"stream", {"forcing", "harmonic_ky", "harmonic_amplitude", "force_times", "dt", "t_end",
                  "self_advection", "output_every", "probe_x", "probe_y"}},
      {"figures", {"figures", "x", "t_min", "t_max", "nt", "y_max"}},
      {"verify", {"mu", "beta", "samples", "ky_min", "ky_max", "kt", "truncation"}},
      {"limit", {"periods", "samples_per_period", "margin", "variant", "probe_x", "vanishing"}},
  };
  return m;
}

inline std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace detail

inline Scenario parse_scenario(const std::string& text, const std::filesystem::path& base_dir = ".",
                               const std::string& name = "scenario") {
  Scenario sc;
  sc.text = text;
  sc.name = name;
  sc.base_dir = base_dir;
  sc.doc = KvDocument::parse(text);
  if (sc.doc.empty()) throw SchemaError("empty scenario: 'command' is required", 1);
  const auto& allowed = detail::allowed_keys();
  for (const auto& s : sc.doc.sections()) {
    auto it = allowed.find(s.name());
    if (it == allowed.end()) throw SchemaError("unknown section [" + s.name() + "]", s.line());
    s.expect_only(it->second);
  }
  const auto& top = sc.top();
  if (!top.has("command")) throw SchemaError("missing top-level key 'command'", 1);
  sc.command = top.get_string("command");
  const auto& cmds = scenario_commands();
  if (std::find(cmds.begin(), cmds.end(), sc.command) == cmds.end())
    throw SchemaError("unknown command '" + sc.command + "'", top.entry("command").line);
  if (top.has("seed")) {
    const long s = top.get_int("seed");
    if (s < 0) throw SchemaError("seed must be >= 0", top.entry("seed").line);
    sc.seed = static_cast<std::uint64_t>(s);
  }
  if (top.has("material") && !std::filesystem::exists(sc.resolve(top.get_string("material"))))
    throw SchemaError("material file '" + top.get_string("material") + "' not found",
                      top.entry("material").line);
  return sc;
}

inline Scenario load_scenario(const std::filesystem::path& path) {
  const std::string text = read_file_bytes(path);
  return parse_scenario(text, path.parent_path().empty() ? "." : path.parent_path(),
                        path.filename().string());
}

// ------------------------------------------------------------ sections

inline DimensionlessParams scenario_params(const Scenario& sc) {
  const auto& s = sc.sec("params");
  const double mu = s.get_double("mu", 0.01);
  const double eps = s.get_double("eps", 0.0);
  const char* dk[4] = {"delta11", "delta12", "delta21", "delta22"};
  int n_delta = 0;
  for (auto k : dk) n_delta += s.has(k) ? 1 : 0;
  DimensionlessParams p;
  if (sc.top().has("material")) {
    for (auto k : {"beta", "q", "s", "e1"})
      if (s.has(k))
        throw SchemaError(std::string("[params] ") + k +
                              " conflicts with the material file; override the deltas instead",
                          s.entry(k).line);
    if (!s.has("length")) throw SchemaError("[params] length is required with a material file", s.line());
    const auto m = load_material(sc.resolve(sc.top().get_string("material")));
    p = to_dimensionless(m, s.get_double("length"), eps, mu);
    double* d[4] = {&p.delta11, &p.delta12, &p.delta21, &p.delta22};
    for (int i = 0; i < 4; ++i)
      if (s.has(dk[i])) *d[i] = s.get_double(dk[i]);
    p.finalize();
    return p;
  }
  if (s.has("length")) throw SchemaError("[params] length needs a material file", s.entry("length").line);
  const double q = s.get_double("q", -1.4), sv = s.get_double("s", 0.0), e1 = s.get_double("e1", 2.5);
  if (n_delta > 0) {
    if (n_delta != 4) throw SchemaError("[params] give all four deltas or none", s.line());
    p = DimensionlessParams::from_deltas(mu, eps, s.get_double("delta11"), s.get_double("delta12"),
                                         s.get_double("delta21"), s.get_double("delta22"), q, sv, e1);
    if (s.has("beta")) {
      const double b = s.get_double("beta");
      if (std::abs(b - p.beta_total) > 1e-12 * std::max(1.0, std::abs(b)))
        throw SchemaError("[params] beta disagrees with the sum of the deltas", s.entry("beta").line);
    }
    return p;
  }
  const double b = s.get_double("beta", 0.0);
  return DimensionlessParams::from_deltas(mu, eps, 0.4 * b, 0.3 * b, 0.5 * b, -0.2 * b, q, sv, e1);
}

inline Grid scenario_grid(const Scenario& sc, const Grid& def) {
  const auto& s = sc.sec("grid");
  Grid g = def;
  auto count = [&](const char* k, std::size_t d) {
    if (!s.has(k)) return d;
    const long v = s.get_int(k);
    if (v < 1) throw SchemaError(std::string("[grid] ") + k + " must be >= 1", s.entry(k).line);
    return static_cast<std::size_t>(v);
  };
  g.nx = count("nx", def.nx);
  g.ny = count("ny", def.ny);
  g.nz = count("nz", def.nz);
  g.lx = s.get_double("lx", def.lx);
  g.ly = s.get_double("ly", def.ly);
  g.lz = s.get_double("lz", def.lz);
  g.x0 = s.get_double("x0", g.nx > 1 ? -0.5 * g.lx : def.x0);
  g.z0 = g.nz > 1 ? -0.5 * g.lz : 0.0;
  g.y0 = s.get_double("y0", def.y0);
  g.validate();
  return g;
}

inline AxialWindow scenario_window(const Scenario& sc, const AxialWindow& def) {
  const auto& s = sc.sec("window");
  AxialWindow w = def;
  w.lower_start = s.get_double("lower_start", def.lower_start);
  w.lower_width = s.get_double("lower_width", def.lower_width);
  w.upper_width = s.get_double("upper_width", def.upper_width);
  if (w.lower_width < 0.0 || w.upper_width < 0.0) throw SchemaError("[window] widths must be >= 0", s.line());
  return w;
}

struct SourceSpec {
  AcousticSource source;
  std::vector<std::filesystem::path> files;
};

inline SourceSpec scenario_source(const Scenario& sc, const DimensionlessParams& p,
                                  const std::string& def_kind) {
  const auto& s = sc.sec("source");
  const std::string kind = s.get_string("kind", def_kind);
  SourceSpec out;
  if (kind == "monopole") {
    out.source = AcousticSource::monopole(s.get_double("C", 2.0), s.get_double("eps_nl", 1.2), p.beta_total);
  } else if (kind == "quasi_periodic") {
    const double w = s.get_double("width", 1.0);
    if (!(w > 0.0)) throw SchemaError("[source] width must be > 0", s.entry("width").line);
    out.source = AcousticSource::quasi_periodic(p.beta_total, [w](double x) { return std::exp(-x * x / (w * w)); });
  } else if (kind == "gridded") {
    if (!s.has("fields")) throw SchemaError("[source] gridded needs 'fields'", s.line());
    std::vector<ScalarField> snaps;
    for (const auto& f : detail::split_list(s.get_string("fields"))) {
      const auto path = sc.resolve(f);
      if (!std::filesystem::exists(path))
        throw SchemaError("[source] field file '" + f + "' not found", s.entry("fields").line);
      const auto fs = read_field(path);
      auto r = fs.component(Component::rho);
      r.time_stamp = fs.time_stamp;
      snaps.push_back(std::move(r));
      out.files.push_back(path);
    }
    out.source = AcousticSource::gridded(std::move(snaps));
  } else {
    throw SchemaError("[source] unknown kind '" + kind + "'", s.has("kind") ? s.entry("kind").line : s.line());
  }
  return out;
}

inline FieldEncoding scenario_encoding(const Scenario& sc) {
  const auto& s = sc.sec("output");
  const std::string e = s.get_string("encoding", "binary");
  if (e == "binary") return FieldEncoding::binary;
  if (e == "csv") return FieldEncoding::csv;
  throw SchemaError("[output] encoding must be binary or csv", s.entry("encoding").line);
}

// Named analytic profiles of the density.
inline ScalarField profile_density(const KvSection& s, const Grid& g) {
  const std::string name = s.get_string("profile", "sine");
  const double A = s.get_double("amplitude", 1.0);
  const double k = s.get_double("wavenumber", 1.0);
  const double w = s.get_double("width", 1.0);
  if (name == "sine")
    return ScalarField::sample(g, [&](double, double y, double) { return A * std::sin(k * y); });
  if (name == "gaussian_beam")
    return ScalarField::sample(g, [&](double x, double y, double z) {
      return A * std::exp(-(x * x + z * z) / (w * w)) * std::sin(k * y);
    });
  if (name == "pulse") {
    const double yc = g.y0 + 0.5 * g.ly;
    return ScalarField::sample(g, [&](double x, double y, double) {
      const double e = g.nx > 1 ? std::exp(-x * x) : 1.0;
      return A * e * std::exp(-(y - yc) * (y - yc) / (w * w));
    });
  }
  throw SchemaError("unknown profile '" + name + "'", s.has("profile") ? s.entry("profile").line : s.line());
}

// ------------------------------------------------------------- outputs

struct RunResult {
  std::vector<std::filesystem::path> outputs;
  Json summary;
};

class OutputSet {
 public:
  explicit OutputSet(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
  }
  const std::filesystem::path& dir() const { return dir_; }
  void text(const std::string& name, const std::string& content) {
    std::ofstream f(dir_ / name, std::ios::binary);
    f << content;
    if (!f) throw Error("write failed for '" + (dir_ / name).string() + "'");
    files_.push_back(dir_ / name);
  }
  void json(const std::string& name, const Json& j) { text(name, j.dump(2) + "\n"); }
  std::string field(const std::string& stem, const FieldState& f, FieldEncoding enc) {
    const auto side = write_field(f, dir_ / stem, enc);
    files_.push_back(dir_ / (stem + (enc == FieldEncoding::binary ? ".bin" : ".csv")));
    files_.push_back(side);
    return side.filename().string();
  }
  const std::vector<std::filesystem::path>& files() const { return files_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::filesystem::path> files_;
};

inline Json params_json(const DimensionlessParams& p) {
  Json j;
  j["mu"] = p.mu;
  j["eps"] = p.eps_amp;
  j["delta11"] = p.delta11;
  j["delta12"] = p.delta12;
  j["delta21"] = p.delta21;
  j["delta22"] = p.delta22;
  j["beta"] = p.beta_total;
  j["q"] = p.q_const;
  j["s"] = p.s_const;
  j["e1"] = p.e1;
  j["eps_nl"] = p.eps_nl;
  j["warnings"] = p.warnings;
  return j;
}

inline Json residuals_json(const ProjectorResiduals& r) {
  Json j;
  j["completeness"] = r.completeness;
  j["orthogonality"] = r.orthogonality;
  j["idempotence"] = r.idempotence;
  j["commutation"] = r.commutation;
  return j;
}

inline FieldState density_state(const ScalarField& rho) {
  FieldState f(rho.grid);
  f.set(Component::rho, rho);
  f.time_stamp = rho.time_stamp;
  f.notes = rho.notes;
  return f;
}

// ------------------------------------------------------------ pipelines

namespace pipeline {

inline Json material(const Scenario& sc, OutputSet& out) {
  if (!sc.top().has("material")) throw SchemaError("command 'material' needs a material file", 1);
  const auto m = load_material(sc.resolve(sc.top().get_string("material")));
  const auto nl = nonlinearity_constants(m);
  Json j;
  j["sound_speed"] = sound_speed(m);
  j["q"] = nl.q;
  j["s"] = nl.s;
  j["eps_nl"] = (1.0 - nl.q - nl.s) / 2.0;
  if (sc.sec("params").has("length")) j["dimensionless"] = params_json(scenario_params(sc));
  out.json("material.json", j);
  return j;
}

inline Json dispersion(const Scenario& sc, OutputSet& out) {
  const auto p = scenario_params(sc);
  const auto& s = sc.sec("dispersion");
  const long n = s.get_int("samples", 200);
  if (n < 1) throw SchemaError("[dispersion] samples must be >= 1", s.entry("samples").line);
  const auto ks = sample_wavevectors(static_cast<std::size_t>(n), sc.seed, s.get_double("ky_min", 0.5),
                                     s.get_double("ky_max", 4.0), s.get_double("kt", 2.0));
  Table t;
  t.columns = {"kx", "ky", "kz", "root", "re_root", "im_root", "re_eig", "im_eig", "residual"};
  const cplx I(0.0, 1.0);
  double worst = 0.0;
  for (const auto& k : ks) {
    const auto roots = dispersion_roots(k, p);
    Eigen::ComplexEigenSolver<Mat5> es(l_symbol(k, p));
    for (int i = 0; i < 5; ++i) {
      double best = 1e300;
      cplx match;
      for (int j = 0; j < 5; ++j) {
        const cplx w = I * es.eigenvalues()(j);
        const double d = std::abs(w - roots.omega[i]);
        if (d < best) best = d, match = w;
      }
      worst = std::max(worst, best);
      t.rows.push_back({k.kx, k.ky, k.kz, static_cast<double>(i + 1), roots.omega[i].real(),
                        roots.omega[i].imag(), match.real(), match.imag(), best});
    }
  }
  out.text("dispersion.csv", table_csv(t));
  const double bound = 10.0 * (p.mu * p.mu + p.beta_total * p.beta_total + p.mu * p.beta_total);
  Json j;
  j["params"] = params_json(p);
  j["samples"] = n;
  j["max_residual"] = worst;
  j["bound"] = bound;
  j["within_bound"] = worst <= bound;
  out.json("dispersion.json", j);
  return j;
}

inline Json project(const Scenario& sc, OutputSet& out) {
  const auto p = scenario_params(sc);
  const auto& s = sc.sec("project");
  const Truncation order = parse_truncation(s.get_string("truncation", "three_halves"));
  FieldState f;
  if (s.has("field")) {
    f = read_field(sc.resolve(s.get_string("field")));
  } else {
    const Grid g = scenario_grid(sc, Grid::plane_xy(64, 16.0, 64, 2.0 * std::numbers::pi));
    f = lift_acoustic_mode(profile_density(s, g), p);
  }
  const auto parts = decompose(f, p, order);
  const auto enc = scenario_encoding(sc);
  Json j;
  j["params"] = params_json(p);
  j["truncation"] = truncation_name(order);
  j["input_l2"] = [&] {
    double e = 0.0;
    for (int c = 0; c < 5; ++c) e += std::pow(f.component(c).l2(), 2);
    return std::sqrt(e);
  }();
  Json modes = Json::array();
  for (int m = 0; m < 5; ++m) {
    double e = 0.0;
    for (int c = 0; c < 5; ++c) e += std::pow(parts.modes[m].component(c).l2(), 2);
    Json mj;
    mj["mode"] = m + 1;
    mj["l2"] = std::sqrt(e);
    mj["file"] = out.field("mode_" + std::to_string(m + 1), parts.modes[m], enc);
    modes.push_back(mj);
  }
  j["modes"] = modes;
  j["axial_residual_file"] = out.field("axial_residual", parts.axial_residual, enc);
  j["reconstruction_error"] = (parts.sum() - f).max_abs();
  j["notes"] = parts.notes;
  out.json("project.json", j);
  return j;
}

inline Json evolve(const Scenario& sc, OutputSet& out) {
  auto p = scenario_params(sc);
  const auto& s = sc.sec("evolve");
  const std::string eq = s.get_string("equation", "linear");
  EvolutionConfig cfg;
  cfg.dt = s.get_double("dt", 1e-3);
  cfg.t_end = s.get_double("t_end", 1.0);
  cfg.dealias = s.get_bool("dealias", true);
  cfg.cfl_safety = s.get_double("cfl_safety", 0.5);
  const std::string scheme = s.get_string("scheme", "integrating_factor");
  if (scheme == "explicit_split") cfg.scheme = Scheme::explicit_split;
  else if (scheme != "integrating_factor") throw SchemaError("[evolve] unknown scheme '" + scheme + "'", s.entry("scheme").line);
  cfg.validate();
  const std::string dir_s = s.get_string("direction", "rightward");
  if (dir_s != "rightward" && dir_s != "leftward")
    throw SchemaError("[evolve] direction must be rightward or leftward", s.entry("direction").line);
  const Direction dir = dir_s == "rightward" ? Direction::rightward : Direction::leftward;
  const long every = s.get_int("output_every", 0);
  if (every < 0) throw SchemaError("[evolve] output_every must be >= 0", s.entry("output_every").line);
  const auto enc = scenario_encoding(sc);

  const Grid def = eq == "burgers" ? Grid::line_y(1024, 2.0 * std::numbers::pi)
                                   : Grid::plane_xy(64, 16.0, 128, 2.0 * std::numbers::pi);
  FieldState init;
  if (s.has("field")) {
    init = read_field(sc.resolve(s.get_string("field")));
  } else {
    const auto rho = profile_density(s, scenario_grid(sc, def));
    init = eq == "full" ? lift_acoustic_mode(rho, p) : density_state(rho);
  }
  const std::size_t n = detail::step_count(cfg.t_end, cfg.dt);
  const double h = n ? cfg.t_end / static_cast<double>(n) : 0.0;
  const std::size_t chunk = every > 0 ? static_cast<std::size_t>(every) : std::max<std::size_t>(n, 1);

  Json snaps = Json::array();
  int idx = 0;
  auto emit = [&](const FieldState& f) {
    char stem[32];
    std::snprintf(stem, sizeof stem, "evolve_%04d", idx++);
    Json e;
    e["t"] = f.time_stamp;
    e["file"] = out.field(stem, f, enc);
    snaps.push_back(e);
  };
  Json j;
  j["params"] = params_json(p);
  j["equation"] = eq;
  j["dt"] = h;
  j["t_end"] = cfg.t_end;
  emit(init);
  bool shock = false;
  std::vector<std::string> notes;
  if (eq == "linear" || eq == "diffusive") {
    const ScalarField rho = init.component(Component::rho);
    DiffusiveMode mode = DiffusiveMode::entropy;
    if (eq == "diffusive") {
      const std::string m = s.get_string("mode", "entropy");
      if (m == "vortical") mode = DiffusiveMode::vortical;
      else if (m != "entropy") throw SchemaError("[evolve] mode must be entropy or vortical", s.entry("mode").line);
    }
    for (std::size_t k = chunk; ; k += chunk) {
      const std::size_t kk = std::min(k, n);
      const double t = static_cast<double>(kk) * h;
      auto r = eq == "linear" ? evolve_linear_acoustic(rho, p, dir, t) : evolve_diffusive_mode(rho, p, mode, t);
      r.time_stamp = init.time_stamp + t;
      emit(density_state(r));
      if (kk >= n) break;
    }
  } else if (eq == "burgers" || eq == "kzk") {
    ScalarField rho = init.component(Component::rho);
    rho.time_stamp = init.time_stamp;
    std::size_t done = 0;
    while (done < n && !shock) {
      const std::size_t m = std::min(chunk, n - done);
      EvolutionConfig c = cfg;
      c.dt = h;
      const auto run = eq == "burgers" ? evolve_burgers_run(rho, p, c, static_cast<double>(m) * h)
                                       : evolve_kzk_run(rho, p, c, dir, static_cast<double>(m) * h);
      rho = run.field;
      shock = run.shock_stop;
      done += run.steps;
      emit(density_state(rho));
    }
    notes = rho.notes;
  } else if (eq == "full") {
    std::size_t k = 0;
    EvolutionConfig c = cfg;
    c.dt = h;
    const auto last = integrate_full_system(init, p, c, cfg.t_end, [&](const FieldState& f) {
      ++k;
      if (k % chunk == 0 && k != n) emit(f);
    });
    emit(last);
  } else {
    throw SchemaError("[evolve] unknown equation '" + eq + "'", s.has("equation") ? s.entry("equation").line : s.line());
  }
  j["shock_stop"] = shock;
  j["snapshots"] = snaps;
  j["notes"] = notes;
  out.json("evolve.json", j);
  return j;
}

inline std::size_t mirror_x(const Grid& g, std::size_t ix) { return (g.nx - ix) % g.nx; }

inline bool x_symmetric(const Grid& g) { return g.nx > 1 && std::abs(g.x0 + 0.5 * g.lx) < 1e-12 * g.lx; }

inline Json force(const Scenario& sc, OutputSet& out) {
  const auto p = scenario_params(sc);
  if (!(p.mu > 0.0 && p.beta_total > 0.0)) throw DomainError("force output is normalized by sqrt(mu) beta; both must be > 0");
  const auto src = scenario_source(sc, p, "monopole");
  const Grid g = scenario_grid(sc, Grid::plane_xy(256, 16.0, 512, 25.6, 0.1));
  const bool mono = src.source.kind == SourceKind::monopole;
  const AxialWindow w = scenario_window(sc, mono ? AxialWindow{g.y0, 0.4, 0.0} : AxialWindow{g.y0, 15.0, 15.0});
  const auto& s = sc.sec("force");
  const ForceVariant variant = parse_force_variant(s.get_string("variant", "simplified"));
  std::vector<double> times = s.has("times") ? s.get_list("times") : std::vector<double>{1.0, 3.0};
  const long sx = s.get_int("stride_x", 1), sy = s.get_int("stride_y", 1);
  if (sx < 1 || sy < 1) throw SchemaError("[force] strides must be >= 1", s.line());
  const double norm = std::sqrt(p.mu) * p.beta_total;

  Table t;
  t.columns = {"x", "y", "t", "force_normalized"};
  Json per = Json::array();
  for (double time : times) {
    const auto F = radiation_force(src.source.sample(g, time), p, variant, w);
    for (std::size_t ix = 0; ix < g.nx; ix += static_cast<std::size_t>(sx))
      for (std::size_t iy = 0; iy < g.ny; iy += static_cast<std::size_t>(sy))
        t.rows.push_back({g.x(ix), g.y(iy), time, F.F1x(0, ix, iy) / norm});
    const double mx = F.F1x.max_abs();
    double edge = 0.0, odd = 0.0, fmin = 0.0;
    std::size_t imin = 0, jmin = 0;
    for (std::size_t ix = 0; ix < g.nx; ++ix) {
      edge = std::max(edge, std::abs(F.F1x(0, ix, g.ny - 1)));
      for (std::size_t iy = 0; iy < g.ny; ++iy) {
        const double v = F.F1x(0, ix, iy);
        if (v < fmin) fmin = v, imin = ix, jmin = iy;
        if (x_symmetric(g)) odd = std::max(odd, std::abs(v + F.F1x(0, mirror_x(g, ix), iy)));
      }
    }
    Json e;
    e["t"] = time;
    e["max_abs_normalized"] = mx / norm;
    e["min_normalized"] = fmin / norm;
    e["argmin_x"] = g.x(imin);
    e["argmin_y"] = g.y(jmin);
    e["far_edge_ratio"] = mx > 0.0 ? edge / mx : 0.0;
    if (x_symmetric(g)) e["odd_defect_ratio"] = mx > 0.0 ? odd / mx : 0.0;
    e["gauge_constant"] = F.gauge_constant;
    e["valid_from"] = F.valid_from;
    e["valid_to"] = F.valid_to;
    e["notes"] = F.notes;
    per.push_back(e);
  }
  out.text("force.csv", table_csv(t));
  Json j;
  j["params"] = params_json(p);
  j["variant"] = force_variant_name(variant);
  j["normalization"] = norm;
  j["times"] = per;
  out.json("force.json", j);
  return j;
}

inline Json stream(const Scenario& sc, OutputSet& out) {
  const auto p = scenario_params(sc);
  const auto& s = sc.sec("stream");
  EvolutionConfig cfg;
  cfg.dt = s.get_double("dt", 0.01);
  const double t_end = s.get_double("t_end", 1.0);
  cfg.t_end = t_end;
  cfg.validate();
  const bool adv = s.get_bool("self_advection", false);
  const long every = s.get_int("output_every", 0);
  if (every < 0) throw SchemaError("[stream] output_every must be >= 0", s.entry("output_every").line);
  const std::string forcing = s.get_string("forcing", "source");
  const auto enc = scenario_encoding(sc);

  ForceSeries fs;
  AxialGauge gauge;
  Json j;
  j["params"] = params_json(p);
  j["forcing"] = forcing;
  Grid g;
  double ky = 0.0, amp = 0.0;
  if (forcing == "harmonic") {
    g = scenario_grid(sc, Grid::line_y(64, 2.0 * std::numbers::pi));
    ky = s.get_double("harmonic_ky", 1.0);
    amp = s.get_double("harmonic_amplitude", 1.0);
    fs = ForceSeries::constant(ScalarField::sample(g, [&](double, double y, double) { return amp * std::sin(ky * y); }));
  } else if (forcing == "source") {
    const auto src = scenario_source(sc, p, "monopole");
    g = scenario_grid(sc, Grid::plane_xy(128, 16.0, 512, 25.6, 0.1));
    const bool mono = src.source.kind == SourceKind::monopole;
    const AxialWindow w = scenario_window(sc, mono ? AxialWindow{g.y0, 0.4, 0.0} : AxialWindow{g.y0, 15.0, 15.0});
    gauge = AxialGauge::far_field(w);
    std::vector<double> ft = s.has("force_times") ? s.get_list("force_times") : std::vector<double>{};
    if (ft.empty())
      for (int i = 0; i <= 20; ++i) ft.push_back(t_end * i / 20.0);
    for (double t : ft) {
      auto F = radiation_force(src.source.sample(g, t), p, ForceVariant::simplified, w).F1x;
      F.time_stamp = t;
      fs.snapshots.push_back(std::move(F));
    }
  } else {
    throw SchemaError("[stream] forcing must be source or harmonic", s.entry("forcing").line);
  }
  const auto states = solve_streaming(fs, p, cfg, t_end, adv, static_cast<std::size_t>(every), gauge);

  const double px = s.get_double("probe_x", std::numbers::sqrt2 / 2.0);
  const double py = s.get_double("probe_y", g.ny > 1 ? std::min(1.0, g.y_last()) : g.y0);
  const std::size_t ix = g.nx > 1 ? static_cast<std::size_t>(std::lround((px - g.x0) / g.dx())) % g.nx : 0;
  const std::size_t iy = std::min<std::size_t>(g.ny - 1, static_cast<std::size_t>(std::max(0L, std::lround((py - g.y0) / g.dy()))));
  Table probe;
  probe.columns = {"t", "vx", "force"};
  Json snaps = Json::array();
  int idx = 0;
  for (const auto& st : states) {
    FieldState f(g);
    f.set(Component::vx, st.vx);
    f.set(Component::vy, st.vy);
    f.set(Component::vz, st.vz);
    f.time_stamp = st.time_stamp;
    char stem[32];
    std::snprintf(stem, sizeof stem, "stream_%04d", idx++);
    Json e;
    e["t"] = st.time_stamp;
    e["file"] = out.field(stem, f, enc);
    snaps.push_back(e);
    probe.rows.push_back({st.time_stamp, st.vx(0, ix, iy), fs.at(st.time_stamp)(0, ix, iy)});
  }
  out.text("stream_probe.csv", table_csv(probe));
  j["probe"] = {{"x", g.x(ix)}, {"y", g.y(iy)}};
  j["snapshots"] = snaps;
  if (forcing == "harmonic") {
    const double a = p.delta12 * ky * ky;
    const double c = a > 0.0 ? p.eps_amp * amp * (-std::expm1(-a * t_end)) / a : p.eps_amp * amp * t_end;
    const auto ex = ScalarField::sample(g, [&](double, double y, double) { return c * std::sin(ky * y); });
    j["closed_form_max_error"] = (states.back().vx - ex).max_abs();
  }
  j["final_max_vx"] = states.back().vx.max_abs();
  out.json("stream.json", j);
  return j;
}

inline Json figures(const Scenario& sc, OutputSet& out) {
  const auto p = scenario_params(sc);
  FigureConstants k;
  k.mu = p.mu > 0.0 ? p.mu : k.mu;
  k.beta = p.beta_total;
  const auto& src = sc.sec("source");
  if (src.has("kind") && src.get_string("kind") != "monopole")
    throw SchemaError("figures use the monopole source", src.entry("kind").line);
  k.C = src.get_double("C", k.C);
  k.eps_nl = src.get_double("eps_nl", k.eps_nl);
  const Grid g = scenario_grid(sc, k.grid());
  k.nx = g.nx;
  k.lx = g.lx;
  k.ny = g.ny;
  k.ly = g.ly;
  k.y0 = g.y0;
  k.lower_taper = scenario_window(sc, k.window()).lower_width;
  const auto& s = sc.sec("figures");
  k.x = s.get_double("x", k.x);
  k.t_min = s.get_double("t_min", k.t_min);
  k.t_max = s.get_double("t_max", k.t_max);
  const long nt = s.get_int("nt", static_cast<long>(k.nt));
  if (nt < 2) throw SchemaError("[figures] nt must be >= 2", s.entry("nt").line);
  k.nt = static_cast<std::size_t>(nt);
  k.y_max_plot = s.get_double("y_max", k.y_max_plot);
  std::vector<double> figs = s.has("figures") ? s.get_list("figures") : std::vector<double>{1, 2, 3, 4};
  Json j;
  j["constants"] = {{"C", k.C}, {"eps_nl", k.eps_nl}, {"beta", k.beta}, {"x", k.x}};
  Json list = Json::array();
  for (double f : figs) {
    if (f != std::floor(f)) throw SchemaError("[figures] figure indices are integers", s.entry("figures").line);
    const int fig = static_cast<int>(f);
    const auto t = emit_figure_data(fig, k);
    const std::string name = "fig" + std::to_string(fig) + ".csv";
    out.text(name, table_csv(t));
    std::size_t fmin = 0, rmin = 0;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      if (t.rows[i][1] < t.rows[fmin][1]) fmin = i;
      if (t.rows[i][2] < t.rows[rmin][2]) rmin = i;
    }
    Json e;
    e["figure"] = fig;
    e["file"] = name;
    e["abscissa"] = t.columns[0];
    if (!t.rows.empty()) {
      e["force_min"] = t.rows[fmin][1];
      e["force_argmin"] = t.rows[fmin][0];
      e["source_min"] = t.rows[rmin][2];
      e["source_argmin"] = t.rows[rmin][0];
    }
    list.push_back(e);
  }
  j["figures"] = list;
  out.json("figures.json", j);
  return j;
}

inline Json verify_projectors(const Scenario& sc, OutputSet& out) {
  const auto& s = sc.sec("verify");
  const auto mus = s.has("mu") ? s.get_list("mu") : std::vector<double>{1e-2, 5e-3};
  const auto betas = s.has("beta") ? s.get_list("beta") : std::vector<double>{1e-2, 5e-3};
  if (mus.size() != betas.size() || mus.empty())
    throw SchemaError("[verify] mu and beta lists must have the same nonzero length", s.line());
  const long n = s.get_int("samples", 200);
  if (n < 1) throw SchemaError("[verify] samples must be >= 1", s.entry("samples").line);
  const auto ks = sample_wavevectors(static_cast<std::size_t>(n), sc.seed, s.get_double("ky_min", 0.5),
                                     s.get_double("ky_max", 4.0), s.get_double("kt", 2.0));
  std::vector<std::string> orders = s.has("truncation") ? detail::split_list(s.get_string("truncation"))
                                                        : std::vector<std::string>{"three_halves"};
  Json j;
  j["samples"] = n;
  j["seed"] = sc.seed;
  j["quadratic_band"] = {3.4, 4.6};
  Json res = Json::array();
  for (const auto& o : orders) {
    const Truncation order = parse_truncation(o);
    std::vector<ProjectorResiduals> rs;
    Json entries = Json::array();
    for (std::size_t i = 0; i < mus.size(); ++i) {
      const auto p = DimensionlessParams::from_beta(mus[i], 0.0, betas[i]);
      rs.push_back(worst_residuals(ks, p, order));
      Json e = residuals_json(rs.back());
      e["mu"] = mus[i];
      e["beta"] = betas[i];
      entries.push_back(e);
    }
    Json ratios = Json::array();
    bool in_band = true;
    for (std::size_t i = 1; i < rs.size(); ++i) {
      const auto& a = rs[i - 1];
      const auto& b = rs[i];
      Json r;
      r["completeness"] = a.completeness / b.completeness;
      r["orthogonality"] = a.orthogonality / b.orthogonality;
      r["idempotence"] = a.idempotence / b.idempotence;
      r["commutation"] = a.commutation / b.commutation;
      for (const auto& [key, v] : r.items()) {
        const double x = v.get<double>();
        in_band = in_band && x >= 3.4 && x <= 4.6;
      }
      ratios.push_back(r);
    }
    Json tj;
    tj["truncation"] = o;
    tj["residuals"] = entries;
    tj["ratios"] = ratios;
    tj["ratios_in_quadratic_band"] = in_band;
    res.push_back(tj);
  }
  j["truncations"] = res;
  out.json("projectors.json", j);
  return j;
}

inline Json verify_limit(const Scenario& sc, OutputSet& out) {
  const auto p = scenario_params(sc);
  const auto src = scenario_source(sc, p, "quasi_periodic");
  if (src.source.kind != SourceKind::quasi_periodic_beam)
    throw SchemaError("verify-limit needs the quasi_periodic source", sc.sec("source").line());
  const double L = std::max(400.0, 40.0 / p.beta_total);
  const Grid g = scenario_grid(sc, Grid::plane_xy(64, 16.0, 4096, L, 0.0));
  const AxialWindow w = scenario_window(sc, AxialWindow{g.y0, 15.0, 15.0});
  const auto& s = sc.sec("limit");
  const double periods = s.get_double("periods", 1.0);
  const long spp = s.get_int("samples_per_period", 64);
  if (spp < 1) throw SchemaError("[limit] samples_per_period must be >= 1", s.line());
  const double margin = s.get_double("margin", 15.0);
  const ForceVariant variant = parse_force_variant(s.get_string("variant", "simplified"));
  const auto r = time_average_force(src.source, p, g, periods, w, margin, static_cast<std::size_t>(spp), variant);
  Json j;
  j["params"] = params_json(p);
  j["variant"] = force_variant_name(variant);
  j["periods"] = periods;
  j["samples"] = r.samples;
  j["y_from"] = r.y_from;
  j["y_to"] = r.y_to;
  j["rel_l2_error"] = r.rel_l2_error;
  j["ripple_sin"] = r.ripple_sin;
  j["ripple_cos"] = r.ripple_cos;
  j["ripple_amplitude"] = r.ripple_amplitude;
  j["ripple_expected"] = p.beta_total / 4.0;
  if (s.get_bool("vanishing", false)) {
    const auto v = inviscid_vanishing_residual(src.source.sample(g, 0.0), p, AxialGauge::far_field(w), margin);
    j["vanishing_ratio"] = v.ratio ? Json(*v.ratio) : Json(nullptr);
    j["vanishing_full_lift_ratio"] = v.full_lift_ratio;
  }
  const double px = s.get_double("probe_x", -0.5);
  const std::size_t ix = static_cast<std::size_t>(std::lround((px - g.x0) / g.dx())) % g.nx;
  Table t;
  t.columns = {"y", "mean_force", "reference"};
  for (std::size_t iy = 0; iy < g.ny; ++iy)
    if (g.y(iy) >= r.y_from && g.y(iy) <= r.y_to)
      t.rows.push_back({g.y(iy), r.mean_force(0, ix, iy), r.reference(0, ix, iy)});
  j["probe_x"] = g.x(ix);
  out.text("limit.csv", table_csv(t));
  out.json("limit.json", j);
  return j;
}

}  // namespace pipeline

inline RunResult run_scenario(const Scenario& sc, const std::filesystem::path& out_dir) {
  OutputSet out(out_dir);
  Json summary;
  const std::string& c = sc.command;
  if (c == "material") summary = pipeline::material(sc, out);
  else if (c == "dispersion") summary = pipeline::dispersion(sc, out);
  else if (c == "project") summary = pipeline::project(sc, out);
  else if (c == "evolve") summary = pipeline::evolve(sc, out);
  else if (c == "force") summary = pipeline::force(sc, out);
  else if (c == "stream") summary = pipeline::stream(sc, out);
  else if (c == "figures") summary = pipeline::figures(sc, out);
  else if (c == "verify-projectors") summary = pipeline::verify_projectors(sc, out);
  else if (c == "verify-limit") summary = pipeline::verify_limit(sc, out);
  else throw SchemaError("unknown command '" + c + "'");

  // inputs: the scenario text plus every file it names
  Json inputs = Json::array();
  inputs.push_back({{"file", sc.name}, {"fnv1a64", hex64(fnv1a64(sc.text))}});
  auto add_input = [&](const std::string& rel) {
    inputs.push_back({{"file", rel}, {"fnv1a64", hex64(fnv1a64(read_file_bytes(sc.resolve(rel))))}});
  };
  if (sc.top().has("material")) add_input(sc.top().get_string("material"));
  for (const auto& sec : {"project", "evolve"})
    if (sc.sec(sec).has("field")) add_input(sc.sec(sec).get_string("field"));
  if (sc.sec("source").has("fields"))
    for (const auto& f : detail::split_list(sc.sec("source").get_string("fields"))) add_input(f);

  Json outputs = Json::array();
  for (const auto& f : out.files()) {
    const std::string bytes = read_file_bytes(f);
    outputs.push_back({{"file", f.filename().string()}, {"bytes", bytes.size()}, {"fnv1a64", hex64(fnv1a64(bytes))}});
  }
  Json m;
  m["tool"] = "acoustream";
  m["version"] = kVersion;
  m["libraries"] = {{"fftw", std::string(fftw_version)},
                    {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                  "." + std::to_string(EIGEN_MINOR_VERSION)}};
  m["command"] = c;
  m["seed"] = sc.seed;
  m["inputs"] = inputs;
  m["outputs"] = outputs;
  m["summary"] = summary;
  std::string all;
  for (const auto& o : outputs) all += o["fnv1a64"].get<std::string>();
  m["outputs_fnv1a64"] = hex64(fnv1a64(all));
  std::ofstream mf(out.dir() / "manifest.json", std::ios::binary);
  mf << m.dump(2) << '\n';
  if (!mf) throw Error("write failed for manifest.json");

  RunResult r;
  r.outputs = out.files();
  r.outputs.push_back(out.dir() / "manifest.json");
  r.summary = summary;
  return r;
}

}  // namespace acoustream
