// acoustream command-line front end.
//
//   acoustream run <file.scn> --out DIR
//   acoustream <subcommand> [options] --out DIR
//
// Subcommands build a scenario from their flags and run the same pipeline
// as `run`, so `acoustream figures --fig 1` and a scenario file with
// command = figures produce identical files.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "acoustream/scenario.hpp"

namespace {

using namespace acoustream;

struct Flag {
  std::string name;     // without dashes
  std::string section;  // "" is the top level
  std::string key;
  std::string help;
};

struct Sub {
  CLI::App* app = nullptr;
  std::string command;
  std::map<std::string, std::string> values;  // flag name -> value
  std::vector<Flag> flags;
  bool dealias_off = false;
  bool self_advection = false;
  bool vanishing = false;
  std::string out = "acoustream_out";
};

const std::vector<Flag> kCommon = {
    {"material", "", "material", "material file (key = value, see materials/schema.txt)"},
    {"seed", "", "seed", "seed for wavevector sampling"},
    {"mu", "params", "mu", "diffraction parameter"},
    {"eps", "params", "eps", "amplitude parameter"},
    {"beta", "params", "beta", "total attenuation (split 0.4/0.3/0.5/-0.2 over the deltas)"},
    {"delta11", "params", "delta11", "viscous delta11"},
    {"delta12", "params", "delta12", "viscous delta12"},
    {"delta21", "params", "delta21", "thermal delta21"},
    {"delta22", "params", "delta22", "thermal delta22"},
    {"length", "params", "length", "length scale in metres (with --material)"},
    {"q", "params", "q", "nonlinearity constant Q"},
    {"s", "params", "s", "nonlinearity constant S"},
    {"e1", "params", "e1", "energy expansion constant E1"},
    {"nx", "grid", "nx", "grid points along x"},
    {"lx", "grid", "lx", "period along x"},
    {"ny", "grid", "ny", "grid points along y"},
    {"ly", "grid", "ly", "period along y"},
    {"nz", "grid", "nz", "grid points along z"},
    {"lz", "grid", "lz", "period along z"},
    {"y0", "grid", "y0", "first y node"},
    {"encoding", "output", "encoding", "field encoding: binary or csv"},
};

const std::vector<Flag> kSource = {
    {"source", "source", "kind", "monopole, quasi_periodic or gridded"},
    {"C", "source", "C", "monopole shape constant (> 1)"},
    {"eps-nl", "source", "eps_nl", "monopole nonlinearity constant"},
    {"width", "source", "width", "quasi-periodic beam width"},
    {"fields", "source", "fields", "gridded source: comma-separated field sidecars"},
    {"window-start", "window", "lower_start", "lower taper start"},
    {"window-lower", "window", "lower_width", "lower taper width"},
    {"window-upper", "window", "upper_width", "upper taper width"},
};

std::string scenario_text(const Sub& s) {
  std::map<std::string, std::vector<std::string>> sections;
  for (const auto& f : s.flags) {
    auto it = s.values.find(f.name);
    if (it == s.values.end() || it->second.empty()) continue;
    sections[f.section].push_back(f.key + " = " + it->second);
  }
  if (s.dealias_off) sections["evolve"].push_back("dealias = false");
  if (s.self_advection) sections["stream"].push_back("self_advection = true");
  if (s.vanishing) sections["limit"].push_back("vanishing = true");
  std::string text = "command = " + s.command + "\n";
  for (const auto& line : sections[""]) text += line + "\n";
  for (const auto& [name, lines] : sections) {
    if (name.empty()) continue;
    text += "[" + name + "]\n";
    for (const auto& l : lines) text += l + "\n";
  }
  return text;
}

void report(const RunResult& r, const std::filesystem::path& dir) {
  std::cout << r.summary.dump(2) << "\n";
  std::cerr << "wrote " << r.outputs.size() << " files to " << dir.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acoustream: thermoviscous mode projection, radiation force and streaming"};
  app.require_subcommand(1);

  std::string scn_path, run_out;
  auto* run = app.add_subcommand("run", "run a scenario file");
  run->add_option("scenario", scn_path, "scenario file (.scn)")->required();
  run->add_option("--out", run_out, "output directory")->required();

  struct Spec {
    std::string command, help;
    std::vector<Flag> extra;
    bool source = false;
  };
  const std::vector<Spec> specs = {
      {"material", "nondimensionalize a material file", {}, false},
      {"dispersion", "compare the five dispersion roots with the symbol eigenvalues",
       {{"samples", "dispersion", "samples", "number of wavevectors"},
        {"ky-min", "dispersion", "ky_min", "smallest |ky|"},
        {"ky-max", "dispersion", "ky_max", "largest |ky|"},
        {"kt", "dispersion", "kt", "transverse |kx|, |kz| bound"}}},
      {"project", "split a field into its five modal parts",
       {{"field", "project", "field", "input field sidecar (.json)"},
        {"profile", "project", "profile", "sine, gaussian_beam or pulse (lifted to mode 1)"},
        {"amplitude", "project", "amplitude", "profile amplitude"},
        {"wavenumber", "project", "wavenumber", "profile wavenumber"},
        {"profile-width", "project", "width", "profile width"},
        {"truncation", "project", "truncation", "three_halves, first_order or as_printed"}}},
      {"evolve", "integrate linear, diffusive, burgers, kzk or full equations",
       {{"equation", "evolve", "equation", "linear, diffusive, burgers, kzk or full"},
        {"mode", "evolve", "mode", "diffusive mode: entropy or vortical"},
        {"profile", "evolve", "profile", "sine, gaussian_beam or pulse"},
        {"field", "evolve", "field", "initial field sidecar (.json)"},
        {"amplitude", "evolve", "amplitude", "profile amplitude"},
        {"wavenumber", "evolve", "wavenumber", "profile wavenumber"},
        {"profile-width", "evolve", "width", "profile width"},
        {"direction", "evolve", "direction", "rightward or leftward"},
        {"dt", "evolve", "dt", "time step"},
        {"t-end", "evolve", "t_end", "final time"},
        {"output-every", "evolve", "output_every", "steps between snapshots (0: last only)"},
        {"scheme", "evolve", "scheme", "integrating_factor or explicit_split"},
        {"cfl-safety", "evolve", "cfl_safety", "fraction of the nonlinear CFL bound"}}},
      {"force", "radiation force of an acoustic source",
       {{"times", "force", "times", "comma-separated times"},
        {"variant", "force", "variant", "simplified, expanded, expanded_uncorrected, projected"},
        {"stride-x", "force", "stride_x", "write every n-th x node"},
        {"stride-y", "force", "stride_y", "write every n-th y node"}},
       true},
      {"stream", "streaming velocity driven by the radiation force",
       {{"forcing", "stream", "forcing", "source or harmonic"},
        {"harmonic-ky", "stream", "harmonic_ky", "wavenumber of the harmonic force"},
        {"harmonic-amplitude", "stream", "harmonic_amplitude", "amplitude of the harmonic force"},
        {"force-times", "stream", "force_times", "times of the force snapshots"},
        {"dt", "stream", "dt", "time step"},
        {"t-end", "stream", "t_end", "final time"},
        {"output-every", "stream", "output_every", "steps between snapshots (0: last only)"},
        {"probe-x", "stream", "probe_x", "probe x"},
        {"probe-y", "stream", "probe_y", "probe y"}},
       true},
      {"figures", "data of the monopole force figures 1-4",
       {{"fig", "figures", "figures", "comma-separated figure indices 1..4"},
        {"x", "figures", "x", "transverse position"},
        {"t-min", "figures", "t_min", "first time (figures 3, 4)"},
        {"t-max", "figures", "t_max", "last time (figures 3, 4)"},
        {"nt", "figures", "nt", "number of times (figures 3, 4)"},
        {"y-max", "figures", "y_max", "largest y written (figures 1, 2)"},
        {"C", "source", "C", "monopole shape constant (> 1)"},
        {"eps-nl", "source", "eps_nl", "monopole nonlinearity constant"}}},
      {"verify-projectors", "projector residuals and their scaling under parameter halving",
       {{"mu-list", "verify", "mu", "comma-separated mu values"},
        {"beta-list", "verify", "beta", "comma-separated beta values"},
        {"samples", "verify", "samples", "number of wavevectors"},
        {"truncation", "verify", "truncation", "comma-separated truncation variants"}}},
      {"verify-limit", "period-averaged force of the quasi-periodic beam against its limit",
       {{"periods", "limit", "periods", "whole number of periods"},
        {"samples-per-period", "limit", "samples_per_period", ">= 64"},
        {"margin", "limit", "margin", "distance kept from the tapers"},
        {"variant", "limit", "variant", "force variant"},
        {"probe-x", "limit", "probe_x", "x of the CSV profile"}},
       true},
  };

  std::vector<Sub> subs(specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) {
    Sub& s = subs[i];
    const Spec& sp = specs[i];
    s.command = sp.command;
    s.app = app.add_subcommand(sp.command, sp.help);
    s.flags = kCommon;
    if (sp.source) s.flags.insert(s.flags.end(), kSource.begin(), kSource.end());
    s.flags.insert(s.flags.end(), sp.extra.begin(), sp.extra.end());
    for (const auto& f : s.flags) {
      if (s.app->get_option_no_throw("--" + f.name)) continue;
      s.app->add_option("--" + f.name, s.values[f.name], f.help);
    }
    s.app->add_option("--out", s.out, "output directory");
    if (sp.command == "material") s.app->add_option("file", s.values["material"], "material file")->required();
    if (sp.command == "evolve") s.app->add_flag("--no-dealias", s.dealias_off, "turn off 2/3 dealiasing");
    if (sp.command == "stream") s.app->add_flag("--self-advection", s.self_advection, "keep (V.grad) Vx");
    if (sp.command == "verify-limit") s.app->add_flag("--vanishing", s.vanishing, "also report the inviscid vanishing ratio");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (run->parsed()) {
      const auto sc = load_scenario(scn_path);
      report(run_scenario(sc, run_out), run_out);
      return 0;
    }
    for (auto& s : subs) {
      if (!s.app->parsed()) continue;
      const auto sc = parse_scenario(scenario_text(s), std::filesystem::current_path(), s.command + ".scn");
      report(run_scenario(sc, s.out), s.out);
      return 0;
    }
  } catch (const SchemaError& e) {
    std::cerr << "schema error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
