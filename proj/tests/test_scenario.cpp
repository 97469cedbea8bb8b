#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "acoustream/scenario.hpp"

using namespace acoustream;
namespace fs = std::filesystem;

namespace {

const fs::path kSrc = ACOUSTREAM_SOURCE_DIR;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("acoustream_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) { return read_file_bytes(p); }

}  // namespace

TEST(Scenario, Fnv1aKnownVectors) {
  EXPECT_EQ(hex64(fnv1a64("")), "cbf29ce484222325");
  EXPECT_EQ(hex64(fnv1a64("a")), "af63dc4c8601ec8c");
  EXPECT_EQ(hex64(fnv1a64("foobar")), "85944171f73967e8");
}

TEST(Scenario, EmptyIsSchemaError) {
  EXPECT_THROW(parse_scenario(""), SchemaError);
  EXPECT_THROW(parse_scenario("# only a comment\n\n"), SchemaError);
}

TEST(Scenario, UnknownKeyCarriesLine) {
  try {
    parse_scenario("command = figures\n[figures]\nfig = 1\n");
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.line(), 3);
  }
  EXPECT_THROW(parse_scenario("command = figures\n[nope]\n"), SchemaError);
  EXPECT_THROW(parse_scenario("command = plot\n"), SchemaError);
  EXPECT_THROW(parse_scenario("[params]\nmu = 0.1\n"), SchemaError);
}

TEST(Scenario, MissingMaterialFile) {
  EXPECT_THROW(parse_scenario("command = material\nmaterial = /nonexistent/x.mat\n"), SchemaError);
}

TEST(Scenario, ParamsConsistency) {
  auto p = scenario_params(parse_scenario("command = dispersion\n[params]\nmu = 0.02\nbeta = 0.1\n"));
  EXPECT_DOUBLE_EQ(p.mu, 0.02);
  EXPECT_NEAR(p.beta_total, 0.1, 1e-15);
  p = scenario_params(parse_scenario(
      "command = dispersion\n[params]\ndelta11 = 0.1\ndelta12 = 0.1\ndelta21 = 0.1\ndelta22 = -0.05\n"));
  EXPECT_NEAR(p.beta_total, 0.25, 1e-15);
  EXPECT_THROW(scenario_params(parse_scenario(
                   "command = dispersion\n[params]\ndelta11 = 0.1\ndelta12 = 0.1\ndelta21 = 0.1\n"
                   "delta22 = -0.05\nbeta = 0.3\n")),
               SchemaError);
  EXPECT_THROW(scenario_params(parse_scenario("command = dispersion\n[params]\ndelta11 = 0.1\n")),
               SchemaError);
  const std::string mat = (kSrc / "materials" / "air.mat").string();
  EXPECT_THROW(scenario_params(parse_scenario("command = material\nmaterial = " + mat + "\n[params]\nbeta = 0.1\nlength = 1\n")),
               SchemaError);
  p = scenario_params(parse_scenario("command = material\nmaterial = " + mat + "\n[params]\nlength = 1e-3\n"));
  EXPECT_NEAR(p.sound_speed, 343.8204473267988, 1e-9);
}

TEST(Scenario, ShippedMonopoleFigureOne) {
  const auto out = scratch("fig1");
  const auto sc = load_scenario(kSrc / "scenarios" / "monopole_fig1.scn");
  EXPECT_EQ(sc.command, "figures");
  run_scenario(sc, out);
  const std::string csv = slurp(out / "fig1.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "y,force_normalized,rho1");
  EXPECT_TRUE(fs::exists(out / "manifest.json"));
  const auto m = nlohmann::json::parse(slurp(out / "manifest.json"));
  EXPECT_EQ(m["inputs"][0]["file"], "monopole_fig1.scn");
  EXPECT_EQ(m["outputs"][0]["file"], "fig1.csv");
  EXPECT_EQ(m["outputs"][0]["fnv1a64"], hex64(fnv1a64(csv)));
}

TEST(Scenario, ReRunIsByteIdentical) {
  const auto a = scratch("rerun_a"), b = scratch("rerun_b");
  const auto sc = load_scenario(kSrc / "scenarios" / "projector_audit.scn");
  run_scenario(sc, a);
  run_scenario(sc, b);
  EXPECT_EQ(slurp(a / "manifest.json"), slurp(b / "manifest.json"));
  EXPECT_EQ(slurp(a / "projectors.json"), slurp(b / "projectors.json"));
  const auto j = nlohmann::json::parse(slurp(a / "projectors.json"));
  EXPECT_EQ(j["truncations"][0]["truncation"], "three_halves");
  EXPECT_TRUE(j["truncations"][0]["ratios_in_quadratic_band"].get<bool>());
}

TEST(Scenario, SeedChangesSample) {
  const auto a = scratch("seed_a"), b = scratch("seed_b");
  const std::string base = "command = dispersion\n[params]\nmu = 0.01\nbeta = 0.01\n[dispersion]\nsamples = 5\n";
  run_scenario(parse_scenario("seed = 1\n" + base), a);
  run_scenario(parse_scenario("seed = 2\n" + base), b);
  EXPECT_NE(slurp(a / "dispersion.csv"), slurp(b / "dispersion.csv"));
  const auto j = nlohmann::json::parse(slurp(a / "dispersion.json"));
  EXPECT_TRUE(j["within_bound"].get<bool>());
}

TEST(Scenario, MaterialReport) {
  const auto out = scratch("material");
  const std::string mat = (kSrc / "materials" / "air.mat").string();
  run_scenario(parse_scenario("command = material\nmaterial = " + mat + "\n[params]\nlength = 1e-3\nmu = 0.01\n"), out);
  const auto j = nlohmann::json::parse(slurp(out / "material.json"));
  EXPECT_NEAR(j["sound_speed"].get<double>(), 343.8204473267988, 1e-9);
  EXPECT_NEAR(j["eps_nl"].get<double>(), 1.2, 1e-12);
  EXPECT_TRUE(j.contains("dimensionless"));
}

TEST(Scenario, HarmonicStreamingClosedForm) {
  const auto out = scratch("stream");
  run_scenario(parse_scenario("command = stream\n[params]\nmu = 0.01\neps = 0.1\n"
                              "delta11 = 0.0\ndelta12 = 0.05\ndelta21 = 0.0\ndelta22 = 0.0\n"
                              "[stream]\nforcing = harmonic\nharmonic_ky = 2\ndt = 0.1\nt_end = 2\n"),
               out);
  const auto j = nlohmann::json::parse(slurp(out / "stream.json"));
  EXPECT_LT(j["closed_form_max_error"].get<double>(), 1e-12);
  const auto f = read_field(out / j["snapshots"].back()["file"].get<std::string>());
  EXPECT_DOUBLE_EQ(f.time_stamp, 2.0);
}

TEST(Scenario, EvolveBurgersSnapshots) {
  const auto out = scratch("evolve");
  run_scenario(parse_scenario("command = evolve\n[params]\nmu = 0\neps = 0.1\nbeta = 0.1\n"
                              "[grid]\nny = 256\n[evolve]\nequation = burgers\ndt = 0.01\nt_end = 1\n"
                              "output_every = 50\n[output]\nencoding = csv\n"),
               out);
  const auto j = nlohmann::json::parse(slurp(out / "evolve.json"));
  ASSERT_EQ(j["snapshots"].size(), 3u);
  EXPECT_DOUBLE_EQ(j["snapshots"][2]["t"].get<double>(), 1.0);
  const auto f = read_field(out / "evolve_0002.json");
  EXPECT_EQ(f.grid.ny, 256u);
  EXPECT_GT(f.component(Component::rho).max_abs(), 0.5);
}

TEST(Scenario, ForceReportGaugeAndOddness) {
  const auto out = scratch("force");
  run_scenario(parse_scenario("command = force\n[params]\nmu = 0.01\nbeta = 0.1\n"
                              "[grid]\nnx = 64\nny = 512\n[force]\ntimes = 2\nstride_x = 4\nstride_y = 8\n"),
               out);
  const auto j = nlohmann::json::parse(slurp(out / "force.json"));
  const auto& t = j["times"][0];
  EXPECT_LE(t["far_edge_ratio"].get<double>(), 1e-6);
  EXPECT_LE(t["odd_defect_ratio"].get<double>(), 1e-12);
  EXPECT_LT(t["min_normalized"].get<double>(), 0.0);
}

TEST(Scenario, ProjectLiftedProfile) {
  const auto out = scratch("project");
  run_scenario(parse_scenario("command = project\n[params]\nmu = 0.01\nbeta = 0.01\n"
                              "[grid]\nnx = 16\nny = 32\n[project]\nprofile = gaussian_beam\nwidth = 2\n"),
               out);
  const auto j = nlohmann::json::parse(slurp(out / "project.json"));
  // the truncated projectors sum to the identity only up to second order
  EXPECT_LT(j["reconstruction_error"].get<double>(), 10.0 * 3e-4);
  EXPECT_GT(j["modes"][0]["l2"].get<double>(), 100.0 * j["modes"][2]["l2"].get<double>());
}

TEST(Scenario, ModuleErrorsPropagate) {
  const auto out = scratch("errors");
  EXPECT_THROW(run_scenario(parse_scenario("command = force\n[params]\nmu = 0.01\nbeta = 0.1\n[source]\nC = 0.5\n"), out),
               DomainError);
  EXPECT_THROW(run_scenario(parse_scenario("command = figures\n[figures]\nfigures = 5\n[params]\nbeta = 0.1\n"), out),
               DomainError);
  EXPECT_THROW(run_scenario(parse_scenario("command = evolve\n[evolve]\nequation = magic\n"), out), SchemaError);
}
