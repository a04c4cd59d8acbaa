#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <sys/wait.h>

#include "vqaud/experiments.hpp"

using namespace vqaud;
using namespace vqaud::experiments;

namespace {

Config parse(const std::string& text) { return config_from_json(Json::parse(text)); }

std::filesystem::path scratch_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "vqaud_experiments_test";
  std::filesystem::create_directories(dir);
  return dir;
}

const CountRow& row_of(const std::vector<CountRow>& rows, const std::string& system, const std::string& method) {
  for (const auto& r : rows)
    if (r.system == system && r.method == method) return r;
  throw std::runtime_error("missing row " + system + "/" + method);
}

}  // namespace

TEST(Config, DefaultsPerExperiment) {
  for (const auto& id : experiment_ids()) EXPECT_NO_THROW(default_config(id)) << id;
  EXPECT_THROW(default_config("fig9"), ConfigError);
  const Config c = parse(R"({"experiment": "fig3"})");
  EXPECT_EQ(c.alpha, 0.5);
  EXPECT_TRUE(c.steady);
  EXPECT_EQ(c.seeds.size(), 5u);
  EXPECT_EQ(c.noise.dephasing_prob, 2e-3);
  EXPECT_EQ(gate_counts(resolve_ansatz(c.ansatz)), (GateCounts{110, 25, 5}));
}

TEST(Config, OverridesApply) {
  const Config c = parse(R"({
    "schema_version": 1, "experiment": "fig2b",
    "model": {"kind": "two_level", "omega": 2.0},
    "initial_state": {"diag": [0.5, 0.5]},
    "methods": ["lcu"], "alpha": 0.7,
    "optimizer": {"restarts": 2, "line_search": "armijo", "gradient": "finite_difference"},
    "noise": {"lambda": 0.01, "omega": 0.02},
    "grid": {"t_max": 2.0, "points": 5},
    "shots": 0, "seed": 9
  })");
  EXPECT_EQ(c.model.omega, 2.0);
  EXPECT_EQ(c.initial_kind, "matrix");
  ASSERT_EQ(c.methods.size(), 1u);
  EXPECT_EQ(c.methods[0], DilationMethod::lcu);
  EXPECT_EQ(c.alpha, 0.7);
  EXPECT_EQ(c.bfgs.restarts, 2u);
  EXPECT_EQ(c.bfgs.line_search, LineSearch::armijo);
  EXPECT_EQ(c.gradient, GradientMode::finite_difference);
  EXPECT_EQ(c.noise.amp_damping_prob, 0.02);
  ASSERT_EQ(c.times.size(), 5u);
  EXPECT_DOUBLE_EQ(c.times[4], 2.0);
  EXPECT_EQ(c.seed, 9u);
}

TEST(Config, RejectsBadInput) {
  EXPECT_THROW(parse(R"({"experiment": "fig2b", "colour": 1})"), ConfigError);
  EXPECT_THROW(parse(R"({"experiment": "fig2b", "model": {"omegaa": 1}})"), ConfigError);
  EXPECT_THROW(parse(R"({"experiment": "fig2b", "schema_version": 2})"), ConfigError);
  EXPECT_THROW(parse(R"({"experiment": "fig2b", "alpha": 1.5})"), ConfigError);
  EXPECT_THROW(parse(R"({"experiment": "fig2b", "methods": ["magic"]})"), ConfigError);
  EXPECT_THROW(parse(R"({"experiment": "fig2b", "grid": {"times": [1.0, 0.5]}})"), ConfigError);
  EXPECT_THROW(parse(R"({"experiment": "fig2b", "noise": {"lambda": 2.0}})"), ConfigError);
  EXPECT_THROW(parse(R"({"experiment": "fig2b", "ansatz": {"kind": "ring"}})"), ConfigError);
  EXPECT_THROW(parse(R"({"experiment": "fig2b", "model": {"kind": "file"}})"), ConfigError);
  EXPECT_THROW(parse(R"({"model": {}})"), ConfigError);
  EXPECT_THROW(load_config(scratch_dir() / "absent.json"), ConfigError);
}

TEST(Config, ShippedConfigsParse) {
#ifdef VQAUD_CONFIG_DIR
  std::size_t n = 0;
  for (const auto& entry : std::filesystem::directory_iterator(VQAUD_CONFIG_DIR)) {
    EXPECT_NO_THROW(load_config(entry.path())) << entry.path();
    ++n;
  }
  EXPECT_GE(n, 10u);
#else
  GTEST_SKIP() << "config directory not configured";
#endif
}

TEST(GateCount, TableMatchesCitedCounts) {
  const auto rows = run_gatecount(parse(R"({"experiment": "table1"})"));
  EXPECT_EQ(row_of(rows, "two_level", "vqaud").counts, (GateCounts{36, 8, 3}));
  EXPECT_EQ(row_of(rows, "three_level_steady", "vqaud").counts, (GateCounts{110, 25, 5}));
  EXPECT_EQ(row_of(rows, "four_level_steady", "vqaud").counts, (GateCounts{206, 49, 5}));
  const auto& lcu = row_of(rows, "two_level", "lcu");
  EXPECT_EQ(lcu.source, kLcuReference);
  EXPECT_NEAR(lcu.single_reduction, 100.0 * (287 - 36) / 287.0, 1e-12);
  EXPECT_NEAR(lcu.two_qubit_reduction, 100.0 * (84 - 8) / 84.0, 1e-12);
  // Computed counts agree with the reported VQAUD counts.
  for (const auto& r : rows)
    if (r.method == "vqaud") EXPECT_EQ(r.counts, *find_cited(r.system, "vqaud")) << r.system;
  const std::string csv = gatecount_csv(rows).str();
  EXPECT_NE(csv.find("two_level,sz_nagy," + std::string(kSzNagyReference) + ",74,20,3,51.4,60.0"), std::string::npos);
}

TEST(GateCount, FiniteTimeAndCustomAnsatz) {
  const auto rows = run_gatecount(parse(R"({"experiment": "sm_finite_time"})"));
  EXPECT_EQ(row_of(rows, "three_level_finite", "vqaud").counts, (GateCounts{174, 41, 5}));
  EXPECT_EQ(row_of(rows, "four_level_finite", "vqaud").counts, (GateCounts{238, 57, 5}));
  const auto empty = run_gatecount(parse(R"({"experiment": "fig2b", "ansatz": {"kind": "layered", "qubits": 3, "blocks": 0}})"));
  ASSERT_EQ(empty.size(), 1u);
  EXPECT_EQ(empty[0].counts, (GateCounts{0, 0, 3}));
  const auto seq = run_gatecount(parse(R"({"experiment": "fig2b", "ansatz": {"kind": "sequential", "qubits": 3, "entanglers": 3}})"));
  EXPECT_EQ(seq[0].counts, (GateCounts{18, 3, 3}));
}

TEST(Simulation, ExactBaselineTracksReference) {
  const Config c = parse(R"({"experiment": "fig2b", "methods": ["sz_nagy"], "shots": 0, "grid": {"t_max": 6.0, "points": 7}})");
  const auto r = run_simulation(c);
  EXPECT_LT(r.max_deviation.at("sz_nagy/exact"), 1e-10);
  const std::string csv = simulation_csv(r, 2).str();
  EXPECT_EQ(csv.substr(0, csv.find('\n')).find("p0") != std::string::npos, true);
}

TEST(Simulation, ShotNoiseIsSeeded) {
  const Config c = parse(R"({"experiment": "fig2b", "methods": ["sz_nagy"], "shots": 1024, "grid": {"t_max": 3.0, "points": 4}})");
  EXPECT_EQ(simulation_csv(run_simulation(c), 2).str(), simulation_csv(run_simulation(c), 2).str());
  const double d = run_simulation(c).max_deviation.at("sz_nagy/shots");
  EXPECT_GT(d, 0.0);
  EXPECT_LT(d, 0.1);
}

TEST(Taylor, BoundHoldsOnCurve) {
  const auto r = run_taylor(parse(R"({"experiment": "fig4", "methods": ["sz_nagy"]})"));
  EXPECT_EQ(r.bound.size(), 60u);
  for (const auto& b : r.bound) EXPECT_LE(b.empirical, b.bound) << b.order << " " << b.dt;
  EXPECT_LT(r.sim.max_deviation.at("sz_nagy/dt=0.1 order=2"), 0.02);
}

TEST(Kraus, DemoMatchesClosedForm) {
  const auto rows = run_kraus_demo(parse(R"({"experiment": "kraus_demo", "methods": ["sz_nagy"], "kraus": {"points": 6}})"));
  EXPECT_EQ(rows.size(), 12u);
  for (const auto& r : rows) {
    EXPECT_NEAR(r.ground, r.closed_form_ground, 1e-10);
    EXPECT_NEAR(r.ground + r.excited, 1.0, 1e-10);
    EXPECT_TRUE(r.complete);
  }
}

TEST(Bench, OutputIsAPureFunctionOfTheConfig) {
  const Config c = parse(R"({"experiment": "fig2b", "methods": ["vqaud", "sz_nagy"], "optimizer": {"restarts": 2},
                             "grid": {"t_max": 2.0, "points": 3}, "shots": 256, "seed": 3})");
  const std::string a = run_bench(c).dump();
  EXPECT_EQ(a, run_bench(c).dump());
  EXPECT_EQ(a.find("seconds"), std::string::npos);
  Config timed = c;
  timed.include_timing = true;
  EXPECT_NE(run_bench(timed).dump().find("seconds"), std::string::npos);
  EXPECT_EQ(run_bench(parse(R"({"experiment": "table1"})"))["gate_counts"]["rows"].size(), 9u);
}

#ifdef VQAUD_CLI_PATH

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(VQAUD_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string write_config(const std::string& name, const std::string& text) {
  const auto path = scratch_dir() / name;
  write_atomic(path, text);
  return path.string();
}

}  // namespace

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run_cli(""), 2);
  EXPECT_EQ(run_cli("dilate"), 2);
  EXPECT_EQ(run_cli("dilate --config " + (scratch_dir() / "absent.json").string()), 2);
  EXPECT_EQ(run_cli("dilate --config " + write_config("broken.json", "{ nope")), 2);
  EXPECT_EQ(run_cli("dilate --config " + write_config("unknown.json", R"({"experiment": "fig2b", "extra": 1})")), 2);
  EXPECT_EQ(run_cli("simulate --config " + write_config("t1.json", R"({"experiment": "table1"})")), 2);
  EXPECT_EQ(run_cli("gatecount --config " + write_config("t1.json", R"({"experiment": "table1"})")), 0);
}

TEST(Cli, DilateWritesResult) {
  const auto out = scratch_dir() / "dilation.txt";
  std::filesystem::remove(out);
  const std::string cfg = write_config("dilate.json", R"({"experiment": "fig2b", "methods": ["sz_nagy"], "grid": {"times": [1.0]}})");
  ASSERT_EQ(run_cli("dilate --config " + cfg + " --out " + out.string()), 0);
  const DilationResult d = dilation_from_text(read_text(out));
  EXPECT_EQ(d.method, DilationMethod::sz_nagy);
  EXPECT_EQ(d.residual, 0.0);
  EXPECT_EQ(d.block_dim, 4u);
  EXPECT_TRUE(is_unitary(d.unitary, 1e-10));
}

TEST(Cli, GatecountCsv) {
  const auto out = scratch_dir() / "table1.csv";
  ASSERT_EQ(run_cli("gatecount --config " + write_config("t1.json", R"({"experiment": "table1"})") + " --out " + out.string()), 0);
  EXPECT_NE(read_text(out).find("two_level,vqaud,computed,36,8,3,,"), std::string::npos);
}

#endif
