#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "vqaud/experiments.hpp"

namespace {

using namespace vqaud;
using namespace vqaud::experiments;

enum ExitCode { kOk = 0, kRuntime = 1, kConfig = 2 };

struct CommonArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--config", a.config, "experiment config (JSON)")->required();
  cmd->add_option("--seed", a.seed, "overrides the config seed");
  cmd->add_option("--out", a.out, "output path (default: config 'output', else stdout)");
}

Config load(const CommonArgs& a) {
  Config c = load_config(a.config);
  if (a.seed) c.seed = *a.seed;
  return c;
}

void emit(const Config& c, const CommonArgs& a, const std::string& text) {
  const std::string path = !a.out.empty() ? a.out : c.output;
  if (path.empty()) {
    std::cout << text;
  } else {
    write_atomic(path, text);
  }
}

std::string sibling(const std::string& path, const std::string& suffix) {
  return path.empty() ? std::string{} : path + suffix;
}

int cmd_dilate(const CommonArgs& a) {
  const Config c = load(a);
  const DilationResult d = run_dilate(c);
  emit(c, a, dilation_to_text(d));
  std::fprintf(stderr, "%s residual %.3e\n", std::string(method_name(d.method)).c_str(), d.residual);
  return kOk;
}

int cmd_simulate(const CommonArgs& a) {
  const Config c = load(a);
  if (c.experiment == "fig2a") {
    emit(c, a, depth_csv(run_depth_sweep(c)).str());
  } else if (c.experiment == "fig4") {
    const auto r = run_taylor(c);
    emit(c, a, simulation_csv(r.sim, 2).str());
    // The remainder-bound table goes next to the series, or after it on stdout.
    const std::string path = !a.out.empty() ? a.out : c.output;
    if (path.empty()) std::cout << "\n" << taylor_bound_csv(r.bound).str();
    else write_atomic(sibling(path, ".bound.csv"), taylor_bound_csv(r.bound).str());
  } else if (c.experiment == "kraus_demo") {
    emit(c, a, kraus_csv(run_kraus_demo(c)).str());
  } else if (c.experiment == "table1") {
    throw ConfigError("table1 has no time series; use gatecount");
  } else {
    const auto r = run_simulation(c);
    emit(c, a, simulation_csv(r, resolve_model(c).dim).str());
  }
  return kOk;
}

int cmd_gatecount(const CommonArgs& a) {
  const Config c = load(a);
  emit(c, a, gatecount_csv(run_gatecount(c)).str());
  return kOk;
}

int cmd_bench(const CommonArgs& a) {
  const Config c = load(a);
  emit(c, a, run_bench(c).dump(2) + "\n");
  return kOk;
}

int cmd_kraus(const CommonArgs& a) {
  const Config c = load(a);
  if (c.experiment != "kraus_demo") throw ConfigError("kraus-demo needs experiment 'kraus_demo'");
  emit(c, a, kraus_csv(run_kraus_demo(c)).str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variational unitary dilation of open-system propagators"};
  app.require_subcommand(1);
  CommonArgs args;
  struct Sub {
    const char* name;
    const char* help;
    int (*run)(const CommonArgs&);
  };
  const Sub subs[] = {
      {"dilate", "dilate the configured target and write the result", cmd_dilate},
      {"simulate", "population time series with the RK4 reference", cmd_simulate},
      {"gatecount", "gate counts against the cited baselines", cmd_gatecount},
      {"bench", "JSON summary of residuals and deviations", cmd_bench},
      {"kraus-demo", "operator-sum evolution through dilations", cmd_kraus},
  };
  for (const auto& s : subs) add_common(app.add_subcommand(s.name, s.help), args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    for (const auto& s : subs)
      if (app.got_subcommand(s.name)) return s.run(args);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kRuntime;
  }
  return kRuntime;
}
