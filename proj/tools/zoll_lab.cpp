// zoll-lab: command-line runner for the magnetic-flow laboratory scenarios.

#include <CLI11.hpp>

#include <cstdio>
#include <string>

#include "zoll/manifold_zoo.hpp"
#include "zoll/scenarios.hpp"

using namespace zoll;

int main(int argc, char** argv) {
  CLI::App app{"zoll-lab: magnetic geodesic flows, periods, drifts and "
               "linear symplectic spectra"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "run a scenario and write results");
  std::string scenario, config_path, out_dir;
  std::uint64_t seed = 0;
  double tol = 0;
  int workers = 0;
  bool seed_set = false, tol_set = false, workers_set = false;
  run->add_option("scenario", scenario, "scenario name (see 'list scenarios')")
      ->required();
  run->add_option("--config", config_path,
                  "config file: 'key = value' lines or a JSON object");
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--seed", seed, "override the seed")
      ->each([&](const std::string&) { seed_set = true; });
  run->add_option("--tol", tol, "override the integrator tolerance")
      ->each([&](const std::string&) { tol_set = true; });
  run->add_option("--workers", workers, "worker threads for orbit jobs")
      ->each([&](const std::string&) { workers_set = true; });

  // list
  auto* list = app.add_subcommand("list", "list registries");
  std::string what;
  list->add_option("what", what, "'manifolds' or 'scenarios'")->required();

  // describe
  auto* describe =
      app.add_subcommand("describe", "column schema and rules of a scenario");
  std::string desc_name;
  describe->add_option("scenario", desc_name, "scenario name")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*list) {
      if (what == "manifolds") {
        for (const auto& n : builtin_manifold_names()) std::printf("%s\n", n.c_str());
      } else if (what == "scenarios") {
        for (const auto& n : scenario_names()) std::printf("%s\n", n.c_str());
      } else {
        std::fprintf(stderr, "list: expected 'manifolds' or 'scenarios'\n");
        return 2;
      }
      return 0;
    }
    if (*describe) {
      std::printf("%s", describe_scenario(desc_name).c_str());
      return 0;
    }
    // run
    ScenarioConfig cfg =
        config_path.empty()
            ? parse_config_text(scenario, "", false)
            : parse_config_file(scenario, config_path);
    if (seed_set) cfg.seed = seed;
    if (tol_set) cfg.tol = tol;
    if (workers_set) cfg.workers = workers;
    if (!out_dir.empty()) cfg.out = out_dir;
    if (cfg.tol < 1e-13 || cfg.tol > 1e-6)
      throw ConfigError("tol must lie in [1e-13, 1e-6]");

    ScenarioResult res = run_scenario(cfg);
    write_outputs(res, cfg);
    for (const auto& r : res.rules)
      std::printf("[%s] %s  value=%.6g threshold=%.6g%s%s\n",
                  r.pass ? "PASS" : "FAIL", r.id.c_str(), r.value, r.threshold,
                  r.note.empty() ? "" : "  ", r.note.c_str());
    std::printf("%s: %s\n", cfg.scenario.c_str(),
                res.pass ? "all rules passed" : "RULE FAILURES");
    return res.pass ? 0 : 1;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const Error& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  }
}
