#pragma once

// Declarative experiment runner: named scenarios binding the geometry,
// dynamics, period, drift and spectral modules into seeded, reproducible
// runs with CSV/JSON outputs and per-rule pass/fail verdicts.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "zoll/table.hpp"
#include "zoll/types.hpp"

namespace zoll {

struct ScenarioConfig {
  std::string scenario;
  std::string manifold;
  std::map<std::string, double> manifold_params;
  std::vector<double> eps;
  int orbits = 20;
  std::uint64_t seed = 1;
  double tol = 1e-12;
  int workers = 1;
  std::string out;

  // per-scenario extras
  double T_slow = 0;         // drift horizons (scenario default when 0)
  double amp = 0.3;          // conformal-model amplitude
  std::string expect;        // zoll-defect / vertical-drift expectation
  std::int64_t denom_bound = 1000000;
  int cases = 100;           // spectral-suite random instances
  std::string matrix_file;   // spectral-suite plain-text (rho, gamma) input
  int samples = 100;         // chern-audit pointwise samples
  double h = 1e-4;           // z0-identity finite-difference step
};

/// Parse "key = value" lines (with '#' comments) or a JSON object file.
/// Unknown keys, malformed values and out-of-range entries raise
/// ConfigError with an actionable message.
ScenarioConfig parse_config_file(const std::string& scenario,
                                 const std::string& path);
ScenarioConfig parse_config_text(const std::string& scenario,
                                 const std::string& text, bool json);

std::vector<std::string> scenario_names();
std::string describe_scenario(const std::string& name);

struct RuleResult {
  std::string id;
  bool pass = false;
  double value = 0;
  double threshold = 0;
  std::string note;
};

struct ScenarioResult {
  ResultTable table;
  std::vector<RuleResult> rules;
  std::string summary_json;  // serialized summary (verdicts, config echo, ...)
  bool pass = false;
};

/// Execute a scenario. Throws ConfigError for invalid configs; numerical
/// failures surface as IntegrationError/Error with the failing state noted.
ScenarioResult run_scenario(const ScenarioConfig& cfg);

/// Write results.csv and summary.json under cfg.out (created if needed).
void write_outputs(const ScenarioResult& res, const ScenarioConfig& cfg);

/// Deterministic helper: run jobs 0..n-1 with `workers` threads, results
/// collected by index so the outcome is scheduling-independent.
void parallel_for(int n, int workers, const std::function<void(int)>& fn);

}  // namespace zoll
