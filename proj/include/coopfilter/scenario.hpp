#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "coopfilter/cofilter.hpp"
#include "coopfilter/model.hpp"
#include "json.hpp"

namespace coopfilter {

/// Fully resolved run description. Built-in scenarios fill the model; the
/// csv_traffic scenario carries a file path instead and runs model-free.
struct ScenarioConfig {
  std::string scenario = "example1";
  SystemModel model;
  bool has_model = true;
  std::string traffic_csv;
  double traffic_sigma = 0.01;
  int consensus_n = 10;
  int d = 0;
  std::vector<double> betas = {2.0};
  bool betas_explicit = false;
  double lambda = 1.0;
  int T_init = 50;
  int N_E = 1;
  int check_trials = 500;
  int check_length = 400;
  int trials = 1;
  std::uint64_t seed = 0;
  std::string out_dir = "out";

  /// Echo of every field, embedded in each emitted file.
  nlohmann::json resolved() const;
};

/// Built-in scenario by name (example1, example2, consensus).
ScenarioConfig builtin_scenario(const std::string& name);

/// Loads a JSON config file: {"scenario": ..., overrides...}. Unknown
/// scenario names or malformed fields raise UsageError.
ScenarioConfig load_scenario(const std::string& path);

/// Worker count for fan-out over trials: min(trials, hardware threads),
/// further capped by the COOPFILTER_THREADS environment variable.
int worker_count(int trials);

/// Local and stacked steady-state solutions with both covariance functionals.
nlohmann::json cmd_dare(const ScenarioConfig& cfg);

/// Simulates `trials` sample paths, runs the online learner (ensemble when
/// several betas are configured) plus the three model-based baselines on
/// each, writes one CSV trace per seed and a single aggregate JSON with the
/// median and 1-sigma band of the regrets at epoch boundaries. Returns the
/// aggregate.
nlohmann::json cmd_run(const ScenarioConfig& cfg);

/// Runs the invariant suite on the configured scenario; *all_pass reports
/// whether every check passed.
nlohmann::json cmd_check(const ScenarioConfig& cfg, bool* all_pass);

/// Improvement certificate for d = 0..d_max (d_max < 0 means cfg.d only).
nlohmann::json cmd_improvement(const ScenarioConfig& cfg, int d_max);

}  // namespace coopfilter
