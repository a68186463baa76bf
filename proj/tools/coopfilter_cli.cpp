#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "coopfilter/errors.hpp"
#include "coopfilter/scenario.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::string scenario = "example1";
  std::string out_dir;
  std::uint64_t seed = 0;
  int trials = 0;
  int d = -1;

  CLI::Option* seed_opt = nullptr;
  CLI::Option* trials_opt = nullptr;
  CLI::Option* d_opt = nullptr;
  CLI::Option* out_opt = nullptr;
};

void attach_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path,
                  "JSON config file; omit to use a built-in scenario");
  cmd->add_option("--scenario", f.scenario,
                  "built-in scenario when no config file is given")
      ->check(CLI::IsMember({"example1", "example2", "consensus"}));
  f.seed_opt = cmd->add_option("--seed", f.seed, "base random seed");
  f.trials_opt =
      cmd->add_option("--trials", f.trials, "Monte Carlo trial count")
          ->check(CLI::PositiveNumber);
  f.d_opt = cmd->add_option("--d", f.d, "external observation delay")
                ->check(CLI::NonNegativeNumber);
  f.out_opt = cmd->add_option("--out", f.out_dir, "output directory");
}

coopfilter::ScenarioConfig resolve(const CommonFlags& f) {
  coopfilter::ScenarioConfig cfg =
      f.config_path.empty() ? coopfilter::builtin_scenario(f.scenario)
                            : coopfilter::load_scenario(f.config_path);
  if (f.seed_opt->count() > 0) cfg.seed = f.seed;
  if (f.trials_opt->count() > 0) cfg.trials = f.trials;
  if (f.d_opt->count() > 0) cfg.d = f.d;
  if (f.out_opt->count() > 0) cfg.out_dir = f.out_dir;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Steady-state prediction under asynchronously delayed external "
      "observations: exact filters, the online cooperative learner, and the "
      "invariant suite"};
  app.require_subcommand(1);

  CommonFlags dare_f, run_f, check_f, imp_f, ens_f;
  CLI::App* dare = app.add_subcommand(
      "dare", "solve the local and stacked steady-state problems");
  attach_common(dare, dare_f);

  CLI::App* run = app.add_subcommand(
      "run", "simulate, learn online, and write trace/aggregate files");
  attach_common(run, run_f);

  CLI::App* check =
      app.add_subcommand("check", "run the invariant suite; nonzero on failure");
  attach_common(check, check_f);

  CLI::App* improvement = app.add_subcommand(
      "improvement", "certify the cooperative covariance improvement");
  attach_common(improvement, imp_f);
  int sweep_max = -1;
  improvement->add_option("--sweep", sweep_max,
                          "emit the gap for every delay 0..D");

  CLI::App* ensemble = app.add_subcommand(
      "ensemble", "run with a grid of horizon scales and per-step selection");
  attach_common(ensemble, ens_f);
  std::vector<double> betas = {1.0, 1.25, 1.5, 1.75, 2.0, 2.25, 2.5};
  ensemble->add_option("--betas", betas, "horizon scale grid");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (dare->parsed()) {
      std::cout << coopfilter::cmd_dare(resolve(dare_f)).dump(2) << "\n";
    } else if (run->parsed()) {
      std::cout << coopfilter::cmd_run(resolve(run_f)).dump(2) << "\n";
    } else if (check->parsed()) {
      bool all_pass = false;
      const auto report = coopfilter::cmd_check(resolve(check_f), &all_pass);
      std::cout << report.dump(2) << "\n";
      if (!all_pass) return 3;
    } else if (improvement->parsed()) {
      std::cout << coopfilter::cmd_improvement(resolve(imp_f), sweep_max)
                       .dump(2)
                << "\n";
    } else if (ensemble->parsed()) {
      coopfilter::ScenarioConfig cfg = resolve(ens_f);
      if (ensemble->count("--betas") > 0 || !cfg.betas_explicit) {
        cfg.betas = betas;
      }
      std::cout << coopfilter::cmd_run(cfg).dump(2) << "\n";
    }
  } catch (const coopfilter::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const coopfilter::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 2;
  } catch (const coopfilter::InvariantError& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
