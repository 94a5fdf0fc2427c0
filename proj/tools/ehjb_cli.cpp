#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ehjb/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Ergodic HJB solver and verification suite"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output_dir;
  std::uint64_t seed = 0;
  int threads = 0;
  auto* opt_config = app.add_option("--config", config_path,
                                    "experiment config file (JSON)");
  auto* opt_output =
      app.add_option("--output", output_dir, "output directory override");
  auto* opt_seed = app.add_option("--seed", seed, "simulation seed override");
  auto* opt_threads =
      app.add_option("--threads", threads, "worker thread count override");

  const std::vector<std::pair<std::string, std::string>> verbs = {
      {"validate", "parse the config and check the requested conditions"},
      {"lyapunov", "evaluate the configured barrier margins"},
      {"solve-discounted", "Howard iteration at the configured lambda"},
      {"solve-ergodic", "vanishing-discount limit along the schedule"},
      {"liouville", "zero-cost constancy check"},
      {"simulate", "Monte Carlo batch or invariance/viability check"},
      {"exit-value", "exit payoff certificates vs the predicted value"},
      {"report", "run every stage the config asks for"}};
  for (const auto& [name, desc] : verbs)
    app.add_subcommand(name, desc)->fallthrough();

  CLI11_PARSE(app, argc, argv);

  if (opt_config->count() == 0) {
    std::cerr << "error: --config is required\n";
    return 2;
  }

  try {
    ehjb::ExperimentConfig cfg = ehjb::load_config(config_path);
    if (opt_output->count() > 0) cfg.output_dir = output_dir;
    if (opt_seed->count() > 0) cfg.simulation.seed = seed;
    if (opt_threads->count() > 0) cfg.threads = threads;

    std::vector<std::string> requested;
    for (const CLI::App* sub : app.get_subcommands())
      if (sub->get_name() != "report") requested.push_back(sub->get_name());

    const ehjb::RunOutcome outcome = ehjb::run_experiment(cfg, requested);
    for (const auto& stage : outcome.results["stages"]) {
      const std::string name = stage.get<std::string>();
      const bool ok = outcome.results["stage_passed"].value(name, false);
      std::cout << name << ": " << (ok ? "pass" : "FAIL") << "\n";
    }
    if (outcome.results.contains("errors"))
      for (auto it = outcome.results["errors"].begin();
           it != outcome.results["errors"].end(); ++it)
        std::cerr << "stage " << it.key() << ": "
                  << it.value().get<std::string>() << "\n";
    std::cout << "results: " << outcome.results_path << "\n";
    return outcome.all_passed ? 0 : 1;
  } catch (const ehjb::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
