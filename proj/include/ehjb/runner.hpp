#pragma once

#include <string>
#include <vector>

#include "ehjb/config.hpp"

namespace ehjb {

struct RunOutcome {
  Json results;
  bool all_passed = false;
  std::string results_path;
};

/// Executes the requested stages (empty = everything the config asks for) in
/// dependency order, writes results.json plus CSV dumps into
/// config.output_dir, and reports whether every requested check passed.
/// Reruns of the same config produce byte-identical results.json except the
/// timestamp field.
RunOutcome run_experiment(const ExperimentConfig& config,
                          const std::vector<std::string>& stages = {});

}  // namespace ehjb
