#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ehjb/io.hpp"

namespace ehjb {

/// Parsed experiment description: the resolved model plus the parameters of
/// every requested stage. Flags record which optional blocks were present so
/// the runner executes exactly what the config asks for.
struct ExperimentConfig {
  std::string origin;  // config file path (informational)
  ProblemSpec spec;

  bool has_grid = false;
  double h = 0.0;

  bool has_lambda = false;
  double lambda = 0.0;

  bool has_schedule = false;
  VanishingDiscountSchedule schedule;
  double schedule_tol = 1e-3;

  bool has_simulation = false;
  SimulationConfig simulation;
  Vec x0;
  std::string policy = "fixed:0";  // fixed:<label|index>, random_switching,
                                   // boundary_seeking, feedback
  std::string sim_check;           // "", "invariance", "viability"
  double sim_threshold = 1e-3;

  std::vector<std::string> checks;  // condition names for check_condition

  std::vector<std::pair<std::string, Barrier>> barriers;
  double lyapunov_delta = 0.0;  // 0 -> collar / 2
  double lyapunov_bound = 0.0;  // margin bound M

  bool has_liouville = false;
  double liouville_tol = 1e-6;

  bool has_exit_value = false;
  std::function<double(const Vec&)> phi;
  std::string phi_label;
  double exit_solve_lambda = 1e-3;
  double exit_solve_h = 0.03125;
  double exit_tolerance = 0.15;

  std::string output_dir = ".";
  int threads = 0;  // <= 0: auto / environment
};

/// Parses and validates an experiment config; every rejection is a
/// ConfigError naming the offending key.
ExperimentConfig parse_config(const Json& j, const std::string& origin);
ExperimentConfig load_config(const std::string& path);

/// Stage names in dependency order, restricted to what the config requests.
std::vector<std::string> configured_stages(const ExperimentConfig& config);

}  // namespace ehjb
