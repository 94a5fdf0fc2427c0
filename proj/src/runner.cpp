#include "ehjb/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <optional>

#include "ehjb/parallel.hpp"

namespace ehjb {

namespace {

std::string timestamp_utc() {
  const std::time_t t =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Condition condition_from(const std::string& name) {
  if (name == "irrelevant") return Condition::irrelevant;
  if (name == "invariance") return Condition::invariance;
  if (name == "relevant") return Condition::relevant;
  if (name == "sell") return Condition::sell;
  if (name == "compact_convexity") return Condition::compact_convexity;
  throw ConfigError("checks: unknown condition '" + name + "'");
}

ControlLaw parse_policy(const ExperimentConfig& cfg,
                        const DiscountedSolution* sol) {
  const std::string& p = cfg.policy;
  if (p == "random_switching") return ControlLaw::random_switching();
  if (p == "boundary_seeking") return ControlLaw::boundary_seeking();
  if (p == "feedback") {
    if (sol == nullptr)
      throw ConfigError(
          "simulation.policy: 'feedback' needs grid.h and lambda for a "
          "discounted solve");
    return ControlLaw::feedback_policy(&sol->policy);
  }
  if (p.rfind("fixed:", 0) == 0) {
    const std::string which = p.substr(6);
    const bool numeric =
        !which.empty() &&
        which.find_first_not_of("0123456789") == std::string::npos;
    const int idx = numeric ? std::stoi(which)
                            : cfg.spec.controls.index_of(which);
    if (idx < 0 || idx >= cfg.spec.controls.size())
      throw ConfigError("simulation.policy: control index out of range");
    return ControlLaw::fixed_control(idx);
  }
  throw ConfigError("simulation.policy: unknown policy '" + p + "'");
}

Json stage_validate(const ExperimentConfig& cfg, bool* pass) {
  const ProblemSpec& spec = cfg.spec;
  Json j;
  j["model"] = spec.name;
  j["dim"] = spec.geom.dim;
  j["noise_dim"] = spec.noise_dim;
  j["controls"] = spec.controls.size();
  j["bounded"] = spec.geom.bounded();
  j["has_cost"] = spec.has_cost();
  j["has_terminal_cost"] = spec.has_terminal_cost();
  const Vec anchor = interior_anchor(spec.geom);
  const Vec b = spec.drift(anchor, spec.controls[0]);
  const Mat s = spec.sigma(anchor, spec.controls[0]);
  if (b.size() != spec.geom.dim)
    throw ShapeMismatch("drift dimension mismatch at the interior anchor");
  if (s.rows() != spec.geom.dim || s.cols() != spec.noise_dim)
    throw ShapeMismatch("sigma shape mismatch at the interior anchor");
  bool ok = true;
  if (!cfg.checks.empty()) {
    Json conds;
    for (const std::string& name : cfg.checks) {
      const AssumptionReport rep =
          check_condition(spec, condition_from(name));
      conds[name] = to_json(rep);
      ok = ok && rep.holds;
    }
    j["conditions"] = conds;
  }
  *pass = ok;
  return j;
}

Json stage_lyapunov(const ExperimentConfig& cfg, bool* pass) {
  const double delta = cfg.lyapunov_delta > 0.0
                           ? cfg.lyapunov_delta
                           : 0.5 * cfg.spec.geom.smoothness_radius;
  Json j;
  bool ok = true;
  for (const auto& [label, barrier] : cfg.barriers) {
    const MarginReport rep =
        lyapunov_margin(cfg.spec, barrier, delta, cfg.lyapunov_bound);
    j[label] = to_json(rep);
    ok = ok && rep.passes;
  }
  *pass = ok;
  return j;
}

Json stage_solve_discounted(const ExperimentConfig& cfg,
                            const std::string& outdir, bool* pass) {
  const Grid grid = build_grid(cfg.spec.geom, cfg.h);
  const DiscountedSolution sol = solve_discounted(cfg.spec, grid, cfg.lambda);
  Json j = to_json(sol);
  j["grid"] = grid_metadata(grid);
  const std::string csv = outdir + "/u_lambda.csv";
  write_field_csv(sol.field, csv);
  j["field_csv_path"] = csv;
  if (cfg.has_simulation && cfg.x0.size() == grid.dim)
    j["value_at_x0"] =
        sol.field.values[static_cast<std::size_t>(grid.nearest_node(cfg.x0))];
  *pass = true;
  return j;
}

Json stage_solve_ergodic(const ExperimentConfig& cfg, const std::string& outdir,
                         bool* pass) {
  const Grid grid = build_grid(cfg.spec.geom, cfg.h);
  const ErgodicSolution sol =
      solve_ergodic(cfg.spec, grid, cfg.schedule, cfg.schedule_tol);
  const std::string csv = outdir + "/chi.csv";
  write_field_csv(sol.chi, csv);
  Json j = to_json(sol, csv);
  j["grid"] = grid_metadata(grid);
  *pass = true;
  return j;
}

Json stage_liouville(const ExperimentConfig& cfg, bool* pass) {
  const Grid grid = build_grid(cfg.spec.geom, cfg.h);
  const LiouvilleReport rep =
      check_liouville(cfg.spec, grid, cfg.liouville_tol);
  *pass = rep.status == CheckStatus::pass;
  return to_json(rep);
}

Json stage_simulate(const ExperimentConfig& cfg, const std::string& outdir,
                    bool* pass) {
  if (cfg.sim_check == "invariance") {
    const InvarianceReport rep =
        check_invariance(cfg.spec, cfg.x0, cfg.simulation, cfg.sim_threshold);
    *pass = rep.status == CheckStatus::pass;
    return to_json(rep);
  }
  if (cfg.sim_check == "viability") {
    const ViabilityReport rep = check_viability(cfg.spec, cfg.x0,
                                                cfg.simulation, nullptr,
                                                cfg.sim_threshold);
    *pass = rep.status == CheckStatus::pass;
    return to_json(rep);
  }
  std::optional<Grid> grid;
  std::optional<DiscountedSolution> sol;
  if (cfg.policy == "feedback") {
    if (!(cfg.has_grid && cfg.has_lambda))
      throw ConfigError(
          "simulation.policy: 'feedback' needs grid.h and lambda");
    grid.emplace(build_grid(cfg.spec.geom, cfg.h));
    sol.emplace(solve_discounted(cfg.spec, *grid, cfg.lambda));
  }
  const ControlLaw law = parse_policy(cfg, sol ? &*sol : nullptr);
  const TrajectoryBatch batch = simulate(cfg.spec, cfg.x0, cfg.simulation, law);
  Json j;
  j["exit"] = to_json(exit_statistics(batch));
  if (cfg.simulation.checkpoint_count > 0) {
    const std::string csv = outdir + "/paths.csv";
    write_paths_csv(batch, csv);
    j["paths_csv_path"] = csv;
  }
  if (cfg.spec.has_cost() && cfg.has_lambda)
    j["discounted_value"] = to_json(
        mc_discounted_value(cfg.spec, cfg.x0, cfg.lambda, cfg.simulation, law));
  *pass = true;
  return j;
}

Json stage_exit_value(const ExperimentConfig& cfg, bool* pass) {
  const ExitValueReport rep =
      exit_value(cfg.spec, cfg.phi, cfg.x0, cfg.simulation,
                 cfg.exit_solve_lambda, cfg.exit_solve_h, cfg.exit_tolerance);
  Json j = to_json(rep);
  j["phi"] = cfg.phi_label;
  *pass = rep.status == CheckStatus::pass;
  return j;
}

const std::vector<std::string>& stage_order() {
  static const std::vector<std::string> order = {
      "validate",  "lyapunov", "solve-discounted", "solve-ergodic",
      "liouville", "simulate", "exit-value"};
  return order;
}

void check_stage_supported(const ExperimentConfig& cfg,
                           const std::string& stage) {
  if (stage == "validate") return;
  if (stage == "lyapunov") {
    if (cfg.barriers.empty())
      throw ConfigError("lyapunov stage needs a 'barriers' list");
    return;
  }
  if (stage == "solve-discounted") {
    if (!(cfg.has_grid && cfg.has_lambda))
      throw ConfigError("solve-discounted stage needs 'grid.h' and 'lambda'");
    return;
  }
  if (stage == "solve-ergodic") {
    if (!(cfg.has_grid && cfg.has_schedule))
      throw ConfigError("solve-ergodic stage needs 'grid.h' and 'schedule'");
    return;
  }
  if (stage == "liouville") {
    if (!cfg.has_grid) throw ConfigError("liouville stage needs 'grid.h'");
    return;
  }
  if (stage == "simulate") {
    if (!cfg.has_simulation)
      throw ConfigError("simulate stage needs a 'simulation' block with x0");
    return;
  }
  if (stage == "exit-value") {
    if (!(cfg.has_exit_value && cfg.has_simulation))
      throw ConfigError(
          "exit-value stage needs 'exit_value' and 'simulation' blocks");
    return;
  }
  throw ConfigError("unknown stage '" + stage + "'");
}

}  // namespace

RunOutcome run_experiment(const ExperimentConfig& cfg,
                          const std::vector<std::string>& requested) {
  if (cfg.threads > 0) set_thread_count(cfg.threads);
  std::filesystem::create_directories(cfg.output_dir);

  std::vector<std::string> stages;
  if (requested.empty()) {
    stages = configured_stages(cfg);
  } else {
    for (const std::string& r : requested) check_stage_supported(cfg, r);
    for (const std::string& s : stage_order())
      if (std::find(requested.begin(), requested.end(), s) != requested.end())
        stages.push_back(s);
  }

  Json results;
  results["schema"] = "1";
  results["config"] = cfg.origin;
  results["model"] = cfg.spec.name;
  bool all_passed = true;
  Json executed = Json::array();
  Json stage_passed = Json::object();
  Json errors = Json::object();

  for (const std::string& stage : stages) {
    bool pass = true;
    try {
      if (stage == "validate")
        results[stage] = stage_validate(cfg, &pass);
      else if (stage == "lyapunov")
        results[stage] = stage_lyapunov(cfg, &pass);
      else if (stage == "solve-discounted")
        results[stage] = stage_solve_discounted(cfg, cfg.output_dir, &pass);
      else if (stage == "solve-ergodic")
        results[stage] = stage_solve_ergodic(cfg, cfg.output_dir, &pass);
      else if (stage == "liouville")
        results[stage] = stage_liouville(cfg, &pass);
      else if (stage == "simulate")
        results[stage] = stage_simulate(cfg, cfg.output_dir, &pass);
      else if (stage == "exit-value")
        results[stage] = stage_exit_value(cfg, &pass);
    } catch (const Error& e) {
      errors[stage] = std::string(e.what());
      all_passed = false;
      break;  // later stages depend on earlier ones
    }
    executed.push_back(stage);
    stage_passed[stage] = pass;
    all_passed = all_passed && pass;
  }

  results["stages"] = executed;
  results["stage_passed"] = stage_passed;
  if (!errors.empty()) results["errors"] = errors;
  results["passed"] = all_passed;
  results["timestamp"] = timestamp_utc();

  RunOutcome out;
  out.results = results;
  out.all_passed = all_passed;
  out.results_path = cfg.output_dir + "/results.json";
  write_json_file(results, out.results_path);
  return out;
}

}  // namespace ehjb
