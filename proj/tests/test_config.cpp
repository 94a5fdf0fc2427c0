#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "ehjb/config.hpp"
#include "ehjb/models.hpp"
#include "ehjb/runner.hpp"
#include "ehjb/sde.hpp"

using namespace ehjb;
namespace fs = std::filesystem;

namespace {

ExperimentConfig parse(const std::string& text) {
  return parse_config(Json::parse(text), "inline");
}

std::string fresh_dir(const std::string& leaf) {
  const fs::path dir = fs::path("/tmp/ehjb_config_tests") / leaf;
  fs::remove_all(dir);
  return dir.string();
}

}  // namespace

TEST_CASE("a bare model name requests only validation") {
  const ExperimentConfig cfg = parse(R"({"model": "degenerate_interval_1d"})");
  CHECK(cfg.spec.name == "degenerate_interval_1d");
  CHECK(cfg.spec.geom.dim == 1);
  CHECK(cfg.spec.controls.size() == 1);
  CHECK_FALSE(cfg.has_grid);
  CHECK_FALSE(cfg.has_simulation);
  const std::vector<std::string> stages = configured_stages(cfg);
  REQUIRE(stages.size() == 1);
  CHECK(stages[0] == "validate");
}

TEST_CASE("stages appear exactly when their blocks are present") {
  const ExperimentConfig cfg = parse(R"({
    "model": "degenerate_interval_1d",
    "grid": {"h": 0.125},
    "lambda": 0.5,
    "schedule": {"from": 0.1, "to": 0.05, "ratio": 0.5},
    "liouville": {},
    "barriers": [{"kind": "neg_log_d"}],
    "simulation": {"x0": [0.0]},
    "exit_value": {"phi": {"kind": "constant", "value": 0.0}}
  })");
  const std::vector<std::string> expected = {
      "validate",  "lyapunov", "solve-discounted", "solve-ergodic",
      "liouville", "simulate", "exit-value"};
  CHECK(configured_stages(cfg) == expected);
}

TEST_CASE("malformed configs are rejected with config errors") {
  CHECK_THROWS_AS((void)parse(R"([1, 2])"), ConfigError);
  CHECK_THROWS_AS((void)parse(R"({"model": "no_such_model"})"), ConfigError);
  CHECK_THROWS_AS((void)parse(R"({})"), ConfigError);  // model is required
  CHECK_THROWS_AS(
      (void)parse(R"({"model": "degenerate_interval_1d", "extra": 1})"),
      ConfigError);
  CHECK_THROWS_AS(
      (void)parse(R"({"model": "degenerate_interval_1d", "grid": {"h": 0.0}})"),
      ConfigError);
  CHECK_THROWS_AS(
      (void)parse(R"({"model": "degenerate_interval_1d", "lambda": -0.5})"),
      ConfigError);
  CHECK_THROWS_AS((void)parse(R"({"model": "degenerate_interval_1d",
                                  "schedule": {"ratio": 1.0}})"),
                  ConfigError);
  CHECK_THROWS_AS((void)parse(R"({"model": "degenerate_interval_1d",
                                  "schedule": {"extrapolation": "bogus"}})"),
                  ConfigError);
  CHECK_THROWS_AS((void)parse(R"({"model": "degenerate_interval_1d",
                                  "simulation": {"dt": 0.01}})"),
                  ConfigError);  // x0 is required
  CHECK_THROWS_AS((void)parse(R"({"model": "degenerate_interval_1d",
                                  "simulation": {"x0": [0.0], "check": "bogus"}})"),
                  ConfigError);
  CHECK_THROWS_AS((void)parse(R"({"model": "degenerate_interval_1d",
                                  "checks": ["bogus"]})"),
                  ConfigError);
  CHECK_THROWS_AS((void)parse(R"({"model": "degenerate_interval_1d",
                                  "barriers": [{"kind": "bogus"}]})"),
                  ConfigError);
  CHECK_THROWS_AS((void)parse(R"({"model": "degenerate_interval_1d",
                                  "barriers": [{"kind": "pow_neg"}]})"),
                  ConfigError);  // kappa is required
  CHECK_THROWS_AS((void)parse(R"({"model": "degenerate_interval_1d",
                                  "cost": {"kind": "bogus"}})"),
                  ConfigError);
  CHECK_THROWS_AS((void)parse(R"({"model": "halfplane_counterexample",
                                  "cost": {"kind": "offset", "value": 1.0}})"),
                  ConfigError);  // offset needs an existing running cost
  CHECK_THROWS_AS((void)parse(R"({"model": "exit_disk",
                                  "terminal": {"kind": "coordinate", "axis": 7}})"),
                  ConfigError);
}

TEST_CASE("inline models evaluate their coefficient tables") {
  const ExperimentConfig cfg = parse(R"({
    "model": {
      "name": "toy",
      "shape": {"shape": "interval", "a": -1.0, "b": 1.0},
      "controls": [[0.0]],
      "labels": ["only"],
      "drift": {"kind": "scale_x", "factor": -1.0},
      "sigma": {"kind": "poly1d", "coeffs": [1.0, 0.0, -1.0]},
      "cost": {"kind": "poly1d", "coeffs": [0.0, 0.0, 1.0]}
    }
  })");
  const ProblemSpec& toy = cfg.spec;
  CHECK(toy.name == "toy");
  CHECK(toy.noise_dim == 1);  // defaults to the domain dimension
  CHECK(toy.controls.index_of("only") == 0);
  // Semantically identical to the builtin model, but the dispatcher only
  // trusts builtin names, so simulation falls back to the generic kernel.
  CHECK(simulation_kernel_name(toy) == "generic");
  const ProblemSpec ref = make_model("degenerate_interval_1d");
  const Vec alpha = toy.controls[0];
  for (double x : {-0.7, 0.0, 0.3, 0.9}) {
    CHECK(toy.drift(vec1(x), alpha)[0] == ref.drift(vec1(x), alpha)[0]);
    CHECK(toy.sigma(vec1(x), alpha)(0, 0) == ref.sigma(vec1(x), alpha)(0, 0));
    CHECK(toy.running_cost(vec1(x), alpha) ==
          ref.running_cost(vec1(x), alpha));
  }
}

TEST_CASE("per-control tables select the entry matching the control point") {
  const ExperimentConfig cfg = parse(R"({
    "model": {
      "shape": {"shape": "interval", "a": -1.0, "b": 1.0},
      "controls": [[0.0], [1.0]],
      "drift": {"kind": "per_control", "entries": [
        {"kind": "constant", "value": [0.25]},
        {"kind": "scale_x", "factor": -1.0}
      ]},
      "sigma": {"kind": "per_control", "entries": [
        {"kind": "identity", "scale": 0.5},
        {"kind": "distance_poly", "coeffs": [0.0, 1.0]}
      ]}
    }
  })");
  const ProblemSpec& spec = cfg.spec;
  REQUIRE(spec.controls.size() == 2);
  const Vec x = vec1(0.4);
  CHECK(spec.drift(x, spec.controls[0])[0] == 0.25);
  CHECK(spec.drift(x, spec.controls[1])[0] == -0.4);
  CHECK(spec.sigma(x, spec.controls[0])(0, 0) == 0.5);
  // distance_poly evaluates the polynomial at the signed boundary distance.
  CHECK(spec.sigma(x, spec.controls[1])(0, 0) == doctest::Approx(0.6));

  CHECK_THROWS_AS((void)parse(R"({
    "model": {
      "shape": {"shape": "interval", "a": -1.0, "b": 1.0},
      "controls": [[0.0], [1.0]],
      "drift": {"kind": "per_control", "entries": [{"kind": "scale_x", "factor": 1.0}]},
      "sigma": {"kind": "identity"}
    }
  })"),
                  ConfigError);  // one entry per control
}

TEST_CASE("geometry objects and overrides parse into working models") {
  const ExperimentConfig ball = parse(R"({
    "model": {
      "shape": {"shape": "ball", "center": [0.5, -0.5], "radius": 2.0},
      "controls": [[0.0]],
      "drift": {"kind": "scale_x", "factor": -1.0},
      "sigma": {"kind": "identity"}
    }
  })");
  CHECK(ball.spec.geom.dim == 2);
  CHECK(signed_distance(ball.spec.geom, vec2(0.5, -0.5)) == 2.0);

  const ExperimentConfig ann = parse(R"({
    "model": {
      "shape": {"shape": "annulus", "center": [0.0, 0.0],
                "r_inner": 0.5, "r_outer": 1.5},
      "controls": [[0.0]],
      "drift": {"kind": "constant", "value": [0.0, 0.0]},
      "sigma": {"kind": "identity"}
    }
  })");
  CHECK(signed_distance(ann.spec.geom, vec2(1.0, 0.0)) == doctest::Approx(0.5));

  CHECK_THROWS_AS((void)parse(R"({
    "model": {
      "shape": {"shape": "torus"},
      "controls": [[0.0]],
      "drift": {"kind": "scale_x", "factor": -1.0},
      "sigma": {"kind": "identity"}
    }
  })"),
                  ConfigError);

  // Top-level cost and terminal blocks override what the model ships with.
  const ExperimentConfig priced = parse(R"({
    "model": "exit_disk",
    "cost": {"kind": "radial2d", "coeffs": [0.0, 0.0, 1.0], "center": [1.0, 0.0]},
    "terminal": {"kind": "coordinate", "axis": 0, "offset": 2.0}
  })");
  const Vec a0 = priced.spec.controls[0];
  CHECK(priced.spec.running_cost(vec2(1.0, 0.5), a0) == doctest::Approx(0.25));
  CHECK(priced.spec.terminal_cost(vec2(0.3, 0.0)) == doctest::Approx(2.3));

  const ExperimentConfig stripped = parse(R"({
    "model": "exit_disk",
    "terminal": {"kind": "none"}
  })");
  CHECK_FALSE(stripped.spec.has_terminal_cost());
}

TEST_CASE("config files load with actionable failures") {
  CHECK_THROWS_AS((void)load_config("/tmp/ehjb_no_such_file.json"),
                  ConfigError);

  const std::string bad_path = "/tmp/ehjb_config_tests_bad.json";
  std::ofstream(bad_path) << "{ this is not json";
  CHECK_THROWS_AS((void)load_config(bad_path), ConfigError);

  const std::string good_path = "/tmp/ehjb_config_tests_good.json";
  std::ofstream(good_path) << R"({"model": "radial_disk_2d"})";
  const ExperimentConfig cfg = load_config(good_path);
  CHECK(cfg.origin == good_path);
  CHECK(cfg.spec.geom.dim == 2);
}

TEST_CASE("the runner executes every configured stage end to end") {
  const std::string dir = fresh_dir("e2e");
  Json j = Json::parse(R"({
    "model": "degenerate_interval_1d",
    "checks": ["invariance", "irrelevant", "sell"],
    "barriers": [{"kind": "neg_log_d"},
                 {"kind": "pow_neg", "kappa": 0.5, "label": "inverse_sqrt_d"}],
    "lyapunov": {"delta": 0.1, "bound": 0.0},
    "grid": {"h": 0.015625},
    "lambda": 0.1,
    "schedule": {"from": 0.1, "to": 0.01, "ratio": 0.5},
    "liouville": {"tol": 1e-6},
    "simulation": {"x0": [0.25], "dt": 0.002, "T": 1.0, "n_paths": 300,
                   "policy": "fixed:only", "checkpoint_count": 2}
  })");
  j["output"] = dir;
  const ExperimentConfig cfg = parse_config(j, "e2e");
  const RunOutcome out = run_experiment(cfg);

  CHECK(out.all_passed);
  CHECK(fs::exists(out.results_path));
  CHECK(fs::exists(dir + "/u_lambda.csv"));
  CHECK(fs::exists(dir + "/chi.csv"));
  CHECK(fs::exists(dir + "/paths.csv"));

  const Json& r = out.results;
  CHECK(r.at("schema") == "1");
  CHECK(r.at("model") == "degenerate_interval_1d");
  CHECK(r.at("passed") == true);
  CHECK_FALSE(r.contains("errors"));
  CHECK(r.at("timestamp").get<std::string>().size() == 20);

  const std::vector<std::string> expected = {
      "validate", "lyapunov", "solve-discounted", "solve-ergodic",
      "liouville", "simulate"};
  CHECK(r.at("stages").get<std::vector<std::string>>() == expected);
  for (const std::string& s : expected)
    CHECK(r.at("stage_passed").at(s) == true);

  for (const char* name : {"invariance", "irrelevant", "sell"})
    CHECK(r.at("validate").at("conditions").at(name).at("holds") == true);
  CHECK(r.at("lyapunov").at("neg_log_d").at("passes") == true);
  CHECK(r.at("lyapunov").at("inverse_sqrt_d").at("passes") == true);

  const double u0 = r.at("solve-discounted").at("value_at_x0").get<double>();
  CHECK(u0 > 0.0);
  CHECK(u0 < 10.0);  // bounded by sup cost / lambda

  const double c = r.at("solve-ergodic").at("c").get<double>();
  CHECK(c > -0.47);
  CHECK(c < -0.37);

  CHECK(r.at("simulate").at("exit").at("exit_fraction") == 0.0);
  const double mc = r.at("simulate").at("discounted_value").at("estimate")
                        .get<double>();
  CHECK(std::abs(mc - u0) < 0.25);
}

TEST_CASE("a constant running cost pins the ergodic constant") {
  const std::string dir = fresh_dir("constant_cost");
  Json j = Json::parse(R"({
    "model": "degenerate_interval_1d",
    "cost": {"kind": "constant", "value": 5.0},
    "grid": {"h": 0.015625},
    "schedule": {"from": 0.1, "to": 0.01, "ratio": 0.5}
  })");
  j["output"] = dir;
  const ExperimentConfig cfg = parse_config(j, "constant_cost");

  const RunOutcome first = run_experiment(cfg, {"solve-ergodic"});
  CHECK(first.all_passed);
  CHECK(first.results.at("stages").get<std::vector<std::string>>() ==
        std::vector<std::string>{"solve-ergodic"});
  const double c = first.results.at("solve-ergodic").at("c").get<double>();
  CHECK(std::abs(c + 5.0) < 1e-6);

  // Reruns of the same config are byte-identical apart from the timestamp.
  const RunOutcome second = run_experiment(cfg, {"solve-ergodic"});
  Json a = first.results;
  Json b = second.results;
  a.erase("timestamp");
  b.erase("timestamp");
  CHECK(a.dump() == b.dump());
}

TEST_CASE("stage failures are captured per stage, not thrown") {
  ExperimentConfig broken;
  broken.spec = make_model("degenerate_interval_1d");
  broken.checks = {"bogus"};
  broken.output_dir = fresh_dir("broken_check");
  const RunOutcome out = run_experiment(broken);
  CHECK_FALSE(out.all_passed);
  CHECK(out.results.at("passed") == false);
  const std::string what =
      out.results.at("errors").at("validate").get<std::string>();
  CHECK(what.find("unknown condition") != std::string::npos);
  CHECK(out.results.at("stages").empty());

  Json j = Json::parse(R"({
    "model": "degenerate_interval_1d",
    "simulation": {"x0": [0.0], "dt": 0.01, "T": 0.05, "n_paths": 2,
                   "policy": "fixed:5"}
  })");
  j["output"] = fresh_dir("broken_policy");
  const RunOutcome bad_policy = run_experiment(parse_config(j, "inline"));
  CHECK_FALSE(bad_policy.all_passed);
  const std::string msg =
      bad_policy.results.at("errors").at("simulate").get<std::string>();
  CHECK(msg.find("out of range") != std::string::npos);
  CHECK(bad_policy.results.at("stages").get<std::vector<std::string>>() ==
        std::vector<std::string>{"validate"});
}

TEST_CASE("explicitly requested stages must be configured") {
  const ExperimentConfig cfg = parse(R"({"model": "degenerate_interval_1d"})");
  CHECK_THROWS_AS((void)run_experiment(cfg, {"liouville"}), ConfigError);
  CHECK_THROWS_AS((void)run_experiment(cfg, {"lyapunov"}), ConfigError);
  CHECK_THROWS_AS((void)run_experiment(cfg, {"bogus"}), ConfigError);
}
