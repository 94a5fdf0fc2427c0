#include "ehjb/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "ehjb/models.hpp"

namespace ehjb {

namespace {

[[noreturn]] void bad(const std::string& key, const std::string& why) {
  throw ConfigError(key + ": " + why);
}

const Json& require_key(const Json& j, const std::string& key) {
  auto it = j.find(key);
  if (it == j.end()) bad(key, "missing required key");
  return *it;
}

double as_number(const Json& j, const std::string& key) {
  if (!j.is_number()) bad(key, "expected a number");
  return j.get<double>();
}

double number_at(const Json& j, const std::string& key) {
  return as_number(require_key(j, key), key);
}

double number_or(const Json& j, const std::string& key, double fallback) {
  auto it = j.find(key);
  return it == j.end() ? fallback : as_number(*it, key);
}

int int_or(const Json& j, const std::string& key, int fallback) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_number_integer()) bad(key, "expected an integer");
  return it->get<int>();
}

std::string string_at(const Json& j, const std::string& key) {
  const Json& v = require_key(j, key);
  if (!v.is_string()) bad(key, "expected a string");
  return v.get<std::string>();
}

std::string string_or(const Json& j, const std::string& key,
                      const std::string& fallback) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_string()) bad(key, "expected a string");
  return it->get<std::string>();
}

Vec vec_at(const Json& j, const std::string& key) {
  if (!j.is_array() || j.empty() || j.size() > static_cast<std::size_t>(kMaxDim))
    bad(key, "expected an array of 1.." + std::to_string(kMaxDim) + " numbers");
  Vec v(static_cast<int>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    v[static_cast<int>(i)] = as_number(j[i], key);
  return v;
}

std::vector<double> coeffs_at(const Json& j, const std::string& key) {
  const Json& arr = require_key(j, key);
  if (!arr.is_array() || arr.empty()) bad(key, "expected a non-empty array");
  std::vector<double> c;
  c.reserve(arr.size());
  for (const auto& e : arr) c.push_back(as_number(e, key));
  return c;
}

void reject_unknown(const Json& j, const std::set<std::string>& known,
                    const std::string& scope) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (known.find(it.key()) == known.end())
      bad(scope.empty() ? it.key() : scope + "." + it.key(), "unknown key");
}

DomainGeometry parse_geometry(const Json& j) {
  if (!j.is_object()) bad("model.shape", "expected an object");
  const std::string shape = string_at(j, "shape");
  if (shape == "interval") {
    reject_unknown(j, {"shape", "a", "b"}, "model.shape");
    return DomainGeometry::interval(number_at(j, "a"), number_at(j, "b"));
  }
  if (shape == "ball") {
    reject_unknown(j, {"shape", "center", "radius"}, "model.shape");
    return DomainGeometry::ball(vec_at(require_key(j, "center"), "center"),
                                number_at(j, "radius"));
  }
  if (shape == "annulus") {
    reject_unknown(j, {"shape", "center", "r_inner", "r_outer"}, "model.shape");
    return DomainGeometry::annulus(vec_at(require_key(j, "center"), "center"),
                                   number_at(j, "r_inner"),
                                   number_at(j, "r_outer"));
  }
  if (shape == "halfplane_patch") {
    reject_unknown(j, {"shape", "window"}, "model.shape");
    return DomainGeometry::halfplane_patch(number_or(j, "window", 0.5));
  }
  bad("model.shape.shape", "unknown shape '" + shape + "'");
}

int control_index(const std::vector<Vec>& controls, const Vec& alpha) {
  for (std::size_t m = 0; m < controls.size(); ++m)
    if (controls[m].size() == alpha.size() && controls[m] == alpha)
      return static_cast<int>(m);
  return 0;
}

using DriftFn = std::function<Vec(const Vec&, const Vec&)>;
using SigmaFn = std::function<Mat(const Vec&, const Vec&)>;
using CostFn = std::function<double(const Vec&, const Vec&)>;

DriftFn parse_drift(const Json& j, const std::string& scope,
                    const std::vector<Vec>& controls);

DriftFn parse_drift_entry(const Json& j, const std::string& scope,
                          const std::vector<Vec>& controls) {
  if (!j.is_object()) bad(scope, "expected an object");
  const std::string kind = string_at(j, "kind");
  if (kind == "scale_x") {
    const double f = number_at(j, "factor");
    return [f](const Vec& x, const Vec&) -> Vec { return f * x; };
  }
  if (kind == "constant") {
    const Vec v = vec_at(require_key(j, "value"), scope + ".value");
    return [v](const Vec&, const Vec&) -> Vec { return v; };
  }
  if (kind == "per_control") {
    const Json& entries = require_key(j, "entries");
    if (!entries.is_array() || entries.size() != controls.size())
      bad(scope + ".entries", "expected one entry per control");
    std::vector<DriftFn> fns;
    for (const auto& e : entries) fns.push_back(parse_drift_entry(e, scope, controls));
    std::vector<Vec> pts = controls;
    return [fns, pts](const Vec& x, const Vec& alpha) -> Vec {
      return fns[static_cast<std::size_t>(control_index(pts, alpha))](x, alpha);
    };
  }
  bad(scope + ".kind", "unknown drift kind '" + kind + "'");
}

DriftFn parse_drift(const Json& j, const std::string& scope,
                    const std::vector<Vec>& controls) {
  return parse_drift_entry(j, scope, controls);
}

SigmaFn parse_sigma_entry(const Json& j, const std::string& scope, int dim,
                          int noise_dim, const DomainGeometry& geom,
                          const std::vector<Vec>& controls) {
  if (!j.is_object()) bad(scope, "expected an object");
  const std::string kind = string_at(j, "kind");
  auto diag = [dim, noise_dim](double s) -> Mat {
    Mat m = Mat::Zero(dim, noise_dim);
    for (int i = 0; i < std::min(dim, noise_dim); ++i) m(i, i) = s;
    return m;
  };
  if (kind == "identity") {
    const double s = number_or(j, "scale", 1.0);
    return [diag, s](const Vec&, const Vec&) -> Mat { return diag(s); };
  }
  if (kind == "poly1d") {
    const auto c = coeffs_at(j, "coeffs");
    return [diag, c](const Vec& x, const Vec&) -> Mat {
      return diag(eval_poly(c, x[0]));
    };
  }
  if (kind == "distance_poly") {
    const auto c = coeffs_at(j, "coeffs");
    const DomainGeometry g = geom;
    return [diag, c, g](const Vec& x, const Vec&) -> Mat {
      return diag(eval_poly(c, signed_distance(g, x)));
    };
  }
  if (kind == "per_control") {
    const Json& entries = require_key(j, "entries");
    if (!entries.is_array() || entries.size() != controls.size())
      bad(scope + ".entries", "expected one entry per control");
    std::vector<SigmaFn> fns;
    for (const auto& e : entries)
      fns.push_back(parse_sigma_entry(e, scope, dim, noise_dim, geom, controls));
    std::vector<Vec> pts = controls;
    return [fns, pts](const Vec& x, const Vec& alpha) -> Mat {
      return fns[static_cast<std::size_t>(control_index(pts, alpha))](x, alpha);
    };
  }
  bad(scope + ".kind", "unknown sigma kind '" + kind + "'");
}

/// Cost table. "default" keeps the model's own cost, "none" removes it.
CostFn parse_cost(const Json& j, const std::string& scope,
                  const DomainGeometry& geom, const CostFn& current,
                  bool* keep_default) {
  *keep_default = false;
  if (!j.is_object()) bad(scope, "expected an object");
  const std::string kind = string_at(j, "kind");
  if (kind == "default") {
    *keep_default = true;
    return current;
  }
  if (kind == "none") return CostFn();
  if (kind == "constant") {
    const double v = number_at(j, "value");
    return cost_constant(v);
  }
  if (kind == "poly1d") return cost_poly1d(coeffs_at(j, "coeffs"));
  if (kind == "radial2d") {
    Vec center = geom.center.size() == 2 ? geom.center : vec2(0.0, 0.0);
    auto it = j.find("center");
    if (it != j.end()) center = vec_at(*it, scope + ".center");
    return cost_radial2d(coeffs_at(j, "coeffs"), center);
  }
  if (kind == "offset") {
    // current cost plus a constant shift (ergodic constant moves by -shift)
    if (!current) bad(scope, "offset needs a model with a running cost");
    const double v = number_at(j, "value");
    const CostFn base = current;
    return [base, v](const Vec& x, const Vec& a) { return base(x, a) + v; };
  }
  bad(scope + ".kind", "unknown cost kind '" + kind + "'");
}

std::function<double(const Vec&)> parse_scalar_of_x(const Json& j,
                                                    const std::string& scope,
                                                    std::string* label) {
  if (!j.is_object()) bad(scope, "expected an object");
  const std::string kind = string_at(j, "kind");
  if (kind == "coordinate") {
    const int axis = int_or(j, "axis", 0);
    const double offset = number_or(j, "offset", 0.0);
    if (axis < 0 || axis >= kMaxDim) bad(scope + ".axis", "axis out of range");
    *label = "x" + std::to_string(axis) +
             (offset == 0.0 ? "" : (offset > 0 ? "+" : "") + std::to_string(offset));
    return [axis, offset](const Vec& x) { return x[axis] + offset; };
  }
  if (kind == "constant") {
    const double v = number_at(j, "value");
    *label = "constant " + std::to_string(v);
    return [v](const Vec&) { return v; };
  }
  if (kind == "poly1d") {
    const auto c = coeffs_at(j, "coeffs");
    *label = "poly1d";
    return [c](const Vec& x) { return eval_poly(c, x[0]); };
  }
  bad(scope + ".kind", "unknown scalar kind '" + kind + "'");
}

ProblemSpec parse_inline_model(const Json& j) {
  reject_unknown(j,
                 {"name", "shape", "noise_dim", "controls", "labels", "drift",
                  "sigma", "cost", "beta", "hoelder_bound"},
                 "model");
  ProblemSpec spec;
  spec.name = string_or(j, "name", "custom");
  spec.geom = parse_geometry(require_key(j, "shape"));
  spec.noise_dim = int_or(j, "noise_dim", spec.geom.dim);
  if (spec.noise_dim < 1) bad("model.noise_dim", "must be at least 1");

  const Json& controls = require_key(j, "controls");
  if (!controls.is_array() || controls.empty())
    bad("model.controls", "expected a non-empty array of control points");
  for (const auto& c : controls)
    spec.controls.points.push_back(vec_at(c, "model.controls"));
  auto lit = j.find("labels");
  if (lit != j.end()) {
    if (!lit->is_array() || lit->size() != controls.size())
      bad("model.labels", "expected one label per control");
    for (const auto& l : *lit) {
      if (!l.is_string()) bad("model.labels", "expected strings");
      spec.controls.labels.push_back(l.get<std::string>());
    }
  }

  spec.drift = parse_drift(require_key(j, "drift"), "model.drift",
                           spec.controls.points);
  spec.sigma = parse_sigma_entry(require_key(j, "sigma"), "model.sigma",
                                 spec.geom.dim, spec.noise_dim, spec.geom,
                                 spec.controls.points);
  auto cit = j.find("cost");
  if (cit != j.end()) {
    bool keep = false;
    spec.running_cost =
        parse_cost(*cit, "model.cost", spec.geom, CostFn(), &keep);
  }
  spec.reg.beta = number_or(j, "beta", 1.0);
  spec.reg.B = number_or(j, "hoelder_bound", 1.0);
  return spec;
}

Barrier parse_barrier(const Json& j, const DomainGeometry& geom,
                      std::string* label) {
  if (!j.is_object()) bad("barriers", "expected objects");
  reject_unknown(j, {"kind", "kappa", "eta", "k", "lambda", "anchor", "label"},
                 "barriers");
  const std::string kind = string_at(j, "kind");
  Barrier b;
  if (kind == "neg_log_d") {
    b = Barrier::neg_log_d();
  } else if (kind == "log_d") {
    b = Barrier::log_d();
  } else if (kind == "pow_neg") {
    b = Barrier::pow_neg(number_at(j, "kappa"));
  } else if (kind == "pow_pos") {
    b = Barrier::pow_pos(number_at(j, "kappa"));
  } else if (kind == "shifted_log") {
    b = Barrier::shifted_log(number_at(j, "eta"));
  } else if (kind == "exit_barrier") {
    Vec anchor = geom.dim == 2 ? vec2(0.0, 0.0) : vec1(0.0);
    auto it = j.find("anchor");
    if (it != j.end()) anchor = vec_at(*it, "barriers.anchor");
    b = Barrier::exit_barrier(number_at(j, "k"), number_at(j, "lambda"),
                              anchor);
  } else {
    bad("barriers.kind", "unknown barrier kind '" + kind + "'");
  }
  *label = string_or(j, "label", kind);
  return b;
}

VanishingDiscountSchedule parse_schedule(const Json& j) {
  reject_unknown(j, {"lambdas", "from", "to", "ratio", "x_tilde",
                     "extrapolation", "tol"},
                 "schedule");
  VanishingDiscountSchedule s;
  auto it = j.find("lambdas");
  if (it != j.end()) {
    if (!it->is_array() || it->empty())
      bad("schedule.lambdas", "expected a non-empty array");
    for (const auto& v : *it)
      s.lambdas.push_back(as_number(v, "schedule.lambdas"));
  } else {
    s = VanishingDiscountSchedule::geometric(number_or(j, "from", 1e-1),
                                             number_or(j, "to", 1e-4),
                                             number_or(j, "ratio", 0.5));
  }
  auto xt = j.find("x_tilde");
  if (xt != j.end()) s.x_tilde = vec_at(*xt, "schedule.x_tilde");
  const std::string extrap = string_or(j, "extrapolation", "richardson");
  if (extrap == "richardson")
    s.extrapolation = VanishingDiscountSchedule::Extrapolation::richardson;
  else if (extrap == "last")
    s.extrapolation = VanishingDiscountSchedule::Extrapolation::last;
  else
    bad("schedule.extrapolation", "expected 'richardson' or 'last'");
  return s;
}

}  // namespace

ExperimentConfig parse_config(const Json& j, const std::string& origin) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  reject_unknown(j,
                 {"schema", "comment", "model", "cost", "terminal", "grid",
                  "lambda", "schedule", "simulation", "checks", "barriers",
                  "lyapunov", "liouville", "exit_value", "output", "threads"},
                 "");
  ExperimentConfig cfg;
  cfg.origin = origin;

  const Json& model = require_key(j, "model");
  if (model.is_string())
    cfg.spec = make_model(model.get<std::string>());
  else if (model.is_object())
    cfg.spec = parse_inline_model(model);
  else
    bad("model", "expected a model name or an inline model object");

  if (auto it = j.find("cost"); it != j.end()) {
    bool keep = false;
    cfg.spec.running_cost =
        parse_cost(*it, "cost", cfg.spec.geom, cfg.spec.running_cost, &keep);
  }
  if (auto it = j.find("terminal"); it != j.end()) {
    const std::string kind =
        it->is_object() ? string_or(*it, "kind", "") : std::string();
    if (kind == "none") {
      cfg.spec.terminal_cost = {};
    } else if (kind != "default") {
      std::string label;
      cfg.spec.terminal_cost = parse_scalar_of_x(*it, "terminal", &label);
    }
  }

  if (auto it = j.find("grid"); it != j.end()) {
    if (!it->is_object()) bad("grid", "expected an object");
    reject_unknown(*it, {"h"}, "grid");
    cfg.h = number_at(*it, "h");
    if (!(cfg.h > 0.0)) bad("grid.h", "must be positive");
    cfg.has_grid = true;
  }
  if (auto it = j.find("lambda"); it != j.end()) {
    cfg.lambda = as_number(*it, "lambda");
    if (!(cfg.lambda > 0.0)) bad("lambda", "must be positive");
    cfg.has_lambda = true;
  }
  if (auto it = j.find("schedule"); it != j.end()) {
    if (!it->is_object()) bad("schedule", "expected an object");
    cfg.schedule = parse_schedule(*it);
    cfg.schedule_tol = number_or(*it, "tol", 1e-3);
    cfg.has_schedule = true;
  }

  if (auto it = j.find("simulation"); it != j.end()) {
    if (!it->is_object()) bad("simulation", "expected an object");
    reject_unknown(*it,
                   {"dt", "T", "n_paths", "seed", "checkpoint_count", "x0",
                    "policy", "check", "threshold"},
                   "simulation");
    cfg.simulation.dt = number_or(*it, "dt", cfg.simulation.dt);
    cfg.simulation.T = number_or(*it, "T", cfg.simulation.T);
    cfg.simulation.n_paths = int_or(*it, "n_paths", cfg.simulation.n_paths);
    if (auto st = it->find("seed"); st != it->end()) {
      if (!st->is_number_integer()) bad("simulation.seed", "expected an integer");
      cfg.simulation.seed = st->get<std::uint64_t>();
    }
    cfg.simulation.checkpoint_count =
        int_or(*it, "checkpoint_count", cfg.simulation.checkpoint_count);
    cfg.x0 = vec_at(require_key(*it, "x0"), "simulation.x0");
    cfg.policy = string_or(*it, "policy", cfg.policy);
    cfg.sim_check = string_or(*it, "check", "");
    if (!cfg.sim_check.empty() && cfg.sim_check != "invariance" &&
        cfg.sim_check != "viability")
      bad("simulation.check", "expected 'invariance' or 'viability'");
    cfg.sim_threshold = number_or(*it, "threshold", cfg.sim_threshold);
    cfg.has_simulation = true;
  }

  if (auto it = j.find("checks"); it != j.end()) {
    if (!it->is_array()) bad("checks", "expected an array of condition names");
    static const std::set<std::string> known = {
        "irrelevant", "invariance", "relevant", "sell", "compact_convexity"};
    for (const auto& c : *it) {
      if (!c.is_string() || known.find(c.get<std::string>()) == known.end())
        bad("checks", "unknown condition name");
      cfg.checks.push_back(c.get<std::string>());
    }
  }

  if (auto it = j.find("barriers"); it != j.end()) {
    if (!it->is_array()) bad("barriers", "expected an array");
    for (const auto& b : *it) {
      std::string label;
      const Barrier barrier = parse_barrier(b, cfg.spec.geom, &label);
      cfg.barriers.emplace_back(label, barrier);
    }
  }
  if (auto it = j.find("lyapunov"); it != j.end()) {
    if (!it->is_object()) bad("lyapunov", "expected an object");
    reject_unknown(*it, {"delta", "bound"}, "lyapunov");
    cfg.lyapunov_delta = number_or(*it, "delta", 0.0);
    cfg.lyapunov_bound = number_or(*it, "bound", 0.0);
  }

  if (auto it = j.find("liouville"); it != j.end()) {
    if (!it->is_object()) bad("liouville", "expected an object");
    reject_unknown(*it, {"tol"}, "liouville");
    cfg.liouville_tol = number_or(*it, "tol", 1e-6);
    cfg.has_liouville = true;
  }

  if (auto it = j.find("exit_value"); it != j.end()) {
    if (!it->is_object()) bad("exit_value", "expected an object");
    reject_unknown(*it, {"phi", "solve_lambda", "solve_h", "tolerance"},
                   "exit_value");
    cfg.phi = parse_scalar_of_x(require_key(*it, "phi"), "exit_value.phi",
                                &cfg.phi_label);
    cfg.exit_solve_lambda = number_or(*it, "solve_lambda", cfg.exit_solve_lambda);
    cfg.exit_solve_h = number_or(*it, "solve_h", cfg.exit_solve_h);
    cfg.exit_tolerance = number_or(*it, "tolerance", cfg.exit_tolerance);
    cfg.has_exit_value = true;
  }

  cfg.output_dir = string_or(j, "output", ".");
  cfg.threads = int_or(j, "threads", 0);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("config parse error in '" + path + "': " + e.what());
  }
  return parse_config(j, path);
}

std::vector<std::string> configured_stages(const ExperimentConfig& config) {
  std::vector<std::string> stages;
  stages.push_back("validate");
  if (!config.barriers.empty()) stages.push_back("lyapunov");
  if (config.has_grid && config.has_lambda) stages.push_back("solve-discounted");
  if (config.has_grid && config.has_schedule) stages.push_back("solve-ergodic");
  if (config.has_liouville && config.has_grid) stages.push_back("liouville");
  if (config.has_simulation) stages.push_back("simulate");
  if (config.has_exit_value && config.has_simulation)
    stages.push_back("exit-value");
  return stages;
}

}  // namespace ehjb
