#include "ehjb/sde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "ehjb/parallel.hpp"
#include "ehjb/rng.hpp"
#include "ehjb/stencil.hpp"

namespace ehjb {
namespace {

// ---------------------------------------------------------------------------
// Model adapters expose raw-pointer dynamics for the hot loop. The
// specialized adapters mirror the builtin coefficient expressions and the
// geometry distance/projection arithmetic operation for operation, so their
// trajectories stay bit-identical to the generic adapter's on the same spec.

/// interval (-1, 1), b = -x, sigma = 1 - x^2, one control.
struct IntervalModel {
  static constexpr int dim = 1;

  void step(double* x, int, double z0, double, double dt, double root) const {
    const double s = 1.0 - x[0] * x[0];
    x[0] = x[0] + (-x[0] * dt + root * (s * z0));
  }
  double distance(const double* x) const {
    return std::min(x[0] - (-1.0), 1.0 - x[0]);
  }
  void project(double* x) const {
    x[0] = (x[0] - (-1.0) < 1.0 - x[0]) ? -1.0 : 1.0;
  }
  void drift(const double* x, int, double* b) const { b[0] = -x[0]; }
  void outward(const double* x, double* g) const {
    g[0] = (x[0] - (-1.0) < 1.0 - x[0]) ? -1.0 : 1.0;
  }
};

/// Unit disk at the origin. Control 0: b = -x, sigma = (1 - |x|) I. With
/// exit_variant, control 1: b = x, sigma = I.
struct DiskModel {
  static constexpr int dim = 2;
  bool exit_variant = false;

  void step(double* x, int ctrl, double z0, double z1, double dt,
            double root) const {
    if (exit_variant && ctrl != 0) {
      x[0] = x[0] + (x[0] * dt + root * z0);
      x[1] = x[1] + (x[1] * dt + root * z1);
      return;
    }
    const double s = 1.0 - std::sqrt(x[0] * x[0] + x[1] * x[1]);
    x[0] = x[0] + (-x[0] * dt + root * (s * z0));
    x[1] = x[1] + (-x[1] * dt + root * (s * z1));
  }
  double distance(const double* x) const {
    return 1.0 - std::sqrt(x[0] * x[0] + x[1] * x[1]);
  }
  void project(double* x) const {
    const double r = std::sqrt(x[0] * x[0] + x[1] * x[1]);
    if (r < 1e-12) {
      x[0] = 0.0 + 1.0;
      x[1] = 0.0 + 0.0;
      return;
    }
    const double f = 1.0 / r;
    x[0] = 0.0 + f * x[0];
    x[1] = 0.0 + f * x[1];
  }
  void drift(const double* x, int ctrl, double* b) const {
    if (exit_variant && ctrl != 0) {
      b[0] = x[0];
      b[1] = x[1];
    } else {
      b[0] = -x[0];
      b[1] = -x[1];
    }
  }
  void outward(const double* x, double* g) const {
    const double r = std::sqrt(x[0] * x[0] + x[1] * x[1]);
    if (r < 1e-12) {
      g[0] = 1.0;
      g[1] = 0.0;
      return;
    }
    g[0] = x[0] / r;
    g[1] = x[1] / r;
  }
};

/// Any spec through its std::function coefficients (noise_dim <= 2).
template <int DIM>
struct GenericModel {
  static constexpr int dim = DIM;
  const ProblemSpec* spec;

  void load(const double* x, Vec& xv) const {
    xv[0] = x[0];
    if constexpr (DIM == 2) xv[1] = x[1];
  }
  void step(double* x, int ctrl, double z0, double z1, double dt,
            double root) const {
    Vec xv(DIM);
    load(x, xv);
    const Vec& alpha = spec->controls[ctrl];
    const Vec b = spec->drift(xv, alpha);
    const Mat s = spec->sigma(xv, alpha);
    const double z[2] = {z0, z1};
    const int cols = static_cast<int>(s.cols());
    for (int i = 0; i < DIM; ++i) {
      double sz = s(i, 0) * z[0];
      for (int j = 1; j < cols; ++j) sz += s(i, j) * z[j];
      x[i] = x[i] + (b[i] * dt + root * sz);
    }
  }
  double distance(const double* x) const {
    Vec xv(DIM);
    load(x, xv);
    return signed_distance(spec->geom, xv);
  }
  void project(double* x) const {
    Vec xv(DIM);
    load(x, xv);
    const Vec p = project_to_boundary(spec->geom, xv);
    x[0] = p[0];
    if constexpr (DIM == 2) x[1] = p[1];
  }
  void drift(const double* x, int ctrl, double* b) const {
    Vec xv(DIM);
    load(x, xv);
    const Vec bv = spec->drift(xv, spec->controls[ctrl]);
    b[0] = bv[0];
    if constexpr (DIM == 2) b[1] = bv[1];
  }
  void outward(const double* x, double* g) const {
    const auto& geom = spec->geom;
    switch (geom.shape) {
      case DomainGeometry::Shape::interval:
        g[0] = (x[0] - geom.lo < geom.hi - x[0]) ? -1.0 : 1.0;
        return;
      case DomainGeometry::Shape::ball:
      case DomainGeometry::Shape::annulus: {
        double rel[2] = {x[0] - geom.center[0], 0.0};
        if constexpr (DIM == 2) rel[1] = x[1] - geom.center[1];
        const double r = std::sqrt(rel[0] * rel[0] + rel[1] * rel[1]);
        if (r < 1e-12) {
          g[0] = 1.0;
          if constexpr (DIM == 2) g[1] = 0.0;
          return;
        }
        double sign = 1.0;
        if (geom.shape == DomainGeometry::Shape::annulus &&
            r < 0.5 * (geom.r_inner + geom.r_outer))
          sign = -1.0;  // nearer boundary is the inner circle
        g[0] = sign * rel[0] / r;
        if constexpr (DIM == 2) g[1] = sign * rel[1] / r;
        return;
      }
      case DomainGeometry::Shape::halfplane_patch:
        g[0] = 0.0;
        if constexpr (DIM == 2) g[1] = -1.0;
        return;
    }
    g[0] = 1.0;
    if constexpr (DIM == 2) g[1] = 0.0;
  }
};

// ---------------------------------------------------------------------------
// Control laws as inline functors over (path, step, position).

struct FixedLaw {
  int control;
  int operator()(uint32_t, uint32_t, const double*) const { return control; }
};

struct PerPathLaw {
  const int* control;
  int operator()(uint32_t path, uint32_t, const double*) const {
    return control[path];
  }
};

struct RandomLaw {
  const GaussianStream* gs;
  int n;
  int operator()(uint32_t path, uint32_t step, const double*) const {
    const int i = static_cast<int>(gs->uniform(path, step, 0u) * n);
    return i >= n ? n - 1 : (i < 0 ? 0 : i);
  }
};

struct FeedbackLaw {
  const Grid* grid;
  const int* control;
  int operator()(uint32_t, uint32_t, const double* x) const {
    return control[grid->nearest_node_raw(x)];
  }
};

/// Greedy adversary: the control whose drift points most strongly toward
/// the nearest boundary.
template <class Model>
struct SeekLaw {
  const Model* model;
  int n;
  int operator()(uint32_t, uint32_t, const double* x) const {
    double g[2] = {0.0, 0.0}, b[2] = {0.0, 0.0};
    model->outward(x, g);
    int best = 0;
    double best_v = -std::numeric_limits<double>::infinity();
    for (int m = 0; m < n; ++m) {
      model->drift(x, m, b);
      double v = b[0] * g[0];
      if constexpr (Model::dim == 2) v += b[1] * g[1];
      if (v > best_v) {
        best_v = v;
        best = m;
      }
    }
    return best;
  }
};

// Cost accumulation policies for the kernel.
struct NullCost {
  static constexpr bool enabled = false;
  double operator()(const double*, int) const { return 0.0; }
};

struct SpecCost {
  static constexpr bool enabled = true;
  const ProblemSpec* spec;
  int dim;
  double operator()(const double* x, int ctrl) const {
    Vec xv(dim);
    for (int i = 0; i < dim; ++i) xv[i] = x[i];
    return spec->running_cost(xv, spec->controls[ctrl]);
  }
};

// ---------------------------------------------------------------------------

template <class Model, class Law, class Cost>
void run_kernel(const Model& model, const Law& law, const Cost& cost,
                const GaussianStream& gs, int n_paths, int n_steps, double dt,
                double lambda, TrajectoryBatch& out,
                std::vector<double>* discounted) {
  constexpr int dim = Model::dim;
  const double root = std::sqrt(2.0 * dt);
  const double decay = Cost::enabled ? std::exp(-lambda * dt) : 1.0;
  const int n_cp = static_cast<int>(out.checkpoint_times.size());
  std::vector<long long> cp_step(static_cast<std::size_t>(n_cp));
  for (int j = 0; j < n_cp; ++j)
    cp_step[static_cast<std::size_t>(j)] =
        static_cast<long long>(j + 1) * n_steps / n_cp - 1;

  parallel_for(0, static_cast<std::size_t>(n_paths), [&](std::size_t pi) {
    const auto p = static_cast<uint32_t>(pi);
    double x[2];
    for (int i = 0; i < dim; ++i) x[i] = out.x0[i];
    double acc = 0.0, disc = 1.0;
    bool exited = false;
    double exit_t = n_steps * dt;
    int cp = 0;
    auto store_cp = [&]() {
      double* dst = out.checkpoints.data() +
                    (pi * static_cast<std::size_t>(n_cp) +
                     static_cast<std::size_t>(cp)) *
                        dim;
      for (int i = 0; i < dim; ++i) dst[i] = x[i];
      ++cp;
    };
    for (int k = 0; k < n_steps; ++k) {
      const int ctrl = law(p, static_cast<uint32_t>(k), x);
      if constexpr (Cost::enabled) {
        acc += disc * cost(x, ctrl) * dt;
        disc *= decay;
      }
      double z0, z1 = 0.0;
      if constexpr (dim == 1)
        z0 = gs.normal1(p, static_cast<uint32_t>(k), 0u);
      else
        gs.normal_pair(p, static_cast<uint32_t>(k), 0u, z0, z1);
      model.step(x, ctrl, z0, z1, dt, root);
      if (model.distance(x) <= 0.0) {
        model.project(x);
        exited = true;
        exit_t = (k + 1) * dt;
        break;
      }
      while (cp < n_cp && cp_step[static_cast<std::size_t>(cp)] == k)
        store_cp();
    }
    while (cp < n_cp) store_cp();  // freeze remaining snapshots at the end
    out.exited[pi] = exited ? 1 : 0;
    out.exit_time[pi] = exit_t;
    for (int i = 0; i < dim; ++i)
      out.final_position[pi * static_cast<std::size_t>(dim) +
                         static_cast<std::size_t>(i)] = x[i];
    if constexpr (Cost::enabled) (*discounted)[pi] = acc;
  });
}

template <class Model>
void run_with_law(const Model& model, const ProblemSpec& spec,
                  const SimulationConfig& config, const ControlLaw& law,
                  int n_steps, double lambda, TrajectoryBatch& out,
                  std::vector<double>* discounted) {
  const GaussianStream gs(config.seed);
  auto run = [&](const auto& law_fn) {
    if (discounted)
      run_kernel(model, law_fn, SpecCost{&spec, spec.geom.dim}, gs,
                 config.n_paths, n_steps, config.dt, lambda, out, discounted);
    else
      run_kernel(model, law_fn, NullCost{}, gs, config.n_paths, n_steps,
                 config.dt, lambda, out, nullptr);
  };
  switch (law.mode) {
    case ControlLaw::Mode::fixed:
      run(FixedLaw{law.control});
      break;
    case ControlLaw::Mode::per_path:
      run(PerPathLaw{law.per_path.data()});
      break;
    case ControlLaw::Mode::random_switching:
      run(RandomLaw{&gs, spec.controls.size()});
      break;
    case ControlLaw::Mode::feedback:
      run(FeedbackLaw{law.feedback->grid, law.feedback->control.data()});
      break;
    case ControlLaw::Mode::boundary_seeking:
      run(SeekLaw<Model>{&model, spec.controls.size()});
      break;
  }
}

enum class FastKind { generic, interval_1d, radial_disk, exit_disk };

bool probe_interval_1d(const ProblemSpec& spec) {
  const Vec& alpha = spec.controls[0];
  for (double t : {-0.8, -0.3, 0.1, 0.6, 0.95}) {
    const Vec x = vec1(t);
    const Vec b = spec.drift(x, alpha);
    const Mat s = spec.sigma(x, alpha);
    if (b.size() != 1 || s.rows() != 1 || s.cols() != 1) return false;
    if (b[0] != -t || s(0, 0) != 1.0 - t * t) return false;
  }
  return true;
}

bool probe_disk_control(const ProblemSpec& spec, const Vec& alpha,
                        bool outward) {
  const double pts[3][2] = {{0.3, -0.4}, {-0.55, 0.2}, {0.05, 0.85}};
  for (const auto& pt : pts) {
    const Vec x = vec2(pt[0], pt[1]);
    const Vec b = spec.drift(x, alpha);
    const Mat s = spec.sigma(x, alpha);
    if (b.size() != 2 || s.rows() != 2 || s.cols() != 2) return false;
    const double want = outward ? 1.0 : -1.0;
    if (b[0] != want * pt[0] || b[1] != want * pt[1]) return false;
    const double scale =
        outward ? 1.0 : 1.0 - std::sqrt(pt[0] * pt[0] + pt[1] * pt[1]);
    if (s(0, 0) != scale || s(1, 1) != scale) return false;
    if (s(0, 1) != 0.0 || s(1, 0) != 0.0) return false;
  }
  return true;
}

bool is_unit_disk(const DomainGeometry& g) {
  return g.shape == DomainGeometry::Shape::ball && g.dim == 2 &&
         g.radius == 1.0 && g.center[0] == 0.0 && g.center[1] == 0.0;
}

/// Identifies specs whose dynamics provably match a specialized adapter:
/// the builtin name plus coefficient equality at probe points. Any custom
/// override (reshaped domain, replaced drift or sigma) falls back to the
/// generic adapter.
FastKind classify(const ProblemSpec& spec) {
  const auto& g = spec.geom;
  if (spec.name == "degenerate_interval_1d" &&
      g.shape == DomainGeometry::Shape::interval && g.lo == -1.0 &&
      g.hi == 1.0 && spec.controls.size() == 1 && probe_interval_1d(spec))
    return FastKind::interval_1d;
  if (spec.name == "radial_disk_2d" && is_unit_disk(g) &&
      spec.controls.size() == 1 &&
      probe_disk_control(spec, spec.controls[0], false))
    return FastKind::radial_disk;
  if (spec.name == "exit_disk" && is_unit_disk(g) &&
      spec.controls.size() == 2 &&
      probe_disk_control(spec, spec.controls[0], false) &&
      probe_disk_control(spec, spec.controls[1], true))
    return FastKind::exit_disk;
  return FastKind::generic;
}

int steps_for(double horizon, double dt) {
  return std::max(1, static_cast<int>(std::ceil(horizon / dt - 1e-9)));
}

void validate_run(const ProblemSpec& spec, const Vec& x0,
                  const SimulationConfig& config, const ControlLaw& law,
                  double horizon) {
  if (spec.controls.size() == 0)
    throw EmptyControlSet("simulation needs at least one control");
  if (!spec.drift || !spec.sigma)
    throw ConfigError("model is missing drift or sigma callbacks");
  if (spec.geom.dim < 1 || spec.geom.dim > 2)
    throw UnsupportedShape("simulation supports dimensions 1 and 2");
  if (spec.noise_dim < 1 || spec.noise_dim > 2)
    throw ConfigError("simulation supports noise_dim 1 or 2");
  if (x0.size() != spec.geom.dim)
    throw ShapeMismatch("start point has dimension " +
                        std::to_string(x0.size()) + ", domain expects " +
                        std::to_string(spec.geom.dim));
  if (!(signed_distance(spec.geom, x0) > 0.0))
    throw BadStart("start point is on or outside the boundary");
  if (!(config.dt > 0.0)) throw ConfigError("simulation.dt must be positive");
  if (!(horizon > 0.0)) throw ConfigError("simulation.T must be positive");
  if (config.n_paths < 1)
    throw ConfigError("simulation.n_paths must be at least 1");
  if (config.checkpoint_count < 0)
    throw ConfigError("simulation.checkpoint_count must be >= 0");
  const int n = spec.controls.size();
  switch (law.mode) {
    case ControlLaw::Mode::fixed:
      if (law.control < 0 || law.control >= n)
        throw ConfigError("control index " + std::to_string(law.control) +
                          " out of range");
      break;
    case ControlLaw::Mode::per_path: {
      if (static_cast<int>(law.per_path.size()) < config.n_paths)
        throw ShapeMismatch("per-path control list is shorter than n_paths");
      for (int c : law.per_path)
        if (c < 0 || c >= n)
          throw ConfigError("per-path control index out of range");
      break;
    }
    case ControlLaw::Mode::feedback: {
      if (law.feedback == nullptr || law.feedback->grid == nullptr)
        throw ConfigError("feedback law without a policy");
      const Grid& grid = *law.feedback->grid;
      if (static_cast<int>(law.feedback->control.size()) != grid.size())
        throw GridMismatch("feedback policy does not match its grid");
      if (grid.dim != spec.geom.dim)
        throw GridMismatch("feedback grid dimension does not match the model");
      break;
    }
    default:
      break;
  }
}

/// Shared driver: runs the Euler-Maruyama kernel over `horizon` (extended to
/// whole steps). `discounted`, when non-null, receives per-path values of
/// int_0^tau e^(-lambda t) l dt by the left-point rule.
TrajectoryBatch run_batch(const ProblemSpec& spec, const Vec& x0,
                          const SimulationConfig& config, const ControlLaw& law,
                          double horizon, double lambda,
                          std::vector<double>* discounted) {
  validate_run(spec, x0, config, law, horizon);
  const int n_steps = steps_for(horizon, config.dt);
  const int dim = spec.geom.dim;

  TrajectoryBatch out;
  out.x0 = x0;
  out.dt = config.dt;
  out.T = n_steps * config.dt;
  out.n_paths = config.n_paths;
  out.dim = dim;
  out.exited.assign(static_cast<std::size_t>(config.n_paths), 0);
  out.exit_time.assign(static_cast<std::size_t>(config.n_paths), out.T);
  out.final_position.assign(
      static_cast<std::size_t>(config.n_paths) * static_cast<std::size_t>(dim),
      0.0);
  if (config.checkpoint_count > 0) {
    out.checkpoint_times.resize(
        static_cast<std::size_t>(config.checkpoint_count));
    for (int j = 0; j < config.checkpoint_count; ++j)
      out.checkpoint_times[static_cast<std::size_t>(j)] =
          static_cast<double>(static_cast<long long>(j + 1) * n_steps /
                              config.checkpoint_count) *
          config.dt;
    out.checkpoints.assign(static_cast<std::size_t>(config.n_paths) *
                               static_cast<std::size_t>(config.checkpoint_count) *
                               static_cast<std::size_t>(dim),
                           0.0);
  }
  if (discounted)
    discounted->assign(static_cast<std::size_t>(config.n_paths), 0.0);

  switch (classify(spec)) {
    case FastKind::interval_1d: {
      const IntervalModel m;
      run_with_law(m, spec, config, law, n_steps, lambda, out, discounted);
      break;
    }
    case FastKind::radial_disk: {
      DiskModel m;
      m.exit_variant = false;
      run_with_law(m, spec, config, law, n_steps, lambda, out, discounted);
      break;
    }
    case FastKind::exit_disk: {
      DiskModel m;
      m.exit_variant = true;
      run_with_law(m, spec, config, law, n_steps, lambda, out, discounted);
      break;
    }
    case FastKind::generic: {
      if (dim == 1) {
        const GenericModel<1> m{&spec};
        run_with_law(m, spec, config, law, n_steps, lambda, out, discounted);
      } else {
        const GenericModel<2> m{&spec};
        run_with_law(m, spec, config, law, n_steps, lambda, out, discounted);
      }
      break;
    }
  }
  return out;
}

MonteCarloValue summarize(const std::vector<double>& values, double horizon) {
  MonteCarloValue v;
  v.n_paths = static_cast<int>(values.size());
  v.horizon = horizon;
  if (values.empty()) return v;
  const double n = static_cast<double>(values.size());
  v.estimate = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double y : values) ss += (y - v.estimate) * (y - v.estimate);
    v.std_error = std::sqrt(ss / (n * (n - 1.0)));
  }
  return v;
}

/// First control whose noise degenerates on the whole boundary and whose
/// drift pushes inward on the half-collar ring, or -1.
int uniform_certificate_control(const ProblemSpec& spec) {
  const auto& g = spec.geom;
  std::vector<Vec> bpts, ring;
  try {
    bpts = boundary_points(g, 128);
    ring = ring_points(g, 0.5 * g.smoothness_radius, 16);
  } catch (const Error&) {
    return -1;
  }
  for (int m = 0; m < spec.controls.size(); ++m) {
    const Vec& alpha = spec.controls[m];
    bool ok = true;
    for (const Vec& bp : bpts) {
      const DistanceJet jet = distance_jet(g, bp);
      if ((spec.sigma(bp, alpha).transpose() * jet.grad).norm() > 1e-9) {
        ok = false;
        break;
      }
    }
    for (std::size_t i = 0; ok && i < ring.size(); ++i) {
      const DistanceJet jet = distance_jet(g, ring[i]);
      const Vec b = spec.drift(ring[i], alpha);
      const Mat a = spec.diffusion(ring[i], alpha);
      if (b.dot(jet.grad) + a.cwiseProduct(jet.hess).sum() <= 0.0) ok = false;
    }
    if (ok) return m;
  }
  return -1;
}

/// Near-boundary feedback built from the degeneracy certificate: inside the
/// ring each node gets a control that is degenerate at its nearest boundary
/// point and drifts inward at the node; deeper nodes keep a globally
/// certified control.
struct WitnessPolicy {
  std::unique_ptr<Grid> grid;
  FeedbackPolicy policy;
};

WitnessPolicy build_witness_policy(const ProblemSpec& spec, double delta) {
  const auto& g = spec.geom;
  WitnessPolicy w;
  w.grid = std::make_unique<Grid>(build_grid(g, g.smoothness_radius / 8.0));
  int deep = uniform_certificate_control(spec);
  if (deep < 0) deep = 0;
  w.policy.grid = w.grid.get();
  w.policy.control.assign(static_cast<std::size_t>(w.grid->size()), deep);
  if (!(delta > 0.0) || delta > g.smoothness_radius)
    delta = 0.5 * g.smoothness_radius;
  for (int i = 0; i < w.grid->size(); ++i) {
    if (!(w.grid->node_distance[static_cast<std::size_t>(i)] < delta)) continue;
    const Vec& xn = w.grid->nodes[static_cast<std::size_t>(i)];
    const Vec bp = project_to_boundary(g, xn);
    const DistanceJet bjet = distance_jet(g, bp);
    const DistanceJet njet = distance_jet(g, xn);
    int pick = -1, degenerate = -1;
    for (int m = 0; m < spec.controls.size(); ++m) {
      const Vec& alpha = spec.controls[m];
      if ((spec.sigma(bp, alpha).transpose() * bjet.grad).norm() > 1e-9)
        continue;
      if (degenerate < 0) degenerate = m;
      const Vec b = spec.drift(xn, alpha);
      const Mat a = spec.diffusion(xn, alpha);
      if (b.dot(njet.grad) + a.cwiseProduct(njet.hess).sum() > 0.0) {
        pick = m;
        break;
      }
    }
    w.policy.control[static_cast<std::size_t>(i)] =
        pick >= 0 ? pick : (degenerate >= 0 ? degenerate : deep);
  }
  return w;
}

double worst_fraction_of(const std::vector<RefinementRow>& rows) {
  double worst = 0.0;
  for (const auto& r : rows) worst = std::max(worst, r.exit_fraction);
  return worst;
}

bool chain_monotone(const std::vector<RefinementRow>& rows) {
  for (std::size_t i = 0; i + 1 < rows.size(); ++i)
    if (rows[i + 1].exit_fraction >
        rows[i].exit_fraction + 3.0 * rows[i].std_error)
      return false;
  return true;
}

}  // namespace

TrajectoryBatch simulate(const ProblemSpec& spec, const Vec& x0,
                         const SimulationConfig& config,
                         const ControlLaw& law) {
  return run_batch(spec, x0, config, law, config.T, 0.0, nullptr);
}

std::string simulation_kernel_name(const ProblemSpec& spec) {
  switch (classify(spec)) {
    case FastKind::interval_1d: return "interval_1d";
    case FastKind::radial_disk: return "radial_disk";
    case FastKind::exit_disk: return "exit_disk";
    case FastKind::generic: break;
  }
  return "generic";
}

ExitStatistics exit_statistics(const TrajectoryBatch& batch) {
  ExitStatistics st;
  st.n_paths = batch.n_paths;
  double sum_t = 0.0;
  for (int p = 0; p < batch.n_paths; ++p) {
    if (!batch.exited[static_cast<std::size_t>(p)]) continue;
    ++st.n_exits;
    sum_t += batch.exit_time[static_cast<std::size_t>(p)];
  }
  const double n = static_cast<double>(std::max(batch.n_paths, 1));
  st.exit_fraction = st.n_exits / n;
  double q = st.exit_fraction;
  if (batch.n_paths >= 2) q = std::clamp(q, 1.0 / n, 1.0 - 1.0 / n);
  else q = 0.5;
  st.std_error = std::sqrt(q * (1.0 - q) / n);
  st.mean_exit_time_given_exit = st.n_exits > 0 ? sum_t / st.n_exits : 0.0;
  return st;
}

ViabilityReport check_viability(const ProblemSpec& spec, const Vec& x0,
                                const SimulationConfig& config,
                                const ControlLaw* law_override,
                                double threshold) {
  ViabilityReport rep;
  rep.threshold = threshold;
  rep.gate = check_condition(spec, Condition::irrelevant);
  if (!rep.gate.holds) {
    rep.status = CheckStatus::preconditions_unmet;
    return rep;
  }
  WitnessPolicy witness;
  ControlLaw law;
  if (law_override) {
    law = *law_override;
  } else {
    const int cert = uniform_certificate_control(spec);
    if (cert >= 0) {
      law = ControlLaw::fixed_control(cert);
    } else {
      witness = build_witness_policy(spec, rep.gate.delta);
      law = ControlLaw::feedback_policy(&witness.policy);
    }
  }
  for (double f : {1.0, 0.5, 0.25}) {
    SimulationConfig c = config;
    c.dt = config.dt * f;
    const ExitStatistics st = exit_statistics(simulate(spec, x0, c, law));
    rep.rows.push_back({c.dt, st.exit_fraction, st.std_error});
  }
  rep.monotone_ok = chain_monotone(rep.rows);
  rep.status = (rep.monotone_ok && worst_fraction_of(rep.rows) < threshold)
                   ? CheckStatus::pass
                   : CheckStatus::fail;
  return rep;
}

InvarianceReport check_invariance(const ProblemSpec& spec, const Vec& x0,
                                  const SimulationConfig& config,
                                  double threshold) {
  InvarianceReport rep;
  rep.threshold = threshold;
  rep.gate = check_condition(spec, Condition::invariance);
  if (!rep.gate.holds) {
    rep.status = CheckStatus::preconditions_unmet;
    return rep;
  }
  std::vector<std::pair<std::string, ControlLaw>> policies;
  for (int m = 0; m < spec.controls.size(); ++m) {
    const std::string label =
        static_cast<std::size_t>(m) < spec.controls.labels.size()
            ? spec.controls.labels[static_cast<std::size_t>(m)]
            : std::to_string(m);
    policies.emplace_back("fixed:" + label, ControlLaw::fixed_control(m));
  }
  policies.emplace_back("random_switching", ControlLaw::random_switching());
  policies.emplace_back("boundary_seeking", ControlLaw::boundary_seeking());

  // Brownian draws are counter-keyed and independent of the law, so with a
  // single control every mode yields the same trajectories; reuse the rows.
  const bool single = spec.controls.size() == 1;
  std::vector<RefinementRow> shared;
  for (auto& [name, law] : policies) {
    PolicyRunReport run;
    run.policy_name = name;
    if (single && !shared.empty()) {
      run.rows = shared;
    } else {
      for (double f : {1.0, 0.5}) {
        SimulationConfig c = config;
        c.dt = config.dt * f;
        const ExitStatistics st = exit_statistics(simulate(spec, x0, c, law));
        run.rows.push_back({c.dt, st.exit_fraction, st.std_error});
      }
      if (single) shared = run.rows;
    }
    rep.runs.push_back(std::move(run));
  }
  rep.monotone_ok = true;
  rep.worst_fraction = 0.0;
  for (const auto& run : rep.runs) {
    rep.monotone_ok = rep.monotone_ok && chain_monotone(run.rows);
    rep.worst_fraction = std::max(rep.worst_fraction, worst_fraction_of(run.rows));
  }
  rep.status = (rep.monotone_ok && rep.worst_fraction < threshold)
                   ? CheckStatus::pass
                   : CheckStatus::fail;
  return rep;
}

MonteCarloValue mc_discounted_value(const ProblemSpec& spec, const Vec& x0,
                                    double lambda,
                                    const SimulationConfig& config,
                                    const ControlLaw& law, double target_tol) {
  if (!spec.has_cost())
    throw MissingCost("discounted value needs a running cost");
  if (!(lambda > 0.0)) throw ConfigError("lambda must be positive");
  if (!(target_tol > 0.0)) throw ConfigError("target_tol must be positive");
  double horizon = config.T;
  const double sup_l = sup_cost_estimate(spec);
  if (sup_l > 0.0) {
    // Extend until the tail bound e^(-lambda T) sup|l| / lambda is below a
    // tenth of the target tolerance.
    const double t_need =
        std::log(sup_l / (lambda * 0.1 * target_tol)) / lambda;
    horizon = std::max(horizon, t_need);
  }
  std::vector<double> discounted;
  const TrajectoryBatch batch =
      run_batch(spec, x0, config, law, horizon, lambda, &discounted);
  return summarize(discounted, batch.T);
}

namespace {

MonteCarloValue exit_payoff_value(const TrajectoryBatch& batch,
                                  const std::function<double(const Vec&)>& phi) {
  std::vector<double> payoff(static_cast<std::size_t>(batch.n_paths), 0.0);
  Vec xp(batch.dim);
  for (int p = 0; p < batch.n_paths; ++p) {
    if (!batch.exited[static_cast<std::size_t>(p)]) continue;
    for (int i = 0; i < batch.dim; ++i)
      xp[i] = batch.final_position[static_cast<std::size_t>(p) * batch.dim +
                                   static_cast<std::size_t>(i)];
    payoff[static_cast<std::size_t>(p)] = phi(xp);
  }
  return summarize(payoff, batch.T);
}

}  // namespace

ExitValueReport exit_value(const ProblemSpec& spec,
                           const std::function<double(const Vec&)>& phi,
                           const Vec& x0, const SimulationConfig& config,
                           double solve_lambda, double solve_h,
                           double tolerance) {
  if (!phi) throw MissingTerminalCost("exit payoff phi is required");
  if (!(solve_lambda > 0.0) || !(solve_h > 0.0))
    throw ConfigError("solve_lambda and solve_h must be positive");
  ExitValueReport rep;
  rep.solve_lambda = solve_lambda;
  rep.solve_h = solve_h;
  rep.gate_irrelevant = check_condition(spec, Condition::irrelevant);
  ProblemSpec with_phi = spec;
  with_phi.terminal_cost = phi;
  rep.gate_relevant = check_condition(with_phi, Condition::relevant);
  if (!rep.gate_irrelevant.holds || !rep.gate_relevant.holds) {
    rep.status = CheckStatus::preconditions_unmet;
    return rep;
  }

  double phi_min = std::numeric_limits<double>::infinity();
  for (const Vec& bp : boundary_points(spec.geom, 1024))
    phi_min = std::min(phi_min, phi(bp));
  rep.theorem_value = std::min(phi_min, 0.0);

  // Certificate (i): stay inside forever, collecting nothing.
  WitnessPolicy witness;
  ControlLaw stay;
  const int cert = uniform_certificate_control(spec);
  if (cert >= 0) {
    stay = ControlLaw::fixed_control(cert);
  } else {
    witness = build_witness_policy(spec, rep.gate_irrelevant.delta);
    stay = ControlLaw::feedback_policy(&witness.policy);
  }
  const TrajectoryBatch stay_batch = simulate(spec, x0, config, stay);
  rep.non_exiting = exit_payoff_value(stay_batch, phi);
  rep.non_exiting_exit_fraction = exit_statistics(stay_batch).exit_fraction;

  // Certificate (ii): feedback from a boundary-value solve (zero running
  // cost, terminal phi, small discount) that steers toward the cheap exit.
  ProblemSpec steered = spec;
  steered.running_cost = [](const Vec&, const Vec&) { return 0.0; };
  steered.terminal_cost = phi;
  const Grid grid = build_grid(spec.geom, solve_h);
  const StencilSet stencils = assemble(steered, grid, Closure::dirichlet);
  const DiscountedSolution sol =
      solve_discounted(stencils, solve_lambda, 1e-9, 200);
  const ControlLaw seek = ControlLaw::feedback_policy(&sol.policy);
  const TrajectoryBatch seek_batch = simulate(spec, x0, config, seek);
  rep.seeking = exit_payoff_value(seek_batch, phi);
  rep.seeking_exit_fraction = exit_statistics(seek_batch).exit_fraction;

  rep.value = std::min(rep.non_exiting.estimate, rep.seeking.estimate);
  rep.status = std::fabs(rep.value - rep.theorem_value) <= tolerance
                   ? CheckStatus::pass
                   : CheckStatus::fail;
  return rep;
}

double sup_cost_estimate(const ProblemSpec& spec) {
  if (!spec.has_cost()) return 0.0;
  const auto& g = spec.geom;
  std::vector<Vec> pts;
  if (g.shape == DomainGeometry::Shape::halfplane_patch) {
    const int n = 33;
    for (int i = 0; i < n; ++i)
      for (int j = 1; j <= n; ++j)
        pts.push_back(vec2(-g.window + 2.0 * g.window * i / (n - 1.0),
                           static_cast<double>(j) / n));
  } else {
    Vec lo, hi;
    bounding_box(g, lo, hi);
    const int n = 65;
    if (g.dim == 1) {
      for (int i = 0; i < n; ++i) {
        const Vec x = vec1(lo[0] + (hi[0] - lo[0]) * i / (n - 1.0));
        if (signed_distance(g, x) >= 0.0) pts.push_back(x);
      }
    } else {
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          const Vec x = vec2(lo[0] + (hi[0] - lo[0]) * i / (n - 1.0),
                             lo[1] + (hi[1] - lo[1]) * j / (n - 1.0));
          if (signed_distance(g, x) >= 0.0) pts.push_back(x);
        }
    }
    const auto bpts = boundary_points(g, 128);
    pts.insert(pts.end(), bpts.begin(), bpts.end());
  }
  double sup = 0.0;
  for (const Vec& x : pts)
    for (int m = 0; m < spec.controls.size(); ++m)
      sup = std::max(sup, std::fabs(spec.running_cost(x, spec.controls[m])));
  return sup;
}

}  // namespace ehjb
