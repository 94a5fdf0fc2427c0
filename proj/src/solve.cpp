#include "ehjb/solve.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>

namespace ehjb {

std::string to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::fail: return "fail";
    case CheckStatus::preconditions_unmet: return "preconditions_unmet";
  }
  return "unknown";
}

namespace {

using SparseMat = Eigen::SparseMatrix<double>;
using DenseVec = Eigen::VectorXd;

/// One exact policy evaluation: solve (lambda I - L_pi) u = l_pi (+ boundary
/// mass) by sparse LU, then refine the solution twice against the assembled
/// matrix to push the row residual toward the rounding floor.
DenseVec evaluate_policy(const StencilSet& st, const FeedbackPolicy& policy,
                         double lambda) {
  const int n = st.size();
  const Grid& grid = *st.grid;
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(n) * (2 * st.dim + 1));
  DenseVec rhs(n);
  for (int i = 0; i < n; ++i) {
    const int m = policy.control[static_cast<std::size_t>(i)];
    const std::size_t e = st.entry(i, m);
    trips.emplace_back(i, i, lambda + st.diag[e]);
    const double* w = st.weights_at(i, m);
    const auto& nb = grid.neighbors[static_cast<std::size_t>(i)];
    for (int k = 0; k < 2 * st.dim; ++k)
      if (nb[static_cast<std::size_t>(k)] >= 0 && w[k] != 0.0)
        trips.emplace_back(i, nb[static_cast<std::size_t>(k)], -w[k]);
    rhs[i] = st.cost[e] + st.ghost_rhs[e];
  }
  SparseMat A(n, n);
  A.setFromTriplets(trips.begin(), trips.end());
  Eigen::SparseLU<SparseMat> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success)
    throw SingularOperator("policy evaluation system failed to factor");
  DenseVec u = lu.solve(rhs);
  for (int pass = 0; pass < 2; ++pass) {
    DenseVec r = rhs - A * u;
    if (r.cwiseAbs().maxCoeff() == 0.0) break;
    u += lu.solve(r);
  }
  return u;
}

double sup_abs_cost(const StencilSet& st) {
  double m = 0.0;
  for (double v : st.cost) m = std::max(m, std::abs(v));
  return m;
}

/// Rounding floor of the Bellman sup-residual: the linear rows cannot be
/// satisfied below eps * |row| * |u| in doubles.
double residual_floor(const StencilSet& st, double lambda, double u_sup) {
  double max_diag = 0.0;
  for (double v : st.diag) max_diag = std::max(max_diag, v);
  return 64.0 * std::numeric_limits<double>::epsilon() *
         (lambda + 2.0 * max_diag) * std::max(1.0, u_sup);
}

}  // namespace

DiscountedSolution solve_discounted(const StencilSet& st, double lambda,
                                    double tol, int max_iter,
                                    const FeedbackPolicy* warm) {
  if (!(lambda > 0.0)) throw ConfigError("lambda must be positive");
  if (!st.has_cost)
    throw MissingCost("solve_discounted needs a running cost");
  const int n = st.size();

  DiscountedSolution sol;
  sol.lambda = lambda;
  sol.field.grid = st.grid;
  sol.field.values.assign(static_cast<std::size_t>(n), 0.0);
  if (warm != nullptr) {
    if (warm->grid != st.grid ||
        static_cast<int>(warm->control.size()) != n)
      throw ShapeMismatch("warm-start policy does not match the grid");
    sol.policy = *warm;
  } else {
    sol.policy = extract_feedback(st, sol.field);
  }

  double residual = std::numeric_limits<double>::infinity();
  for (int iter = 1; iter <= max_iter; ++iter) {
    const DenseVec u = evaluate_policy(st, sol.policy, lambda);
    std::copy(u.data(), u.data() + n, sol.field.values.begin());
    sol.iterations = iter;
    residual = bellman_residual_sup(st, sol.field.values, lambda);
    const double u_sup =
        n > 0 ? u.cwiseAbs().maxCoeff() : 0.0;
    const FeedbackPolicy next = extract_feedback(st, sol.field);
    const bool stable = next.control == sol.policy.control;
    if (residual < std::max(tol, residual_floor(st, lambda, u_sup))) {
      sol.policy = next;  // report the improved policy (equal when stable)
      break;
    }
    if (stable)
      throw NoConvergence("policy stable but residual " +
                          std::to_string(residual) + " above tolerance");
    if (iter == max_iter)
      throw NoConvergence("policy iteration hit max_iter with residual " +
                          std::to_string(residual));
    sol.policy = next;
  }
  sol.residual_sup = residual;

  if (st.closure == Closure::drop) {
    double u_sup = 0.0;
    for (double v : sol.field.values) u_sup = std::max(u_sup, std::abs(v));
    // (lambda I - L_pi)^-1 has sup-norm <= 1/lambda, so the accepted
    // residual is the only way the computed field can overshoot the bound.
    const double slack =
        std::max({tol, residual_floor(st, lambda, u_sup), residual}) / lambda;
    const double bound = sup_abs_cost(st) / lambda + slack;
    for (double v : sol.field.values)
      if (std::abs(v) > bound)
        throw NoConvergence("solution violates the sup-norm discount bound");
  }
  return sol;
}

DiscountedSolution solve_discounted(const ProblemSpec& spec, const Grid& grid,
                                    double lambda, double tol, int max_iter) {
  if (!spec.has_cost())
    throw MissingCost("solve_discounted needs a running cost");
  const StencilSet st = assemble(spec, grid, Closure::drop);
  return solve_discounted(st, lambda, tol, max_iter);
}

VanishingDiscountSchedule VanishingDiscountSchedule::geometric(double from,
                                                               double to,
                                                               double ratio) {
  if (!(from > 0.0) || !(to > 0.0) || to > from)
    throw ConfigError("schedule: need from >= to > 0");
  if (!(ratio > 0.0) || ratio >= 1.0)
    throw ConfigError("schedule.ratio must lie in (0, 1)");
  VanishingDiscountSchedule s;
  double lam = from;
  while (true) {
    s.lambdas.push_back(lam);
    if (lam <= to * (1.0 + 1e-12)) break;
    lam *= ratio;
  }
  return s;
}

namespace {

void validate_schedule(const VanishingDiscountSchedule& schedule) {
  if (schedule.lambdas.empty())
    throw ConfigError("schedule.lambdas is empty");
  for (std::size_t i = 0; i < schedule.lambdas.size(); ++i) {
    if (!(schedule.lambdas[i] > 0.0))
      throw ConfigError("schedule.lambdas must be positive");
    if (i > 0 && schedule.lambdas[i] >= schedule.lambdas[i - 1])
      throw ConfigError("schedule.lambdas must be strictly decreasing");
  }
}

int resolve_ref_node(const Grid& grid, const VanishingDiscountSchedule& s) {
  Vec target =
      s.x_tilde.size() > 0 ? s.x_tilde : interior_anchor(grid.geom);
  if (s.x_tilde.size() > 0 && s.x_tilde.size() != grid.dim)
    throw ConfigError("schedule.x_tilde has the wrong dimension");
  const int node = grid.nearest_node(target);
  const double collar = grid.geom.smoothness_radius;
  if (grid.node_distance[static_cast<std::size_t>(node)] <
      0.5 * collar - grid.h - 1e-12)
    throw ConfigError("schedule.x_tilde must be deep interior (d >= collar/2)");
  return node;
}

std::vector<int> core_nodes(const Grid& grid) {
  std::vector<int> core;
  const double cut = 0.5 * grid.geom.smoothness_radius;
  for (int i = 0; i < grid.size(); ++i)
    if (grid.node_distance[static_cast<std::size_t>(i)] >= cut)
      core.push_back(i);
  return core;
}

double oscillation(const std::vector<double>& v, const std::vector<int>& idx) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (int i : idx) {
    lo = std::min(lo, v[static_cast<std::size_t>(i)]);
    hi = std::max(hi, v[static_cast<std::size_t>(i)]);
  }
  return idx.empty() ? 0.0 : hi - lo;
}

}  // namespace

ErgodicSolution solve_ergodic(const ProblemSpec& spec, const Grid& grid,
                              const VanishingDiscountSchedule& schedule_in,
                              double tol) {
  VanishingDiscountSchedule schedule = schedule_in;
  if (schedule.lambdas.empty())
    schedule.lambdas = VanishingDiscountSchedule::geometric().lambdas;
  validate_schedule(schedule);
  if (!spec.has_cost()) throw MissingCost("solve_ergodic needs a running cost");

  const StencilSet st = assemble(spec, grid, Closure::drop);
  const int ref = resolve_ref_node(grid, schedule);
  const std::vector<int> core = core_nodes(grid);

  ErgodicSolution out;
  out.ref_node = ref;
  DiscountedSolution sol;
  std::vector<double> s_values;
  for (std::size_t k = 0; k < schedule.lambdas.size(); ++k) {
    const double lam = schedule.lambdas[k];
    sol = solve_discounted(st, lam, 1e-10, 100,
                           k == 0 ? nullptr : &sol.policy);
    const double u_ref = sol.field.values[static_cast<std::size_t>(ref)];
    s_values.push_back(lam * u_ref);
    std::vector<double> normalized = sol.field.values;
    for (double& v : normalized) v -= u_ref;
    out.trace.push_back({lam, lam * u_ref, oscillation(normalized, core)});
  }

  const std::size_t K = s_values.size();
  if (K < 2 || std::abs(s_values[K - 1] - s_values[K - 2]) > tol)
    throw ScheduleTooShort(
        "lambda*u(x_tilde) is not Cauchy within tol at the schedule tail");

  // Extrapolate the discount bias away when the last three points look like
  // a clean power law on a constant-ratio ladder.
  double s_star = s_values[K - 1];
  out.extrapolation_order = 0.0;
  if (schedule.extrapolation ==
          VanishingDiscountSchedule::Extrapolation::richardson &&
      K >= 3) {
    const double d1 = s_values[K - 2] - s_values[K - 3];
    const double d2 = s_values[K - 1] - s_values[K - 2];
    const double r1 = schedule.lambdas[K - 2] / schedule.lambdas[K - 3];
    const double r2 = schedule.lambdas[K - 1] / schedule.lambdas[K - 2];
    const bool same_ratio = std::abs(r1 - r2) <= 1e-9 * r2;
    if (same_ratio && d1 != 0.0 && d2 != 0.0 && (d1 > 0.0) == (d2 > 0.0) &&
        std::abs(d2) < std::abs(d1)) {
      const double p = std::log(d1 / d2) / std::log(1.0 / r2);
      const double factor = std::pow(1.0 / r2, p) - 1.0;
      s_star = s_values[K - 1] + d2 / factor;
      out.extrapolation_order = p;
    }
  }
  out.c = -s_star;

  out.chi.grid = &grid;
  out.chi.values = sol.field.values;
  const double u_ref = out.chi.values[static_cast<std::size_t>(ref)];
  for (double& v : out.chi.values) v -= u_ref;
  out.chi.values[static_cast<std::size_t>(ref)] = 0.0;

  double cell = 0.0;
  for (int i : core) {
    double best = -std::numeric_limits<double>::infinity();
    for (int m = 0; m < st.n_controls; ++m)
      best = std::max(best, st.bellman_candidate(i, m, out.chi.values));
    cell = std::max(cell, std::abs(best - out.c));
  }
  out.cell_residual = cell;
  if (cell > tol)
    throw NoConvergence("ergodic cell residual " + std::to_string(cell) +
                        " above tolerance on the interior core");

  const double collar = grid.geom.smoothness_radius;
  std::vector<double> deltas;
  for (double d : {0.2, 0.1, 0.05})
    if (d < collar) deltas.push_back(d);
  if (!deltas.empty())
    out.growth_report = boundary_growth_report(out.chi, deltas, ref);
  return out;
}

std::vector<GrowthRow> boundary_growth_report(const DiscreteField& field,
                                              const std::vector<double>& deltas,
                                              int ref_node) {
  if (field.grid == nullptr)
    throw ShapeMismatch("growth report needs a grid-bound field");
  const Grid& grid = *field.grid;
  if (deltas.empty()) throw BadDelta("growth report needs at least one delta");
  const double collar = grid.geom.smoothness_radius;
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    if (!(deltas[i] > 0.0) || deltas[i] > collar)
      throw BadDelta("growth deltas must lie in (0, collar]");
    if (i > 0 && deltas[i] >= deltas[i - 1])
      throw BadDelta("growth deltas must be strictly decreasing");
  }
  if (ref_node < 0) ref_node = grid.nearest_node(interior_anchor(grid.geom));
  const double f_ref = field.values[static_cast<std::size_t>(ref_node)];

  std::vector<GrowthRow> rows;
  for (double delta : deltas) {
    double ratio = 0.0;
    for (int i = 0; i < grid.size(); ++i) {
      const double d = grid.node_distance[static_cast<std::size_t>(i)];
      if (d >= delta) continue;
      const double denom = -std::log(d);
      if (denom <= 0.0) continue;  // nodes deeper than d = 1 (huge domains)
      ratio = std::max(
          ratio,
          std::abs(field.values[static_cast<std::size_t>(i)] - f_ref) / denom);
    }
    rows.push_back({delta, ratio});
  }
  return rows;
}

LiouvilleReport check_liouville(const ProblemSpec& spec, const Grid& grid,
                                double tol) {
  LiouvilleReport rep;
  rep.gate = check_condition(spec, Condition::invariance);
  if (!rep.gate.holds) {
    rep.status = CheckStatus::preconditions_unmet;
    return rep;
  }
  ProblemSpec zero_cost = spec;
  zero_cost.running_cost = [](const Vec&, const Vec&) { return 0.0; };
  const ErgodicSolution sol = solve_ergodic(zero_cost, grid);
  rep.c = sol.c;
  for (double v : sol.chi.values)
    rep.max_deviation = std::max(rep.max_deviation, std::abs(v));
  rep.is_constant = rep.max_deviation < tol;
  rep.status = rep.is_constant ? CheckStatus::pass : CheckStatus::fail;
  return rep;
}

UniquenessReport check_uniqueness(const ErgodicSolution& a,
                                  const ErgodicSolution& b, double tol) {
  if (a.chi.grid == nullptr || a.chi.grid != b.chi.grid ||
      a.chi.values.size() != b.chi.values.size())
    throw GridMismatch("ergodic solutions live on different grids");
  UniquenessReport rep;
  rep.c_difference = std::abs(a.c - b.c);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t i = 0; i < a.chi.values.size(); ++i) {
    const double diff = a.chi.values[i] - b.chi.values[i];
    lo = std::min(lo, diff);
    hi = std::max(hi, diff);
  }
  rep.chi_variation = a.chi.values.empty() ? 0.0 : hi - lo;
  rep.passes = rep.c_difference < tol && rep.chi_variation < tol;
  return rep;
}

}  // namespace ehjb
