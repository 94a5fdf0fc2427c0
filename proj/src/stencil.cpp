#include "ehjb/stencil.hpp"

#include <algorithm>
#include <cmath>

#include "ehjb/parallel.hpp"

namespace ehjb {

double StencilSet::generator_row(int node, int control,
                                 const std::vector<double>& field) const {
  const double* w = weights_at(node, control);
  const auto& nb = grid->neighbors[static_cast<std::size_t>(node)];
  const double u = field[static_cast<std::size_t>(node)];
  double acc = -diag[entry(node, control)] * u;
  for (int k = 0; k < 2 * dim; ++k)
    if (nb[static_cast<std::size_t>(k)] >= 0)
      acc += w[k] * field[static_cast<std::size_t>(nb[static_cast<std::size_t>(k)])];
  return acc;
}

double StencilSet::bellman_candidate(int node, int control,
                                     const std::vector<double>& field) const {
  // -L u - l; the dirichlet ghost mass contributes w*(phi - nothing) on the
  // RHS side of the linear system, so here it enters as -ghost_rhs.
  double v = -generator_row(node, control, field) - cost[entry(node, control)];
  if (closure == Closure::dirichlet) v -= ghost_rhs[entry(node, control)];
  return v;
}

StencilSet assemble(const ProblemSpec& spec, const Grid& grid,
                    Closure closure) {
  if (spec.controls.size() == 0)
    throw EmptyControlSet("assemble needs at least one control");
  if (closure == Closure::dirichlet && !spec.has_terminal_cost())
    throw MissingTerminalCost("dirichlet closure needs a terminal cost");

  StencilSet st;
  st.grid = &grid;
  st.n_controls = spec.controls.size();
  st.dim = grid.dim;
  st.closure = closure;
  st.has_cost = spec.has_cost();

  const int n = grid.size();
  const std::size_t entries =
      static_cast<std::size_t>(n) * static_cast<std::size_t>(st.n_controls);
  st.weights.assign(entries * 2 * static_cast<std::size_t>(st.dim), 0.0);
  st.diag.assign(entries, 0.0);
  st.cost.assign(entries, 0.0);
  st.ghost_rhs.assign(entries, 0.0);
  st.dropped.assign(entries, 0.0);

  const double h = grid.h;
  const double inv_h = 1.0 / h, inv_h2 = inv_h * inv_h;

  parallel_for(0, n, [&](int node) {
    const Vec& x = grid.nodes[static_cast<std::size_t>(node)];
    const auto& nb = grid.neighbors[static_cast<std::size_t>(node)];
    for (int m = 0; m < st.n_controls; ++m) {
      const Vec& alpha = spec.controls[m];
      const Vec b = spec.drift(x, alpha);
      const Mat a = spec.diffusion(x, alpha);
      const double a_scale = std::max(1.0, a.cwiseAbs().maxCoeff());
      for (int r = 0; r < st.dim; ++r)
        for (int c = 0; c < st.dim; ++c)
          if (r != c && std::abs(a(r, c)) > 1e-12 * a_scale)
            throw NonDiagonalDiffusion(
                "assemble handles diagonal diffusion tensors only");

      const std::size_t e = st.entry(node, m);
      double* w = st.weights.data() + e * 2 * static_cast<std::size_t>(st.dim);
      double diag = 0.0, ghost = 0.0, dropped = 0.0;
      for (int ax = 0; ax < st.dim; ++ax) {
        const double diff = a(ax, ax) * inv_h2;
        const double drift = b[ax];
        // Directed masses: [toward ax-, toward ax+].
        const double w_minus = diff + std::max(-drift, 0.0) * inv_h;
        const double w_plus = diff + std::max(drift, 0.0) * inv_h;
        const int nb_minus = nb[static_cast<std::size_t>(2 * ax)];
        const int nb_plus = nb[static_cast<std::size_t>(2 * ax + 1)];
        const double masses[2] = {w_minus, w_plus};
        const int targets[2] = {nb_minus, nb_plus};
        for (int s = 0; s < 2; ++s) {
          if (targets[s] >= 0) {
            w[2 * ax + s] = masses[s];
            diag += masses[s];
          } else if (closure == Closure::dirichlet) {
            // Exterior neighbor: mass couples to the boundary value at the
            // projected exit point.
            Vec xg = x;
            xg[ax] += (s == 0 ? -h : h);
            const Vec xb = project_to_boundary(grid.geom, xg);
            ghost += masses[s] * spec.terminal_cost(xb);
            diag += masses[s];
            w[2 * ax + s] = 0.0;
          } else {
            dropped += masses[s];
          }
        }
      }
      st.diag[e] = diag;
      st.ghost_rhs[e] = ghost;
      st.dropped[e] = dropped;
      if (st.has_cost) st.cost[e] = spec.running_cost(x, alpha);
    }
  });
  return st;
}

DiscreteField apply(const StencilSet& stencils, const DiscreteField& field,
                    const FeedbackPolicy& policy) {
  const int n = stencils.size();
  if (field.grid != stencils.grid || policy.grid != stencils.grid ||
      static_cast<int>(field.values.size()) != n ||
      static_cast<int>(policy.control.size()) != n)
    throw ShapeMismatch("apply: field/policy do not match the stencil grid");
  DiscreteField out;
  out.grid = stencils.grid;
  out.values.resize(static_cast<std::size_t>(n));
  parallel_for(0, n, [&](int i) {
    out.values[static_cast<std::size_t>(i)] = stencils.generator_row(
        i, policy.control[static_cast<std::size_t>(i)], field.values);
  });
  return out;
}

FeedbackPolicy extract_feedback(const StencilSet& stencils,
                                const DiscreteField& field) {
  const int n = stencils.size();
  if (field.grid != stencils.grid ||
      static_cast<int>(field.values.size()) != n)
    throw ShapeMismatch("extract_feedback: field does not match the grid");
  FeedbackPolicy policy;
  policy.grid = stencils.grid;
  policy.control.resize(static_cast<std::size_t>(n));
  parallel_for(0, n, [&](int i) {
    int best = 0;
    double best_v = stencils.bellman_candidate(i, 0, field.values);
    for (int m = 1; m < stencils.n_controls; ++m) {
      const double v = stencils.bellman_candidate(i, m, field.values);
      if (v > best_v) {
        best_v = v;
        best = m;
      }
    }
    policy.control[static_cast<std::size_t>(i)] = best;
  });
  return policy;
}

double bellman_residual_sup(const StencilSet& stencils,
                            const std::vector<double>& field, double lambda) {
  const int n = stencils.size();
  std::vector<double> local(static_cast<std::size_t>(n), 0.0);
  parallel_for(0, n, [&](int i) {
    double best = -std::numeric_limits<double>::infinity();
    for (int m = 0; m < stencils.n_controls; ++m)
      best = std::max(best, stencils.bellman_candidate(i, m, field));
    local[static_cast<std::size_t>(i)] =
        std::abs(lambda * field[static_cast<std::size_t>(i)] + best);
  });
  double sup = 0.0;
  for (double v : local) sup = std::max(sup, v);
  return sup;
}

double max_dropped_outflow(const StencilSet& stencils) {
  double worst = 0.0;
  for (double v : stencils.dropped) worst = std::max(worst, v);
  return worst;
}

}  // namespace ehjb
