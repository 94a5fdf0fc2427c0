#pragma once

#include <functional>
#include <vector>

#include "ehjb/grid.hpp"
#include "ehjb/problem.hpp"

namespace ehjb {

/// What happens to couplings that point at non-interior lattice cells.
///   drop:      the coupling is removed together with its diagonal share, so
///              the discrete chain never leaves the grid (matches degenerate
///              diffusion + inward drift at the boundary).
///   dirichlet: the coupling is kept; its mass multiplies a prescribed
///              boundary value (terminal cost at the projected exit point)
///              and moves to the right-hand side.
enum class Closure { drop, dirichlet };

/// Monotone upwind discretization of the controlled generator
/// L_a u = b.Du + tr(a D^2 u) with diagonal a: per axis the second
/// difference gets weight a_kk/h^2 and the drift is upwinded by sign
/// (b^+ forward, b^- backward), so all off-diagonal weights are >= 0.
/// Entries are packed per (node, control) with 2*dim directed weights in
/// grid neighbor order [x-, x+, y-, y+].
struct StencilSet {
  const Grid* grid = nullptr;
  int n_controls = 0;
  int dim = 1;
  Closure closure = Closure::drop;
  bool has_cost = false;

  std::vector<double> weights;   // size() * n_controls * 2 * dim
  std::vector<double> diag;      // size() * n_controls: sum of retained mass
  std::vector<double> cost;      // size() * n_controls (0 without a cost)
  std::vector<double> ghost_rhs; // size() * n_controls: sum w * phi(exit point)
  std::vector<double> dropped;   // size() * n_controls: mass removed by `drop`

  int size() const { return grid ? grid->size() : 0; }
  std::size_t entry(int node, int control) const {
    return static_cast<std::size_t>(node) * static_cast<std::size_t>(n_controls) +
           static_cast<std::size_t>(control);
  }
  const double* weights_at(int node, int control) const {
    return weights.data() + entry(node, control) * 2 * static_cast<std::size_t>(dim);
  }

  /// Generator action L_alpha u at one node under one control.
  double generator_row(int node, int control,
                       const std::vector<double>& field) const;
  /// Bellman candidate -L_alpha u - l(x, alpha) at one node (dirichlet
  /// closure folds the boundary mass in).
  double bellman_candidate(int node, int control,
                           const std::vector<double>& field) const;
};

/// Assembles the stencils for every (node, control) pair. Throws
/// NonDiagonalDiffusion when some a(x, alpha) has off-diagonal entries,
/// MissingTerminalCost for dirichlet closure without a terminal cost.
StencilSet assemble(const ProblemSpec& spec, const Grid& grid,
                    Closure closure = Closure::drop);

/// Discrete generator action L_pi u under a node-wise policy.
DiscreteField apply(const StencilSet& stencils, const DiscreteField& field,
                    const FeedbackPolicy& policy);

/// Pointwise policy improvement: per node the control maximizing the
/// Bellman candidate, ties to the lowest index.
FeedbackPolicy extract_feedback(const StencilSet& stencils,
                                const DiscreteField& field);

/// sup_i |lambda u_i + max_alpha(-L_alpha u - l)_i|.
double bellman_residual_sup(const StencilSet& stencils,
                            const std::vector<double>& field, double lambda);

/// Largest coupling mass removed by the `drop` closure over boundary-adjacent
/// nodes; exactly 0 when the discrete chain is invariant.
double max_dropped_outflow(const StencilSet& stencils);

}  // namespace ehjb
