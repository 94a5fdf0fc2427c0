#pragma once

#include <string>
#include <vector>

#include "ehjb/stencil.hpp"

namespace ehjb {

enum class CheckStatus { pass, fail, preconditions_unmet };
std::string to_string(CheckStatus s);

struct DiscountedSolution {
  DiscreteField field;
  FeedbackPolicy policy;
  double lambda = 0.0;
  double residual_sup = 0.0;
  int iterations = 0;
};

/// Howard policy iteration on the monotone stencils: alternates exact policy
/// evaluation (sparse LU with iterative refinement on (lambda I - L_pi) u =
/// l_pi) with pointwise policy improvement until the Bellman sup-residual
/// falls below max(tol, numeric floor). Throws MissingCost without a running
/// cost, NoConvergence past max_iter, SingularOperator if a policy system
/// fails to factor. Under the drop closure the solution is checked against
/// the sup-norm bound |u| <= (sup|l| + accepted residual) / lambda.
DiscountedSolution solve_discounted(const ProblemSpec& spec, const Grid& grid,
                                    double lambda, double tol = 1e-10,
                                    int max_iter = 100);

/// Same, on pre-assembled stencils (reused across lambdas), optionally warm
/// started from a previous policy.
DiscountedSolution solve_discounted(const StencilSet& stencils, double lambda,
                                    double tol = 1e-10, int max_iter = 100,
                                    const FeedbackPolicy* warm = nullptr);

struct VanishingDiscountSchedule {
  enum class Extrapolation { last, richardson };

  std::vector<double> lambdas;   // strictly decreasing, positive
  Vec x_tilde;                   // empty -> node nearest the interior anchor
  Extrapolation extrapolation = Extrapolation::richardson;

  /// Geometric ladder from `from` down to the first value <= `to`.
  static VanishingDiscountSchedule geometric(double from = 1e-1,
                                             double to = 1e-4,
                                             double ratio = 0.5);
};

struct LambdaRecord {
  double lambda = 0.0;
  double lambda_u_ref = 0.0;   // lambda * u_lambda(x_tilde)
  double core_variation = 0.0; // osc of u_lambda - u_lambda(x_tilde) on core
};

struct GrowthRow {
  double delta = 0.0;
  double ratio = 0.0;  // max over {0 < d < delta} of |f - f(ref)| / (-log d)
};

struct ErgodicSolution {
  double c = 0.0;
  DiscreteField chi;            // normalized: chi at the reference node is 0
  int ref_node = -1;            // grid node realizing x_tilde
  double extrapolation_order = 0.0;  // estimated order (0 when fallback=last)
  double cell_residual = 0.0;   // sup over core of |Bellman(chi) - c|
  std::vector<LambdaRecord> trace;
  std::vector<GrowthRow> growth_report;
};

/// Vanishing-discount limit: warm-started discounted solves along the
/// schedule, c = -(extrapolated limit of lambda u_lambda(x_tilde)) so a
/// constant cost l = L yields c = -L, chi = last u - u(x_tilde). Throws
/// ScheduleTooShort when the lambda*u(x_tilde) tail is not Cauchy within
/// tol, ConfigError for invalid schedules, NoConvergence when the cell
/// residual on the interior core {d >= collar/2} exceeds tol.
ErgodicSolution solve_ergodic(const ProblemSpec& spec, const Grid& grid,
                              const VanishingDiscountSchedule& schedule = {},
                              double tol = 1e-3);

/// Ring growth-ratio table: for each delta, max over interior nodes with
/// 0 < d < delta of |field - field(ref_node)| / (-log d). Deltas must be
/// positive, strictly decreasing and within the collar (BadDelta otherwise).
std::vector<GrowthRow> boundary_growth_report(const DiscreteField& field,
                                              const std::vector<double>& deltas,
                                              int ref_node = -1);

struct LiouvilleReport {
  CheckStatus status = CheckStatus::fail;
  bool is_constant = false;
  double max_deviation = 0.0;
  double c = 0.0;
  AssumptionReport gate;
};

/// Solves the ergodic problem with the cost forced to 0; any non-constant
/// chi violates the constancy theorem. Gated on check_condition(invariance):
/// status is preconditions_unmet when the gate fails.
LiouvilleReport check_liouville(const ProblemSpec& spec, const Grid& grid,
                                double tol = 1e-6);

struct UniquenessReport {
  bool passes = false;
  double c_difference = 0.0;
  double chi_variation = 0.0;  // osc of chi1 - chi2 over all nodes
};

/// Compares two ergodic solutions on the same grid (GridMismatch otherwise):
/// equal c and chi agreeing up to an additive constant, both within tol.
UniquenessReport check_uniqueness(const ErgodicSolution& a,
                                  const ErgodicSolution& b, double tol = 1e-3);

}  // namespace ehjb
