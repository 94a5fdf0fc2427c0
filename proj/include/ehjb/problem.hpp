#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ehjb/geometry.hpp"
#include "ehjb/types.hpp"

namespace ehjb {

/// Finite set of admissible control values. The index order is part of the
/// contract: argmax ties are broken toward the lowest index. Labels are
/// optional human-readable names aligned with points.
struct ControlSet {
  std::vector<Vec> points;
  std::vector<std::string> labels;

  int size() const { return static_cast<int>(points.size()); }
  const Vec& operator[](int i) const { return points[static_cast<std::size_t>(i)]; }
  int index_of(const std::string& label) const;
};

struct Regularity {
  double B = 1.0;      // Hoelder seminorm bound of sigma
  double beta = 1.0;   // Hoelder exponent of sigma in (1/2, 1]
  std::string drift_modulus = "lipschitz";
};

/// Controlled-diffusion problem data on a bounded invariant domain.
/// Convention: the state follows dX = b dt + sqrt(2) sigma dW, so the
/// generator is b.D + tr(a D^2) with a = sigma sigma^T.
struct ProblemSpec {
  std::string name;
  DomainGeometry geom;
  ControlSet controls;
  int noise_dim = 1;
  std::function<Vec(const Vec&, const Vec&)> drift;             // b(x, alpha)
  std::function<Mat(const Vec&, const Vec&)> sigma;             // n x noise_dim
  std::function<double(const Vec&, const Vec&)> running_cost;   // optional
  std::function<double(const Vec&)> terminal_cost;              // optional
  Regularity reg;

  Mat diffusion(const Vec& x, const Vec& alpha) const {
    Mat s = sigma(x, alpha);
    return s * s.transpose();
  }
  bool has_cost() const { return static_cast<bool>(running_cost); }
  bool has_terminal_cost() const { return static_cast<bool>(terminal_cost); }
};

struct HjbValue {
  double value = 0.0;
  int argmax = -1;
};

/// Generator action -b.p - tr(a X) of one control on a jet.
double control_branch(const ProblemSpec& spec, const Jet& jet, int control);

/// F[u](x) = sup_alpha(-b.Du - tr(a D^2 u)) evaluated on a jet, with the
/// maximizing control index (first index on ties). Throws OutsideDomain when
/// jet.x is outside the closed domain, EmptyControlSet on an empty A.
HjbValue hjb_value(const ProblemSpec& spec, const Jet& jet);

/// H(x, p, X) = sup_alpha(-b.p - tr(a X) - l). Throws MissingCost when the
/// spec has no running cost.
double hamiltonian_value(const ProblemSpec& spec, const Jet& jet);

/// Barrier functions of the signed distance used as Lyapunov certificates.
struct Barrier {
  enum class Kind {
    neg_log_d,    // -log d              (strict supersolution candidate)
    log_d,        // log d               (strict subsolution candidate)
    pow_neg,      // d^-kappa            (supersolution candidate)
    pow_pos,      // d^kappa             (subsolution candidate)
    shifted_log,  // -log(d + eta)       (weak barrier for gamma = 1)
    exit_barrier  // 1 - exp(-k(d + lambda |x - anchor|^2))
  };

  Kind kind = Kind::neg_log_d;
  double kappa = 1.0;   // pow_neg / pow_pos
  double eta = 0.0;     // shifted_log
  double k = 1.0;       // exit_barrier
  double lambda = 1.0;  // exit_barrier
  Vec anchor;           // exit_barrier

  static Barrier neg_log_d() { return {}; }
  static Barrier log_d() {
    Barrier b;
    b.kind = Kind::log_d;
    return b;
  }
  static Barrier pow_neg(double kappa);
  static Barrier pow_pos(double kappa);
  static Barrier shifted_log(double eta);
  static Barrier exit_barrier(double k, double lambda, Vec anchor);

  bool supersolution_kind() const {
    return kind == Kind::neg_log_d || kind == Kind::pow_neg ||
           kind == Kind::shifted_log;
  }
  bool subsolution_kind() const {
    return kind == Kind::log_d || kind == Kind::pow_pos;
  }
};

/// Barrier scalar value at x (used by finite-difference verification).
double barrier_value(const DomainGeometry& geom, const Vec& x,
                     const Barrier& barrier);

/// Exact jet of the barrier via the chain rule on the distance jet.
/// Requires 0 < d(x) and x in the collar (throws OutsideCollar otherwise);
/// the shifted_log and exit_barrier kinds stay finite down to d = 0.
Jet barrier_jet(const DomainGeometry& geom, const Vec& x, const Barrier& barrier);

struct MarginReport {
  bool passes = false;
  double min_margin = 0.0;  // worst slack of the defining inequality
  Vec worst_point;
  int samples = 0;
};

/// Strict super/subsolution certificate on the ring {0 < d < delta}:
/// supersolution kinds need F[w] - M > 0 everywhere, subsolution kinds need
/// -M - F[w] > 0. Samples ring_points(geom, delta, density).
MarginReport lyapunov_margin(const ProblemSpec& spec, const Barrier& barrier,
                             double delta, double M, int density = 64);

enum class Condition {
  irrelevant,          // some control per boundary point degenerates + pushes in
  invariance,          // every control degenerates + pushes in
  relevant,            // the terminal-cost minimizer is attainable
  sell,                // a > 0 on the interior (strong maximum principle)
  compact_convexity    // (b, a)(x, A) convex as a finite midpoint certificate
};

std::string condition_name(Condition c);

struct ConditionParams {
  double delta = 0.0;   // ring width (0 -> collar / 2)
  double k = 1e-6;      // drift lower-bound constant
  double gamma = 0.0;   // drift lower-bound exponent, needs gamma < 2 beta - 1
  int boundary_count = 256;
  int ring_levels = 64;
  double sigma_tol = 1e-9;  // |sigma^T Dd| threshold for "degenerate"
};

struct AssumptionReport {
  Condition condition = Condition::invariance;
  bool holds = false;
  double delta = 0.0, k = 0.0, gamma = 0.0;  // certificate parameters used
  double worst_margin = 0.0;                 // min slack over checked samples
  Vec worst_point;
  std::string detail;
};

/// Sampling certificate for the structural conditions. Never throws on a
/// falsified condition; it reports holds = false with the worst witness.
/// Throws MissingTerminalCost for `relevant` without a terminal cost, and
/// BadDelta/ShapeMismatch on malformed parameters.
AssumptionReport check_condition(const ProblemSpec& spec, Condition condition,
                                 const ConditionParams& params = {});

}  // namespace ehjb
