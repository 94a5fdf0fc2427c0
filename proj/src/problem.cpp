#include "ehjb/problem.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>

namespace ehjb {

namespace {

void require_symmetric(const Mat& X) {
  const double scale = std::max(1.0, X.cwiseAbs().maxCoeff());
  if ((X - X.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw ShapeMismatch("jet Hessian must be symmetric");
}

void require_in_closed_domain(const ProblemSpec& spec, const Vec& x) {
  if (signed_distance(spec.geom, x) < -1e-12)
    throw OutsideDomain("jet point lies outside the closed domain");
}

/// Interior sample lattice for pointwise conditions (sell, convexity).
std::vector<Vec> interior_samples(const DomainGeometry& geom, int per_axis) {
  std::vector<Vec> pts;
  if (geom.bounded()) {
    Vec lo, hi;
    bounding_box(geom, lo, hi);
    if (geom.dim == 1) {
      for (int i = 0; i < per_axis; ++i) {
        double t = (i + 0.5) / per_axis;
        Vec x = vec1(lo[0] + t * (hi[0] - lo[0]));
        if (signed_distance(geom, x) > 1e-9) pts.push_back(x);
      }
    } else {
      for (int i = 0; i < per_axis; ++i)
        for (int j = 0; j < per_axis; ++j) {
          Vec x = vec2(lo[0] + (i + 0.5) / per_axis * (hi[0] - lo[0]),
                       lo[1] + (j + 0.5) / per_axis * (hi[1] - lo[1]));
          if (signed_distance(geom, x) > 1e-9) pts.push_back(x);
        }
    }
  } else {
    for (int i = 0; i < per_axis; ++i)
      for (int j = 0; j < per_axis; ++j)
        pts.push_back(vec2(-geom.window + 2.0 * geom.window * (i + 0.5) / per_axis,
                           (j + 0.5) / per_axis));
  }
  return pts;
}

}  // namespace

int ControlSet::index_of(const std::string& label) const {
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == label) return static_cast<int>(i);
  throw ConfigError("unknown control label '" + label + "'");
}

double control_branch(const ProblemSpec& spec, const Jet& jet, int control) {
  const Vec& alpha = spec.controls[control];
  const Vec b = spec.drift(jet.x, alpha);
  const Mat a = spec.diffusion(jet.x, alpha);
  return -b.dot(jet.p) - a.cwiseProduct(jet.X).sum();
}

HjbValue hjb_value(const ProblemSpec& spec, const Jet& jet) {
  if (spec.controls.size() == 0)
    throw EmptyControlSet("hjb_value needs at least one control");
  require_in_closed_domain(spec, jet.x);
  require_symmetric(jet.X);
  HjbValue best;
  best.value = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < spec.controls.size(); ++i) {
    double v = control_branch(spec, jet, i);
    if (v > best.value) {
      best.value = v;
      best.argmax = i;
    }
  }
  return best;
}

double hamiltonian_value(const ProblemSpec& spec, const Jet& jet) {
  if (!spec.has_cost())
    throw MissingCost("hamiltonian_value needs a running cost");
  if (spec.controls.size() == 0)
    throw EmptyControlSet("hamiltonian_value needs at least one control");
  require_in_closed_domain(spec, jet.x);
  require_symmetric(jet.X);
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < spec.controls.size(); ++i) {
    double v = control_branch(spec, jet, i) -
               spec.running_cost(jet.x, spec.controls[i]);
    best = std::max(best, v);
  }
  return best;
}

Barrier Barrier::pow_neg(double kappa) {
  if (!(kappa > 0.0)) throw InvalidBarrier("pow_neg needs kappa > 0");
  Barrier b;
  b.kind = Kind::pow_neg;
  b.kappa = kappa;
  return b;
}

Barrier Barrier::pow_pos(double kappa) {
  if (!(kappa > 0.0)) throw InvalidBarrier("pow_pos needs kappa > 0");
  Barrier b;
  b.kind = Kind::pow_pos;
  b.kappa = kappa;
  return b;
}

Barrier Barrier::shifted_log(double eta) {
  if (!(eta > 0.0)) throw InvalidBarrier("shifted_log needs eta > 0");
  Barrier b;
  b.kind = Kind::shifted_log;
  b.eta = eta;
  return b;
}

Barrier Barrier::exit_barrier(double k, double lambda, Vec anchor) {
  if (!(k > 0.0) || !(lambda > 0.0))
    throw InvalidBarrier("exit_barrier needs k > 0 and lambda > 0");
  Barrier b;
  b.kind = Kind::exit_barrier;
  b.k = k;
  b.lambda = lambda;
  b.anchor = std::move(anchor);
  return b;
}

double barrier_value(const DomainGeometry& geom, const Vec& x,
                     const Barrier& barrier) {
  const double d = signed_distance(geom, x);
  switch (barrier.kind) {
    case Barrier::Kind::neg_log_d:
      return -std::log(d);
    case Barrier::Kind::log_d:
      return std::log(d);
    case Barrier::Kind::pow_neg:
      return std::pow(d, -barrier.kappa);
    case Barrier::Kind::pow_pos:
      return std::pow(d, barrier.kappa);
    case Barrier::Kind::shifted_log:
      return -std::log(d + barrier.eta);
    case Barrier::Kind::exit_barrier: {
      const double g = d + barrier.lambda * (x - barrier.anchor).squaredNorm();
      return 1.0 - std::exp(-barrier.k * g);
    }
  }
  throw InvalidBarrier("unknown barrier kind");
}

Jet barrier_jet(const DomainGeometry& geom, const Vec& x,
                const Barrier& barrier) {
  const DistanceJet dj = distance_jet(geom, x);
  const double d = dj.d;
  if (barrier.kind != Barrier::Kind::exit_barrier && !(d > 0.0))
    throw OutsideCollar("distance-power barriers need d(x) > 0");

  Jet jet;
  jet.x = x;
  if (barrier.kind == Barrier::Kind::exit_barrier) {
    if (barrier.anchor.size() != x.size())
      throw ShapeMismatch("exit barrier anchor dimension mismatch");
    const Vec rel = x - barrier.anchor;
    const double g = d + barrier.lambda * rel.squaredNorm();
    const double e = std::exp(-barrier.k * g);
    const Vec Dg = dj.grad + 2.0 * barrier.lambda * rel;
    const Mat D2g =
        dj.hess + 2.0 * barrier.lambda * Mat::Identity(x.size(), x.size());
    jet.p = barrier.k * e * Dg;
    // Materialize the outer product before scaling; Eigen folds a scalar
    // factor into one side of a product, which rounds the triangles apart.
    const Mat DgDg = Dg * Dg.transpose();
    jet.X = barrier.k * e * D2g - barrier.k * barrier.k * e * DgDg;
    return jet;
  }

  // Pure functions of d: chain rule with f'(d), f''(d).
  double f1 = 0.0, f2 = 0.0;
  switch (barrier.kind) {
    case Barrier::Kind::neg_log_d:
      f1 = -1.0 / d;
      f2 = 1.0 / (d * d);
      break;
    case Barrier::Kind::log_d:
      f1 = 1.0 / d;
      f2 = -1.0 / (d * d);
      break;
    case Barrier::Kind::pow_neg:
      f1 = -barrier.kappa * std::pow(d, -barrier.kappa - 1.0);
      f2 = barrier.kappa * (barrier.kappa + 1.0) *
           std::pow(d, -barrier.kappa - 2.0);
      break;
    case Barrier::Kind::pow_pos:
      f1 = barrier.kappa * std::pow(d, barrier.kappa - 1.0);
      f2 = barrier.kappa * (barrier.kappa - 1.0) *
           std::pow(d, barrier.kappa - 2.0);
      break;
    case Barrier::Kind::shifted_log:
      f1 = -1.0 / (d + barrier.eta);
      f2 = 1.0 / ((d + barrier.eta) * (d + barrier.eta));
      break;
    default:
      throw InvalidBarrier("unknown barrier kind");
  }
  jet.p = f1 * dj.grad;
  // Materialize the outer product before scaling; Eigen folds a scalar
  // factor into one side of a product, which rounds the triangles apart.
  const Mat outer = dj.grad * dj.grad.transpose();
  jet.X = f1 * dj.hess + f2 * outer;
  return jet;
}

MarginReport lyapunov_margin(const ProblemSpec& spec, const Barrier& barrier,
                             double delta, double M, int density) {
  if (barrier.kind == Barrier::Kind::exit_barrier)
    throw InvalidBarrier(
        "exit_barrier is a jet fixture, not a Lyapunov certificate kind");
  if (!(delta > 0.0) || delta > spec.geom.smoothness_radius)
    throw BadDelta("lyapunov ring width must lie in (0, smoothness_radius]");
  const auto pts = ring_points(spec.geom, delta, density);
  MarginReport report;
  report.samples = static_cast<int>(pts.size());
  report.min_margin = std::numeric_limits<double>::infinity();
  for (const Vec& x : pts) {
    const Jet jet = barrier_jet(spec.geom, x, barrier);
    const double F = hjb_value(spec, jet).value;
    const double margin = barrier.supersolution_kind() ? F - M : -M - F;
    if (margin < report.min_margin) {
      report.min_margin = margin;
      report.worst_point = x;
    }
  }
  report.passes = report.min_margin > 0.0;
  return report;
}

std::string condition_name(Condition c) {
  switch (c) {
    case Condition::irrelevant: return "irrelevant";
    case Condition::invariance: return "invariance";
    case Condition::relevant: return "relevant";
    case Condition::sell: return "sell";
    case Condition::compact_convexity: return "compact_convexity";
  }
  return "unknown";
}

namespace {

/// Drift clause slack b.Dd + tr(a D^2 d) - k d^gamma at a ring point.
double drift_slack(const ProblemSpec& spec, const Vec& x, const DistanceJet& dj,
                   int control, double k, double gamma) {
  const Vec& alpha = spec.controls[control];
  const Vec b = spec.drift(x, alpha);
  const Mat a = spec.diffusion(x, alpha);
  return b.dot(dj.grad) + a.cwiseProduct(dj.hess).sum() -
         k * std::pow(dj.d, gamma);
}

double sigma_normal_norm(const ProblemSpec& spec, const Vec& x,
                         const Vec& normal, int control) {
  const Mat s = spec.sigma(x, spec.controls[control]);
  return (s.transpose() * normal).norm();
}

AssumptionReport check_irrelevant_or_invariance(const ProblemSpec& spec,
                                                Condition cond,
                                                const ConditionParams& params,
                                                double delta) {
  AssumptionReport rep;
  rep.condition = cond;
  rep.delta = delta;
  rep.k = params.k;
  rep.gamma = params.gamma;

  const auto bpts = boundary_points(spec.geom, params.boundary_count);
  const auto ring = ring_points(spec.geom, delta, params.ring_levels);
  std::vector<DistanceJet> ring_jets;
  ring_jets.reserve(ring.size());
  for (const Vec& x : ring) ring_jets.push_back(distance_jet(spec.geom, x));

  const bool need_all_controls = (cond == Condition::invariance);
  rep.worst_margin = std::numeric_limits<double>::infinity();

  // Clause 1 (noise degeneracy at the boundary).
  for (const Vec& xb : bpts) {
    const DistanceJet dj = distance_jet(spec.geom, xb);
    double best_sigma = std::numeric_limits<double>::infinity();
    double worst_sigma = 0.0;
    bool any_degenerate = false;
    for (int m = 0; m < spec.controls.size(); ++m) {
      const double s = sigma_normal_norm(spec, xb, dj.grad, m);
      best_sigma = std::min(best_sigma, s);
      worst_sigma = std::max(worst_sigma, s);
      if (s <= params.sigma_tol) any_degenerate = true;
    }
    const bool clause1_fails =
        need_all_controls ? (worst_sigma > params.sigma_tol) : !any_degenerate;
    if (clause1_fails) {
      const double viol = need_all_controls ? worst_sigma : best_sigma;
      if (-viol < rep.worst_margin) {
        rep.worst_margin = -viol;
        rep.worst_point = xb;
        rep.detail = "noise degeneracy clause fails at a boundary point "
                     "(|sigma^T Dd| = " + std::to_string(viol) + ")";
      }
    }
  }
  if (rep.worst_margin < 0.0) {
    rep.holds = false;
    return rep;
  }

  // Clause 2 (inward drift lower bound on the ring).
  if (need_all_controls) {
    for (std::size_t i = 0; i < ring.size(); ++i)
      for (int m = 0; m < spec.controls.size(); ++m) {
        const double s = drift_slack(spec, ring[i], ring_jets[i], m,
                                     params.k, params.gamma);
        if (s < rep.worst_margin) {
          rep.worst_margin = s;
          rep.worst_point = ring[i];
          if (s <= 0.0)
            rep.detail = "drift clause fails on the ring for control " +
                         std::to_string(m);
        }
      }
  } else {
    // Existential form: each boundary point needs one control that both
    // degenerates there and satisfies the drift bound near it.
    for (const Vec& xb : bpts) {
      const DistanceJet djb = distance_jet(spec.geom, xb);
      double point_margin = -std::numeric_limits<double>::infinity();
      Vec point_witness = xb;
      for (int m = 0; m < spec.controls.size(); ++m) {
        if (sigma_normal_norm(spec, xb, djb.grad, m) > params.sigma_tol)
          continue;
        double local_min = std::numeric_limits<double>::infinity();
        Vec local_arg = xb;
        for (std::size_t i = 0; i < ring.size(); ++i) {
          if ((ring[i] - xb).norm() >= delta) continue;
          const double s = drift_slack(spec, ring[i], ring_jets[i], m,
                                       params.k, params.gamma);
          if (s < local_min) {
            local_min = s;
            local_arg = ring[i];
          }
        }
        if (local_min == std::numeric_limits<double>::infinity()) continue;
        if (local_min > point_margin) {
          point_margin = local_min;
          point_witness = local_arg;
        }
      }
      if (point_margin == -std::numeric_limits<double>::infinity()) {
        // No degenerate control at all; record the sigma violation size.
        double best_sigma = std::numeric_limits<double>::infinity();
        for (int m = 0; m < spec.controls.size(); ++m)
          best_sigma = std::min(best_sigma,
                                sigma_normal_norm(spec, xb, djb.grad, m));
        point_margin = -best_sigma;
        point_witness = xb;
      }
      if (point_margin < rep.worst_margin) {
        rep.worst_margin = point_margin;
        rep.worst_point = point_witness;
        if (point_margin <= 0.0)
          rep.detail =
              "no control satisfies both clauses near a boundary point";
      }
    }
  }
  rep.holds = rep.worst_margin > 0.0;
  if (rep.holds) rep.detail = "certificate holds on the sampled ring";
  return rep;
}

}  // namespace

AssumptionReport check_condition(const ProblemSpec& spec, Condition condition,
                                 const ConditionParams& params) {
  if (spec.controls.size() == 0)
    throw EmptyControlSet("check_condition needs at least one control");
  const double collar = spec.geom.smoothness_radius;
  double delta = params.delta > 0.0 ? params.delta : 0.5 * collar;
  if (delta > collar) throw BadDelta("condition ring exceeds the collar");
  if (condition == Condition::irrelevant || condition == Condition::invariance) {
    if (!(params.gamma < 2.0 * spec.reg.beta - 1.0))
      throw ConfigError("drift exponent must satisfy gamma < 2 beta - 1");
    if (!(params.k > 0.0)) throw ConfigError("drift constant k must be > 0");
  }

  switch (condition) {
    case Condition::irrelevant:
    case Condition::invariance:
      return check_irrelevant_or_invariance(spec, condition, params, delta);

    case Condition::relevant: {
      if (!spec.has_terminal_cost())
        throw MissingTerminalCost("`relevant` needs a terminal cost");
      AssumptionReport rep;
      rep.condition = condition;
      rep.delta = delta;
      const auto bpts = boundary_points(spec.geom, params.boundary_count);
      double min_phi = std::numeric_limits<double>::infinity();
      Vec argmin;
      for (const Vec& xb : bpts) {
        const double v = spec.terminal_cost(xb);
        if (v < min_phi) {
          min_phi = v;
          argmin = xb;
        }
      }
      const DistanceJet dj = distance_jet(spec.geom, argmin);
      double margin = -std::numeric_limits<double>::infinity();
      for (int m = 0; m < spec.controls.size(); ++m) {
        const double s = sigma_normal_norm(spec, argmin, dj.grad, m);
        const double outward = -drift_slack(spec, argmin, dj, m, 0.0, 0.0);
        margin = std::max(margin, std::max(s, outward));
      }
      rep.worst_margin = margin;
      rep.worst_point = argmin;
      rep.holds = margin > params.sigma_tol;
      rep.detail = rep.holds
                       ? "terminal-cost minimizer is attainable"
                       : "no control makes the minimizer attainable";
      return rep;
    }

    case Condition::sell: {
      AssumptionReport rep;
      rep.condition = condition;
      rep.worst_margin = std::numeric_limits<double>::infinity();
      Eigen::SelfAdjointEigenSolver<Mat> eig;
      for (const Vec& x : interior_samples(spec.geom, 33))
        for (int m = 0; m < spec.controls.size(); ++m) {
          eig.compute(spec.diffusion(x, spec.controls[m]),
                      Eigen::EigenvaluesOnly);
          const double lo = eig.eigenvalues().minCoeff();
          if (lo < rep.worst_margin) {
            rep.worst_margin = lo;
            rep.worst_point = x;
          }
        }
      rep.holds = rep.worst_margin > 0.0;
      rep.detail = rep.holds ? "diffusion positive definite on interior samples"
                             : "diffusion degenerates at an interior point";
      return rep;
    }

    case Condition::compact_convexity: {
      // Finite-control certificate: every pairwise midpoint of the
      // (b, a)(x, A) set must itself be (near) a member.
      AssumptionReport rep;
      rep.condition = condition;
      rep.worst_margin = 0.0;
      const int nc = spec.controls.size();
      for (const Vec& x : interior_samples(spec.geom, 9)) {
        std::vector<Vec> bs;
        std::vector<Mat> as;
        for (int m = 0; m < nc; ++m) {
          bs.push_back(spec.drift(x, spec.controls[m]));
          as.push_back(spec.diffusion(x, spec.controls[m]));
        }
        for (int i = 0; i < nc; ++i)
          for (int j = i + 1; j < nc; ++j) {
            const Vec mb = 0.5 * (bs[i] + bs[j]);
            const Mat ma = 0.5 * (as[i] + as[j]);
            double dist = std::numeric_limits<double>::infinity();
            for (int m = 0; m < nc; ++m)
              dist = std::min(dist, (bs[m] - mb).norm() + (as[m] - ma).norm());
            if (-dist < rep.worst_margin ||
                (rep.worst_point.size() == 0 && dist > 0.0)) {
              rep.worst_margin = std::min(rep.worst_margin, -dist);
              rep.worst_point = x;
            }
          }
      }
      rep.holds = rep.worst_margin > -1e-9;
      rep.detail = rep.holds ? "finite midpoint certificate holds"
                             : "pairwise midpoints leave the coefficient set";
      return rep;
    }
  }
  throw ConfigError("unknown condition");
}

}  // namespace ehjb
