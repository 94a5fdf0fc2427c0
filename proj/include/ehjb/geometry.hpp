#pragma once

#include <vector>

#include "ehjb/types.hpp"

namespace ehjb {

/// Bounded invariant domains with closed-form signed distance. The signed
/// distance d is positive inside, negative outside, zero on the boundary;
/// within the collar |d| < smoothness_radius it is twice differentiable and
/// its gradient is the unit inward normal.
struct DomainGeometry {
  enum class Shape { interval, ball, annulus, halfplane_patch };

  Shape shape = Shape::interval;
  int dim = 1;
  Vec center;                     // ball / annulus
  double lo = 0.0, hi = 0.0;      // interval endpoints
  double radius = 0.0;            // ball
  double r_inner = 0.0, r_outer = 0.0;  // annulus
  double window = 0.5;            // halfplane patch sampling half-width
  double smoothness_radius = 0.0;  // collar width where the jet is valid

  static DomainGeometry interval(double a, double b);
  static DomainGeometry ball(Vec center, double radius);
  static DomainGeometry annulus(Vec center, double r_inner, double r_outer);
  /// Local model of a domain whose boundary is flat near the origin:
  /// d(x, y) = y on the sampling window [-window, window] x (0, inf).
  static DomainGeometry halfplane_patch(double window = 0.5);

  /// True for shapes that can be covered by a bounded grid.
  bool bounded() const { return shape != Shape::halfplane_patch; }
};

struct DistanceJet {
  double d = 0.0;
  Vec grad;
  Mat hess;
};

double signed_distance(const DomainGeometry& geom, const Vec& x);

/// Exact (value, gradient, Hessian) of the signed distance. Throws
/// OutsideCollar when |d(x)| >= smoothness_radius or x sits on a medial
/// point where d is not differentiable.
DistanceJet distance_jet(const DomainGeometry& geom, const Vec& x);

bool in_collar(const DomainGeometry& geom, const Vec& x);

/// Deterministic sample of the boundary ring {0 < d(x) < delta}. Levels of d
/// mix an outer-edge value, a uniform band and dyadic refinement toward the
/// boundary, `density` levels total; 2D shapes take 4*density points per
/// level. Throws BadDelta when delta is outside (0, smoothness_radius].
std::vector<Vec> ring_points(const DomainGeometry& geom, double delta,
                             int density);

/// Deterministic boundary sample (interval: both endpoints; circles: `count`
/// angles; halfplane patch: `count` abscissae across the window).
std::vector<Vec> boundary_points(const DomainGeometry& geom, int count);

/// Closest boundary point (exact for these shapes).
Vec project_to_boundary(const DomainGeometry& geom, const Vec& x);

/// Interior anchor used as the default reference point: deepest interior
/// point for interval/ball, a mid-ring point for the annulus.
Vec interior_anchor(const DomainGeometry& geom);

/// Axis-aligned bounding box; throws UnsupportedShape for unbounded patches.
void bounding_box(const DomainGeometry& geom, Vec& lo, Vec& hi);

}  // namespace ehjb
