#include "ehjb/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace ehjb {

namespace {
constexpr double kMedialTol = 1e-12;

void require_dim(const DomainGeometry& geom, const Vec& x) {
  if (x.size() != geom.dim)
    throw ShapeMismatch("point has dimension " + std::to_string(x.size()) +
                        ", domain expects " + std::to_string(geom.dim));
}
}  // namespace

DomainGeometry DomainGeometry::interval(double a, double b) {
  if (!(a < b)) throw ShapeMismatch("interval needs a < b");
  DomainGeometry g;
  g.shape = Shape::interval;
  g.dim = 1;
  g.lo = a;
  g.hi = b;
  g.smoothness_radius = 0.5 * (b - a);
  return g;
}

DomainGeometry DomainGeometry::ball(Vec center, double radius) {
  if (!(radius > 0.0)) throw ShapeMismatch("ball needs radius > 0");
  DomainGeometry g;
  g.shape = Shape::ball;
  g.dim = static_cast<int>(center.size());
  g.center = std::move(center);
  g.radius = radius;
  g.smoothness_radius = 0.5 * radius;
  return g;
}

DomainGeometry DomainGeometry::annulus(Vec center, double r_inner,
                                       double r_outer) {
  if (!(0.0 < r_inner && r_inner < r_outer))
    throw ShapeMismatch("annulus needs 0 < r_inner < r_outer");
  DomainGeometry g;
  g.shape = Shape::annulus;
  g.dim = static_cast<int>(center.size());
  g.center = std::move(center);
  g.r_inner = r_inner;
  g.r_outer = r_outer;
  g.smoothness_radius = 0.5 * (r_outer - r_inner);
  return g;
}

DomainGeometry DomainGeometry::halfplane_patch(double window) {
  if (!(window > 0.0)) throw ShapeMismatch("halfplane patch needs window > 0");
  DomainGeometry g;
  g.shape = Shape::halfplane_patch;
  g.dim = 2;
  g.window = window;
  g.smoothness_radius = 1.0;
  return g;
}

double signed_distance(const DomainGeometry& geom, const Vec& x) {
  require_dim(geom, x);
  switch (geom.shape) {
    case DomainGeometry::Shape::interval:
      return std::min(x[0] - geom.lo, geom.hi - x[0]);
    case DomainGeometry::Shape::ball:
      return geom.radius - (x - geom.center).norm();
    case DomainGeometry::Shape::annulus: {
      double r = (x - geom.center).norm();
      return std::min(r - geom.r_inner, geom.r_outer - r);
    }
    case DomainGeometry::Shape::halfplane_patch:
      return x[1];
  }
  throw UnsupportedShape("unknown shape");
}

bool in_collar(const DomainGeometry& geom, const Vec& x) {
  return std::fabs(signed_distance(geom, x)) < geom.smoothness_radius;
}

DistanceJet distance_jet(const DomainGeometry& geom, const Vec& x) {
  require_dim(geom, x);
  const double d = signed_distance(geom, x);
  if (!(std::fabs(d) < geom.smoothness_radius))
    throw OutsideCollar("point at signed distance " + std::to_string(d) +
                        " is outside the collar of width " +
                        std::to_string(geom.smoothness_radius));
  DistanceJet jet;
  jet.d = d;
  jet.grad = Vec::Zero(geom.dim);
  jet.hess = Mat::Zero(geom.dim, geom.dim);
  switch (geom.shape) {
    case DomainGeometry::Shape::interval: {
      // Nearer endpoint decides the branch; the midpoint (medial axis) is
      // excluded because d there equals the collar width.
      jet.grad[0] = (x[0] - geom.lo < geom.hi - x[0]) ? 1.0 : -1.0;
      return jet;
    }
    case DomainGeometry::Shape::ball: {
      const Vec rel = x - geom.center;
      const double r = rel.norm();
      if (r < kMedialTol)
        throw OutsideCollar("distance jet undefined at the ball center");
      const Vec unit = rel / r;
      jet.grad = -unit;
      jet.hess = -(Mat::Identity(geom.dim, geom.dim) - unit * unit.transpose()) / r;
      return jet;
    }
    case DomainGeometry::Shape::annulus: {
      const Vec rel = x - geom.center;
      const double r = rel.norm();
      if (r < kMedialTol)
        throw OutsideCollar("distance jet undefined at the annulus center");
      const Vec unit = rel / r;
      const Mat tangent =
          (Mat::Identity(geom.dim, geom.dim) - unit * unit.transpose()) / r;
      if (r < 0.5 * (geom.r_inner + geom.r_outer)) {
        jet.grad = unit;
        jet.hess = tangent;
      } else {
        jet.grad = -unit;
        jet.hess = -tangent;
      }
      return jet;
    }
    case DomainGeometry::Shape::halfplane_patch: {
      jet.grad[1] = 1.0;
      return jet;
    }
  }
  throw UnsupportedShape("unknown shape");
}

namespace {

/// Exactly `density` distinct signed-distance levels in (0, delta):
/// one outer-edge level, a uniform band over (delta/4, delta) and dyadic
/// refinement delta/4, delta/8, ... toward the boundary.
std::vector<double> ring_levels(double delta, int density) {
  std::vector<double> lev;
  lev.reserve(static_cast<std::size_t>(density));
  lev.push_back(delta * (1.0 - 1e-9));
  int n_dyadic = std::min(density >= 6 ? density / 3 : 0, 26);
  int n_uniform = density - 1 - n_dyadic;
  if (n_uniform < 0) n_uniform = 0;
  for (int j = 1; j <= n_uniform; ++j)
    lev.push_back(delta * (0.25 + 0.75 * j / (n_uniform + 1.0)));
  for (int m = 2; m < 2 + n_dyadic; ++m) lev.push_back(std::ldexp(delta, -m));
  std::sort(lev.begin(), lev.end(), std::greater<>());
  return lev;
}

std::vector<Vec> circle_points(const Vec& center, double r, int count) {
  std::vector<Vec> pts;
  pts.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    double theta = 2.0 * M_PI * k / count;
    pts.push_back(center + r * vec2(std::cos(theta), std::sin(theta)));
  }
  return pts;
}

}  // namespace

std::vector<Vec> ring_points(const DomainGeometry& geom, double delta,
                             int density) {
  if (!(delta > 0.0) || delta > geom.smoothness_radius)
    throw BadDelta("ring width must lie in (0, smoothness_radius]");
  if (density < 1) throw BadDelta("ring density must be >= 1");
  const auto levels = ring_levels(delta, density);
  std::vector<Vec> pts;
  switch (geom.shape) {
    case DomainGeometry::Shape::interval: {
      for (double d : levels) {
        pts.push_back(vec1(geom.lo + d));
        pts.push_back(vec1(geom.hi - d));
      }
      return pts;
    }
    case DomainGeometry::Shape::ball: {
      if (geom.dim == 1) {
        for (double d : levels) {
          pts.push_back(geom.center + vec1(geom.radius - d));
          pts.push_back(geom.center - vec1(geom.radius - d));
        }
        return pts;
      }
      const int n_ang = 4 * density;
      for (double d : levels) {
        auto circ = circle_points(geom.center, geom.radius - d, n_ang);
        pts.insert(pts.end(), circ.begin(), circ.end());
      }
      return pts;
    }
    case DomainGeometry::Shape::annulus: {
      const int n_ang = 4 * density;
      for (double d : levels) {
        auto inner = circle_points(geom.center, geom.r_inner + d, n_ang);
        auto outer = circle_points(geom.center, geom.r_outer - d, n_ang);
        pts.insert(pts.end(), inner.begin(), inner.end());
        pts.insert(pts.end(), outer.begin(), outer.end());
      }
      return pts;
    }
    case DomainGeometry::Shape::halfplane_patch: {
      const int n_x = 4 * density;
      for (double d : levels)
        for (int i = 0; i < n_x; ++i) {
          double t = n_x == 1 ? 0.5 : static_cast<double>(i) / (n_x - 1);
          pts.push_back(vec2(-geom.window + 2.0 * geom.window * t, d));
        }
      return pts;
    }
  }
  throw UnsupportedShape("unknown shape");
}

std::vector<Vec> boundary_points(const DomainGeometry& geom, int count) {
  if (count < 1) throw BadDelta("boundary sample count must be >= 1");
  switch (geom.shape) {
    case DomainGeometry::Shape::interval:
      return {vec1(geom.lo), vec1(geom.hi)};
    case DomainGeometry::Shape::ball:
      if (geom.dim == 1)
        return {geom.center - vec1(geom.radius), geom.center + vec1(geom.radius)};
      return circle_points(geom.center, geom.radius, count);
    case DomainGeometry::Shape::annulus: {
      auto pts = circle_points(geom.center, geom.r_inner, count);
      auto outer = circle_points(geom.center, geom.r_outer, count);
      pts.insert(pts.end(), outer.begin(), outer.end());
      return pts;
    }
    case DomainGeometry::Shape::halfplane_patch: {
      std::vector<Vec> pts;
      pts.reserve(static_cast<std::size_t>(count));
      for (int i = 0; i < count; ++i) {
        double t = count == 1 ? 0.5 : static_cast<double>(i) / (count - 1);
        pts.push_back(vec2(-geom.window + 2.0 * geom.window * t, 0.0));
      }
      return pts;
    }
  }
  throw UnsupportedShape("unknown shape");
}

Vec project_to_boundary(const DomainGeometry& geom, const Vec& x) {
  require_dim(geom, x);
  switch (geom.shape) {
    case DomainGeometry::Shape::interval:
      return vec1(x[0] - geom.lo < geom.hi - x[0] ? geom.lo : geom.hi);
    case DomainGeometry::Shape::ball: {
      const Vec rel = x - geom.center;
      const double r = rel.norm();
      if (r < kMedialTol) {
        Vec dir = Vec::Zero(geom.dim);
        dir[0] = 1.0;
        return geom.center + geom.radius * dir;
      }
      return geom.center + (geom.radius / r) * rel;
    }
    case DomainGeometry::Shape::annulus: {
      const Vec rel = x - geom.center;
      const double r = rel.norm();
      if (r < kMedialTol) {
        Vec dir = Vec::Zero(geom.dim);
        dir[0] = 1.0;
        return geom.center + geom.r_inner * dir;
      }
      const double target =
          (r - geom.r_inner < geom.r_outer - r) ? geom.r_inner : geom.r_outer;
      return geom.center + (target / r) * rel;
    }
    case DomainGeometry::Shape::halfplane_patch:
      return vec2(x[0], 0.0);
  }
  throw UnsupportedShape("unknown shape");
}

Vec interior_anchor(const DomainGeometry& geom) {
  switch (geom.shape) {
    case DomainGeometry::Shape::interval:
      return vec1(0.5 * (geom.lo + geom.hi));
    case DomainGeometry::Shape::ball:
      return geom.center;
    case DomainGeometry::Shape::annulus: {
      Vec dir = Vec::Zero(geom.dim);
      dir[0] = 1.0;
      return geom.center + 0.5 * (geom.r_inner + geom.r_outer) * dir;
    }
    case DomainGeometry::Shape::halfplane_patch:
      return vec2(0.0, 0.5);
  }
  throw UnsupportedShape("unknown shape");
}

void bounding_box(const DomainGeometry& geom, Vec& lo, Vec& hi) {
  switch (geom.shape) {
    case DomainGeometry::Shape::interval:
      lo = vec1(geom.lo);
      hi = vec1(geom.hi);
      return;
    case DomainGeometry::Shape::ball:
      lo = geom.center.array() - geom.radius;
      hi = geom.center.array() + geom.radius;
      return;
    case DomainGeometry::Shape::annulus:
      lo = geom.center.array() - geom.r_outer;
      hi = geom.center.array() + geom.r_outer;
      return;
    case DomainGeometry::Shape::halfplane_patch:
      throw UnsupportedShape("halfplane patch is unbounded; no grid support");
  }
  throw UnsupportedShape("unknown shape");
}

}  // namespace ehjb
