#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "ehjb/geometry.hpp"

using namespace ehjb;

namespace {

double fd_grad(const DomainGeometry& geom, const Vec& x, int i, double h) {
  Vec a = x, b = x;
  a[i] += h;
  b[i] -= h;
  return (signed_distance(geom, a) - signed_distance(geom, b)) / (2.0 * h);
}

double fd_hess(const DomainGeometry& geom, const Vec& x, int i, int j,
               double h) {
  if (i == j) {
    Vec a = x, b = x;
    a[i] += h;
    b[i] -= h;
    return (signed_distance(geom, a) - 2.0 * signed_distance(geom, x) +
            signed_distance(geom, b)) /
           (h * h);
  }
  Vec pp = x, pm = x, mp = x, mm = x;
  pp[i] += h; pp[j] += h;
  pm[i] += h; pm[j] -= h;
  mp[i] -= h; mp[j] += h;
  mm[i] -= h; mm[j] -= h;
  return (signed_distance(geom, pp) - signed_distance(geom, pm) -
          signed_distance(geom, mp) + signed_distance(geom, mm)) /
         (4.0 * h * h);
}

void check_jet_against_fd(const DomainGeometry& geom,
                          const std::vector<Vec>& pts) {
  const double h = 1e-5;
  for (const Vec& x : pts) {
    const DistanceJet jet = distance_jet(geom, x);
    CHECK(jet.d == doctest::Approx(signed_distance(geom, x)).epsilon(1e-14));
    double grad_norm2 = 0.0;
    Vec hg = jet.hess * jet.grad;
    for (int i = 0; i < geom.dim; ++i) {
      CHECK(std::abs(jet.grad[i] - fd_grad(geom, x, i, h)) < 1e-7);
      for (int j = 0; j < geom.dim; ++j) {
        CHECK(std::abs(jet.hess(i, j) - fd_hess(geom, x, i, j, h)) < 1e-4);
        CHECK(jet.hess(i, j) == jet.hess(j, i));
      }
      grad_norm2 += jet.grad[i] * jet.grad[i];
      // The Hessian of a distance function annihilates its own gradient.
      CHECK(std::abs(hg[i]) < 1e-12);
    }
    CHECK(std::abs(grad_norm2 - 1.0) < 1e-12);  // eikonal |Dd| = 1
  }
}

}  // namespace

TEST_CASE("distance jets match finite differences on every shape") {
  check_jet_against_fd(DomainGeometry::interval(-1.0, 1.0),
                       {vec1(-0.9), vec1(-0.3), vec1(0.55), vec1(0.97)});
  check_jet_against_fd(DomainGeometry::ball(vec2(0.3, -0.2), 0.8),
                       {vec2(0.3, 0.3), vec2(-0.2, -0.4), vec2(0.9, -0.2),
                        vec2(0.35, 0.25)});
  check_jet_against_fd(
      DomainGeometry::annulus(vec2(0.0, 0.0), 0.5, 1.2),
      {vec2(0.6, 0.0), vec2(0.0, -0.58), vec2(0.7, 0.7), vec2(-1.05, 0.1)});
  check_jet_against_fd(DomainGeometry::halfplane_patch(),
                       {vec2(0.1, 0.2), vec2(-0.3, 0.05), vec2(0.4, 0.7)});
}

TEST_CASE("signed distance signs and values") {
  const auto iv = DomainGeometry::interval(-1.0, 1.0);
  CHECK(signed_distance(iv, vec1(0.0)) == 1.0);
  CHECK(signed_distance(iv, vec1(0.75)) == 0.25);
  CHECK(signed_distance(iv, vec1(1.5)) == -0.5);
  CHECK(signed_distance(iv, vec1(-1.0)) == 0.0);

  const auto ball = DomainGeometry::ball(vec2(0.0, 0.0), 1.0);
  CHECK(signed_distance(ball, vec2(0.0, 0.0)) == 1.0);
  CHECK(signed_distance(ball, vec2(0.6, 0.8)) == doctest::Approx(0.0));
  CHECK(signed_distance(ball, vec2(3.0, 4.0)) == doctest::Approx(-4.0));

  const auto ann = DomainGeometry::annulus(vec2(0.0, 0.0), 0.5, 1.2);
  CHECK(signed_distance(ann, vec2(0.6, 0.0)) == doctest::Approx(0.1));
  CHECK(signed_distance(ann, vec2(1.1, 0.0)) == doctest::Approx(0.1));
  CHECK(signed_distance(ann, vec2(0.2, 0.0)) == doctest::Approx(-0.3));

  const auto hp = DomainGeometry::halfplane_patch();
  CHECK(signed_distance(hp, vec2(0.3, 0.25)) == 0.25);
  CHECK(signed_distance(hp, vec2(0.3, -0.1)) == -0.1);
}

TEST_CASE("collar membership and jet domain errors") {
  const auto ball = DomainGeometry::ball(vec2(0.0, 0.0), 1.0);
  CHECK(in_collar(ball, vec2(0.6, 0.0)));        // d = 0.4 < radius / 2
  CHECK_FALSE(in_collar(ball, vec2(0.5, 0.0)));  // d == smoothness_radius
  CHECK_FALSE(in_collar(ball, vec2(0.0, 0.0)));
  CHECK_THROWS_AS((void)distance_jet(ball, vec2(0.0, 0.0)), OutsideCollar);

  const auto iv = DomainGeometry::interval(-1.0, 1.0);
  CHECK_THROWS_AS((void)distance_jet(iv, vec1(0.0)), OutsideCollar);
  CHECK_NOTHROW((void)distance_jet(iv, vec1(1.4)));  // outside band is smooth

  const auto ann = DomainGeometry::annulus(vec2(0.0, 0.0), 0.5, 1.2);
  // Equidistant ring between the two circles: not differentiable.
  CHECK_THROWS_AS((void)distance_jet(ann, vec2(0.85, 0.0)), OutsideCollar);

  CHECK_THROWS_AS((void)signed_distance(ball, vec1(0.5)), ShapeMismatch);
  CHECK_THROWS_AS((void)signed_distance(iv, vec2(0.5, 0.5)), ShapeMismatch);
}

TEST_CASE("factory validation") {
  CHECK_THROWS_AS(DomainGeometry::interval(1.0, 1.0), ShapeMismatch);
  CHECK_THROWS_AS(DomainGeometry::ball(vec2(0.0, 0.0), 0.0), ShapeMismatch);
  CHECK_THROWS_AS(DomainGeometry::annulus(vec2(0.0, 0.0), 1.2, 0.5),
                  ShapeMismatch);
  CHECK_THROWS_AS(DomainGeometry::halfplane_patch(0.0), ShapeMismatch);
}

TEST_CASE("ring sample lies strictly inside the ring and reaches deep") {
  const double delta = 0.5;
  const int density = 16;  // 1 edge + 10 uniform + 5 dyadic levels
  const auto iv = DomainGeometry::interval(-1.0, 1.0);
  const auto pts = ring_points(iv, delta, density);
  CHECK(pts.size() == 2u * density);
  double dmin = delta;
  for (const Vec& p : pts) {
    const double d = signed_distance(iv, p);
    CHECK(d > 0.0);
    CHECK(d < delta);
    dmin = std::min(dmin, d);
  }
  CHECK(dmin == delta / 64.0);  // dyadic refinement bottoms out at delta/2^6

  const auto ball = DomainGeometry::ball(vec2(0.0, 0.0), 1.0);
  const auto bpts = ring_points(ball, delta, density);
  CHECK(bpts.size() == 4u * density * density);
  for (const Vec& p : bpts) {
    const double d = signed_distance(ball, p);
    CHECK(d > 0.0);
    CHECK(d < delta);
  }

  const auto ann = DomainGeometry::annulus(vec2(0.0, 0.0), 0.5, 1.2);
  const auto apts = ring_points(ann, 0.3, 4);
  CHECK(apts.size() == 2u * 4u * 4u * 4u);  // both circles, 16 angles, 4 levels
  for (const Vec& p : apts) {
    const double d = signed_distance(ann, p);
    CHECK(d > 0.0);
    CHECK(d < 0.3);
  }

  CHECK_THROWS_AS((void)ring_points(iv, 0.0, 8), BadDelta);
  CHECK_THROWS_AS((void)ring_points(iv, 1.5, 8), BadDelta);  // beyond collar
  CHECK_THROWS_AS((void)ring_points(iv, 0.5, 0), BadDelta);
}

TEST_CASE("boundary sample") {
  const auto iv = DomainGeometry::interval(-2.0, 3.0);
  const auto ipts = boundary_points(iv, 64);
  REQUIRE(ipts.size() == 2u);
  CHECK(ipts[0][0] == -2.0);
  CHECK(ipts[1][0] == 3.0);

  const auto ball = DomainGeometry::ball(vec2(0.5, 0.5), 2.0);
  const auto bpts = boundary_points(ball, 37);
  CHECK(bpts.size() == 37u);
  for (const Vec& p : bpts)
    CHECK(std::abs(signed_distance(ball, p)) < 1e-12);

  const auto hp = DomainGeometry::halfplane_patch(0.5);
  const auto hpts = boundary_points(hp, 11);
  CHECK(hpts.size() == 11u);
  CHECK(hpts.front()[0] == -0.5);
  CHECK(hpts.back()[0] == 0.5);
  for (const Vec& p : hpts) CHECK(p[1] == 0.0);

  CHECK_THROWS_AS((void)boundary_points(ball, 0), BadDelta);
}

TEST_CASE("boundary projection") {
  const auto iv = DomainGeometry::interval(-1.0, 1.0);
  CHECK(project_to_boundary(iv, vec1(-0.7))[0] == -1.0);
  CHECK(project_to_boundary(iv, vec1(0.2))[0] == 1.0);

  const auto ball = DomainGeometry::ball(vec2(0.0, 0.0), 1.0);
  const Vec p = project_to_boundary(ball, vec2(0.3, -0.4));
  CHECK(std::abs(p.norm() - 1.0) < 1e-15);
  CHECK(std::abs(p[0] * (-0.4) - p[1] * 0.3) < 1e-15);  // same ray
  // The center has no unique nearest point; the tie breaks deterministically.
  const Vec pc = project_to_boundary(ball, vec2(0.0, 0.0));
  CHECK(pc[0] == 1.0);
  CHECK(pc[1] == 0.0);

  const auto ann = DomainGeometry::annulus(vec2(0.0, 0.0), 0.5, 1.2);
  CHECK(project_to_boundary(ann, vec2(0.6, 0.0)).norm() ==
        doctest::Approx(0.5));
  CHECK(project_to_boundary(ann, vec2(1.1, 0.0)).norm() ==
        doctest::Approx(1.2));

  const auto hp = DomainGeometry::halfplane_patch();
  const Vec hq = project_to_boundary(hp, vec2(0.3, 0.4));
  CHECK(hq[0] == 0.3);
  CHECK(hq[1] == 0.0);
}

TEST_CASE("interior anchor is deep interior") {
  const auto iv = DomainGeometry::interval(-1.0, 3.0);
  CHECK(interior_anchor(iv)[0] == 1.0);
  const auto ball = DomainGeometry::ball(vec2(0.25, -0.5), 1.0);
  CHECK(interior_anchor(ball)[0] == 0.25);
  CHECK(interior_anchor(ball)[1] == -0.5);
  const auto ann = DomainGeometry::annulus(vec2(0.0, 0.0), 0.5, 1.2);
  const Vec a = interior_anchor(ann);
  CHECK(signed_distance(ann, a) == doctest::Approx(0.35));
}

TEST_CASE("bounding box") {
  Vec lo, hi;
  bounding_box(DomainGeometry::ball(vec2(0.5, -0.5), 1.0), lo, hi);
  CHECK(lo[0] == -0.5);
  CHECK(lo[1] == -1.5);
  CHECK(hi[0] == 1.5);
  CHECK(hi[1] == 0.5);
  bounding_box(DomainGeometry::interval(-1.0, 2.0), lo, hi);
  CHECK(lo[0] == -1.0);
  CHECK(hi[0] == 2.0);
  CHECK_THROWS_AS(bounding_box(DomainGeometry::halfplane_patch(), lo, hi),
                  UnsupportedShape);
}
