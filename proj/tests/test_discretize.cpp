#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "ehjb/models.hpp"
#include "ehjb/solve.hpp"
#include "ehjb/stencil.hpp"

using namespace ehjb;

namespace {

ProblemSpec scalar_1d(std::function<double(double)> b,
                      std::function<double(double)> s) {
  ProblemSpec spec;
  spec.geom = DomainGeometry::interval(-1.0, 1.0);
  spec.controls.points = {vec1(0.0)};
  spec.noise_dim = 1;
  spec.drift = [b](const Vec& x, const Vec&) { return vec1(b(x[0])); };
  spec.sigma = [s](const Vec& x, const Vec&) {
    Mat m(1, 1);
    m(0, 0) = s(x[0]);
    return m;
  };
  return spec;
}

}  // namespace

TEST_CASE("interval grid enumerates strict-interior lattice points") {
  const Grid g = build_grid(DomainGeometry::interval(-1.0, 1.0), 0.25);
  REQUIRE(g.size() == 7);
  CHECK(g.nx == 9);
  for (int i = 0; i < 7; ++i) {
    CHECK(g.nodes[i][0] == doctest::Approx(-0.75 + 0.25 * i));
    CHECK(g.node_distance[i] ==
          doctest::Approx(signed_distance(g.geom, g.nodes[i])));
  }
  CHECK(g.neighbors[0][0] == -1);  // lattice point at the endpoint, d = 0
  CHECK(g.neighbors[0][1] == 1);
  CHECK(g.neighbors[3][0] == 2);
  CHECK(g.neighbors[3][1] == 4);
  CHECK(g.neighbors[6][1] == -1);
  CHECK(g.boundary_adjacent[0] == 1);
  CHECK(g.boundary_adjacent[3] == 0);
  CHECK(g.boundary_adjacent[6] == 1);

  CHECK(g.nearest_node(vec1(0.8)) == 6);     // snaps to the 0.75 node
  CHECK(g.nearest_node(vec1(2.5)) == 6);     // clamped, then nearest interior
  CHECK(g.nearest_node(vec1(-0.74)) == 0);
}

TEST_CASE("disk grid keeps the 3x3 interior cross") {
  const Grid g = build_grid(DomainGeometry::ball(vec2(0.0, 0.0), 1.0), 0.5);
  REQUIRE(g.size() == 9);
  // Lattice order: y rows bottom to top, x within a row.
  CHECK((g.nodes[4] - vec2(0.0, 0.0)).norm() == 0.0);
  CHECK(g.node_distance[4] == 1.0);
  CHECK(g.neighbors[4][0] == 3);
  CHECK(g.neighbors[4][1] == 5);
  CHECK(g.neighbors[4][2] == 1);
  CHECK(g.neighbors[4][3] == 7);
  CHECK(g.boundary_adjacent[4] == 0);
  CHECK(g.boundary_adjacent[0] == 1);  // corner node: axis points exit
  CHECK(g.nearest_node(vec2(0.9, 0.9)) == 8);
}

TEST_CASE("grid construction failure modes") {
  CHECK_THROWS_AS((void)build_grid(DomainGeometry::interval(-1.0, 1.0), 0.9),
                  TooCoarse);
  CHECK_THROWS_AS((void)build_grid(DomainGeometry::interval(-1.0, 1.0), 0.0),
                  ConfigError);
  CHECK_THROWS_AS((void)build_grid(DomainGeometry::interval(-1.0, 1.0), -0.1),
                  ConfigError);
  CHECK_THROWS_AS((void)build_grid(DomainGeometry::halfplane_patch(), 0.1),
                  UnsupportedShape);
  CHECK_NOTHROW((void)build_grid(DomainGeometry::ball(vec2(0.0, 0.0), 1.0), 0.5));
}

TEST_CASE("laplacian and upwind drift weights") {
  const double h = 0.25;
  const Grid g = build_grid(DomainGeometry::interval(-1.0, 1.0), h);

  const auto lap = scalar_1d([](double) { return 0.0; },
                             [](double) { return 1.0; });
  const StencilSet st = assemble(lap, g);
  const double* w = st.weights_at(3, 0);  // x = 0, both neighbors interior
  CHECK(w[0] == 1.0 / (h * h));
  CHECK(w[1] == 1.0 / (h * h));
  CHECK(st.diag[st.entry(3, 0)] == 2.0 / (h * h));
  CHECK(st.ghost_rhs[st.entry(3, 0)] == 0.0);

  const auto fwd = scalar_1d([](double) { return 0.5; },
                             [](double) { return 0.0; });
  const StencilSet stf = assemble(fwd, g);
  const double* wf = stf.weights_at(3, 0);
  CHECK(wf[0] == 0.0);
  CHECK(wf[1] == 0.5 / h);

  const auto bwd = scalar_1d([](double) { return -0.5; },
                             [](double) { return 0.0; });
  const StencilSet stb = assemble(bwd, g);
  const double* wb = stb.weights_at(3, 0);
  CHECK(wb[0] == 0.5 / h);
  CHECK(wb[1] == 0.0);
}

TEST_CASE("generator is exact on constants, linears and quadratics") {
  const Grid g = build_grid(DomainGeometry::interval(-1.0, 1.0), 1.0 / 64);
  const int n = g.size();

  const auto drift_only = scalar_1d([](double) { return 1.0; },
                                    [](double) { return 0.0; });
  const StencilSet st1 = assemble(drift_only, g);
  std::vector<double> ones(n, 1.0), linear(n), quad(n);
  for (int i = 0; i < n; ++i) {
    linear[i] = g.nodes[i][0];
    quad[i] = g.nodes[i][0] * g.nodes[i][0];
  }
  for (int i = 0; i < n; ++i) {
    CHECK(st1.generator_row(i, 0, ones) == 0.0);  // drop closure, exactly
    if (!g.boundary_adjacent[i])
      CHECK(st1.generator_row(i, 0, linear) == doctest::Approx(1.0).epsilon(1e-14));
  }

  const auto diff_only = scalar_1d([](double) { return 0.0; },
                                   [](double x) { return 1.0 - x * x; });
  const StencilSet st2 = assemble(diff_only, g);
  for (int i = 0; i < n; ++i) {
    if (g.boundary_adjacent[i]) continue;
    const double x = g.nodes[i][0];
    const double a = (1.0 - x * x) * (1.0 - x * x);
    CHECK(std::abs(st2.generator_row(i, 0, quad) - 2.0 * a) < 1e-9);
  }
}

TEST_CASE("generator converges at first order on a smooth field") {
  const ProblemSpec spec = make_model("degenerate_interval_1d");
  auto core_error = [&](double h) {
    const Grid g = build_grid(spec.geom, h);
    std::vector<double> u(g.size());
    for (int i = 0; i < g.size(); ++i) u[i] = std::sin(2.0 * g.nodes[i][0]);
    const StencilSet st = assemble(spec, g);
    double worst = 0.0;
    for (int i = 0; i < g.size(); ++i) {
      const double x = g.nodes[i][0];
      if (std::abs(x) > 0.5) continue;
      const double a = (1.0 - x * x) * (1.0 - x * x);
      const double exact = -x * 2.0 * std::cos(2.0 * x) - 4.0 * a * std::sin(2.0 * x);
      worst = std::max(worst, std::abs(st.generator_row(i, 0, u) - exact));
    }
    return worst;
  };
  const double ratio = core_error(1.0 / 64) / core_error(1.0 / 128);
  CHECK(ratio > 1.6);
  CHECK(ratio < 2.6);
}

TEST_CASE("drop closure removes no mass when the chain is invariant") {
  const Grid g = build_grid(DomainGeometry::interval(-1.0, 1.0), 1.0 / 32);
  // Noise truncated well inside + inward drift: nothing points outward.
  const auto invariant = scalar_1d(
      [](double x) { return -x; },
      [](double x) {
        const double t = std::max(0.0, 0.5 - std::abs(x));
        return t * t;
      });
  CHECK(max_dropped_outflow(assemble(invariant, g)) == 0.0);

  const auto lap = scalar_1d([](double) { return 0.0; },
                             [](double) { return 1.0; });
  CHECK(max_dropped_outflow(assemble(lap, g)) > 0.0);
}

TEST_CASE("dirichlet closure couples boundary mass to the terminal cost") {
  const double h = 0.25;
  const Grid g = build_grid(DomainGeometry::interval(-1.0, 1.0), h);
  auto spec = scalar_1d([](double) { return 0.0; },
                        [](double) { return 1.0; });
  spec.running_cost = cost_constant(0.0);
  spec.terminal_cost = [](const Vec&) { return 7.0; };

  const StencilSet st = assemble(spec, g, Closure::dirichlet);
  for (int i = 0; i < g.size(); ++i) {
    const double expected = g.boundary_adjacent[i] ? 7.0 / (h * h) : 0.0;
    CHECK(st.ghost_rhs[st.entry(i, 0)] == expected);
    CHECK(st.dropped[st.entry(i, 0)] == 0.0);
  }

  // Zero running cost and boundary value 7: u = 7 E[exp(-lambda tau)],
  // a shade under 7 for a small discount.
  const DiscountedSolution sol = solve_discounted(st, 1e-3, 1e-10, 100);
  for (double v : sol.field.values) {
    CHECK(v > 6.0);
    CHECK(v < 7.0);
  }

  auto bare = scalar_1d([](double) { return 0.0; }, [](double) { return 1.0; });
  CHECK_THROWS_AS((void)assemble(bare, g, Closure::dirichlet),
                  MissingTerminalCost);
}

TEST_CASE("non-diagonal diffusion is rejected") {
  ProblemSpec spec;
  spec.geom = DomainGeometry::ball(vec2(0.0, 0.0), 1.0);
  spec.controls.points = {vec2(0.0, 0.0)};
  spec.noise_dim = 2;
  spec.drift = [](const Vec&, const Vec&) { return vec2(0.0, 0.0); };
  spec.sigma = [](const Vec&, const Vec&) {
    Mat s(2, 2);
    s << 1.0, 0.3, 0.0, 1.0;
    return s;
  };
  const Grid g = build_grid(spec.geom, 0.25);
  CHECK_THROWS_AS((void)assemble(spec, g), NonDiagonalDiffusion);
}

TEST_CASE("policy improvement maximizes the bellman candidate") {
  const Grid g = build_grid(DomainGeometry::interval(-1.0, 1.0), 0.25);
  ProblemSpec spec = scalar_1d([](double) { return 0.0; },
                               [](double) { return 0.0; });
  spec.controls.points = {vec1(0.0), vec1(1.0)};
  // Candidate is -l under the zero field: the cheaper control wins.
  spec.running_cost = [](const Vec&, const Vec& alpha) {
    return alpha[0] == 0.0 ? 1.0 : 0.0;
  };
  const StencilSet st = assemble(spec, g);
  DiscreteField zero;
  zero.grid = &g;
  zero.values.assign(g.size(), 0.0);
  const FeedbackPolicy pol = extract_feedback(st, zero);
  for (int c : pol.control) CHECK(c == 1);

  spec.running_cost = cost_constant(0.3);
  const StencilSet tie = assemble(spec, g);
  const FeedbackPolicy pol0 = extract_feedback(tie, zero);
  for (int c : pol0.control) CHECK(c == 0);

  DiscreteField bad;
  bad.grid = &g;
  bad.values.assign(g.size() + 1, 0.0);
  CHECK_THROWS_AS((void)extract_feedback(st, bad), ShapeMismatch);
}

TEST_CASE("apply evaluates the generator rowwise") {
  const ProblemSpec spec = make_model("degenerate_interval_1d");
  const Grid g = build_grid(spec.geom, 1.0 / 32);
  const StencilSet st = assemble(spec, g);
  DiscreteField u;
  u.grid = &g;
  u.values.resize(g.size());
  for (int i = 0; i < g.size(); ++i) u.values[i] = std::cos(g.nodes[i][0]);
  FeedbackPolicy pol;
  pol.grid = &g;
  pol.control.assign(g.size(), 0);
  const DiscreteField lu = apply(st, u, pol);
  for (int i = 0; i < g.size(); ++i)
    CHECK(lu.values[i] == st.generator_row(i, 0, u.values));

  FeedbackPolicy wrong;
  wrong.grid = nullptr;
  wrong.control.assign(g.size(), 0);
  CHECK_THROWS_AS((void)apply(st, u, wrong), ShapeMismatch);
}

TEST_CASE("bellman residual vanishes on the exact constant solution") {
  ProblemSpec spec = make_model("degenerate_interval_1d");
  spec.running_cost = cost_constant(1.0);
  const Grid g = build_grid(spec.geom, 1.0 / 64);
  const StencilSet st = assemble(spec, g);
  const double lambda = 0.5;
  std::vector<double> u(g.size(), 1.0 / lambda);
  CHECK(bellman_residual_sup(st, u, lambda) <= 1e-12);
}
