#include "ehjb/models.hpp"

#include <cmath>

namespace ehjb {

double eval_poly(const std::vector<double>& coeffs, double t) {
  double v = 0.0;
  for (std::size_t i = coeffs.size(); i-- > 0;) v = v * t + coeffs[i];
  return v;
}

std::function<double(const Vec&, const Vec&)> cost_constant(double value) {
  return [value](const Vec&, const Vec&) { return value; };
}

std::function<double(const Vec&, const Vec&)> cost_poly1d(
    std::vector<double> coeffs) {
  return [coeffs = std::move(coeffs)](const Vec& x, const Vec&) {
    return eval_poly(coeffs, x[0]);
  };
}

std::function<double(const Vec&, const Vec&)> cost_radial2d(
    std::vector<double> coeffs, Vec center) {
  return [coeffs = std::move(coeffs), center = std::move(center)](
             const Vec& x, const Vec&) {
    return eval_poly(coeffs, (x - center).norm());
  };
}

namespace {

ProblemSpec make_radial_disk_2d() {
  ProblemSpec spec;
  spec.name = "radial_disk_2d";
  spec.geom = DomainGeometry::ball(vec2(0.0, 0.0), 1.0);
  spec.controls.points = {vec1(0.0)};
  spec.controls.labels = {"only"};
  spec.noise_dim = 2;
  spec.drift = [](const Vec& x, const Vec&) -> Vec { return -x; };
  spec.sigma = [](const Vec& x, const Vec&) -> Mat {
    return (1.0 - x.norm()) * Mat::Identity(2, 2);
  };
  spec.running_cost = [](const Vec& x, const Vec&) { return x.squaredNorm(); };
  return spec;
}

ProblemSpec make_degenerate_interval_1d() {
  ProblemSpec spec;
  spec.name = "degenerate_interval_1d";
  spec.geom = DomainGeometry::interval(-1.0, 1.0);
  spec.controls.points = {vec1(0.0)};
  spec.controls.labels = {"only"};
  spec.noise_dim = 1;
  spec.drift = [](const Vec& x, const Vec&) -> Vec { return -x; };
  spec.sigma = [](const Vec& x, const Vec&) -> Mat {
    Mat s(1, 1);
    s(0, 0) = 1.0 - x[0] * x[0];
    return s;
  };
  spec.running_cost = [](const Vec& x, const Vec&) { return x[0] * x[0]; };
  return spec;
}

ProblemSpec make_halfplane_counterexample() {
  ProblemSpec spec;
  spec.name = "halfplane_counterexample";
  spec.geom = DomainGeometry::halfplane_patch(0.5);
  spec.controls.points = {vec1(1.0), vec1(2.0)};
  spec.controls.labels = {"1", "2"};
  spec.noise_dim = 2;
  spec.drift = [](const Vec& x, const Vec& alpha) -> Vec {
    if (alpha[0] < 1.5) return vec2(0.0, 1.0);
    const double x4 = x[0] * x[0] * x[0] * x[0];
    return vec2(0.0, x4 - x[1]);
  };
  spec.sigma = [](const Vec& x, const Vec& alpha) -> Mat {
    Mat s = Mat::Zero(2, 2);
    if (alpha[0] < 1.5) {
      s(0, 0) = 1.0;
      s(1, 1) = x[0] * x[0] + x[1];
    } else {
      s(0, 0) = x[1];
      s(1, 1) = x[1];
    }
    return s;
  };
  // No running cost: this fixture exercises the bare operator F.
  return spec;
}

ProblemSpec make_exit_disk() {
  ProblemSpec spec;
  spec.name = "exit_disk";
  spec.geom = DomainGeometry::ball(vec2(0.0, 0.0), 1.0);
  spec.controls.points = {vec1(0.0), vec1(1.0)};
  spec.controls.labels = {"in", "out"};
  spec.noise_dim = 2;
  spec.drift = [](const Vec& x, const Vec& alpha) -> Vec {
    return alpha[0] < 0.5 ? Vec(-x) : x;
  };
  spec.sigma = [](const Vec& x, const Vec& alpha) -> Mat {
    const double scale = alpha[0] < 0.5 ? 1.0 - x.norm() : 1.0;
    return scale * Mat::Identity(2, 2);
  };
  spec.running_cost = cost_constant(0.0);
  spec.terminal_cost = [](const Vec& x) { return x[0]; };
  return spec;
}

}  // namespace

ProblemSpec make_model(const std::string& name) {
  if (name == "radial_disk_2d") return make_radial_disk_2d();
  if (name == "degenerate_interval_1d") return make_degenerate_interval_1d();
  if (name == "halfplane_counterexample") return make_halfplane_counterexample();
  if (name == "exit_disk") return make_exit_disk();
  throw ConfigError("model: unknown model '" + name + "'");
}

std::vector<std::string> model_names() {
  return {"radial_disk_2d", "degenerate_interval_1d",
          "halfplane_counterexample", "exit_disk"};
}

}  // namespace ehjb
