#pragma once

#include <string>
#include <vector>

#include "ehjb/problem.hpp"

namespace ehjb {

/// Built-in model registry. Throws ConfigError for unknown names.
///   radial_disk_2d           unit disk, b = -x, sigma = (1-|x|) I, l = |x|^2
///   degenerate_interval_1d   (-1,1), b = -x, sigma = 1-x^2, l = x^2
///   halfplane_counterexample flat-boundary patch, two controls, no cost
///   exit_disk                unit disk, controls "in"/"out", l = 0, phi = x_1
ProblemSpec make_model(const std::string& name);

std::vector<std::string> model_names();

/// Polynomial in one scalar t: coeffs[0] + coeffs[1] t + coeffs[2] t^2 + ...
double eval_poly(const std::vector<double>& coeffs, double t);

/// Scalar cost fields used by the registry and the config loader.
/// poly1d evaluates in x (1D states); radial2d evaluates in r = |x - center|.
std::function<double(const Vec&, const Vec&)> cost_constant(double value);
std::function<double(const Vec&, const Vec&)> cost_poly1d(std::vector<double> coeffs);
std::function<double(const Vec&, const Vec&)> cost_radial2d(std::vector<double> coeffs, Vec center);

}  // namespace ehjb
