#pragma once

#include <array>
#include <vector>

#include "ehjb/geometry.hpp"
#include "ehjb/types.hpp"

namespace ehjb {

/// Uniform lattice over the domain's bounding box restricted to the interior
/// {d > 0}. Interior nodes are enumerated 0..size()-1 in lattice order
/// (x-major, then y); exterior lattice cells keep a nearest-interior-node map
/// for O(1) feedback lookup during simulation.
struct Grid {
  DomainGeometry geom;
  double h = 0.0;
  int dim = 1;
  int nx = 0, ny = 1;                  // lattice point counts per axis
  double x0 = 0.0, y0 = 0.0;           // lattice origin (bounding box corner)
  std::vector<Vec> nodes;              // interior node coordinates
  std::vector<double> node_distance;   // signed distance at each node
  // Interior neighbor index per direction [x-, x+, y-, y+] or -1 if the
  // lattice neighbor is not interior.
  std::vector<std::array<int, 4>> neighbors;
  std::vector<uint8_t> boundary_adjacent;
  std::vector<int> node_of_lattice;    // lattice idx -> node idx or -1
  std::vector<int> nearest_of_lattice; // lattice idx -> nearest node idx

  int size() const { return static_cast<int>(nodes.size()); }
  int lattice_size() const { return nx * ny; }

  /// Nearest interior node to an arbitrary point (clamped to the lattice).
  int nearest_node(const Vec& x) const;
  /// Same lookup from a raw coordinate pointer (hot path, no Vec).
  int nearest_node_raw(const double* x) const;
};

/// Builds the grid. Throws TooCoarse when any axis has fewer than 3 interior
/// lattice coordinates (no second difference fits), UnsupportedShape for
/// unbounded patches, ConfigError for h <= 0.
Grid build_grid(const DomainGeometry& geom, double h);

/// Scalar field sampled on the interior nodes of a grid.
struct DiscreteField {
  const Grid* grid = nullptr;
  std::vector<double> values;
};

/// One control index per interior node.
struct FeedbackPolicy {
  const Grid* grid = nullptr;
  std::vector<int> control;
};

}  // namespace ehjb
