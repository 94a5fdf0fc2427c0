#include "ehjb/grid.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace ehjb {

namespace {

int axis_count(double lo, double hi, double h) {
  // Lattice points lo + i*h covering [lo, hi]; a point landing within
  // 1e-12*h of hi is kept (guards against accumulated rounding).
  return static_cast<int>(std::floor((hi - lo) / h + 1e-12)) + 1;
}

}  // namespace

int Grid::nearest_node_raw(const double* x) const {
  int i = static_cast<int>(std::lround((x[0] - x0) / h));
  i = std::clamp(i, 0, nx - 1);
  int j = 0;
  if (dim == 2) {
    j = static_cast<int>(std::lround((x[1] - y0) / h));
    j = std::clamp(j, 0, ny - 1);
  }
  return nearest_of_lattice[static_cast<std::size_t>(j * nx + i)];
}

int Grid::nearest_node(const Vec& x) const { return nearest_node_raw(x.data()); }

Grid build_grid(const DomainGeometry& geom, double h) {
  if (!(h > 0.0)) throw ConfigError("grid.h must be positive");
  if (!geom.bounded())
    throw UnsupportedShape("grids require a bounded domain");

  Grid g;
  g.geom = geom;
  g.h = h;
  g.dim = geom.dim;

  Vec lo, hi;
  bounding_box(geom, lo, hi);
  g.x0 = lo[0];
  g.nx = axis_count(lo[0], hi[0], h);
  if (g.dim == 2) {
    g.y0 = lo[1];
    g.ny = axis_count(lo[1], hi[1], h);
  }

  const int lattice = g.lattice_size();
  g.node_of_lattice.assign(static_cast<std::size_t>(lattice), -1);

  std::vector<int> interior_per_x(static_cast<std::size_t>(g.nx), 0);
  std::vector<int> interior_per_y(static_cast<std::size_t>(g.ny), 0);

  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      Vec x = g.dim == 1 ? vec1(g.x0 + i * h) : vec2(g.x0 + i * h, g.y0 + j * h);
      const double d = signed_distance(geom, x);
      if (d > 0.0) {
        g.node_of_lattice[static_cast<std::size_t>(j * g.nx + i)] = g.size();
        g.nodes.push_back(x);
        g.node_distance.push_back(d);
        ++interior_per_x[static_cast<std::size_t>(i)];
        ++interior_per_y[static_cast<std::size_t>(j)];
      }
    }

  // Coarseness rule: every axis needs at least 3 occupied lattice
  // coordinates so a second difference fits somewhere.
  const int occ_x = static_cast<int>(
      std::count_if(interior_per_x.begin(), interior_per_x.end(),
                    [](int c) { return c > 0; }));
  if (occ_x < 3)
    throw TooCoarse("fewer than 3 interior lattice coordinates along x");
  if (g.dim == 2) {
    const int occ_y = static_cast<int>(
        std::count_if(interior_per_y.begin(), interior_per_y.end(),
                      [](int c) { return c > 0; }));
    if (occ_y < 3)
      throw TooCoarse("fewer than 3 interior lattice coordinates along y");
  }

  g.neighbors.resize(static_cast<std::size_t>(g.size()));
  g.boundary_adjacent.assign(static_cast<std::size_t>(g.size()), 0);
  auto lattice_at = [&](int i, int j) -> int {
    if (i < 0 || i >= g.nx || j < 0 || j >= g.ny) return -1;
    return g.node_of_lattice[static_cast<std::size_t>(j * g.nx + i)];
  };
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const int n = lattice_at(i, j);
      if (n < 0) continue;
      auto& nb = g.neighbors[static_cast<std::size_t>(n)];
      nb[0] = lattice_at(i - 1, j);
      nb[1] = lattice_at(i + 1, j);
      nb[2] = g.dim == 2 ? lattice_at(i, j - 1) : -1;
      nb[3] = g.dim == 2 ? lattice_at(i, j + 1) : -1;
      const int used = g.dim == 2 ? 4 : 2;
      for (int k = 0; k < used; ++k)
        if (nb[k] < 0) g.boundary_adjacent[static_cast<std::size_t>(n)] = 1;
    }

  // Multi-source BFS over the lattice graph fills the nearest-interior map
  // for exterior cells (used by feedback lookup when a path strays).
  g.nearest_of_lattice.assign(static_cast<std::size_t>(lattice), -1);
  std::deque<int> queue;
  for (int idx = 0; idx < lattice; ++idx)
    if (g.node_of_lattice[static_cast<std::size_t>(idx)] >= 0) {
      g.nearest_of_lattice[static_cast<std::size_t>(idx)] =
          g.node_of_lattice[static_cast<std::size_t>(idx)];
      queue.push_back(idx);
    }
  while (!queue.empty()) {
    const int idx = queue.front();
    queue.pop_front();
    const int i = idx % g.nx, j = idx / g.nx;
    const int di[4] = {-1, 1, 0, 0};
    const int dj[4] = {0, 0, -1, 1};
    const int used = g.dim == 2 ? 4 : 2;
    for (int k = 0; k < used; ++k) {
      const int ii = i + di[k], jj = j + dj[k];
      if (ii < 0 || ii >= g.nx || jj < 0 || jj >= g.ny) continue;
      const int nidx = jj * g.nx + ii;
      if (g.nearest_of_lattice[static_cast<std::size_t>(nidx)] < 0) {
        g.nearest_of_lattice[static_cast<std::size_t>(nidx)] =
            g.nearest_of_lattice[static_cast<std::size_t>(idx)];
        queue.push_back(nidx);
      }
    }
  }
  return g;
}

}  // namespace ehjb
