#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "symamg/core/sparse.hpp"

namespace symamg {

/// Tensor-product grid on the unit cube with tanh wall clustering per axis:
/// node i of n+1 sits at (1 + tanh(g*(2i/n - 1))/tanh(g))/2. Coordinates and
/// cell widths are mirrored about 0.5 by construction, bit for bit, so that
/// reflected halves of the grid are exact copies.
struct StretchedGrid {
  index_t nx = 0, ny = 0, nz = 0;
  real_t gamma_x = 1.5, gamma_y = 1.5, gamma_z = 1.5;
  std::vector<real_t> x_nodes, y_nodes, z_nodes;  // size n+1
  std::vector<real_t> wx, wy, wz;                 // cell widths, size n

  index_t n_cells() const { return nx * ny * nz; }
};

namespace detail {

inline void stretched_axis(index_t n, real_t gamma, std::vector<real_t>& nodes,
                           std::vector<real_t>& widths) {
  if (n <= 0) throw std::invalid_argument("stretched_axis: need at least one cell");
  if (!(gamma > 0.0)) throw std::invalid_argument("stretched_axis: gamma must be positive");
  nodes.assign(n + 1, 0.0);
  const real_t th = std::tanh(gamma);
  for (index_t i = 0; i <= n / 2; ++i) {
    const real_t t = 2.0 * static_cast<real_t>(i) / static_cast<real_t>(n) - 1.0;
    nodes[i] = 0.5 * (1.0 + std::tanh(gamma * t) / th);
  }
  if (n % 2 == 0) nodes[n / 2] = 0.5;
  for (index_t i = n / 2 + 1; i <= n; ++i) nodes[i] = 1.0 - nodes[n - i];
  widths.assign(n, 0.0);
  for (index_t i = 0; i < (n + 1) / 2; ++i) widths[i] = nodes[i + 1] - nodes[i];
  for (index_t i = (n + 1) / 2; i < n; ++i) widths[i] = widths[n - 1 - i];
}

}  // namespace detail

inline StretchedGrid make_stretched_grid(index_t nx, index_t ny, index_t nz, real_t gamma_x = 1.5,
                                         real_t gamma_y = 1.5, real_t gamma_z = 1.5) {
  StretchedGrid g;
  g.nx = nx;
  g.ny = ny;
  g.nz = nz;
  g.gamma_x = gamma_x;
  g.gamma_y = gamma_y;
  g.gamma_z = gamma_z;
  detail::stretched_axis(nx, gamma_x, g.x_nodes, g.wx);
  detail::stretched_axis(ny, gamma_y, g.y_nodes, g.wy);
  detail::stretched_axis(nz, gamma_z, g.z_nodes, g.wz);
  return g;
}

inline StretchedGrid make_cube_grid(index_t n, real_t gamma = 1.5) {
  return make_stretched_grid(n, n, n, gamma, gamma, gamma);
}

}  // namespace symamg
