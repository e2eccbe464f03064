#pragma once

#include <vector>

#include "symamg/core/sparse.hpp"
#include "symamg/model/grid.hpp"

namespace symamg {

namespace detail {

/// Cell-centered finite-volume Laplacian on a tensor grid given by width
/// arrays, homogeneous Neumann walls, 7-point stencil, lexicographic order
/// with x fastest. Face transmissibility is face area over center distance;
/// rows sum to zero exactly up to roundoff of the stated sums. The diagonal
/// is accumulated per axis as (left + right) so that mirror-image cells get
/// bit-identical values. periodic_x couples the last x-layer back to the
/// first (used for translationally repeated chains).
inline SparseMatrix assemble_fv(const std::vector<real_t>& wx, const std::vector<real_t>& wy,
                                const std::vector<real_t>& wz, bool periodic_x = false) {
  const index_t nx = static_cast<index_t>(wx.size());
  const index_t ny = static_cast<index_t>(wy.size());
  const index_t nz = static_cast<index_t>(wz.size());
  const index_t n = nx * ny * nz;
  auto id = [nx, ny](index_t i, index_t j, index_t k) { return i + nx * (j + ny * k); };

  // Transmissibility per unit face area between consecutive cells of an axis.
  auto axis_trans = [](const std::vector<real_t>& w, bool periodic) {
    const index_t m = static_cast<index_t>(w.size());
    std::vector<real_t> t(periodic ? m : m - 1, 0.0);
    for (index_t i = 0; i + 1 < m; ++i) t[i] = 1.0 / (0.5 * (w[i] + w[i + 1]));
    if (periodic) t[m - 1] = 1.0 / (0.5 * (w[m - 1] + w[0]));
    return t;
  };
  const std::vector<real_t> tx = axis_trans(wx, periodic_x);
  const std::vector<real_t> ty = axis_trans(wy, false);
  const std::vector<real_t> tz = axis_trans(wz, false);

  std::vector<Triplet> trip;
  trip.reserve(static_cast<std::size_t>(n) * 7);
  for (index_t k = 0; k < nz; ++k) {
    for (index_t j = 0; j < ny; ++j) {
      const real_t area_x = wy[j] * wz[k];
      for (index_t i = 0; i < nx; ++i) {
        const index_t row = id(i, j, k);
        const real_t area_y = wx[i] * wz[k];
        const real_t area_z = wx[i] * wy[j];
        real_t txl = 0.0, txr = 0.0, tyl = 0.0, tyr = 0.0, tzl = 0.0, tzr = 0.0;
        if (i > 0)
          txl = area_x * tx[i - 1];
        else if (periodic_x && nx > 1)
          txl = area_x * tx[nx - 1];
        if (i + 1 < nx)
          txr = area_x * tx[i];
        else if (periodic_x && nx > 1)
          txr = area_x * tx[nx - 1];
        if (j > 0) tyl = area_y * ty[j - 1];
        if (j + 1 < ny) tyr = area_y * ty[j];
        if (k > 0) tzl = area_z * tz[k - 1];
        if (k + 1 < nz) tzr = area_z * tz[k];

        if (txl != 0.0) trip.push_back({row, id(i > 0 ? i - 1 : nx - 1, j, k), -txl});
        if (txr != 0.0) trip.push_back({row, id(i + 1 < nx ? i + 1 : 0, j, k), -txr});
        if (tyl != 0.0) trip.push_back({row, id(i, j - 1, k), -tyl});
        if (tyr != 0.0) trip.push_back({row, id(i, j + 1, k), -tyr});
        if (tzl != 0.0) trip.push_back({row, id(i, j, k - 1), -tzl});
        if (tzr != 0.0) trip.push_back({row, id(i, j, k + 1), -tzr});
        trip.push_back({row, row, (txl + txr) + (tyl + tyr) + (tzl + tzr)});
      }
    }
  }
  return from_triplets(n, n, std::move(trip));
}

}  // namespace detail

/// Neumann Poisson operator for the grid, lexicographic ordering (x fastest).
/// Singular with the constant nullspace; pair with a compatible right-hand
/// side.
inline SparseMatrix assemble_poisson(const StretchedGrid& g) {
  return detail::assemble_fv(g.wx, g.wy, g.wz, false);
}

}  // namespace symamg
