#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "symamg/core/block_operator.hpp"
#include "symamg/core/kernels.hpp"
#include "symamg/core/rng.hpp"
#include "symamg/core/sparse.hpp"
#include "symamg/model/grid.hpp"
#include "symamg/model/poisson.hpp"

namespace symamg {

enum class SymmetryKind { mirrored, inner_interface, repeated };

/// A Poisson operator reordered so its symmetry is explicit in the block
/// structure. For `mirrored`, the n_b = 2^s subdomains come from reflecting
/// the cube across s mid-planes (x, then y, then z); subdomain b's bit
/// pattern has the x reflection in the most significant bit, and blocks obey
/// H_{b,b'} = A_{1 + (b xor b')}. For `repeated`, n_b translated copies of
/// one block grid form an x-periodic ring and H_{b,b'} = A_{1 + (b'-b mod
/// n_b)}. Either way every diagonal block equals A_1 exactly.
struct SymmetricProblem {
  SymmetryKind kind = SymmetryKind::mirrored;
  index_t s = 0;
  index_t n_b = 1;
  index_t block_len = 0;
  SparseMatrix full;                  // symmetry-aware ordering
  std::vector<SparseMatrix> blocks;   // A_1 .. A_{n_b}, couplings of the base block
  std::vector<index_t> ordering;      // ordering[sym position] = lexicographic id
  StretchedGrid grid;                 // full-domain grid (for export / reports)

  index_t n() const { return full.n_rows; }

  /// Disjoint split full = I (x) A_1 + couplings.
  BlockOperator to_block_operator() const { return split_block_operator(full, n_b); }

  /// Rebuilds the full operator from the blocks via the group pattern.
  SparseMatrix materialize_from_blocks() const {
    const index_t N = n_b * block_len;
    std::vector<Triplet> t;
    for (index_t b = 0; b < n_b; ++b) {
      for (index_t c = 0; c < n_b; ++c) {
        const index_t which =
            kind == SymmetryKind::repeated ? (c - b + n_b) % n_b : (b ^ c);
        const SparseMatrix& blk = blocks[which];
        for (index_t i = 0; i < blk.n_rows; ++i)
          for (index_t p = blk.row_offsets[i]; p < blk.row_offsets[i + 1]; ++p)
            t.push_back({b * block_len + i, c * block_len + blk.col_indices[p], blk.values[p]});
      }
    }
    return from_triplets(N, N, std::move(t));
  }
};

namespace detail {

inline std::vector<index_t> mirrored_ordering(index_t nx, index_t ny, index_t nz, index_t s) {
  const index_t mx = s >= 1 ? nx / 2 : nx;
  const index_t my = s >= 2 ? ny / 2 : ny;
  const index_t mz = s >= 3 ? nz / 2 : nz;
  const index_t block = mx * my * mz;
  std::vector<index_t> ord(static_cast<std::size_t>(nx) * ny * nz);
  for (index_t k = 0; k < nz; ++k) {
    for (index_t j = 0; j < ny; ++j) {
      for (index_t i = 0; i < nx; ++i) {
        const index_t bx = (s >= 1 && i >= mx) ? 1 : 0;
        const index_t by = (s >= 2 && j >= my) ? 1 : 0;
        const index_t bz = (s >= 3 && k >= mz) ? 1 : 0;
        index_t b = 0;
        for (index_t bit : {bx, by, bz}) b = (b << 1) | bit;  // x reflection = MSB
        b >>= (3 - s);
        const index_t li = bx ? nx - 1 - i : i;
        const index_t lj = by ? ny - 1 - j : j;
        const index_t lk = bz ? nz - 1 - k : k;
        const index_t local = li + mx * (lj + my * lk);
        ord[b * block + local] = i + nx * (j + ny * k);
      }
    }
  }
  return ord;
}

}  // namespace detail

/// Mirrored model problem: assembles the Neumann Poisson operator on the
/// grid and permutes it into the 2^s-subdomain symmetric ordering. Each
/// reflected axis must have an even cell count.
inline SymmetricProblem make_symmetric_problem(const StretchedGrid& grid, index_t s) {
  if (s < 0 || s > 3) throw std::invalid_argument("make_symmetric_problem: s must be in 0..3");
  if ((s >= 1 && grid.nx % 2) || (s >= 2 && grid.ny % 2) || (s >= 3 && grid.nz % 2))
    throw std::invalid_argument(
        "make_symmetric_problem: reflected axes need even cell counts");
  SymmetricProblem prob;
  prob.kind = SymmetryKind::mirrored;
  prob.s = s;
  prob.n_b = index_t(1) << s;
  prob.grid = grid;
  prob.ordering = detail::mirrored_ordering(grid.nx, grid.ny, grid.nz, s);
  prob.block_len = grid.n_cells() / prob.n_b;
  SparseMatrix lex = assemble_poisson(grid);
  prob.full = permute_symmetric(lex, prob.ordering);
  prob.blocks.reserve(prob.n_b);
  for (index_t c = 0; c < prob.n_b; ++c)
    prob.blocks.push_back(extract_block(prob.full, 0, prob.block_len, c * prob.block_len,
                                        (c + 1) * prob.block_len));
  return prob;
}

/// Translationally repeated problem: n_b copies of the block grid chained
/// along x and closed into a ring, so every block sees identical neighbor
/// couplings (block-circulant structure). Ordering is block-major with the
/// block-local lexicographic order.
inline SymmetricProblem make_repeated_problem(const StretchedGrid& block_grid, index_t n_b) {
  if (n_b < 2) throw std::invalid_argument("make_repeated_problem: need n_b >= 2");
  SymmetricProblem prob;
  prob.kind = SymmetryKind::repeated;
  prob.s = 0;
  prob.n_b = n_b;
  prob.grid = block_grid;
  prob.block_len = block_grid.n_cells();

  std::vector<real_t> wx;
  wx.reserve(static_cast<std::size_t>(block_grid.nx) * n_b);
  for (index_t b = 0; b < n_b; ++b) wx.insert(wx.end(), block_grid.wx.begin(), block_grid.wx.end());
  SparseMatrix lex = detail::assemble_fv(wx, block_grid.wy, block_grid.wz, /*periodic_x=*/true);

  const index_t mx = block_grid.nx, ny = block_grid.ny, nz = block_grid.nz;
  const index_t NX = mx * n_b;
  std::vector<index_t> ord(static_cast<std::size_t>(NX) * ny * nz);
  for (index_t k = 0; k < nz; ++k)
    for (index_t j = 0; j < ny; ++j)
      for (index_t i = 0; i < NX; ++i) {
        const index_t b = i / mx;
        const index_t local = (i - b * mx) + mx * (j + ny * k);
        ord[b * prob.block_len + local] = i + NX * (j + ny * k);
      }
  prob.ordering = std::move(ord);
  prob.full = permute_symmetric(lex, prob.ordering);
  prob.blocks.reserve(n_b);
  for (index_t c = 0; c < n_b; ++c)
    prob.blocks.push_back(extract_block(prob.full, 0, prob.block_len, c * prob.block_len,
                                        (c + 1) * prob.block_len));
  return prob;
}

/// Random right-hand side, uniform in [-1, 1), mean-subtracted so it is
/// orthogonal to the Neumann nullspace. Deterministic per seed.
inline std::vector<real_t> make_compatible_rhs(index_t n, std::uint64_t seed) {
  std::vector<real_t> b(n);
  Rng rng(seed);
  for (auto& v : b) v = rng.symmetric();
  const real_t m = mean(b);
  for (auto& v : b) v -= m;
  return b;
}

}  // namespace symamg
