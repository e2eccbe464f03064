#pragma once

#include <cmath>
#include <span>
#include <stdexcept>

#include "symamg/core/sparse.hpp"

namespace symamg {

/// Orthogonal change of basis that block-diagonalizes operators with nested
/// two-fold reflection symmetry. Vectors of length block_len * 2^s are viewed
/// as 2^s blocks; each reflection level combines block pairs through the
/// involutive stage (u, v) -> ((u + v), (u - v)) / sqrt(2). Levels act on
/// disjoint bits of the block index and commute, so the full map is symmetric
/// and its own inverse: applying it twice restores the input.
struct SymmetryBasis {
  index_t s = 0;
  index_t block_len = 0;

  index_t n_blocks() const { return index_t{1} << s; }
  index_t n() const { return block_len * n_blocks(); }

  void apply(std::span<real_t> x) const {
    if (static_cast<index_t>(x.size()) != n())
      throw std::invalid_argument("SymmetryBasis::apply: length mismatch");
    const real_t inv_sqrt2 = std::sqrt(0.5);
    const index_t nb = n_blocks();
    const index_t L = block_len;
    for (index_t level = 0; level < s; ++level) {
      const index_t mask = index_t{1} << level;
      for (index_t b = 0; b < nb; ++b) {
        if (b & mask) continue;
        real_t* u = x.data() + static_cast<std::size_t>(b) * L;
        real_t* v = x.data() + static_cast<std::size_t>(b | mask) * L;
        for (index_t t = 0; t < L; ++t) {
          const real_t a = u[t], c = v[t];
          u[t] = (a + c) * inv_sqrt2;
          v[t] = (a - c) * inv_sqrt2;
        }
      }
    }
  }
};

}  // namespace symamg
