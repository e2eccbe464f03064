#pragma once

#include <stdexcept>
#include <vector>

#include "symamg/core/kernels.hpp"
#include "symamg/core/sparse.hpp"
#include "symamg/core/spgemm.hpp"

namespace symamg {

/// Operator H = I_{n_blocks} (x) inner + outer, stored by its two parts.
/// The canonical split (split_block_operator) keeps the parts disjoint: outer
/// carries only entries outside the replicated diagonal blocks.
struct BlockOperator {
  index_t n_blocks = 0;
  SparseMatrix inner;  // block_len x block_len
  SparseMatrix outer;  // n x n

  index_t block_len() const { return inner.n_rows; }
  index_t size() const { return inner.n_rows * n_blocks; }

  void apply(std::span<const real_t> x, std::span<real_t> y) const {
    fused_block_apply(inner, outer, x, y);
  }
};

/// Splits H into I (x) inner + outer with inner = H[0:L, 0:L]. Requires every
/// diagonal block of H to equal the leading one exactly, which makes the
/// split disjoint by construction; anything else is rejected.
inline BlockOperator split_block_operator(const SparseMatrix& H, index_t n_blocks) {
  if (H.n_rows != H.n_cols) throw std::invalid_argument("split_block_operator: square input");
  if (n_blocks <= 0 || H.n_rows % n_blocks != 0)
    throw std::invalid_argument("split_block_operator: size not divisible by n_blocks");
  const index_t L = H.n_rows / n_blocks;
  BlockOperator op;
  op.n_blocks = n_blocks;
  op.inner = extract_block(H, 0, L, 0, L);
  for (index_t b = 1; b < n_blocks; ++b) {
    SparseMatrix Hb = extract_block(H, b * L, (b + 1) * L, b * L, (b + 1) * L);
    if (!structurally_equal(Hb, op.inner) || max_abs_diff(Hb, op.inner) != 0.0)
      throw std::invalid_argument("split_block_operator: diagonal blocks are not replicated");
  }
  // Off-diagonal-block entries only; diagonal blocks are exactly I (x) inner.
  SparseMatrix& out = op.outer;
  out = SparseMatrix(H.n_rows, H.n_cols);
  for (index_t i = 0; i < H.n_rows; ++i) {
    const index_t bi = i / L;
    for (index_t p = H.row_offsets[i]; p < H.row_offsets[i + 1]; ++p) {
      const index_t j = H.col_indices[p];
      if (j / L != bi) {
        out.col_indices.push_back(j);
        out.values.push_back(H.values[p]);
      }
    }
    out.row_offsets[i + 1] = static_cast<index_t>(out.col_indices.size());
  }
  return op;
}

/// Entrywise sum I (x) inner + outer as one matrix.
inline SparseMatrix materialize(const BlockOperator& op) {
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(op.inner.nnz()) * op.n_blocks + op.outer.nnz());
  for (index_t b = 0; b < op.n_blocks; ++b) {
    const index_t off = b * op.block_len();
    for (index_t i = 0; i < op.inner.n_rows; ++i)
      for (index_t p = op.inner.row_offsets[i]; p < op.inner.row_offsets[i + 1]; ++p)
        t.push_back({off + i, off + op.inner.col_indices[p], op.inner.values[p]});
  }
  for (index_t i = 0; i < op.outer.n_rows; ++i)
    for (index_t p = op.outer.row_offsets[i]; p < op.outer.row_offsets[i + 1]; ++p)
      t.push_back({i, op.outer.col_indices[p], op.outer.values[p]});
  return from_triplets(op.size(), op.size(), std::move(t));
}

}  // namespace symamg
