#pragma once

#include <cmath>
#include <vector>

#include "symamg/core/sparse.hpp"
#include "symamg/core/spgemm.hpp"

namespace symamg {

/// Classical strength-of-connection pattern: j is strong for i when
/// |a_ij| >= theta * max_{k != i} |a_ik|. The pattern is symmetrized (union
/// with its transpose) so coarsening and interpolation see the same graph
/// from both ends. Values are 1.0; only the structure matters.
inline SparseMatrix strength_graph(const SparseMatrix& A, real_t theta) {
  std::vector<Triplet> t;
  for (index_t i = 0; i < A.n_rows; ++i) {
    real_t strongest = 0.0;
    for (index_t p = A.row_offsets[i]; p < A.row_offsets[i + 1]; ++p)
      if (A.col_indices[p] != i) strongest = std::max(strongest, std::abs(A.values[p]));
    if (strongest == 0.0) continue;
    const real_t cut = theta * strongest;
    for (index_t p = A.row_offsets[i]; p < A.row_offsets[i + 1]; ++p) {
      const index_t j = A.col_indices[p];
      if (j != i && std::abs(A.values[p]) >= cut) {
        t.push_back({i, j, 1.0});
        t.push_back({j, i, 1.0});
      }
    }
  }
  SparseMatrix S = from_triplets(A.n_rows, A.n_cols, t);
  for (auto& v : S.values) v = 1.0;  // duplicate sums back to a flag
  return S;
}

}  // namespace symamg
