#pragma once

#include <vector>

#include "symamg/core/sparse.hpp"

namespace symamg {

/// Greedy maximal independent set on the distance-`power` graph of S,
/// visiting nodes in ascending index order. A selected node removes every
/// node reachable within `power` edges (breadth-first with its own visit
/// stamps, so earlier removals do not block expansion). Deterministic by
/// construction; the selected nodes become the coarse set.
inline std::vector<char> greedy_mis(const SparseMatrix& S, index_t power = 1) {
  const index_t n = S.n_rows;
  std::vector<char> removed(n, 0), coarse(n, 0);
  std::vector<index_t> stamp(n, -1);
  std::vector<index_t> frontier, next;
  for (index_t i = 0; i < n; ++i) {
    if (removed[i]) continue;
    coarse[i] = 1;
    removed[i] = 1;
    stamp[i] = i;
    frontier.assign(1, i);
    for (index_t d = 0; d < power; ++d) {
      next.clear();
      for (index_t u : frontier)
        for (index_t p = S.row_offsets[u]; p < S.row_offsets[u + 1]; ++p) {
          const index_t v = S.col_indices[p];
          if (stamp[v] != i) {
            stamp[v] = i;
            removed[v] = 1;
            next.push_back(v);
          }
        }
      frontier.swap(next);
    }
  }
  return coarse;
}

}  // namespace symamg
