#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "symamg/core/sparse.hpp"

namespace symamg {

enum class InterpScheme { direct, distance2 };

namespace detail {

/// Direct interpolation weights of one fine row, normalized so the row sums
/// to one: w_ij = a_ij / sum_{k in C_i} a_ik over the strong coarse
/// neighbors C_i. On zero-row-sum rows this equals the classical
/// -(a_ij/a_ii)(sum_N a_ik / sum_C a_ik) weights. Returns false when the row
/// has no usable coarse neighbor (uncovered).
inline bool direct_row(const SparseMatrix& A, const SparseMatrix& S,
                       const std::vector<char>& is_coarse, index_t i,
                       std::vector<index_t>& cols, std::vector<real_t>& w) {
  cols.clear();
  w.clear();
  real_t denom = 0.0;
  index_t q = A.row_offsets[i];
  for (index_t p = S.row_offsets[i]; p < S.row_offsets[i + 1]; ++p) {
    const index_t j = S.col_indices[p];
    if (!is_coarse[j]) continue;
    while (q < A.row_offsets[i + 1] && A.col_indices[q] < j) ++q;
    if (q >= A.row_offsets[i + 1] || A.col_indices[q] != j) continue;  // symmetrized-only edge
    cols.push_back(j);
    w.push_back(A.values[q]);
    denom += A.values[q];
  }
  if (cols.empty() || denom == 0.0) return false;
  for (auto& v : w) v /= denom;
  return true;
}

}  // namespace detail

/// Builds interpolation from a coarse marking. Coarse rows are unit rows;
/// fine rows take their strong coarse neighbors (direct), optionally routed
/// through strong fine neighbors' own coarse weights (distance2), and are
/// normalized to sum one so constants interpolate exactly. Fine rows that
/// reach no coarse point are collected into `uncovered` when a collector is
/// given; otherwise they are a hard error.
inline SparseMatrix build_interpolation(const SparseMatrix& A, const SparseMatrix& S,
                                        const std::vector<char>& is_coarse,
                                        InterpScheme scheme,
                                        std::vector<index_t>* uncovered = nullptr) {
  const index_t n = A.n_rows;
  std::vector<index_t> coarse_id(n, -1);
  index_t nc = 0;
  for (index_t i = 0; i < n; ++i)
    if (is_coarse[i]) coarse_id[i] = nc++;

  // Direct rows for every fine node; distance2 routes through them.
  std::vector<std::vector<index_t>> dcols(n);
  std::vector<std::vector<real_t>> dw(n);
  std::vector<index_t> cols;
  std::vector<real_t> w;
  for (index_t i = 0; i < n; ++i) {
    if (is_coarse[i]) continue;
    if (detail::direct_row(A, S, is_coarse, i, cols, w)) {
      dcols[i] = cols;
      dw[i] = w;
    }
  }

  std::vector<Triplet> t;
  std::vector<index_t> missing;
  std::vector<real_t> acc(n, 0.0);
  std::vector<index_t> seen(n, -1);
  std::vector<index_t> touched;
  for (index_t i = 0; i < n; ++i) {
    if (is_coarse[i]) {
      t.push_back({i, coarse_id[i], 1.0});
      continue;
    }
    touched.clear();
    auto add = [&](index_t c, real_t v) {
      if (seen[c] != i) {
        seen[c] = i;
        acc[c] = 0.0;
        touched.push_back(c);
      }
      acc[c] += v;
    };
    if (scheme == InterpScheme::direct) {
      for (std::size_t k = 0; k < dcols[i].size(); ++k) add(dcols[i][k], dw[i][k]);
    } else {
      index_t q = A.row_offsets[i];
      for (index_t p = S.row_offsets[i]; p < S.row_offsets[i + 1]; ++p) {
        const index_t j = S.col_indices[p];
        while (q < A.row_offsets[i + 1] && A.col_indices[q] < j) ++q;
        if (q >= A.row_offsets[i + 1] || A.col_indices[q] != j) continue;
        const real_t a_ij = A.values[q];
        if (is_coarse[j]) {
          add(j, a_ij);
        } else {
          for (std::size_t k = 0; k < dcols[j].size(); ++k) add(dcols[j][k], a_ij * dw[j][k]);
        }
      }
    }
    real_t denom = 0.0;
    for (index_t c : touched) denom += acc[c];
    if (touched.empty() || denom == 0.0) {
      missing.push_back(i);
      continue;
    }
    std::sort(touched.begin(), touched.end());
    for (index_t c : touched) t.push_back({i, coarse_id[c], acc[c] / denom});
  }

  if (!missing.empty()) {
    if (!uncovered) {
      throw std::runtime_error("build_interpolation: " + std::to_string(missing.size()) +
                               " fine nodes reach no coarse point (first: " +
                               std::to_string(missing.front()) + ")");
    }
    *uncovered = std::move(missing);
  } else if (uncovered) {
    uncovered->clear();
  }
  return from_triplets(n, nc, t);
}

}  // namespace symamg
