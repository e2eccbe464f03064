#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "symamg/core/sparse.hpp"

namespace symamg {

/// C = A B by Gustavson's row-wise algorithm with a dense accumulator per
/// row. Exact arithmetic path: nothing is dropped, output rows are sorted.
inline SparseMatrix multiply(const SparseMatrix& A, const SparseMatrix& B) {
  if (A.n_cols != B.n_rows) throw std::invalid_argument("multiply: inner dimension mismatch");
  SparseMatrix C(A.n_rows, B.n_cols);
  std::vector<std::vector<index_t>> row_cols(A.n_rows);
  std::vector<std::vector<real_t>> row_vals(A.n_rows);
#pragma omp parallel
  {
    std::vector<real_t> acc(B.n_cols, 0.0);
    std::vector<index_t> marker(B.n_cols, -1);
    std::vector<index_t> cols;
#pragma omp for schedule(static)
    for (index_t i = 0; i < A.n_rows; ++i) {
      cols.clear();
      for (index_t pa = A.row_offsets[i]; pa < A.row_offsets[i + 1]; ++pa) {
        const index_t k = A.col_indices[pa];
        const real_t va = A.values[pa];
        for (index_t pb = B.row_offsets[k]; pb < B.row_offsets[k + 1]; ++pb) {
          const index_t j = B.col_indices[pb];
          if (marker[j] != i) {
            marker[j] = i;
            acc[j] = 0.0;
            cols.push_back(j);
          }
          acc[j] += va * B.values[pb];
        }
      }
      std::sort(cols.begin(), cols.end());
      row_cols[i].assign(cols.begin(), cols.end());
      row_vals[i].resize(cols.size());
      for (std::size_t q = 0; q < cols.size(); ++q) row_vals[i][q] = acc[cols[q]];
    }
  }
  for (index_t i = 0; i < A.n_rows; ++i)
    C.row_offsets[i + 1] = C.row_offsets[i] + static_cast<index_t>(row_cols[i].size());
  C.col_indices.resize(C.row_offsets.back());
  C.values.resize(C.row_offsets.back());
  for (index_t i = 0; i < A.n_rows; ++i) {
    std::copy(row_cols[i].begin(), row_cols[i].end(), C.col_indices.begin() + C.row_offsets[i]);
    std::copy(row_vals[i].begin(), row_vals[i].end(), C.values.begin() + C.row_offsets[i]);
  }
  return C;
}

/// C = alpha A + beta B on the union support. Entries with |c| < drop_tol are
/// dropped (absolute threshold); the default 0 keeps everything, explicit
/// zeros included.
inline SparseMatrix sparse_add(real_t alpha, const SparseMatrix& A, real_t beta,
                               const SparseMatrix& B, real_t drop_tol = 0.0) {
  if (A.n_rows != B.n_rows || A.n_cols != B.n_cols)
    throw std::invalid_argument("sparse_add: shape mismatch");
  SparseMatrix C(A.n_rows, A.n_cols);
  for (index_t i = 0; i < A.n_rows; ++i) {
    auto ca = A.row_cols(i), cb = B.row_cols(i);
    auto va = A.row_vals(i), vb = B.row_vals(i);
    std::size_t pa = 0, pb = 0;
    while (pa < ca.size() || pb < cb.size()) {
      index_t ja = pa < ca.size() ? ca[pa] : A.n_cols;
      index_t jb = pb < cb.size() ? cb[pb] : A.n_cols;
      index_t j;
      real_t v;
      if (ja == jb) {
        j = ja;
        v = alpha * va[pa] + beta * vb[pb];
        ++pa, ++pb;
      } else if (ja < jb) {
        j = ja;
        v = alpha * va[pa];
        ++pa;
      } else {
        j = jb;
        v = beta * vb[pb];
        ++pb;
      }
      if (std::abs(v) >= drop_tol) {
        C.col_indices.push_back(j);
        C.values.push_back(v);
      }
    }
    C.row_offsets[i + 1] = static_cast<index_t>(C.col_indices.size());
  }
  return C;
}

/// Galerkin triple product P^T A P, exact (no dropping).
inline SparseMatrix triple_product_rap(const SparseMatrix& P, const SparseMatrix& A) {
  if (A.n_rows != A.n_cols || A.n_cols != P.n_rows)
    throw std::invalid_argument("triple_product_rap: dimension mismatch");
  SparseMatrix Pt = transpose(P);
  SparseMatrix AP = multiply(A, P);
  SparseMatrix Z = multiply(Pt, AP);
  // A symmetric must give an exactly symmetric coarse operator, but the two
  // product passes accumulate (i,j) and (j,i) in different orders. Mirror
  // averaging removes that last-ulp noise: addition commutes bitwise, and the
  // no-dropping products make Z's pattern symmetric already, so no entry is
  // created or halved.
  if (max_abs_diff(A, transpose(A)) == 0.0) {
    SparseMatrix Zt = transpose(Z);
    if (structurally_equal(Z, Zt)) {
      for (std::size_t p = 0; p < Z.values.size(); ++p)
        Z.values[p] = 0.5 * Z.values[p] + 0.5 * Zt.values[p];
    }
  }
  return Z;
}

/// (M + M^T) / 2 on the symmetrized support.
inline SparseMatrix symmetrize(const SparseMatrix& M) {
  return sparse_add(0.5, M, 0.5, transpose(M));
}

}  // namespace symamg
