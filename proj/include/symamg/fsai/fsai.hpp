#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "symamg/core/dense.hpp"
#include "symamg/core/kernels.hpp"
#include "symamg/core/sparse.hpp"
#include "symamg/core/spgemm.hpp"
#include "symamg/krylov/types.hpp"

namespace symamg {

/// Factorized sparse approximate inverse on a static lower-triangular
/// pattern: G approximates the inverse Cholesky factor, the preconditioner is
/// r -> G^T (G r). Rows are scaled so diag(G A G^T) = 1. Row computations are
/// independent (one small dense SPD solve each), so setup parallelizes.
struct FsaiFactor {
  SparseMatrix G;   // lower triangular, positive diagonal
  SparseMatrix Gt;  // transpose, kept for the backward product
  mutable std::vector<real_t> scratch;

  index_t n() const { return G.n_rows; }

  void apply(std::span<const real_t> r, std::span<real_t> x) const {
    scratch.resize(r.size());
    spmv(G, r, scratch);
    spmv(Gt, scratch, x);
  }

  void apply_mv(ConstMultiVectorView R, MultiVectorView X) const {
    scratch.resize(static_cast<std::size_t>(R.block_len) * R.n_blocks);
    MultiVectorView S{R.block_len, R.n_blocks, scratch.data()};
    spmm(G, R, S);
    spmm(Gt, ConstMultiVectorView{R.block_len, R.n_blocks, scratch.data()}, X);
  }
};

namespace detail {

/// Lower-triangular pattern rows (diagonal always included, columns
/// ascending) taken from A or, for power 2, from the pattern of A*A.
inline std::vector<std::vector<index_t>> fsai_pattern(const SparseMatrix& A,
                                                      index_t pattern_power) {
  const SparseMatrix* src = &A;
  SparseMatrix squared;
  if (pattern_power == 2) {
    squared = multiply(A, A);
    src = &squared;
  } else if (pattern_power != 1) {
    throw std::invalid_argument("build_fsai: pattern power must be 1 or 2");
  }
  std::vector<std::vector<index_t>> rows(A.n_rows);
  for (index_t i = 0; i < src->n_rows; ++i) {
    auto& row = rows[i];
    for (index_t p = src->row_offsets[i]; p < src->row_offsets[i + 1]; ++p) {
      const index_t j = src->col_indices[p];
      if (j < i) row.push_back(j);
    }
    row.push_back(i);
  }
  return rows;
}

}  // namespace detail

inline FsaiFactor build_fsai(const SparseMatrix& A, index_t pattern_power = 1) {
  if (A.n_rows != A.n_cols) throw std::invalid_argument("build_fsai: matrix not square");
  const index_t n = A.n_rows;
  const auto pattern = detail::fsai_pattern(A, pattern_power);

  std::vector<std::vector<real_t>> g_rows(n);
  std::string error;
#pragma omp parallel
  {
    std::vector<real_t> local;  // row-major A[P,P] scratch
    std::vector<real_t> rhs;
#pragma omp for schedule(dynamic, 64)
    for (index_t i = 0; i < n; ++i) {
      const auto& P = pattern[i];
      const index_t k = static_cast<index_t>(P.size());
      local.assign(static_cast<std::size_t>(k) * k, 0.0);
      for (index_t a = 0; a < k; ++a) {
        const index_t row = P[a];
        index_t b = 0;
        for (index_t p = A.row_offsets[row]; p < A.row_offsets[row + 1] && b < k; ++p) {
          const index_t c = A.col_indices[p];
          while (b < k && P[b] < c) ++b;
          if (b < k && P[b] == c) local[static_cast<std::size_t>(a) * k + b] = A.values[p];
        }
      }
      rhs.assign(k, 0.0);
      rhs[k - 1] = 1.0;
      try {
        cholesky_solve_inplace(k, local, rhs);
      } catch (const std::exception& e) {
#pragma omp critical
        if (error.empty())
          error = "build_fsai: row " + std::to_string(i) + ": " + e.what();
        continue;
      }
      const real_t d = rhs[k - 1];
      if (!(d > 0.0)) {
#pragma omp critical
        if (error.empty())
          error = "build_fsai: non-positive pivot in row " + std::to_string(i);
        continue;
      }
      const real_t scal = 1.0 / std::sqrt(d);
      for (auto& v : rhs) v *= scal;
      g_rows[i] = rhs;
    }
  }
  if (!error.empty()) throw std::runtime_error(error);
  instr::counters.fsai_rows_factored.fetch_add(static_cast<std::uint64_t>(n),
                                               std::memory_order_relaxed);

  FsaiFactor f;
  f.G.n_rows = n;
  f.G.n_cols = n;
  f.G.row_offsets.assign(n + 1, 0);
  for (index_t i = 0; i < n; ++i)
    f.G.row_offsets[i + 1] = f.G.row_offsets[i] + static_cast<index_t>(pattern[i].size());
  f.G.col_indices.reserve(f.G.row_offsets[n]);
  f.G.values.reserve(f.G.row_offsets[n]);
  for (index_t i = 0; i < n; ++i) {
    f.G.col_indices.insert(f.G.col_indices.end(), pattern[i].begin(), pattern[i].end());
    f.G.values.insert(f.G.values.end(), g_rows[i].begin(), g_rows[i].end());
  }
  f.Gt = transpose(f.G);
  return f;
}

inline PreconditionerHandle make_preconditioner(const FsaiFactor& f, std::string name = "fsai") {
  return PreconditionerHandle{
      std::move(name), true,
      [&f](std::span<const real_t> r, std::span<real_t> x) { f.apply(r, x); }};
}

}  // namespace symamg
