#pragma once

#include <atomic>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "symamg/core/sparse.hpp"

namespace symamg {

/// Dense columns of equal length stored column-contiguously: column j occupies
/// data[j*block_len .. (j+1)*block_len). Flattening is the identity on memory,
/// so a length block_len*n_blocks vector can be viewed in place.
struct MultiVector {
  index_t block_len = 0;
  index_t n_blocks = 0;
  std::vector<real_t> data;

  MultiVector() = default;
  MultiVector(index_t len, index_t nb)
      : block_len(len), n_blocks(nb), data(static_cast<std::size_t>(len) * nb, 0.0) {}

  real_t* col(index_t j) { return data.data() + static_cast<std::size_t>(j) * block_len; }
  const real_t* col(index_t j) const {
    return data.data() + static_cast<std::size_t>(j) * block_len;
  }
  index_t size() const { return block_len * n_blocks; }
};

struct MultiVectorView {
  index_t block_len = 0;
  index_t n_blocks = 0;
  real_t* data = nullptr;
  real_t* col(index_t j) const { return data + static_cast<std::size_t>(j) * block_len; }
};

struct ConstMultiVectorView {
  index_t block_len = 0;
  index_t n_blocks = 0;
  const real_t* data = nullptr;
  ConstMultiVectorView() = default;
  ConstMultiVectorView(index_t len, index_t nb, const real_t* d)
      : block_len(len), n_blocks(nb), data(d) {}
  ConstMultiVectorView(const MultiVectorView& v)
      : block_len(v.block_len), n_blocks(v.n_blocks), data(v.data) {}
  const real_t* col(index_t j) const { return data + static_cast<std::size_t>(j) * block_len; }
};

inline MultiVectorView as_multivector(std::span<real_t> x, index_t block_len, index_t n_blocks) {
  if (static_cast<std::size_t>(block_len) * n_blocks != x.size())
    throw std::invalid_argument("as_multivector: length is not block_len * n_blocks");
  return {block_len, n_blocks, x.data()};
}

inline ConstMultiVectorView as_multivector(std::span<const real_t> x, index_t block_len,
                                           index_t n_blocks) {
  if (static_cast<std::size_t>(block_len) * n_blocks != x.size())
    throw std::invalid_argument("as_multivector: length is not block_len * n_blocks");
  return {block_len, n_blocks, x.data()};
}

namespace instr {

/// Process-wide kernel counters. Increments happen where the loads happen, so
/// a matrix-times-block apply that routed through repeated single-vector
/// products would show up with an n_blocks-times larger read count.
struct Counters {
  std::atomic<std::uint64_t> spmv_value_reads{0};
  std::atomic<std::uint64_t> spmm_value_reads{0};
  std::atomic<std::uint64_t> fsai_rows_factored{0};

  void reset() {
    spmv_value_reads = 0;
    spmm_value_reads = 0;
    fsai_rows_factored = 0;
  }
};

inline Counters counters;

}  // namespace instr

// ---- vector helpers ------------------------------------------------------
//
// Reductions accumulate fixed-size chunks sequentially and then sum the chunk
// partials in index order, so results do not depend on the thread count.

namespace detail {
constexpr std::size_t kChunk = 4096;
}

inline real_t dot(std::span<const real_t> a, std::span<const real_t> b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: length mismatch");
  const std::size_t n = a.size();
  const std::size_t nchunks = (n + detail::kChunk - 1) / detail::kChunk;
  std::vector<real_t> partial(nchunks, 0.0);
#pragma omp parallel for schedule(static)
  for (std::int64_t c = 0; c < static_cast<std::int64_t>(nchunks); ++c) {
    const std::size_t lo = c * detail::kChunk;
    const std::size_t hi = std::min(n, lo + detail::kChunk);
    real_t s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += a[i] * b[i];
    partial[c] = s;
  }
  real_t s = 0.0;
  for (real_t p : partial) s += p;
  return s;
}

inline real_t norm2(std::span<const real_t> a) { return std::sqrt(dot(a, a)); }

inline void axpy(real_t alpha, std::span<const real_t> x, std::span<real_t> y) {
  if (x.size() != y.size()) throw std::invalid_argument("axpy: length mismatch");
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(x.size()); ++i) y[i] += alpha * x[i];
}

inline void scale(real_t alpha, std::span<real_t> x) {
  for (auto& v : x) v *= alpha;
}

inline void copy(std::span<const real_t> x, std::span<real_t> y) {
  if (x.size() != y.size()) throw std::invalid_argument("copy: length mismatch");
  std::copy(x.begin(), x.end(), y.begin());
}

inline real_t mean(std::span<const real_t> x) {
  if (x.empty()) return 0.0;
  const std::size_t nchunks = (x.size() + detail::kChunk - 1) / detail::kChunk;
  std::vector<real_t> partial(nchunks, 0.0);
  for (std::size_t c = 0; c < nchunks; ++c) {
    const std::size_t lo = c * detail::kChunk;
    const std::size_t hi = std::min(x.size(), lo + detail::kChunk);
    real_t s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += x[i];
    partial[c] = s;
  }
  real_t s = 0.0;
  for (real_t p : partial) s += p;
  return s / static_cast<real_t>(x.size());
}

// ---- sparse kernels ------------------------------------------------------

/// y = A x. Each row accumulates sequentially, so the result is deterministic
/// at any thread count.
inline void spmv(const SparseMatrix& A, std::span<const real_t> x, std::span<real_t> y) {
  if (static_cast<index_t>(x.size()) != A.n_cols || static_cast<index_t>(y.size()) != A.n_rows)
    throw std::invalid_argument("spmv: dimension mismatch");
  std::uint64_t reads = 0;
#pragma omp parallel for schedule(static) reduction(+ : reads)
  for (index_t i = 0; i < A.n_rows; ++i) {
    real_t s = 0.0;
    for (index_t p = A.row_offsets[i]; p < A.row_offsets[i + 1]; ++p) {
      s += A.values[p] * x[A.col_indices[p]];
      ++reads;
    }
    y[i] = s;
  }
  instr::counters.spmv_value_reads.fetch_add(reads, std::memory_order_relaxed);
}

/// y += A x.
inline void spmv_add(const SparseMatrix& A, std::span<const real_t> x, std::span<real_t> y) {
  if (static_cast<index_t>(x.size()) != A.n_cols || static_cast<index_t>(y.size()) != A.n_rows)
    throw std::invalid_argument("spmv_add: dimension mismatch");
  std::uint64_t reads = 0;
#pragma omp parallel for schedule(static) reduction(+ : reads)
  for (index_t i = 0; i < A.n_rows; ++i) {
    real_t s = 0.0;
    for (index_t p = A.row_offsets[i]; p < A.row_offsets[i + 1]; ++p) {
      s += A.values[p] * x[A.col_indices[p]];
      ++reads;
    }
    y[i] += s;
  }
  instr::counters.spmv_value_reads.fetch_add(reads, std::memory_order_relaxed);
}

/// Y = A X for a block of columns. A's values are loaded once per row per
/// apply and reused across all columns; the loop order is the performance
/// contract, not an implementation accident.
inline void spmm(const SparseMatrix& A, ConstMultiVectorView X, MultiVectorView Y) {
  if (X.block_len != A.n_cols || Y.block_len != A.n_rows || X.n_blocks != Y.n_blocks)
    throw std::invalid_argument("spmm: dimension mismatch");
  const index_t nb = X.n_blocks;
  std::uint64_t reads = 0;
#pragma omp parallel for schedule(static) reduction(+ : reads)
  for (index_t i = 0; i < A.n_rows; ++i) {
    real_t acc[64];
    real_t* a = acc;
    std::vector<real_t> heap_acc;
    if (nb > 64) {
      heap_acc.assign(nb, 0.0);
      a = heap_acc.data();
    } else {
      for (index_t b = 0; b < nb; ++b) a[b] = 0.0;
    }
    for (index_t p = A.row_offsets[i]; p < A.row_offsets[i + 1]; ++p) {
      const real_t v = A.values[p];
      const index_t c = A.col_indices[p];
      ++reads;
      for (index_t b = 0; b < nb; ++b) a[b] += v * X.col(b)[c];
    }
    for (index_t b = 0; b < nb; ++b) Y.col(b)[i] = a[b];
  }
  instr::counters.spmm_value_reads.fetch_add(reads, std::memory_order_relaxed);
}

/// y = (I_{n_blocks} (x) inner) x + outer. Additive semantics: the two terms
/// simply sum, whether or not their supports overlap.
inline void fused_block_apply(const SparseMatrix& inner, const SparseMatrix& outer,
                              std::span<const real_t> x, std::span<real_t> y) {
  if (inner.n_rows != inner.n_cols) throw std::invalid_argument("fused_block_apply: inner square");
  const index_t L = inner.n_rows;
  if (L == 0 || x.size() % static_cast<std::size_t>(L) != 0)
    throw std::invalid_argument("fused_block_apply: length not a multiple of block size");
  const index_t nb = static_cast<index_t>(x.size()) / L;
  spmm(inner, as_multivector(x, L, nb), as_multivector(y, L, nb));
  if (outer.nnz() > 0) {
    if (outer.n_rows != static_cast<index_t>(y.size()) ||
        outer.n_cols != static_cast<index_t>(x.size()))
      throw std::invalid_argument("fused_block_apply: outer dimension mismatch");
    spmv_add(outer, x, y);
  }
}

}  // namespace symamg
