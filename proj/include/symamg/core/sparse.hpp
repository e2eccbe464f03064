#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace symamg {

using index_t = std::int32_t;
using real_t = double;

/// Compressed sparse row matrix with full (unsymmetric) storage.
/// Column indices are strictly increasing within each row and no stored
/// value is NaN; validate() enforces both.
struct SparseMatrix {
  index_t n_rows = 0;
  index_t n_cols = 0;
  std::vector<index_t> row_offsets;  // size n_rows + 1
  std::vector<index_t> col_indices;  // size nnz
  std::vector<real_t> values;        // size nnz

  SparseMatrix() : row_offsets(1, 0) {}
  SparseMatrix(index_t rows, index_t cols)
      : n_rows(rows), n_cols(cols), row_offsets(static_cast<std::size_t>(rows) + 1, 0) {}

  index_t nnz() const { return static_cast<index_t>(col_indices.size()); }

  std::span<const index_t> row_cols(index_t i) const {
    return {col_indices.data() + row_offsets[i],
            static_cast<std::size_t>(row_offsets[i + 1] - row_offsets[i])};
  }
  std::span<const real_t> row_vals(index_t i) const {
    return {values.data() + row_offsets[i],
            static_cast<std::size_t>(row_offsets[i + 1] - row_offsets[i])};
  }

  /// Value at (i, j), zero if not stored.
  real_t at(index_t i, index_t j) const {
    auto cols = row_cols(i);
    auto it = std::lower_bound(cols.begin(), cols.end(), j);
    if (it == cols.end() || *it != j) return 0.0;
    return values[row_offsets[i] + static_cast<index_t>(it - cols.begin())];
  }

  void validate() const {
    if (row_offsets.size() != static_cast<std::size_t>(n_rows) + 1)
      throw std::logic_error("SparseMatrix: row_offsets size mismatch");
    if (row_offsets.front() != 0 || row_offsets.back() != nnz())
      throw std::logic_error("SparseMatrix: bad offset bounds");
    for (index_t i = 0; i < n_rows; ++i) {
      if (row_offsets[i] > row_offsets[i + 1])
        throw std::logic_error("SparseMatrix: offsets not monotone");
      for (index_t p = row_offsets[i]; p < row_offsets[i + 1]; ++p) {
        if (col_indices[p] < 0 || col_indices[p] >= n_cols)
          throw std::logic_error("SparseMatrix: column index out of range");
        if (p > row_offsets[i] && col_indices[p] <= col_indices[p - 1])
          throw std::logic_error("SparseMatrix: columns not strictly increasing in row " +
                                 std::to_string(i));
        if (std::isnan(values[p]))
          throw std::logic_error("SparseMatrix: stored NaN in row " + std::to_string(i));
      }
    }
  }

  static SparseMatrix identity(index_t n) {
    SparseMatrix I(n, n);
    I.col_indices.resize(n);
    I.values.assign(n, 1.0);
    for (index_t i = 0; i < n; ++i) {
      I.row_offsets[i + 1] = i + 1;
      I.col_indices[i] = i;
    }
    return I;
  }
};

struct Triplet {
  index_t row;
  index_t col;
  real_t value;
};

/// Builds a CSR matrix from triplets; duplicate entries are summed.
inline SparseMatrix from_triplets(index_t n_rows, index_t n_cols, std::vector<Triplet> t) {
  for (const auto& e : t) {
    if (e.row < 0 || e.row >= n_rows || e.col < 0 || e.col >= n_cols)
      throw std::invalid_argument("from_triplets: entry out of range");
  }
  std::sort(t.begin(), t.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  SparseMatrix A(n_rows, n_cols);
  A.col_indices.reserve(t.size());
  A.values.reserve(t.size());
  std::size_t p = 0;
  for (index_t i = 0; i < n_rows; ++i) {
    while (p < t.size() && t[p].row == i) {
      real_t v = t[p].value;
      index_t c = t[p].col;
      ++p;
      while (p < t.size() && t[p].row == i && t[p].col == c) {
        v += t[p].value;
        ++p;
      }
      A.col_indices.push_back(c);
      A.values.push_back(v);
    }
    A.row_offsets[i + 1] = static_cast<index_t>(A.col_indices.size());
  }
  return A;
}

/// Exact transpose; rows of the result are sorted by construction.
inline SparseMatrix transpose(const SparseMatrix& A) {
  SparseMatrix T(A.n_cols, A.n_rows);
  std::vector<index_t> count(A.n_cols, 0);
  for (index_t p = 0; p < A.nnz(); ++p) count[A.col_indices[p]]++;
  for (index_t j = 0; j < A.n_cols; ++j) T.row_offsets[j + 1] = T.row_offsets[j] + count[j];
  T.col_indices.resize(A.nnz());
  T.values.resize(A.nnz());
  std::vector<index_t> next(T.row_offsets.begin(), T.row_offsets.end() - 1);
  for (index_t i = 0; i < A.n_rows; ++i) {
    for (index_t p = A.row_offsets[i]; p < A.row_offsets[i + 1]; ++p) {
      index_t q = next[A.col_indices[p]]++;
      T.col_indices[q] = i;
      T.values[q] = A.values[p];
    }
  }
  return T;
}

/// Symmetric permutation B[p][q] = A[perm[p]][perm[q]], perm maps new -> old.
inline SparseMatrix permute_symmetric(const SparseMatrix& A, std::span<const index_t> perm) {
  if (A.n_rows != A.n_cols || static_cast<index_t>(perm.size()) != A.n_rows)
    throw std::invalid_argument("permute_symmetric: size mismatch");
  std::vector<index_t> inv(perm.size());
  for (index_t i = 0; i < A.n_rows; ++i) inv[perm[i]] = i;
  std::vector<Triplet> t;
  t.reserve(A.nnz());
  for (index_t i = 0; i < A.n_rows; ++i)
    for (index_t p = A.row_offsets[i]; p < A.row_offsets[i + 1]; ++p)
      t.push_back({inv[i], inv[A.col_indices[p]], A.values[p]});
  return from_triplets(A.n_rows, A.n_cols, std::move(t));
}

/// Contiguous block A[r0:r1, c0:c1] as its own matrix.
inline SparseMatrix extract_block(const SparseMatrix& A, index_t r0, index_t r1, index_t c0,
                                  index_t c1) {
  if (r0 < 0 || r1 > A.n_rows || c0 < 0 || c1 > A.n_cols || r0 > r1 || c0 > c1)
    throw std::invalid_argument("extract_block: bad range");
  SparseMatrix B(r1 - r0, c1 - c0);
  for (index_t i = r0; i < r1; ++i) {
    for (index_t p = A.row_offsets[i]; p < A.row_offsets[i + 1]; ++p) {
      index_t j = A.col_indices[p];
      if (j >= c0 && j < c1) {
        B.col_indices.push_back(j - c0);
        B.values.push_back(A.values[p]);
      }
    }
    B.row_offsets[i - r0 + 1] = static_cast<index_t>(B.col_indices.size());
  }
  return B;
}

inline bool structurally_equal(const SparseMatrix& A, const SparseMatrix& B) {
  return A.n_rows == B.n_rows && A.n_cols == B.n_cols && A.row_offsets == B.row_offsets &&
         A.col_indices == B.col_indices;
}

/// Largest entrywise difference; infinity when the patterns differ in shape.
inline real_t max_abs_diff(const SparseMatrix& A, const SparseMatrix& B) {
  if (A.n_rows != B.n_rows || A.n_cols != B.n_cols)
    return std::numeric_limits<real_t>::infinity();
  real_t d = 0.0;
  for (index_t i = 0; i < A.n_rows; ++i) {
    auto ca = A.row_cols(i), cb = B.row_cols(i);
    std::size_t pa = 0, pb = 0;
    while (pa < ca.size() || pb < cb.size()) {
      index_t ja = pa < ca.size() ? ca[pa] : A.n_cols;
      index_t jb = pb < cb.size() ? cb[pb] : B.n_cols;
      if (ja == jb) {
        d = std::max(d, std::abs(A.row_vals(i)[pa] - B.row_vals(i)[pb]));
        ++pa, ++pb;
      } else if (ja < jb) {
        d = std::max(d, std::abs(A.row_vals(i)[pa]));
        ++pa;
      } else {
        d = std::max(d, std::abs(B.row_vals(i)[pb]));
        ++pb;
      }
    }
  }
  return d;
}

inline real_t max_abs(const SparseMatrix& A) {
  real_t m = 0.0;
  for (real_t v : A.values) m = std::max(m, std::abs(v));
  return m;
}

inline real_t frobenius_norm(const SparseMatrix& A) {
  real_t s = 0.0;
  for (real_t v : A.values) s += v * v;
  return std::sqrt(s);
}

inline std::vector<real_t> row_sums(const SparseMatrix& A) {
  std::vector<real_t> r(A.n_rows, 0.0);
  for (index_t i = 0; i < A.n_rows; ++i)
    for (index_t p = A.row_offsets[i]; p < A.row_offsets[i + 1]; ++p) r[i] += A.values[p];
  return r;
}

inline std::vector<real_t> diagonal(const SparseMatrix& A) {
  std::vector<real_t> d(A.n_rows, 0.0);
  for (index_t i = 0; i < A.n_rows; ++i) d[i] = A.at(i, i);
  return d;
}

inline bool is_symmetric(const SparseMatrix& A, real_t tol) {
  if (A.n_rows != A.n_cols) return false;
  return max_abs_diff(A, transpose(A)) <= tol;
}

}  // namespace symamg
