#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "symamg/core/sparse.hpp"

namespace symamg {

/// In-place Cholesky solve of a small dense SPD system stored row-major in a
/// scratch buffer. Used for local systems of a few dozen unknowns; throws on
/// a non-positive pivot.
inline void cholesky_solve_inplace(index_t m, std::span<real_t> a, std::span<real_t> b) {
  for (index_t j = 0; j < m; ++j) {
    real_t d = a[j * m + j];
    for (index_t k = 0; k < j; ++k) d -= a[j * m + k] * a[j * m + k];
    if (!(d > 0.0)) throw std::runtime_error("cholesky: non-positive pivot (matrix not SPD)");
    d = std::sqrt(d);
    a[j * m + j] = d;
    for (index_t i = j + 1; i < m; ++i) {
      real_t s = a[i * m + j];
      for (index_t k = 0; k < j; ++k) s -= a[i * m + k] * a[j * m + k];
      a[i * m + j] = s / d;
    }
  }
  for (index_t i = 0; i < m; ++i) {  // L y = b
    real_t s = b[i];
    for (index_t k = 0; k < i; ++k) s -= a[i * m + k] * b[k];
    b[i] = s / a[i * m + i];
  }
  for (index_t i = m - 1; i >= 0; --i) {  // L^T x = y
    real_t s = b[i];
    for (index_t k = i + 1; k < m; ++k) s -= a[k * m + i] * b[k];
    b[i] = s / a[i * m + i];
  }
}

inline Eigen::MatrixXd to_dense(const SparseMatrix& A) {
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(A.n_rows, A.n_cols);
  for (index_t i = 0; i < A.n_rows; ++i)
    for (index_t p = A.row_offsets[i]; p < A.row_offsets[i + 1]; ++p)
      D(i, A.col_indices[p]) = A.values[p];
  return D;
}

struct SymEigen {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // columns
};

inline SymEigen sym_eig(const Eigen::MatrixXd& A) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
  if (es.info() != Eigen::Success) throw std::runtime_error("sym_eig: eigensolver failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

/// Symmetric pseudo-inverse factor: eigenvalues below rel_floor * max|lambda|
/// are treated as a nullspace and inverted to zero. For a nonsingular SPD
/// input this is the exact inverse.
struct DensePinv {
  Eigen::MatrixXd vectors;
  Eigen::VectorXd inv_values;

  index_t size() const { return static_cast<index_t>(vectors.rows()); }

  void apply(std::span<const real_t> r, std::span<real_t> x) const {
    Eigen::Map<const Eigen::VectorXd> rv(r.data(), r.size());
    Eigen::Map<Eigen::VectorXd> xv(x.data(), x.size());
    xv = vectors * (inv_values.asDiagonal() * (vectors.transpose() * rv));
  }
};

inline DensePinv make_dense_pinv(const SparseMatrix& A, real_t rel_floor = 1e-12) {
  SymEigen e = sym_eig(to_dense(A));
  const real_t cap = e.values.cwiseAbs().maxCoeff();
  DensePinv f;
  f.vectors = e.vectors;
  f.inv_values.resize(e.values.size());
  for (Eigen::Index i = 0; i < e.values.size(); ++i)
    f.inv_values[i] = std::abs(e.values[i]) > rel_floor * cap ? 1.0 / e.values[i] : 0.0;
  return f;
}

/// Dense column block, column-major; the small dense side of the low-rank
/// machinery (eigenvector bundles and their coefficient solves).
struct DenseBlock {
  index_t rows = 0;
  index_t cols = 0;
  std::vector<real_t> data;  // column-major

  DenseBlock() = default;
  DenseBlock(index_t r, index_t c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}

  real_t* col(index_t j) { return data.data() + static_cast<std::size_t>(j) * rows; }
  const real_t* col(index_t j) const { return data.data() + static_cast<std::size_t>(j) * rows; }

  /// y = Z^T x (length cols).
  void apply_transpose(std::span<const real_t> x, std::span<real_t> y) const {
    for (index_t j = 0; j < cols; ++j) {
      const real_t* c = col(j);
      real_t s = 0.0;
      for (index_t i = 0; i < rows; ++i) s += c[i] * x[i];
      y[j] = s;
    }
  }

  /// y += Z x (x has length cols).
  void apply_add(std::span<const real_t> x, std::span<real_t> y) const {
    for (index_t j = 0; j < cols; ++j) {
      const real_t* c = col(j);
      const real_t xj = x[j];
      for (index_t i = 0; i < rows; ++i) y[i] += c[i] * xj;
    }
  }
};

}  // namespace symamg
