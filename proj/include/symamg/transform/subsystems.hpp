#pragma once

#include <bit>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "symamg/core/kernels.hpp"
#include "symamg/core/sparse.hpp"
#include "symamg/core/spgemm.hpp"
#include "symamg/model/problem.hpp"

namespace symamg {

/// Signs combining the distinct coupling blocks of a mirrored operator into
/// its decoupled subsystems: W[i][d] = (-1)^popcount(i & d), the unnormalized
/// Walsh-Hadamard pattern of order 2^s. Row i gives subsystem i as
/// sum_d W[i][d] * A_{d} where A_{d} couples subdomains differing in bits d.
inline std::vector<std::vector<int>> sign_matrix(index_t s) {
  const index_t m = index_t{1} << s;
  std::vector<std::vector<int>> W(m, std::vector<int>(m));
  for (index_t i = 0; i < m; ++i)
    for (index_t d = 0; d < m; ++d)
      W[i][d] = (std::popcount(static_cast<unsigned>(i & d)) % 2 == 0) ? 1 : -1;
  return W;
}

/// The decoupled image of a mirrored problem. Each subsystem shares the
/// diagonal block A_inn and differs only by a sparse correction built from
/// the cross-subdomain couplings; corrections may overlap A_inn's pattern,
/// so applications are additive. Subsystems whose signs are all positive
/// inherit the constant nullspace of a pure Neumann operator.
struct SubsystemSet {
  index_t s = 0;
  index_t block_len = 0;
  SparseMatrix A_inn;
  std::vector<SparseMatrix> outer;  // one per subsystem, local block indices
  std::vector<char> singular;

  index_t n_sub() const { return static_cast<index_t>(outer.size()); }
  index_t stacked_n() const { return block_len * n_sub(); }

  /// Materializes subsystem i as a plain sparse matrix.
  SparseMatrix subsystem(index_t i) const { return sparse_add(1.0, A_inn, 1.0, outer[i]); }

  /// y = blockdiag(A_inn + outer_0, ..., A_inn + outer_{m-1}) x, computed as
  /// one multi-vector product with the shared block plus per-block
  /// corrections. Values of A_inn are loaded once per row for all blocks.
  void apply_stacked(std::span<const real_t> x, std::span<real_t> y) const {
    const index_t m = n_sub();
    if (static_cast<index_t>(x.size()) != stacked_n() || x.size() != y.size())
      throw std::invalid_argument("SubsystemSet::apply_stacked: length mismatch");
    auto xv = as_multivector(x, block_len, m);
    auto yv = as_multivector(y, block_len, m);
    spmm(A_inn, xv, yv);
    for (index_t i = 0; i < m; ++i) {
      if (outer[i].nnz() == 0) continue;
      spmv_add(outer[i], x.subspan(static_cast<std::size_t>(i) * block_len, block_len),
               y.subspan(static_cast<std::size_t>(i) * block_len, block_len));
    }
  }
};

namespace detail {

/// Removes entries that survive only as cancellation residue.
inline SparseMatrix drop_relative(const SparseMatrix& M, real_t rel_tol) {
  const real_t cut = rel_tol * max_abs(M);
  SparseMatrix R;
  R.n_rows = M.n_rows;
  R.n_cols = M.n_cols;
  R.row_offsets.assign(M.n_rows + 1, 0);
  for (index_t i = 0; i < M.n_rows; ++i) {
    for (index_t p = M.row_offsets[i]; p < M.row_offsets[i + 1]; ++p)
      if (std::abs(M.values[p]) > cut) {
        R.col_indices.push_back(M.col_indices[p]);
        R.values.push_back(M.values[p]);
      }
    R.row_offsets[i + 1] = static_cast<index_t>(R.col_indices.size());
  }
  return R;
}

}  // namespace detail

/// Splits a mirrored problem into its 2^s independent subsystems. The shared
/// part is the subdomain-diagonal block; each correction is the signed sum of
/// the cross-coupling blocks, with cancellation residue below 1e-14 of the
/// largest magnitude dropped. Singularity of a subsystem is detected from its
/// row sums (constant vectors are the only candidate nullspace here).
inline SubsystemSet extract_subsystems(const SymmetricProblem& prob) {
  if (prob.kind != SymmetryKind::mirrored)
    throw std::invalid_argument("extract_subsystems: requires a mirrored problem");
  const index_t m = prob.n_b;
  SubsystemSet set;
  set.s = prob.s;
  set.block_len = prob.block_len;
  set.A_inn = prob.blocks.at(0);
  set.outer.resize(m);
  set.singular.assign(m, 0);
  const auto W = sign_matrix(prob.s);
  for (index_t i = 0; i < m; ++i) {
    SparseMatrix acc;
    acc.n_rows = prob.block_len;
    acc.n_cols = prob.block_len;
    acc.row_offsets.assign(prob.block_len + 1, 0);
    for (index_t d = 1; d < m; ++d)
      acc = sparse_add(1.0, acc, static_cast<real_t>(W[i][d]), prob.blocks.at(d));
    set.outer[i] = detail::drop_relative(acc, 1e-14);

    const SparseMatrix Ai = set.subsystem(i);
    const auto rs = row_sums(Ai);
    real_t worst = 0.0;
    for (real_t v : rs) worst = std::max(worst, std::abs(v));
    set.singular[i] = worst <= 1e-10 * max_abs(Ai) ? 1 : 0;
  }
  return set;
}

}  // namespace symamg
