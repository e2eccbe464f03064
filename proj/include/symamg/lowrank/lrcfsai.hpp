#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "symamg/core/dense.hpp"
#include "symamg/core/kernels.hpp"
#include "symamg/core/sparse.hpp"
#include "symamg/fsai/fsai.hpp"
#include "symamg/krylov/types.hpp"
#include "symamg/lowrank/lanczos.hpp"
#include "symamg/transform/subsystems.hpp"

namespace symamg {

/// Solves G^T w = ones for an upper-triangular CSR matrix (back
/// substitution); the result spans the image of the constant vector under
/// the inverse factor, i.e. the nullspace direction of G A G^T when A has a
/// constant nullspace.
inline std::vector<real_t> upper_triangular_solve_ones(const SparseMatrix& Gt) {
  if (Gt.n_rows != Gt.n_cols)
    throw std::invalid_argument("upper_triangular_solve_ones: matrix not square");
  const index_t n = Gt.n_rows;
  std::vector<real_t> w(n, 0.0);
  for (index_t i = n; i-- > 0;) {
    real_t s = 1.0;
    real_t diag = 0.0;
    for (index_t p = Gt.row_offsets[i]; p < Gt.row_offsets[i + 1]; ++p) {
      const index_t j = Gt.col_indices[p];
      if (j == i)
        diag = Gt.values[p];
      else if (j > i)
        s -= Gt.values[p] * w[j];
      else
        throw std::invalid_argument("upper_triangular_solve_ones: matrix not upper triangular");
    }
    if (diag == 0.0) throw std::runtime_error("upper_triangular_solve_ones: zero diagonal");
    w[i] = s / diag;
  }
  return w;
}

/// Block-diagonal preconditioner with an independently factored approximate
/// inverse per subsystem. Each block pays its own setup and its own value
/// loads per apply; this is the baseline the shared-factor variant improves
/// on.
struct SubsystemFsaiPrecond {
  index_t block_len = 0;
  std::vector<FsaiFactor> factors;

  void apply(std::span<const real_t> r, std::span<real_t> x) const {
    const index_t m = static_cast<index_t>(factors.size());
    if (static_cast<index_t>(r.size()) != block_len * m || r.size() != x.size())
      throw std::invalid_argument("SubsystemFsaiPrecond::apply: length mismatch");
    for (index_t i = 0; i < m; ++i) {
      const std::size_t off = static_cast<std::size_t>(i) * block_len;
      factors[i].apply(r.subspan(off, block_len), x.subspan(off, block_len));
    }
  }
};

inline SubsystemFsaiPrecond build_subsystem_fsai(const SubsystemSet& set,
                                                 index_t pattern_power = 1) {
  SubsystemFsaiPrecond p;
  p.block_len = set.block_len;
  for (index_t i = 0; i < set.n_sub(); ++i)
    p.factors.push_back(build_fsai(set.subsystem(i), pattern_power));
  return p;
}

struct LrcfsaiConfig {
  index_t rank = 0;
  index_t fsai_pattern_power = 1;
  real_t eig_tol = 1e-6;
  index_t max_subspace = 0;
  real_t sigma_max = 1.0;      // clamp sigma = 1 - lambda into [-sigma_max, ...]
  real_t lambda_drop = 1e-8;   // modes this close to a nullspace are excluded
  std::uint64_t seed = 0x10c4;
};

/// Shared-factor low-rank-corrected preconditioner for the decoupled
/// subsystems: one approximate inverse factor G of the common block serves
/// every subsystem, and each subsystem adds a rank-k correction
/// Z_i Theta_i Z_i^T built from the smallest eigenpairs of G A_i G^T
/// (Theta = (1 - lambda) / lambda, Z = G^T V). At full rank the corrected
/// preconditioner is the exact inverse. The factor is applied to all
/// subsystems in one multi-vector product, so its values are loaded once per
/// row per apply regardless of the subsystem count.
struct LrcfsaiPrecond {
  index_t block_len = 0;
  FsaiFactor shared;
  std::vector<DenseBlock> Z;                // per subsystem, possibly 0 columns
  std::vector<std::vector<real_t>> theta;   // per subsystem
  index_t dropped_modes = 0;
  index_t clamped_modes = 0;
  bool eigs_converged = true;
  mutable std::vector<real_t> tbuf;

  index_t n_sub() const { return static_cast<index_t>(Z.size()); }

  void apply(std::span<const real_t> r, std::span<real_t> x) const {
    const index_t m = n_sub();
    if (static_cast<index_t>(r.size()) != block_len * m || r.size() != x.size())
      throw std::invalid_argument("LrcfsaiPrecond::apply: length mismatch");
    shared.apply_mv(as_multivector(r, block_len, m), as_multivector(x, block_len, m));
    for (index_t i = 0; i < m; ++i) {
      const index_t k = Z[i].cols;
      if (k == 0) continue;
      const std::size_t off = static_cast<std::size_t>(i) * block_len;
      tbuf.resize(k);
      Z[i].apply_transpose(r.subspan(off, block_len), tbuf);
      for (index_t j = 0; j < k; ++j) tbuf[j] *= theta[i][j];
      Z[i].apply_add(tbuf, x.subspan(off, block_len));
    }
  }
};

inline LrcfsaiPrecond build_lrcfsai(const SubsystemSet& set, const LrcfsaiConfig& cfg) {
  LrcfsaiPrecond p;
  p.block_len = set.block_len;
  p.shared = build_fsai(set.A_inn, cfg.fsai_pattern_power);
  const index_t m = set.n_sub();
  const index_t L = set.block_len;
  p.Z.resize(m);
  p.theta.resize(m);
  if (cfg.rank == 0) return p;

  for (index_t i = 0; i < m; ++i) {
    ApplyFn op = [&](std::span<const real_t> v, std::span<real_t> y) {
      std::vector<real_t> t1(L), t2(L);
      spmv(p.shared.Gt, v, t1);       // G^T v
      spmv(set.A_inn, t1, t2);        // A_i t1, additive split
      if (set.outer[i].nnz() > 0) spmv_add(set.outer[i], t1, t2);
      spmv(p.shared.G, t2, y);        // G t2
    };
    SymEigOptions opt;
    opt.k = std::min<index_t>(cfg.rank, L - (set.singular[i] ? 1 : 0));
    opt.tol = cfg.eig_tol;
    opt.max_subspace = cfg.max_subspace;
    opt.seed = cfg.seed + static_cast<std::uint64_t>(i);
    if (set.singular[i])
      opt.deflate.push_back(upper_triangular_solve_ones(p.shared.Gt));
    if (opt.k < 1) continue;
    SymEigPairs e = smallest_eigs_sym(op, L, opt);
    p.eigs_converged = p.eigs_converged && e.converged;

    std::vector<index_t> keep;
    for (index_t j = 0; j < opt.k; ++j) {
      if (e.values[j] < cfg.lambda_drop) {
        ++p.dropped_modes;
        continue;
      }
      keep.push_back(j);
    }
    p.Z[i] = DenseBlock(L, static_cast<index_t>(keep.size()));
    for (std::size_t t = 0; t < keep.size(); ++t) {
      real_t sigma = 1.0 - e.values[keep[t]];
      if (sigma < -cfg.sigma_max) {
        sigma = -cfg.sigma_max;
        ++p.clamped_modes;
      }
      p.theta[i].push_back(sigma / (1.0 - sigma));
      // Z column = G^T v.
      spmv(p.shared.Gt, {e.vectors.col(keep[t]), static_cast<std::size_t>(L)},
           {p.Z[i].col(static_cast<index_t>(t)), static_cast<std::size_t>(L)});
    }
  }
  return p;
}

inline PreconditionerHandle make_preconditioner(const SubsystemFsaiPrecond& p,
                                                std::string name = "fsai-blocks") {
  return PreconditionerHandle{
      std::move(name), true,
      [&p](std::span<const real_t> r, std::span<real_t> x) { p.apply(r, x); }};
}

inline PreconditionerHandle make_preconditioner(const LrcfsaiPrecond& p,
                                                std::string name = "lrcfsai") {
  return PreconditionerHandle{
      std::move(name), true,
      [&p](std::span<const real_t> r, std::span<real_t> x) { p.apply(r, x); }};
}

}  // namespace symamg
