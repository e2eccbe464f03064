#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "symamg/amg/hierarchy.hpp"
#include "symamg/core/dense.hpp"
#include "symamg/core/kernels.hpp"
#include "symamg/krylov/types.hpp"
#include "symamg/lowrank/arnoldi.hpp"
#include "symamg/transform/subsystems.hpp"

namespace symamg {

struct LrcamgConfig {
  index_t rank = 0;
  AmgConfig amg;
  real_t eig_tol = 1e-6;
  index_t max_subspace = 0;
  real_t eig_floor = 1e-8;  // |lambda| below this is a nullspace replica: drop it
  std::uint64_t seed = 0x10ca;
};

/// Multigrid on the shared block, corrected per subsystem with the smallest
/// eigenpairs of X_i = M (A_inn + outer_i): one V-cycle of the shared
/// hierarchy serves every subsystem per apply, then each subsystem applies
/// x_i = z_i + U_i (Lambda_i^{-1} - I) V_i^T z_i with biorthogonal pairs
/// (V^T U = I). The correction is oblique, so the preconditioner is
/// nonsymmetric for rank > 0 and is meant for GMRES. Stored spectra are the
/// reciprocals Lambda^{-1}; at full rank the map is the exact inverse.
struct LrcamgPrecond {
  index_t block_len = 0;
  AmgHierarchy base;
  std::vector<DenseBlock> U, V;
  std::vector<std::vector<real_t>> inv_lambda;
  index_t dropped_modes = 0;
  bool eigs_converged = true;
  mutable std::vector<real_t> zbuf, tbuf;

  index_t n_sub() const { return static_cast<index_t>(U.size()); }
  bool symmetric() const {
    for (const auto& u : U)
      if (u.cols > 0) return false;
    return true;
  }

  void apply(std::span<const real_t> r, std::span<real_t> x) const {
    const index_t m = n_sub();
    const index_t L = block_len;
    if (static_cast<index_t>(r.size()) != L * m || r.size() != x.size())
      throw std::invalid_argument("LrcamgPrecond::apply: length mismatch");
    zbuf.resize(r.size());
    base.vcycle_mv(as_multivector(r, L, m), as_multivector(std::span<real_t>(zbuf), L, m));
    copy(zbuf, x);
    for (index_t i = 0; i < m; ++i) {
      const index_t k = U[i].cols;
      if (k == 0) continue;
      const std::size_t off = static_cast<std::size_t>(i) * L;
      tbuf.resize(k);
      V[i].apply_transpose(std::span<const real_t>(zbuf).subspan(off, L), tbuf);
      for (index_t j = 0; j < k; ++j) tbuf[j] *= inv_lambda[i][j] - 1.0;
      U[i].apply_add(tbuf, x.subspan(off, L));
    }
  }
};

inline LrcamgPrecond build_lrcamg(const SubsystemSet& set, const LrcamgConfig& cfg) {
  LrcamgPrecond p;
  p.block_len = set.block_len;
  p.base = build_amg(set.A_inn, cfg.amg);
  const index_t m = set.n_sub();
  const index_t L = set.block_len;
  p.U.resize(m);
  p.V.resize(m);
  p.inv_lambda.resize(m);
  if (cfg.rank == 0) return p;

  for (index_t i = 0; i < m; ++i) {
    ApplyFn x_op = [&](std::span<const real_t> v, std::span<real_t> y) {
      std::vector<real_t> t(L);
      spmv(set.A_inn, v, t);
      if (set.outer[i].nnz() > 0) spmv_add(set.outer[i], v, t);
      p.base.vcycle(t, y);
    };
    ApplyFn xt_op = [&](std::span<const real_t> v, std::span<real_t> y) {
      std::vector<real_t> t(L);
      p.base.vcycle(v, t);
      spmv(set.A_inn, t, y);
      if (set.outer[i].nnz() > 0) spmv_add(set.outer[i], t, y);
    };
    NonsymEigOptions opt;
    opt.k = std::min<index_t>(cfg.rank + (set.singular[i] ? 1 : 0), L);
    opt.tol = cfg.eig_tol;
    opt.max_subspace = cfg.max_subspace;
    opt.seed = cfg.seed + static_cast<std::uint64_t>(i);
    BiorthPairs e = biorthogonal_smallest(x_op, xt_op, L, opt);
    p.eigs_converged = p.eigs_converged && e.converged;

    std::vector<index_t> keep;
    for (std::size_t j = 0; j < e.values.size(); ++j) {
      if (std::abs(e.values[j]) < cfg.eig_floor) {
        ++p.dropped_modes;
        continue;
      }
      if (static_cast<index_t>(keep.size()) < cfg.rank) keep.push_back(static_cast<index_t>(j));
    }
    p.U[i] = DenseBlock(L, static_cast<index_t>(keep.size()));
    p.V[i] = DenseBlock(L, static_cast<index_t>(keep.size()));
    for (std::size_t t = 0; t < keep.size(); ++t) {
      p.inv_lambda[i].push_back(1.0 / e.values[keep[t]]);
      copy({e.U.col(keep[t]), static_cast<std::size_t>(L)},
           {p.U[i].col(static_cast<index_t>(t)), static_cast<std::size_t>(L)});
      copy({e.V.col(keep[t]), static_cast<std::size_t>(L)},
           {p.V[i].col(static_cast<index_t>(t)), static_cast<std::size_t>(L)});
    }
  }
  return p;
}

inline PreconditionerHandle make_preconditioner(const LrcamgPrecond& p,
                                                std::string name = "lrcamg") {
  return PreconditionerHandle{
      std::move(name), p.symmetric(),
      [&p](std::span<const real_t> r, std::span<real_t> x) { p.apply(r, x); }};
}

}  // namespace symamg
