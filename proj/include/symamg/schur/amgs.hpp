#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "symamg/amg/hierarchy.hpp"
#include "symamg/core/dense.hpp"
#include "symamg/core/kernels.hpp"
#include "symamg/core/sparse.hpp"
#include "symamg/core/spgemm.hpp"
#include "symamg/fsai/fsai.hpp"
#include "symamg/krylov/types.hpp"
#include "symamg/lowrank/lanczos.hpp"
#include "symamg/lowrank/lrcfsai.hpp"
#include "symamg/model/interface.hpp"
#include "symamg/transform/basis.hpp"
#include "symamg/transform/subsystems.hpp"

namespace symamg {

struct AmgsConfig {
  AmgConfig amg;                   // hierarchy on the replicated inner block
  index_t fsai_pattern_power = 1;  // both the inner factor and the interface factor
  index_t rank = 16;               // interface low-rank correction per subsystem
  real_t schur_drop_rel = 1e-3;    // sparsification of the approximate Schur block
  real_t eig_tol = 1e-6;
  index_t max_subspace = 0;
  real_t lambda_drop = 1e-8;
  real_t sigma_max = 1.0;
  std::uint64_t seed = 0xa365;
};

/// Block preconditioner on the inner-interface ordering of a mirrored
/// problem: one AMG hierarchy on the replicated inner block serves all
/// subdomains, the interface is handled by an approximate Schur complement
/// whose subsystems (in the reflection basis) get shared-factor FSAI plus
/// per-subsystem low-rank corrections against the multigrid-exact Schur
/// operator. Forward elimination uses the multigrid inner solve while back
/// substitution uses the cheaper inner factor, so the map is nonsymmetric
/// and is meant for GMRES.
struct AmgsPrecond {
  index_t inn_loc = 0, ifc_loc = 0, n_b = 1, s = 0;
  AmgHierarchy MK;
  FsaiFactor GK;
  SparseMatrix B, Bt;  // single-block coupling inner -> interface
  SymmetryBasis basis;
  FsaiFactor GS1;                          // shared factor of the approximate Schur block
  std::vector<DenseBlock> Z;               // per interface subsystem
  std::vector<std::vector<real_t>> theta;  // per interface subsystem
  index_t dropped_modes = 0;
  bool eigs_converged = true;
  bool singular = false;
  mutable std::vector<real_t> zb, sb, tb, ub, kb;

  index_t n_inn() const { return inn_loc * n_b; }
  index_t n_ifc() const { return ifc_loc * n_b; }
  index_t n() const { return n_inn() + n_ifc(); }

  void apply(std::span<const real_t> r, std::span<real_t> x) const {
    if (static_cast<index_t>(r.size()) != n() || r.size() != x.size())
      throw std::invalid_argument("AmgsPrecond::apply: length mismatch");
    const auto rK = r.subspan(0, n_inn());
    const auto rS = r.subspan(n_inn(), n_ifc());
    zb.resize(n_inn());
    sb.resize(n_ifc());
    tb.resize(n_ifc());
    ub.resize(n_inn());
    kb.resize(n_inn());

    // Forward elimination: multigrid inner solve, then the interface
    // residual r_S - (I (x) B^T) z.
    MK.vcycle_mv(as_multivector(rK, inn_loc, n_b),
                 as_multivector(std::span<real_t>(zb), inn_loc, n_b));
    spmm(Bt, as_multivector(std::span<const real_t>(zb), inn_loc, n_b),
         as_multivector(std::span<real_t>(tb), ifc_loc, n_b));
    for (index_t i = 0; i < n_ifc(); ++i) sb[i] = rS[i] - tb[i];

    // Interface solve in the reflection basis: shared factor plus
    // per-subsystem corrections, transformed back afterwards.
    basis.apply(sb);
    std::span<real_t> xs(x.data() + n_inn(), static_cast<std::size_t>(n_ifc()));
    GS1.apply_mv(as_multivector(std::span<const real_t>(sb), ifc_loc, n_b),
                 as_multivector(xs, ifc_loc, n_b));
    std::vector<real_t> small;
    for (index_t i = 0; i < n_b; ++i) {
      const index_t k = Z[i].cols;
      if (k == 0) continue;
      const std::size_t off = static_cast<std::size_t>(i) * ifc_loc;
      small.resize(k);
      Z[i].apply_transpose(std::span<const real_t>(sb).subspan(off, ifc_loc), small);
      for (index_t j = 0; j < k; ++j) small[j] *= theta[i][j];
      Z[i].apply_add(small, xs.subspan(off, ifc_loc));
    }
    basis.apply(xs);

    // Back substitution with the inner factor: x_K = z - (I (x) G^T G)(I (x) B) x_S.
    spmm(B, as_multivector(std::span<const real_t>(xs.data(), xs.size()), ifc_loc, n_b),
         as_multivector(std::span<real_t>(ub), inn_loc, n_b));
    GK.apply_mv(as_multivector(std::span<const real_t>(ub), inn_loc, n_b),
                as_multivector(std::span<real_t>(kb), inn_loc, n_b));
    for (index_t i = 0; i < n_inn(); ++i) x[i] = zb[i] - kb[i];
  }
};

inline AmgsPrecond build_amgs(const InnerInterfaceLayout& lay, const AmgsConfig& cfg) {
  if (lay.s < 1 || !lay.block_interface)
    throw std::invalid_argument(
        "build_amgs: requires a mirrored problem with block-structured interface");
  AmgsPrecond p;
  p.inn_loc = lay.inn_loc;
  p.ifc_loc = lay.ifc_loc;
  p.n_b = lay.n_b;
  p.s = lay.s;
  p.basis = SymmetryBasis{lay.s, lay.ifc_loc};
  p.MK = build_amg(lay.K, cfg.amg);
  p.GK = build_fsai(lay.K, cfg.fsai_pattern_power);
  p.B = lay.B;
  p.Bt = transpose(lay.B);

  // Interface coupling blocks follow the reflection pattern
  // C_{b,c} = C_{b xor c}; verify instead of assuming.
  std::vector<SparseMatrix> Cd(p.n_b);
  for (index_t d = 0; d < p.n_b; ++d)
    Cd[d] = extract_block(lay.C, 0, p.ifc_loc, d * p.ifc_loc, (d + 1) * p.ifc_loc);
  for (index_t b = 1; b < p.n_b; ++b)
    for (index_t c = 0; c < p.n_b; ++c) {
      SparseMatrix blk = extract_block(lay.C, b * p.ifc_loc, (b + 1) * p.ifc_loc,
                                       c * p.ifc_loc, (c + 1) * p.ifc_loc);
      if (!structurally_equal(blk, Cd[b ^ c]) || max_abs_diff(blk, Cd[b ^ c]) != 0.0)
        throw std::logic_error("build_amgs: interface blocks do not follow the "
                               "reflection pattern");
    }

  // Approximate single-block Schur complement via the inner factor, then its
  // own shared FSAI after sparsification.
  SparseMatrix GB = multiply(p.GK.G, p.B);
  SparseMatrix S1 = symmetrize(sparse_add(1.0, Cd[0], -1.0, multiply(transpose(GB), GB)));
  S1 = detail::drop_relative(S1, cfg.schur_drop_rel);
  p.GS1 = build_fsai(S1, cfg.fsai_pattern_power);

  const auto rs = row_sums(lay.A);
  real_t worst = 0.0;
  for (real_t v : rs) worst = std::max(worst, std::abs(v));
  p.singular = worst <= 1e-10 * max_abs(lay.A);

  const auto W = sign_matrix(lay.s);
  p.Z.resize(p.n_b);
  p.theta.resize(p.n_b);
  for (index_t i = 0; i < p.n_b; ++i) {
    if (cfg.rank == 0) continue;
    SparseMatrix csum = Cd[0];
    for (index_t d = 1; d < p.n_b; ++d)
      csum = sparse_add(1.0, csum, static_cast<real_t>(W[i][d]), Cd[d]);
    csum = detail::drop_relative(csum, 1e-14);

    // X = G_S1 (Csum - B^T M_K B) G_S1^T, applied but never materialized.
    ApplyFn op = [&](std::span<const real_t> v, std::span<real_t> y) {
      std::vector<real_t> gv(p.ifc_loc), t1(p.inn_loc), t2(p.inn_loc), t3(p.ifc_loc),
          sv(p.ifc_loc);
      spmv(p.GS1.Gt, v, gv);
      spmv(p.B, gv, t1);
      p.MK.vcycle(t1, t2);
      spmv(p.Bt, t2, t3);
      spmv(csum, gv, sv);
      for (index_t q = 0; q < p.ifc_loc; ++q) sv[q] -= t3[q];
      spmv(p.GS1.G, sv, y);
    };
    SymEigOptions opt;
    opt.k = std::min<index_t>(cfg.rank, p.ifc_loc - ((p.singular && i == 0) ? 1 : 0));
    opt.tol = cfg.eig_tol;
    opt.max_subspace = cfg.max_subspace;
    opt.seed = cfg.seed + static_cast<std::uint64_t>(i);
    if (p.singular && i == 0)
      opt.deflate.push_back(upper_triangular_solve_ones(p.GS1.Gt));
    if (opt.k < 1) continue;
    SymEigPairs e = smallest_eigs_sym(op, p.ifc_loc, opt);
    p.eigs_converged = p.eigs_converged && e.converged;

    std::vector<index_t> keep;
    for (index_t j = 0; j < opt.k; ++j) {
      if (e.values[j] < cfg.lambda_drop) {
        ++p.dropped_modes;
        continue;
      }
      keep.push_back(j);
    }
    p.Z[i] = DenseBlock(p.ifc_loc, static_cast<index_t>(keep.size()));
    for (std::size_t t = 0; t < keep.size(); ++t) {
      real_t sigma = 1.0 - e.values[keep[t]];
      if (sigma < -cfg.sigma_max) sigma = -cfg.sigma_max;
      p.theta[i].push_back(sigma / (1.0 - sigma));
      spmv(p.GS1.Gt, {e.vectors.col(keep[t]), static_cast<std::size_t>(p.ifc_loc)},
           {p.Z[i].col(static_cast<index_t>(t)), static_cast<std::size_t>(p.ifc_loc)});
    }
  }
  return p;
}

inline PreconditionerHandle make_preconditioner(const AmgsPrecond& p, std::string name = "amgs") {
  return PreconditionerHandle{
      std::move(name), false,
      [&p](std::span<const real_t> r, std::span<real_t> x) { p.apply(r, x); }};
}

}  // namespace symamg
