#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "symamg/amg/hierarchy.hpp"
#include "symamg/amg/interpolation.hpp"
#include "symamg/amg/mis.hpp"
#include "symamg/amg/strength.hpp"
#include "symamg/core/kernels.hpp"
#include "symamg/core/sparse.hpp"
#include "symamg/core/spgemm.hpp"
#include "symamg/fsai/fsai.hpp"
#include "symamg/krylov/types.hpp"
#include "symamg/model/interface.hpp"

namespace symamg {

struct AmgrConfig {
  real_t theta = 0.25;
  index_t mis_power = 2;  // aggressive block-local coarsening
  InterpScheme interp = InterpScheme::distance2;
  index_t fsai_pattern_power = 1;
  index_t n_smooth = 1;  // pre = post
  AmgConfig coarse_amg;  // hierarchy on the reduced operator
};

/// Coarse marking for the reduction preconditioner: every interface unknown
/// is coarse, and the inner unknowns of one block are coarsened by greedy
/// MIS on the strength graph of the replicated block K, then copied to all
/// blocks so the marking is identical per subdomain.
inline std::vector<char> classify_fc(const InnerInterfaceLayout& lay, real_t theta = 0.25,
                                     index_t mis_power = 2) {
  const SparseMatrix S = strength_graph(lay.K, theta);
  const std::vector<char> local = greedy_mis(S, mis_power);
  std::vector<char> is_coarse(lay.n(), 0);
  for (index_t b = 0; b < lay.n_b; ++b)
    for (index_t t = 0; t < lay.inn_loc; ++t) is_coarse[b * lay.inn_loc + t] = local[t];
  for (index_t j = lay.n_inn(); j < lay.n(); ++j) is_coarse[j] = 1;
  return is_coarse;
}

/// Two-level reduction preconditioner on the inner-interface ordering. The
/// coarse space holds the full interface plus a per-block sample of inner
/// unknowns; the reduced Galerkin operator is handled by a classical AMG
/// hierarchy. Smoothing runs only on the inner slice, with a single FSAI
/// factor of the replicated block applied to all subdomains in one
/// multi-vector product, so smoother setup and value loads are independent
/// of the number of subdomains. Cycle (equal sweeps before and after the
/// coarse correction, symmetric smoother, Galerkin middle term) is a
/// symmetric operator, so it preconditions CG.
struct AmgrPrecond {
  index_t inn_loc = 0, n_b = 1, n_ifc = 0;
  SparseMatrix A;      // inner-interface ordered operator
  SparseMatrix P, R;   // reduction interpolation and its transpose
  SparseMatrix Ac;     // Galerkin reduced operator
  AmgHierarchy coarse;
  FsaiFactor GK;
  index_t n_smooth = 1;
  index_t promoted = 0;  // inner nodes promoted to coarse to fix coverage
  mutable std::vector<real_t> res, rc, xc, sm;

  index_t n_inn() const { return inn_loc * n_b; }
  index_t n() const { return A.n_rows; }
  index_t n_coarse() const { return Ac.n_rows; }
  real_t coarsening_ratio() const {
    return static_cast<real_t>(n_coarse()) / static_cast<real_t>(n());
  }
  real_t coarse_avg_nnzr() const {
    return static_cast<real_t>(Ac.nnz()) / static_cast<real_t>(Ac.n_rows);
  }

  /// x = S r on the inner slice, zero on the interface slice.
  void smoother(std::span<const real_t> r, std::span<real_t> x) const {
    GK.apply_mv(as_multivector(r.subspan(0, n_inn()), inn_loc, n_b),
                as_multivector(x.subspan(0, n_inn()), inn_loc, n_b));
    std::fill(x.begin() + n_inn(), x.end(), 0.0);
  }

  void smooth_sweeps(std::span<const real_t> r, std::span<real_t> x, bool from_zero) const {
    res.resize(n());
    sm.resize(n());
    index_t sweeps = n_smooth;
    if (from_zero && sweeps > 0) {
      smoother(r, x);
      --sweeps;
    }
    for (index_t s = 0; s < sweeps; ++s) {
      spmv(A, x, res);
      for (index_t i = 0; i < n(); ++i) res[i] = r[i] - res[i];
      smoother(res, sm);
      axpy(1.0, sm, x);
    }
  }

  void apply(std::span<const real_t> r, std::span<real_t> x) const {
    if (static_cast<index_t>(r.size()) != n() || r.size() != x.size())
      throw std::invalid_argument("AmgrPrecond::apply: length mismatch");
    smooth_sweeps(r, x, true);

    res.resize(n());
    rc.resize(n_coarse());
    xc.assign(n_coarse(), 0.0);
    spmv(A, x, res);
    for (index_t i = 0; i < n(); ++i) res[i] = r[i] - res[i];
    spmv(R, res, rc);
    coarse.vcycle(rc, xc);
    sm.resize(n());
    spmv(P, xc, sm);
    axpy(1.0, sm, x);

    smooth_sweeps(r, x, false);
  }
};

inline AmgrPrecond build_amgr(const InnerInterfaceLayout& lay, const AmgrConfig& cfg) {
  AmgrPrecond p;
  p.inn_loc = lay.inn_loc;
  p.n_b = lay.n_b;
  p.n_ifc = lay.n_ifc();
  p.A = lay.A;
  p.n_smooth = cfg.n_smooth;
  p.GK = build_fsai(lay.K, cfg.fsai_pattern_power);

  std::vector<char> is_coarse = classify_fc(lay, cfg.theta, cfg.mis_power);
  const SparseMatrix S = strength_graph(p.A, cfg.theta);
  std::vector<index_t> uncovered;
  for (;;) {
    p.P = build_interpolation(p.A, S, is_coarse, cfg.interp, &uncovered);
    if (uncovered.empty()) break;
    // Promote the same local index in every block so the marking stays
    // replicated across subdomains.
    for (index_t i : uncovered) {
      if (i < p.n_inn()) {
        const index_t local = i % p.inn_loc;
        for (index_t b = 0; b < p.n_b; ++b)
          if (!is_coarse[b * p.inn_loc + local]) {
            is_coarse[b * p.inn_loc + local] = 1;
            ++p.promoted;
          }
      } else if (!is_coarse[i]) {
        is_coarse[i] = 1;
        ++p.promoted;
      }
    }
  }
  p.R = transpose(p.P);
  p.Ac = triple_product_rap(p.P, p.A);
  p.coarse = build_amg(p.Ac, cfg.coarse_amg);
  return p;
}

inline PreconditionerHandle make_preconditioner(const AmgrPrecond& p, std::string name = "amgr") {
  return PreconditionerHandle{
      std::move(name), true,
      [&p](std::span<const real_t> r, std::span<real_t> x) { p.apply(r, x); }};
}

}  // namespace symamg
