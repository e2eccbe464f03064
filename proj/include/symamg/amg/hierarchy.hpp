#pragma once

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "symamg/amg/interpolation.hpp"
#include "symamg/amg/mis.hpp"
#include "symamg/amg/strength.hpp"
#include "symamg/core/dense.hpp"
#include "symamg/core/kernels.hpp"
#include "symamg/core/sparse.hpp"
#include "symamg/core/spgemm.hpp"
#include "symamg/fsai/fsai.hpp"
#include "symamg/krylov/types.hpp"

namespace symamg {

enum class SmootherKind { jacobi, fsai };

struct AmgConfig {
  real_t theta = 0.25;
  index_t mis_power = 1;
  InterpScheme interp = InterpScheme::direct;
  SmootherKind smoother = SmootherKind::jacobi;
  real_t jacobi_weight = 2.0 / 3.0;
  index_t fsai_pattern_power = 1;
  index_t n_pre = 1;
  index_t n_post = 1;
  index_t coarse_cap = 64;
  index_t max_levels = 25;
};

struct AmgLevel {
  SparseMatrix A;
  SparseMatrix P, R;  // R = P^T; both empty on the coarsest level
  std::vector<real_t> inv_diag;
  FsaiFactor fsai;
  index_t promoted = 0;  // fine nodes promoted to coarse to fix coverage
  // Damping so that weight * rho(S A) < 2 holds on this level; Galerkin
  // operators can grow dense enough to break that bound for the plain 2/3
  // weight, which would make the V-cycle indefinite. 1.0 = no clamping.
  real_t smoother_scale = 1.0;
};

namespace detail {

/// Power-iteration estimate of rho(S A) for a symmetric smoother S. S A is
/// similar to the SPD form A^{1/2} S A^{1/2}, so the iteration converges to
/// the largest eigenvalue. Deterministic start vector.
template <class ApplyS>
real_t smoother_spectral_radius(const SparseMatrix& A, ApplyS&& apply_s) {
  const index_t n = A.n_rows;
  std::vector<real_t> x(n), ax(n), y(n);
  Rng rng(0x51abu);
  for (auto& v : x) v = rng.symmetric();
  real_t nrm = norm2(x);
  for (auto& v : x) v /= nrm;
  real_t rho = 0.0;
  for (int it = 0; it < 25; ++it) {
    spmv(A, x, ax);
    apply_s(ax, y);
    rho = norm2(y);
    if (!(rho > 0.0)) return 0.0;
    for (index_t i = 0; i < n; ++i) x[i] = y[i] / rho;
  }
  return rho;
}

}  // namespace detail

/// Classical AMG V-cycle with Galerkin coarse operators, greedy-MIS
/// coarsening and row-normalized interpolation. Equal numbers of pre- and
/// post-sweeps of a symmetric smoother make the cycle a symmetric operator,
/// so it is a valid CG preconditioner. The coarsest system is solved by a
/// dense eigenvalue pseudo-inverse, which also absorbs the constant
/// nullspace of pure Neumann operators.
struct AmgHierarchy {
  AmgConfig config;
  std::vector<AmgLevel> levels;
  DensePinv coarse;

  index_t n() const { return levels.front().A.n_rows; }

  real_t coarsening_ratio() const {
    if (levels.size() < 2) return 1.0;
    return static_cast<real_t>(levels[1].A.n_rows) / static_cast<real_t>(levels[0].A.n_rows);
  }
  real_t coarse_avg_nnzr() const {
    const AmgLevel& l = levels.size() < 2 ? levels[0] : levels[1];
    return static_cast<real_t>(l.A.nnz()) / static_cast<real_t>(l.A.n_rows);
  }
  real_t operator_complexity() const {
    real_t total = 0.0;
    for (const auto& l : levels) total += static_cast<real_t>(l.A.nnz());
    return total / static_cast<real_t>(levels[0].A.nnz());
  }

  void vcycle_mv(ConstMultiVectorView r, MultiVectorView x) const { cycle(0, r, x); }

  void vcycle(std::span<const real_t> r, std::span<real_t> x) const {
    cycle(0, as_multivector(r, static_cast<index_t>(r.size()), 1),
          as_multivector(x, static_cast<index_t>(x.size()), 1));
  }

  std::string summary() const {
    std::ostringstream os;
    os << "amg hierarchy: " << levels.size() << " levels, operator complexity "
       << operator_complexity() << "\n";
    for (std::size_t l = 0; l < levels.size(); ++l) {
      const auto& L = levels[l];
      os << "  level " << l << ": n=" << L.A.n_rows << " nnz=" << L.A.nnz() << " avg nnz/row="
         << static_cast<real_t>(L.A.nnz()) / static_cast<real_t>(L.A.n_rows);
      if (L.promoted > 0) os << " (+" << L.promoted << " promoted for coverage)";
      if (L.smoother_scale != 1.0) os << " (smoother damped x" << L.smoother_scale << ")";
      os << "\n";
    }
    os << "  coarse solve: dense pseudo-inverse, n=" << levels.back().A.n_rows;
    return os.str();
  }

 private:
  void smooth_from_zero(const AmgLevel& L, ConstMultiVectorView r, MultiVectorView x,
                        index_t sweeps, std::vector<real_t>& res_buf) const {
    apply_smoother(L, r, x);
    for (index_t s = 1; s < sweeps; ++s) smooth_update(L, r, x, res_buf);
  }

  void smooth_update(const AmgLevel& L, ConstMultiVectorView r, MultiVectorView x,
                     std::vector<real_t>& res_buf) const {
    const std::size_t total = static_cast<std::size_t>(r.block_len) * r.n_blocks;
    res_buf.resize(2 * total);
    MultiVectorView res{r.block_len, r.n_blocks, res_buf.data()};
    spmm(L.A, ConstMultiVectorView(x), res);
    for (std::size_t i = 0; i < total; ++i) res.data[i] = r.data[i] - res.data[i];
    MultiVectorView dx{r.block_len, r.n_blocks, res_buf.data() + total};
    apply_smoother(L, ConstMultiVectorView(res), dx);
    for (std::size_t i = 0; i < total; ++i) x.data[i] += dx.data[i];
  }

  void apply_smoother(const AmgLevel& L, ConstMultiVectorView r, MultiVectorView x) const {
    if (config.smoother == SmootherKind::jacobi) {
      const real_t w = config.jacobi_weight * L.smoother_scale;
      for (index_t b = 0; b < r.n_blocks; ++b) {
        const real_t* rc = r.col(b);
        real_t* xc = x.col(b);
        for (index_t i = 0; i < r.block_len; ++i) xc[i] = w * L.inv_diag[i] * rc[i];
      }
    } else {
      L.fsai.apply_mv(r, x);
      if (L.smoother_scale != 1.0) {
        const std::size_t total = static_cast<std::size_t>(x.block_len) * x.n_blocks;
        for (std::size_t i = 0; i < total; ++i) x.data[i] *= L.smoother_scale;
      }
    }
  }

  void cycle(std::size_t lev, ConstMultiVectorView r, MultiVectorView x) const {
    const AmgLevel& L = levels[lev];
    const index_t nb = r.n_blocks;
    if (lev + 1 == levels.size()) {
      for (index_t b = 0; b < nb; ++b)
        coarse.apply({r.col(b), static_cast<std::size_t>(r.block_len)},
                     {x.col(b), static_cast<std::size_t>(x.block_len)});
      return;
    }
    std::vector<real_t> res_buf;
    smooth_from_zero(L, r, x, config.n_pre, res_buf);

    const std::size_t total = static_cast<std::size_t>(r.block_len) * nb;
    std::vector<real_t> res(total);
    MultiVectorView resv{r.block_len, nb, res.data()};
    spmm(L.A, ConstMultiVectorView(x), resv);
    for (std::size_t i = 0; i < total; ++i) res[i] = r.data[i] - res[i];

    const index_t nc = L.P.n_cols;
    std::vector<real_t> rc(static_cast<std::size_t>(nc) * nb);
    std::vector<real_t> xc(static_cast<std::size_t>(nc) * nb, 0.0);
    MultiVectorView rcv{nc, nb, rc.data()};
    spmm(L.R, ConstMultiVectorView{r.block_len, nb, res.data()}, rcv);
    cycle(lev + 1, ConstMultiVectorView{nc, nb, rc.data()},
          MultiVectorView{nc, nb, xc.data()});

    MultiVectorView corr{r.block_len, nb, res.data()};  // reuse residual buffer
    spmm(L.P, ConstMultiVectorView{nc, nb, xc.data()}, corr);
    for (std::size_t i = 0; i < total; ++i) x.data[i] += corr.data[i];

    for (index_t s = 0; s < config.n_post; ++s) smooth_update(L, r, x, res_buf);
  }
};

inline AmgHierarchy build_amg(const SparseMatrix& A, AmgConfig cfg = {}) {
  if (A.n_rows != A.n_cols) throw std::invalid_argument("build_amg: matrix not square");
  AmgHierarchy h;
  h.config = cfg;
  SparseMatrix cur = A;
  for (index_t lev = 0;; ++lev) {
    h.levels.emplace_back();
    AmgLevel& L = h.levels.back();
    L.A = std::move(cur);
    real_t rho = 0.0;
    if (cfg.smoother == SmootherKind::jacobi) {
      L.inv_diag.assign(L.A.n_rows, 0.0);
      const auto d = diagonal(L.A);
      for (index_t i = 0; i < L.A.n_rows; ++i) L.inv_diag[i] = d[i] != 0.0 ? 1.0 / d[i] : 0.0;
      rho = cfg.jacobi_weight *
            detail::smoother_spectral_radius(
                L.A, [&](std::span<const real_t> r, std::span<real_t> y) {
                  for (index_t i = 0; i < L.A.n_rows; ++i) y[i] = L.inv_diag[i] * r[i];
                });
    } else {
      L.fsai = build_fsai(L.A, cfg.fsai_pattern_power);
      rho = detail::smoother_spectral_radius(
          L.A, [&](std::span<const real_t> r, std::span<real_t> y) { L.fsai.apply(r, y); });
    }
    if (rho * 1.05 > 1.9) L.smoother_scale = 1.9 / (rho * 1.05);

    if (L.A.n_rows <= cfg.coarse_cap || lev + 2 > cfg.max_levels) {
      h.coarse = make_dense_pinv(L.A);
      break;
    }

    const SparseMatrix S = strength_graph(L.A, cfg.theta);
    std::vector<char> is_coarse = greedy_mis(S, cfg.mis_power);
    SparseMatrix P;
    std::vector<index_t> uncovered;
    for (;;) {  // promote uncovered fine nodes until interpolation covers everything
      P = build_interpolation(L.A, S, is_coarse, cfg.interp, &uncovered);
      if (uncovered.empty()) break;
      for (index_t i : uncovered) is_coarse[i] = 1;
      L.promoted += static_cast<index_t>(uncovered.size());
    }
    if (P.n_cols >= L.A.n_rows)
      throw std::runtime_error("build_amg: coarsening stalled at level " + std::to_string(lev) +
                               " (" + std::to_string(P.n_cols) + " of " +
                               std::to_string(L.A.n_rows) + " nodes coarse)");
    L.P = std::move(P);
    L.R = transpose(L.P);
    cur = triple_product_rap(L.P, L.A);
  }
  return h;
}

inline PreconditionerHandle make_preconditioner(const AmgHierarchy& h, std::string name = "amg") {
  return PreconditionerHandle{
      std::move(name), true,
      [&h](std::span<const real_t> r, std::span<real_t> x) { h.vcycle(r, x); }};
}

}  // namespace symamg
