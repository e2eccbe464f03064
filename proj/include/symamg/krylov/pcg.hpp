#pragma once

#include <chrono>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "symamg/krylov/types.hpp"

namespace symamg {

/// Preconditioned conjugate gradients. Requires a symmetric preconditioner
/// handle and a symmetric positive (semi-)definite operator; a non-positive
/// p.Ap curvature is reported as breakdown rather than silently continued.
/// Convergence is declared only after the recurrence residual is confirmed
/// against the true residual b - Ax. With nullspace projection enabled the
/// right-hand side, every residual and every preconditioned direction are
/// kept orthogonal to the null vector, so singular consistent systems are
/// solvable and the iterate stays the null-free representative throughout.
inline SolveStats pcg(const LinearOperator& A, std::span<const real_t> b,
                      std::span<real_t> x, const PreconditionerHandle& M,
                      const KrylovConfig& cfg = {}) {
  if (!M.symmetric)
    throw std::invalid_argument("pcg: preconditioner '" + M.name + "' is not symmetric");
  const index_t n = A.n;
  if (static_cast<index_t>(b.size()) != n || static_cast<index_t>(x.size()) != n)
    throw std::invalid_argument("pcg: vector length mismatch");

  const auto t0 = std::chrono::steady_clock::now();
  SolveStats st;
  st.relative_residuals.push_back(1.0);

  std::vector<real_t> w;
  real_t w_dot_w = 0.0;
  if (cfg.project_nullspace) {
    w = detail::nullspace_vector(cfg, n);
    w_dot_w = dot(w, w);
  }

  std::vector<real_t> r(b.begin(), b.end());
  std::vector<real_t> q(n);
  if (cfg.project_nullspace) detail::project_out(w, x, w_dot_w);
  if (norm2(x) != 0.0) {
    A.apply(x, q);
    axpy(-1.0, q, r);
  }
  if (cfg.project_nullspace) detail::project_out(w, r, w_dot_w);

  std::vector<real_t> b_proj(b.begin(), b.end());
  if (cfg.project_nullspace) detail::project_out(w, b_proj, w_dot_w);
  const real_t bnorm = norm2(b_proj);
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    st.converged = true;
    st.wall_seconds = std::chrono::duration<real_t>(std::chrono::steady_clock::now() - t0).count();
    return st;
  }

  std::vector<real_t> z(n), p(n), r_true(n);
  M.apply(r, z);
  if (cfg.project_nullspace) detail::project_out(w, z, w_dot_w);
  copy(z, p);
  real_t rz = dot(r, z);

  auto finish = [&](bool ok, FailureReason why, std::string msg) {
    st.converged = ok;
    st.failure = ok ? FailureReason::none : why;
    st.message = std::move(msg);
    st.wall_seconds = std::chrono::duration<real_t>(std::chrono::steady_clock::now() - t0).count();
    return st;
  };

  for (index_t it = 1; it <= cfg.max_iterations; ++it) {
    A.apply(p, q);
    const real_t pq = dot(p, q);
    if (!(pq > 0.0))
      return finish(false, FailureReason::breakdown,
                    "non-positive curvature p.Ap = " + std::to_string(pq));
    const real_t alpha = rz / pq;
    axpy(alpha, p, x);
    axpy(-alpha, q, r);
    if (cfg.project_nullspace) detail::project_out(w, r, w_dot_w);

    const real_t relres = norm2(r) / bnorm;
    st.relative_residuals.push_back(relres);
    st.iterations = it;
    if (relres <= cfg.tol) {
      A.apply(x, r_true);
      for (index_t i = 0; i < n; ++i) r_true[i] = b_proj[i] - r_true[i];
      if (cfg.project_nullspace) detail::project_out(w, r_true, w_dot_w);
      if (norm2(r_true) / bnorm <= cfg.tol) return finish(true, FailureReason::none, "");
      // Recurrence drifted; keep iterating on the recurrence until the true
      // residual agrees or the budget runs out.
    }

    M.apply(r, z);
    if (cfg.project_nullspace) detail::project_out(w, z, w_dot_w);
    const real_t rz_new = dot(r, z);
    if (!(rz_new > 0.0))
      return finish(false, FailureReason::breakdown,
                    "non-positive r.Mr = " + std::to_string(rz_new));
    const real_t beta = rz_new / rz;
    rz = rz_new;
    for (index_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  return finish(false, FailureReason::max_iterations,
                "no convergence in " + std::to_string(cfg.max_iterations) + " iterations");
}

inline SolveStats pcg(const SparseMatrix& A, std::span<const real_t> b, std::span<real_t> x,
                      const PreconditionerHandle& M, const KrylovConfig& cfg = {}) {
  return pcg(make_operator(A), b, x, M, cfg);
}

}  // namespace symamg
