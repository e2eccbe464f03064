#pragma once

#include <chrono>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "symamg/krylov/types.hpp"

namespace symamg {

/// Right-preconditioned GMRES with modified Gram-Schmidt and Givens
/// rotations. Right preconditioning keeps the minimized quantity equal to the
/// residual of the original system, so the iteration history is comparable
/// across preconditioners. Convergence is declared on the true residual of
/// the assembled iterate; a restart cycle that ends no better than it began
/// is reported as stagnation.
inline SolveStats gmres(const LinearOperator& A, std::span<const real_t> b,
                        std::span<real_t> x, const PreconditionerHandle& M,
                        const KrylovConfig& cfg = {}) {
  const index_t n = A.n;
  if (static_cast<index_t>(b.size()) != n || static_cast<index_t>(x.size()) != n)
    throw std::invalid_argument("gmres: vector length mismatch");

  const auto t0 = std::chrono::steady_clock::now();
  SolveStats st;
  st.relative_residuals.push_back(1.0);
  auto finish = [&](bool ok, FailureReason why, std::string msg) {
    st.converged = ok;
    st.failure = ok ? FailureReason::none : why;
    st.message = std::move(msg);
    st.wall_seconds = std::chrono::duration<real_t>(std::chrono::steady_clock::now() - t0).count();
    return st;
  };

  const real_t bnorm = norm2(b);
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    return finish(true, FailureReason::none, "");
  }

  const index_t cycle = cfg.restart > 0 ? cfg.restart : cfg.max_iterations;
  std::vector<real_t> r(n), z(n), az(n);
  index_t total_it = 0;

  while (total_it < cfg.max_iterations) {
    A.apply(x, r);
    for (index_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
    const real_t beta = norm2(r);
    const real_t cycle_start_relres = beta / bnorm;
    if (cycle_start_relres <= cfg.tol) return finish(true, FailureReason::none, "");

    const index_t m = std::min<index_t>(cycle, cfg.max_iterations - total_it);
    std::vector<std::vector<real_t>> V;
    V.reserve(m + 1);
    V.emplace_back(n);
    for (index_t i = 0; i < n; ++i) V[0][i] = r[i] / beta;
    // Hessenberg columns, Givens cosines/sines, transformed rhs g.
    std::vector<std::vector<real_t>> H;
    std::vector<real_t> cs, sn, g;
    g.push_back(beta);

    index_t k = 0;
    bool happy = false;
    for (; k < m; ++k) {
      M.apply(V[k], z);
      A.apply(z, az);
      H.emplace_back(k + 2, 0.0);
      for (index_t i = 0; i <= k; ++i) {
        const real_t h = dot(az, V[i]);
        H[k][i] = h;
        axpy(-h, V[i], az);
      }
      const real_t h_next = norm2(az);
      H[k][k + 1] = h_next;

      for (index_t i = 0; i < k; ++i) {
        const real_t t = cs[i] * H[k][i] + sn[i] * H[k][i + 1];
        H[k][i + 1] = -sn[i] * H[k][i] + cs[i] * H[k][i + 1];
        H[k][i] = t;
      }
      const real_t denom = std::hypot(H[k][k], H[k][k + 1]);
      if (denom == 0.0) return finish(false, FailureReason::breakdown, "zero Hessenberg column");
      cs.push_back(H[k][k] / denom);
      sn.push_back(H[k][k + 1] / denom);
      H[k][k] = denom;
      H[k][k + 1] = 0.0;
      g.push_back(-sn[k] * g[k]);
      g[k] = cs[k] * g[k];

      ++total_it;
      st.iterations = total_it;
      const real_t relres = std::abs(g[k + 1]) / bnorm;
      st.relative_residuals.push_back(relres);

      if (h_next <= 1e-14 * bnorm) {  // happy breakdown: exact solution in span
        happy = true;
        ++k;
        break;
      }
      V.emplace_back(n);
      for (index_t i = 0; i < n; ++i) V[k + 1][i] = az[i] / h_next;
      if (relres <= cfg.tol) {
        ++k;
        break;
      }
    }

    // Back-substitute y from the triangularized Hessenberg system.
    std::vector<real_t> y(k);
    for (index_t i = k; i-- > 0;) {
      real_t s = g[i];
      for (index_t j = i + 1; j < k; ++j) s -= H[j][i] * y[j];
      y[i] = s / H[i][i];
    }
    std::vector<real_t> vy(n, 0.0);
    for (index_t j = 0; j < k; ++j) axpy(y[j], V[j], vy);
    M.apply(vy, z);
    axpy(1.0, z, x);

    A.apply(x, r);
    for (index_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
    const real_t true_relres = norm2(r) / bnorm;
    if (true_relres <= cfg.tol || happy) {
      if (true_relres <= cfg.tol) return finish(true, FailureReason::none, "");
      return finish(false, FailureReason::breakdown,
                    "happy breakdown but true residual " + std::to_string(true_relres));
    }
    if (total_it >= cfg.max_iterations) break;
    if (true_relres >= cycle_start_relres)
      return finish(false, FailureReason::stagnation,
                    "restart cycle made no progress at relative residual " +
                        std::to_string(true_relres));
  }
  return finish(false, FailureReason::max_iterations,
                "no convergence in " + std::to_string(cfg.max_iterations) + " iterations");
}

inline SolveStats gmres(const SparseMatrix& A, std::span<const real_t> b, std::span<real_t> x,
                        const PreconditionerHandle& M, const KrylovConfig& cfg = {}) {
  return gmres(make_operator(A), b, x, M, cfg);
}

}  // namespace symamg
