#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "symamg/core/dense.hpp"
#include "symamg/core/kernels.hpp"
#include "symamg/core/rng.hpp"

namespace symamg {

using ApplyFn = std::function<void(std::span<const real_t>, std::span<real_t>)>;

struct SymEigOptions {
  index_t k = 1;
  real_t tol = 1e-6;        // on |beta_m * s_last| relative to the spectral radius estimate
  index_t max_subspace = 0;  // 0 = min(n, max(8k + 64, 256))
  std::vector<std::vector<real_t>> deflate;  // known eigvectors to exclude, e.g. a nullspace
  std::uint64_t seed = 0x5eed;
};

struct SymEigPairs {
  std::vector<real_t> values;  // ascending
  DenseBlock vectors;          // orthonormal columns
  bool converged = false;
  real_t worst_residual = 0.0;
  index_t subspace_used = 0;
};

/// Lanczos with full reorthogonalization for the smallest eigenvalues of a
/// symmetric operator given only as an apply. The basis is additionally kept
/// orthogonal to the deflation vectors, so a known nullspace never reenters;
/// the returned pairs then describe the operator restricted to the
/// complement. The subspace grows until the Ritz residual bound
/// |beta_m s_last| meets the tolerance; an early invariant subspace is
/// continued with a fresh orthogonalized random direction, and a handful of
/// perturbed restarts guard against an unlucky start vector.
inline SymEigPairs smallest_eigs_sym(const ApplyFn& apply, index_t n, SymEigOptions opt) {
  if (opt.k < 1 || opt.k > n) throw std::invalid_argument("smallest_eigs_sym: bad k");
  index_t cap = opt.max_subspace > 0 ? opt.max_subspace
                                     : std::min<index_t>(n, std::max<index_t>(8 * opt.k + 64, 256));
  cap = std::min(cap, n);

  // Orthonormalize the deflation set once.
  std::vector<std::vector<real_t>> defl;
  for (const auto& d : opt.deflate) {
    std::vector<real_t> v(d);
    for (const auto& u : defl) {
      const real_t c = dot(v, u);
      axpy(-c, u, v);
    }
    const real_t nv = norm2(v);
    if (nv > 1e-14) {
      scale(1.0 / nv, v);
      defl.push_back(std::move(v));
    }
  }
  const index_t usable = n - static_cast<index_t>(defl.size());
  if (opt.k > usable) throw std::invalid_argument("smallest_eigs_sym: k exceeds deflated size");
  cap = std::min(cap, usable);

  auto project = [&](std::span<real_t> v) {
    for (const auto& u : defl) {
      const real_t c = dot({v.data(), v.size()}, u);
      axpy(-c, u, v);
    }
  };

  SymEigPairs best;
  for (int attempt = 0; attempt < 4; ++attempt) {
    Rng rng(opt.seed + static_cast<std::uint64_t>(attempt) * 0x9e3779b97f4a7c15ull);
    std::vector<std::vector<real_t>> Q;
    std::vector<real_t> alpha, beta;  // beta[j] couples q_j and q_{j+1}
    std::vector<real_t> v(n), w(n);

    auto fresh_direction = [&]() -> bool {
      for (index_t i = 0; i < n; ++i) v[i] = rng.symmetric();
      project(v);
      for (int pass = 0; pass < 2; ++pass)
        for (const auto& q : Q) {
          const real_t c = dot(v, q);
          axpy(-c, q, v);
        }
      const real_t nv = norm2(v);
      if (nv < 1e-12) return false;
      scale(1.0 / nv, v);
      return true;
    };

    if (!fresh_direction()) continue;
    bool dead_end = false;
    while (static_cast<index_t>(Q.size()) < cap && !dead_end) {
      Q.push_back(v);
      const auto& qj = Q.back();
      apply(qj, w);
      project(w);
      alpha.push_back(dot(qj, w));
      // full reorthogonalization, two passes: one pass leaves O(eps) relative
      // to the pre-subtraction norm, which wrecks the basis once the residual
      // direction is small near exhaustion
      for (int pass = 0; pass < 2; ++pass) {
        for (const auto& q : Q) {
          const real_t c = dot(w, q);
          axpy(-c, q, w);
        }
        project(w);
      }
      const real_t b = norm2(w);
      const index_t m = static_cast<index_t>(Q.size());

      bool check_now = b < 1e-12 || m >= cap || (m >= std::max<index_t>(2 * opt.k + 8, 20) &&
                                                 (m & (m - 1)) == 0);  // powers of two
      if (m >= opt.k && check_now) {
        Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
        for (index_t i = 0; i < m; ++i) {
          T(i, i) = alpha[i];
          if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = beta[i];
        }
        SymEigen e = sym_eig(T);
        const real_t scale_est = std::max(e.values.cwiseAbs().maxCoeff(), 1e-300);
        real_t worst = 0.0;
        for (index_t i = 0; i < opt.k; ++i)
          worst = std::max(worst, std::abs(b * e.vectors(m - 1, i)));
        if (worst <= opt.tol * scale_est || m >= cap || b < 1e-12) {
          SymEigPairs out;
          out.values.assign(e.values.data(), e.values.data() + opt.k);
          out.vectors = DenseBlock(n, opt.k);
          for (index_t i = 0; i < opt.k; ++i) {
            real_t* dst = out.vectors.col(i);
            for (index_t j = 0; j < m; ++j) {
              const real_t c = e.vectors(j, i);
              const real_t* q = Q[j].data();
              for (index_t r = 0; r < n; ++r) dst[r] += c * q[r];
            }
          }
          out.converged = worst <= opt.tol * scale_est;
          out.worst_residual = worst / scale_est;
          out.subspace_used = m;
          if (out.converged) return out;
          if (!best.converged &&
              (best.values.empty() || out.worst_residual < best.worst_residual))
            best = std::move(out);
          if (m >= cap) dead_end = true;
        }
      }
      if (dead_end) break;
      if (b < 1e-12) {
        if (!fresh_direction()) break;  // space exhausted
        beta.push_back(0.0);
      } else {
        beta.push_back(b);
        for (index_t i = 0; i < n; ++i) v[i] = w[i] / b;
      }
    }
    if (!best.values.empty()) break;  // cap reached with a usable (if inexact) answer
  }
  if (best.values.empty()) throw std::runtime_error("smallest_eigs_sym: no usable subspace");
  return best;
}

}  // namespace symamg
