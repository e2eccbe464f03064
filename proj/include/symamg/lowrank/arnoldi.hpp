#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "symamg/core/dense.hpp"
#include "symamg/core/kernels.hpp"
#include "symamg/core/rng.hpp"
#include "symamg/lowrank/lanczos.hpp"

namespace symamg {

struct NonsymEigOptions {
  index_t k = 1;
  real_t tol = 1e-6;
  index_t max_subspace = 0;  // 0 = min(n, max(8k + 64, 256))
  std::uint64_t seed = 0xa12d;
};

struct OneSidedPairs {
  std::vector<real_t> values;  // ascending |value|, near-real Ritz values
  DenseBlock vectors;          // unit columns
  bool converged = false;
  real_t worst_residual = 0.0;
};

/// Biorthogonal eigenpairs of a nonsymmetric operator: X U = U diag(lambda),
/// X^T V = V diag(lambda), V^T U = I. `k` may come back smaller than asked
/// when left/right pairs cannot be matched or biorthogonalization is too
/// ill-conditioned to trust.
struct BiorthPairs {
  std::vector<real_t> values;
  DenseBlock U, V;
  bool converged = false;
  real_t worst_residual = 0.0;
};

namespace detail {

/// Arnoldi (modified Gram-Schmidt) for the smallest-magnitude eigenvalues of
/// an operator with a real spectrum. Ritz values with a relatively large
/// imaginary part are rounding artifacts of the Hessenberg eigenproblem and
/// are filtered out; the subspace doubles until the k smallest survive the
/// residual bound |h_{m+1,m} y_m|.
inline OneSidedPairs arnoldi_smallest(const ApplyFn& apply, index_t n,
                                      const NonsymEigOptions& opt) {
  if (opt.k < 1 || opt.k > n) throw std::invalid_argument("arnoldi_smallest: bad k");
  const index_t cap =
      std::min<index_t>(n, opt.max_subspace > 0 ? opt.max_subspace
                                                : std::max<index_t>(8 * opt.k + 64, 256));
  Rng rng(opt.seed);
  std::vector<std::vector<real_t>> Q;
  std::vector<std::vector<real_t>> Hcols;  // column j holds h(0..j+1, j)
  std::vector<real_t> v(n), w(n);
  for (index_t i = 0; i < n; ++i) v[i] = rng.symmetric();
  scale(1.0 / norm2(v), v);

  OneSidedPairs best;
  const index_t first_check = std::max<index_t>(2 * opt.k + 8, 20);
  while (true) {
    Q.push_back(v);
    apply(Q.back(), w);
    auto& h = Hcols.emplace_back(Q.size() + 1, 0.0);
    for (std::size_t i = 0; i < Q.size(); ++i) {
      h[i] = dot(w, Q[i]);
      axpy(-h[i], Q[i], w);
    }
    for (std::size_t i = 0; i < Q.size(); ++i) {  // second orthogonalization pass
      const real_t c = dot(w, Q[i]);
      h[i] += c;
      axpy(-c, Q[i], w);
    }
    const real_t hb = norm2(w);
    h[Q.size()] = hb;
    const index_t m = static_cast<index_t>(Q.size());

    const bool at_cap = m >= cap;
    const bool breakdown = hb < 1e-12;
    if (m >= opt.k &&
        (at_cap || breakdown || (m >= first_check && (m & (m - 1)) == 0))) {
      Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m, m);
      for (index_t j = 0; j < m; ++j)
        for (index_t i = 0; i <= std::min(j + 1, m - 1); ++i) H(i, j) = Hcols[j][i];
      Eigen::EigenSolver<Eigen::MatrixXd> es(H);
      if (es.info() != Eigen::Success)
        throw std::runtime_error("arnoldi_smallest: Hessenberg eigensolver failed");
      const auto& ev = es.eigenvalues();
      real_t scale_est = 1e-300;
      for (Eigen::Index i = 0; i < ev.size(); ++i) scale_est = std::max(scale_est, std::abs(ev[i]));

      std::vector<index_t> idx;
      for (Eigen::Index i = 0; i < ev.size(); ++i)
        if (std::abs(ev[i].imag()) <= 1e-6 * scale_est) idx.push_back(static_cast<index_t>(i));
      std::sort(idx.begin(), idx.end(), [&](index_t a, index_t b) {
        return std::abs(ev[a]) < std::abs(ev[b]);
      });

      if (static_cast<index_t>(idx.size()) >= opt.k) {
        // eigenvectors() builds and returns a fresh matrix; keep it alive
        // instead of binding column views to the temporary
        const Eigen::MatrixXcd EV = es.eigenvectors();
        real_t worst = 0.0;
        for (index_t i = 0; i < opt.k; ++i) {
          const auto y = EV.col(idx[i]);
          worst = std::max(worst, hb * std::abs(y[m - 1]) / y.norm());
        }
        if (worst <= opt.tol * scale_est || at_cap || breakdown) {
          OneSidedPairs out;
          out.vectors = DenseBlock(n, opt.k);
          for (index_t i = 0; i < opt.k; ++i) {
            out.values.push_back(ev[idx[i]].real());
            const auto y = EV.col(idx[i]);
            real_t* dst = out.vectors.col(i);
            for (index_t j = 0; j < m; ++j) {
              const real_t c = y[j].real();
              const real_t* q = Q[j].data();
              for (index_t r = 0; r < n; ++r) dst[r] += c * q[r];
            }
            real_t nv = 0.0;
            for (index_t r = 0; r < n; ++r) nv += dst[r] * dst[r];
            nv = std::sqrt(nv);
            if (nv > 0.0)
              for (index_t r = 0; r < n; ++r) dst[r] /= nv;
          }
          out.converged = worst <= opt.tol * scale_est;
          out.worst_residual = worst / scale_est;
          return out;
        }
      } else if (at_cap || breakdown) {
        throw std::runtime_error("arnoldi_smallest: too few near-real Ritz values");
      }
    }
    if (breakdown) {  // invariant subspace: continue with a fresh direction
      for (index_t i = 0; i < n; ++i) w[i] = rng.symmetric();
      for (int pass = 0; pass < 2; ++pass)
        for (const auto& q : Q) {
          const real_t c = dot(w, q);
          axpy(-c, q, w);
        }
      const real_t nw = norm2(w);
      if (nw < 1e-12) throw std::runtime_error("arnoldi_smallest: space exhausted");
      for (index_t i = 0; i < n; ++i) v[i] = w[i] / nw;
    } else {
      for (index_t i = 0; i < n; ++i) v[i] = w[i] / hb;
    }
    if (m >= cap) throw std::runtime_error("arnoldi_smallest: subspace cap reached");
  }
}

}  // namespace detail

/// Smallest-magnitude eigenpairs of X together with the matching left pairs
/// (right pairs of X^T), matched by eigenvalue and rescaled so V^T U = I.
/// Trailing pairs are shed when values cannot be matched or when the
/// biorthogonalization matrix is numerically singular.
inline BiorthPairs biorthogonal_smallest(const ApplyFn& apply_x, const ApplyFn& apply_xt,
                                         index_t n, const NonsymEigOptions& opt) {
  OneSidedPairs right = detail::arnoldi_smallest(apply_x, n, opt);
  NonsymEigOptions lopt = opt;
  lopt.seed = opt.seed ^ 0x517cc1b727220a95ull;
  OneSidedPairs left = detail::arnoldi_smallest(apply_xt, n, lopt);

  real_t scale_est = 1e-300;
  for (real_t v : right.values) scale_est = std::max(scale_est, std::abs(v));
  for (real_t v : left.values) scale_est = std::max(scale_est, std::abs(v));

  // Greedy nearest-value matching in ascending order.
  std::vector<char> used(left.values.size(), 0);
  std::vector<index_t> match;
  for (std::size_t i = 0; i < right.values.size(); ++i) {
    index_t bestj = -1;
    real_t bestd = 1e300;
    for (std::size_t j = 0; j < left.values.size(); ++j) {
      if (used[j]) continue;
      const real_t d = std::abs(right.values[i] - left.values[j]);
      if (d < bestd) {
        bestd = d;
        bestj = static_cast<index_t>(j);
      }
    }
    if (bestj < 0 || bestd > 1e-3 * scale_est) break;
    used[bestj] = 1;
    match.push_back(bestj);
  }
  const index_t nm = static_cast<index_t>(match.size());

  Eigen::MatrixXd C(nm, nm);
  Eigen::Map<const Eigen::MatrixXd> Um(right.vectors.data.data(), n, right.vectors.cols);
  Eigen::Map<const Eigen::MatrixXd> Vm(left.vectors.data.data(), n, left.vectors.cols);
  for (index_t i = 0; i < nm; ++i)
    for (index_t j = 0; j < nm; ++j) C(i, j) = Vm.col(match[i]).dot(Um.col(j));

  // Pair selection. A repeated eigenvalue comes back with nearly dependent
  // vectors: one Krylov sequence carries a single direction per eigenvalue,
  // and dense eigenvector extraction for a multiple root is ill-conditioned.
  // Shrinking from the tail would keep the redundant cluster copies and shed
  // the well-separated pairs behind them, so instead greedily remove
  // whichever pair leaves the best-conditioned biorthogonalization until the
  // remaining V^T U is safely invertible. Ascending-|value| order survives.
  std::vector<index_t> sel(match.size());
  for (index_t i = 0; i < nm; ++i) sel[i] = i;
  auto smin_ratio = [&](const std::vector<index_t>& s) -> real_t {
    const index_t m = static_cast<index_t>(s.size());
    Eigen::MatrixXd Cs(m, m);
    for (index_t i = 0; i < m; ++i)
      for (index_t j = 0; j < m; ++j) Cs(i, j) = C(s[i], s[j]);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Cs);
    const real_t smax = svd.singularValues()(0);
    return smax > 0.0 ? svd.singularValues()(m - 1) / smax : 0.0;
  };
  while (!sel.empty() && smin_ratio(sel) <= 1e-8) {
    if (sel.size() == 1) {
      sel.clear();
      break;
    }
    std::size_t drop = 0;
    real_t best = -1.0;
    for (std::size_t r = 0; r < sel.size(); ++r) {
      std::vector<index_t> cand;
      cand.reserve(sel.size() - 1);
      for (std::size_t i = 0; i < sel.size(); ++i)
        if (i != r) cand.push_back(sel[i]);
      const real_t q = smin_ratio(cand);
      if (q >= best) {  // ties drop the later (larger-|value|) copy
        best = q;
        drop = r;
      }
    }
    sel.erase(sel.begin() + static_cast<std::ptrdiff_t>(drop));
  }
  const index_t k = static_cast<index_t>(sel.size());

  BiorthPairs out;
  out.converged = right.converged && left.converged;
  out.worst_residual = std::max(right.worst_residual, left.worst_residual);
  if (k == 0) return out;

  Eigen::MatrixXd Ck(k, k);
  for (index_t i = 0; i < k; ++i)
    for (index_t j = 0; j < k; ++j) Ck(i, j) = C(sel[i], sel[j]);
  Eigen::MatrixXd Cinv = Ck.partialPivLu().inverse();
  out.U = DenseBlock(n, k);
  out.V = DenseBlock(n, k);
  for (index_t j = 0; j < k; ++j) {
    out.values.push_back(right.values[sel[j]]);
    Eigen::Map<Eigen::VectorXd>(out.U.col(j), n) = Um.col(sel[j]);
    Eigen::VectorXd vj = Eigen::VectorXd::Zero(n);
    // V = Vl C^{-T}: column j mixes the kept left vectors. Exact left/right
    // pairs for distinct eigenvalues are orthogonal already, so the mixing
    // only acts inside clusters.
    for (index_t i = 0; i < k; ++i) vj += Cinv(j, i) * Vm.col(match[sel[i]]);
    Eigen::Map<Eigen::VectorXd>(out.V.col(j), n) = vj;
  }
  return out;
}

}  // namespace symamg
