#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "symamg/core/rng.hpp"
#include "symamg/core/sparse.hpp"

namespace symamg {

struct TheoremCheck {
  real_t spd_identity_error = 0.0;     // symmetric correction, full rank
  real_t nonsym_identity_error = 0.0;  // oblique correction, full rank
};

/// Dense verification of the two exact inverse-correction identities behind
/// the low-rank preconditioners, at full rank where both are equalities.
///
/// Symmetric form, B = L L^T:
///   A^{-1} = B^{-1} + L^{-T} V Sigma (I - Sigma)^{-1} V^T L^{-1}
/// with V Sigma V^T the eigendecomposition of Y = I - L^{-1} A L^{-T}.
///
/// Oblique form, X = B^{-1} A = U Lambda U^{-1}, V^T = U^{-1}:
///   A^{-1} = (I + U (Lambda^{-1} - I) V^T) B^{-1}.
///
/// Returns the max-norm deviations; both must vanish to rounding for SPD A
/// and SPD B with the same nullspace (here: nonsingular).
inline TheoremCheck verify_correction_theorems(const Eigen::MatrixXd& A,
                                               const Eigen::MatrixXd& B) {
  if (A.rows() != A.cols() || B.rows() != B.cols() || A.rows() != B.rows())
    throw std::invalid_argument("verify_correction_theorems: shape mismatch");
  const Eigen::Index n = A.rows();
  const Eigen::MatrixXd Ainv = A.inverse();
  const Eigen::MatrixXd Binv = B.inverse();
  TheoremCheck out;

  {
    Eigen::LLT<Eigen::MatrixXd> llt(B);
    if (llt.info() != Eigen::Success)
      throw std::invalid_argument("verify_correction_theorems: B is not SPD");
    const Eigen::MatrixXd L = llt.matrixL();
    const Eigen::MatrixXd Linv = L.inverse();
    const Eigen::MatrixXd Y =
        Eigen::MatrixXd::Identity(n, n) - Linv * A * Linv.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Y);
    const Eigen::VectorXd sigma = es.eigenvalues();
    const Eigen::MatrixXd V = es.eigenvectors();
    Eigen::VectorXd theta(n);
    for (Eigen::Index i = 0; i < n; ++i) theta[i] = sigma[i] / (1.0 - sigma[i]);
    const Eigen::MatrixXd M =
        Binv + Linv.transpose() * V * theta.asDiagonal() * V.transpose() * Linv;
    out.spd_identity_error = (M - Ainv).cwiseAbs().maxCoeff();
  }

  {
    const Eigen::MatrixXd X = Binv * A;
    Eigen::EigenSolver<Eigen::MatrixXd> es(X);
    if (es.info() != Eigen::Success)
      throw std::runtime_error("verify_correction_theorems: eigensolver failed");
    const Eigen::MatrixXcd U = es.eigenvectors();
    const Eigen::VectorXcd lam = es.eigenvalues();
    const Eigen::MatrixXcd Vt = U.inverse();  // left vectors with V^T U = I
    Eigen::VectorXcd theta(n);
    for (Eigen::Index i = 0; i < n; ++i) theta[i] = 1.0 / lam[i] - 1.0;
    const Eigen::MatrixXcd M =
        (Eigen::MatrixXcd::Identity(n, n) + U * theta.asDiagonal() * Vt) * Binv;
    out.nonsym_identity_error = (M.real() - Ainv).cwiseAbs().maxCoeff() +
                                M.imag().cwiseAbs().maxCoeff();
  }
  return out;
}

/// Self-test entry: draws a random SPD pair with log-uniform spectra in
/// [0.1, 10] and reports the identity deviations relative to the magnitude
/// of A^{-1}, so one threshold is meaningful across sizes and seeds.
inline TheoremCheck verify_correction_theorems(index_t n, std::uint64_t seed) {
  Rng rng(seed);
  auto draw_spd = [&]() {
    Eigen::MatrixXd R(n, n);
    for (index_t i = 0; i < n; ++i)
      for (index_t j = 0; j < n; ++j) R(i, j) = rng.symmetric();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(R);
    const Eigen::MatrixXd Q = qr.householderQ();
    Eigen::VectorXd d(n);
    for (index_t i = 0; i < n; ++i) d[i] = 0.1 * std::pow(100.0, rng.uniform());
    return Eigen::MatrixXd(Q * d.asDiagonal() * Q.transpose());
  };
  const Eigen::MatrixXd A = draw_spd();
  const Eigen::MatrixXd B = draw_spd();
  TheoremCheck rel = verify_correction_theorems(A, B);
  const real_t scale = A.inverse().cwiseAbs().maxCoeff();
  rel.spd_identity_error /= scale;
  rel.nonsym_identity_error /= scale;
  return rel;
}

}  // namespace symamg
