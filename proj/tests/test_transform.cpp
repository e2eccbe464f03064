#include <catch2/catch_amalgamated.hpp>
#include <algorithm>
#include <cmath>

#include "support/oracles.hpp"
#include "symamg/fsai/fsai.hpp"
#include "symamg/lowrank/lrcfsai.hpp"
#include "symamg/model/problem.hpp"
#include "symamg/transform/basis.hpp"
#include "symamg/transform/subsystems.hpp"
#include "symamg/transform/symmetric_solve.hpp"

using namespace symamg;
using namespace symamg::testing;

namespace {

/// Dense congruence oracle: the butterfly basis as an explicit matrix.
Eigen::MatrixXd basis_matrix(const SymmetryBasis& basis) {
  const index_t n = basis.n();
  Eigen::MatrixXd P(n, n);
  std::vector<real_t> e(n);
  for (index_t j = 0; j < n; ++j) {
    std::fill(e.begin(), e.end(), 0.0);
    e[j] = 1.0;
    basis.apply(e);
    for (index_t i = 0; i < n; ++i) P(i, j) = e[i];
  }
  return P;
}

}  // namespace

TEST_CASE("basis matches the two-block hand example") {
  SymmetryBasis basis{1, 2};
  std::vector<real_t> x = {1.0, 2.0, 3.0, 4.0};
  basis.apply(x);
  const real_t is2 = std::sqrt(0.5);
  REQUIRE(x[0] == Catch::Approx(4.0 * is2));
  REQUIRE(x[1] == Catch::Approx(6.0 * is2));
  REQUIRE(x[2] == Catch::Approx(-2.0 * is2));
  REQUIRE(x[3] == Catch::Approx(-2.0 * is2));
}

TEST_CASE("basis at s=2, block_len=1 is half the order-4 sign matrix") {
  SymmetryBasis basis{2, 1};
  std::vector<real_t> e1 = {1.0, 0.0, 0.0, 0.0};
  basis.apply(e1);
  for (real_t v : e1) REQUIRE(v == Catch::Approx(0.5));

  const Eigen::MatrixXd P = basis_matrix(basis);
  const auto W = sign_matrix(2);
  for (index_t i = 0; i < 4; ++i)
    for (index_t j = 0; j < 4; ++j) REQUIRE(P(i, j) == Catch::Approx(0.5 * W[i][j]));
}

TEST_CASE("basis is involutive and orthogonal for random input") {
  for (index_t s : {1, 2, 3}) {
    const index_t L = 64;
    SymmetryBasis basis{s, L};
    const auto x0 = random_vector(basis.n(), 100 + s);
    auto x = x0;
    basis.apply(x);
    REQUIRE(norm2(x) == Catch::Approx(norm2(x0)).epsilon(1e-13));
    basis.apply(x);
    REQUIRE(rel_err(x, x0) < 1e-13);
  }
  SymmetryBasis bad{1, 3};
  std::vector<real_t> w(5);
  REQUIRE_THROWS_AS(bad.apply(w), std::invalid_argument);
}

TEST_CASE("sign matrix is the Sylvester pattern") {
  const auto W1 = sign_matrix(1);
  REQUIRE(W1[0] == std::vector<int>{1, 1});
  REQUIRE(W1[1] == std::vector<int>{1, -1});
  const auto W2 = sign_matrix(2);
  REQUIRE(W2[1] == std::vector<int>{1, -1, 1, -1});
  REQUIRE(W2[3] == std::vector<int>{1, -1, -1, 1});
  // rows are orthogonal
  const auto W3 = sign_matrix(3);
  for (index_t i = 0; i < 8; ++i)
    for (index_t j = i + 1; j < 8; ++j) {
      int dotp = 0;
      for (index_t k = 0; k < 8; ++k) dotp += W3[i][k] * W3[j][k];
      REQUIRE(dotp == 0);
    }
}

TEST_CASE("two-block extraction matches the hand example") {
  // A_1=[[2,-1],[-1,2]], A_2=[[0,0],[0,-1]]: sums/differences give the
  // subsystems [[2,-1],[-1,1]] and [[2,-1],[-1,3]]
  SymmetricProblem prob;
  prob.kind = SymmetryKind::mirrored;
  prob.s = 1;
  prob.n_b = 2;
  prob.block_len = 2;
  prob.blocks = {from_triplets(2, 2, {{0, 0, 2.0}, {0, 1, -1.0}, {1, 0, -1.0}, {1, 1, 2.0}}),
                 from_triplets(2, 2, {{1, 1, -1.0}})};
  prob.full = prob.materialize_from_blocks();

  const SubsystemSet set = extract_subsystems(prob);
  REQUIRE(set.n_sub() == 2);
  const SparseMatrix S0 = set.subsystem(0);
  const SparseMatrix S1 = set.subsystem(1);
  REQUIRE(S0.at(1, 1) == Catch::Approx(1.0));
  REQUIRE(S1.at(1, 1) == Catch::Approx(3.0));
  REQUIRE(S0.at(0, 0) == Catch::Approx(2.0));
  REQUIRE(S0.at(0, 1) == Catch::Approx(-1.0));

  // outer parts are the signed couplings alone
  REQUIRE(set.outer[0].nnz() == 1);
  REQUIRE(set.outer[0].at(1, 1) == Catch::Approx(-1.0));
  REQUIRE(set.outer[1].at(1, 1) == Catch::Approx(1.0));

  // congruence with the explicit 4x4 product
  SymmetryBasis basis{1, 2};
  const Eigen::MatrixXd P = basis_matrix(basis);
  const Eigen::MatrixXd T = P * to_dense(prob.full) * P;
  REQUIRE((T.block(0, 0, 2, 2) - to_dense(S0)).cwiseAbs().maxCoeff() < 1e-14);
  REQUIRE((T.block(2, 2, 2, 2) - to_dense(S1)).cwiseAbs().maxCoeff() < 1e-14);
  REQUIRE(T.block(0, 2, 2, 2).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("zero couplings leave every subsystem equal to the base block") {
  SymmetricProblem prob;
  prob.kind = SymmetryKind::mirrored;
  prob.s = 2;
  prob.n_b = 4;
  prob.block_len = 3;
  prob.blocks.push_back(sparse_from_dense(random_spd(3, 7)));
  for (int i = 0; i < 3; ++i) prob.blocks.push_back(SparseMatrix(3, 3));
  prob.full = prob.materialize_from_blocks();
  const SubsystemSet set = extract_subsystems(prob);
  for (index_t i = 0; i < 4; ++i) {
    REQUIRE(set.outer[i].nnz() == 0);
    REQUIRE(max_abs_diff(set.subsystem(i), prob.blocks[0]) == 0.0);
  }
}

TEST_CASE("extraction block-diagonalizes the mirrored model problem") {
  const StretchedGrid g = make_stretched_grid(8, 8, 1, 1.5, 1.5, 1.0);
  const SymmetricProblem prob = make_symmetric_problem(g, 2);
  const SubsystemSet set = extract_subsystems(prob);
  const SymmetryBasis basis{2, set.block_len};
  const Eigen::MatrixXd P = basis_matrix(basis);
  const Eigen::MatrixXd T = P * to_dense(prob.full) * P;
  const real_t fnorm = frobenius_norm(prob.full);

  const index_t L = set.block_len;
  for (index_t bi = 0; bi < 4; ++bi)
    for (index_t bj = 0; bj < 4; ++bj) {
      const Eigen::MatrixXd blk = T.block(bi * L, bj * L, L, L);
      if (bi == bj) {
        REQUIRE((blk - to_dense(set.subsystem(bi))).cwiseAbs().maxCoeff() < 1e-12 * fnorm);
      } else {
        REQUIRE(blk.cwiseAbs().maxCoeff() < 1e-12 * fnorm);
      }
    }

  // every subsystem stays symmetric
  for (index_t i = 0; i < 4; ++i) REQUIRE(is_symmetric(set.subsystem(i), 1e-14));
  // support bound: outer couplings never exceed the summed cross-block nnz
  std::size_t cross = 0;
  for (index_t j = 1; j < 4; ++j) cross += static_cast<std::size_t>(prob.blocks[j].nnz());
  for (index_t i = 0; i < 4; ++i)
    REQUIRE(static_cast<std::size_t>(set.outer[i].nnz()) <= cross);
}

TEST_CASE("subsystem eigenvalues partition the spectrum of the full operator") {
  const StretchedGrid g = make_stretched_grid(8, 4, 2, 1.5, 1.5, 1.5);
  const SymmetricProblem prob = make_symmetric_problem(g, 1);
  const SubsystemSet set = extract_subsystems(prob);

  std::vector<real_t> sub_eigs;
  for (index_t i = 0; i < set.n_sub(); ++i) {
    const Eigen::VectorXd ev = sym_eig(to_dense(set.subsystem(i))).values;
    sub_eigs.insert(sub_eigs.end(), ev.data(), ev.data() + ev.size());
  }
  std::sort(sub_eigs.begin(), sub_eigs.end());
  const Eigen::VectorXd full_eigs = sym_eig(to_dense(prob.full)).values;
  const real_t scale = std::abs(full_eigs[full_eigs.size() - 1]);
  for (index_t i = 0; i < prob.n(); ++i)
    REQUIRE(sub_eigs[i] == Catch::Approx(full_eigs[i]).margin(1e-10 * scale));
}

TEST_CASE("only the all-plus subsystem of a pure Neumann problem is singular") {
  const StretchedGrid g = make_cube_grid(4);
  for (index_t s : {1, 2}) {
    const SymmetricProblem prob = make_symmetric_problem(g, s);
    const SubsystemSet set = extract_subsystems(prob);
    REQUIRE(set.singular[0] == 1);
    for (index_t i = 1; i < set.n_sub(); ++i) REQUIRE(set.singular[i] == 0);
  }
  const SymmetricProblem rep = make_repeated_problem(g, 2);
  REQUIRE_THROWS_WITH(extract_subsystems(rep), "extract_subsystems: requires a mirrored problem");
}

TEST_CASE("apply_stacked equals the materialized block diagonal") {
  const StretchedGrid g = make_cube_grid(4);
  const SymmetricProblem prob = make_symmetric_problem(g, 2);
  const SubsystemSet set = extract_subsystems(prob);
  const auto x = random_vector(set.stacked_n(), 17);
  std::vector<real_t> y(set.stacked_n()), yref(set.stacked_n());
  set.apply_stacked(x, y);
  for (index_t i = 0; i < set.n_sub(); ++i) {
    const SparseMatrix Si = set.subsystem(i);
    spmv(Si, std::span<const real_t>(x).subspan(i * set.block_len, set.block_len),
         std::span<real_t>(yref).subspan(i * set.block_len, set.block_len));
  }
  REQUIRE(rel_err(y, yref) < 1e-14);
}

TEST_CASE("transformed solve reaches the tolerance of the original system") {
  const StretchedGrid g = make_cube_grid(8);
  const SymmetricProblem prob = make_symmetric_problem(g, 1);
  const SubsystemSet set = extract_subsystems(prob);
  const auto b = make_compatible_rhs(prob.n(), 3);

  const auto pre = build_subsystem_fsai(set);
  const auto M = make_preconditioner(pre);
  KrylovConfig cfg;
  cfg.tol = 1e-8;
  cfg.project_nullspace = true;
  const auto res = solve_transformed(set, b, M, KrylovMethod::pcg, cfg);
  REQUIRE(res.stats.converged);

  // residual is measured against the untransformed operator
  std::vector<real_t> r(prob.n());
  spmv(prob.full, res.x, r);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
  REQUIRE(norm2(r) / norm2(b) <= 1.1e-8);
}

TEST_CASE("s=0 transformed solve is a plain solve") {
  const StretchedGrid g = make_cube_grid(4);
  const SymmetricProblem prob = make_symmetric_problem(g, 0);
  const SubsystemSet set = extract_subsystems(prob);
  REQUIRE(set.n_sub() == 1);
  const auto b = make_compatible_rhs(prob.n(), 4);
  const auto pre = build_subsystem_fsai(set);
  const auto M = make_preconditioner(pre);
  KrylovConfig cfg;
  cfg.tol = 1e-9;
  cfg.project_nullspace = true;
  const auto res = solve_transformed(set, b, M, KrylovMethod::pcg, cfg);
  REQUIRE(res.stats.converged);

  // matches solving the original matrix directly with the same preconditioner
  std::vector<real_t> x(prob.n(), 0.0);
  const auto st = pcg(prob.full, b, x, M, cfg);
  REQUIRE(st.converged);
  REQUIRE(st.iterations == res.stats.iterations);
  REQUIRE(rel_err(res.x, x) < 1e-6);
}

TEST_CASE("per-subsystem spectra differ: standalone solves take different counts") {
  const StretchedGrid g = make_cube_grid(16);
  const SymmetricProblem prob = make_symmetric_problem(g, 1);
  const SubsystemSet set = extract_subsystems(prob);

  std::vector<index_t> its;
  for (index_t i = 0; i < 2; ++i) {
    const SparseMatrix Si = set.subsystem(i);
    const auto fs = build_fsai(Si);
    const auto M = make_preconditioner(fs);
    const auto b = make_compatible_rhs(set.block_len, 5);
    std::vector<real_t> x(set.block_len, 0.0);
    KrylovConfig cfg;
    cfg.tol = 1e-8;
    cfg.project_nullspace = set.singular[i] != 0;
    const auto st = pcg(Si, b, x, M, cfg);
    REQUIRE(st.converged);
    its.push_back(st.iterations);
  }
  REQUIRE(its[0] != its[1]);
}
