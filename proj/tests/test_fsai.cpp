#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "support/oracles.hpp"
#include "symamg/core/kernels.hpp"
#include "symamg/fsai/fsai.hpp"
#include "symamg/krylov/pcg.hpp"
#include "symamg/model/problem.hpp"

using namespace symamg;
using namespace symamg::testing;

namespace {

SparseMatrix laplacian_1d(index_t n) {
  std::vector<Triplet> t;
  for (index_t i = 0; i < n; ++i) {
    t.push_back({i, i, 2.0});
    if (i > 0) t.push_back({i, i - 1, -1.0});
    if (i + 1 < n) t.push_back({i, i + 1, -1.0});
  }
  return from_triplets(n, n, std::move(t));
}

Eigen::MatrixXd gagt(const FsaiFactor& f, const SparseMatrix& A) {
  const Eigen::MatrixXd G = to_dense(f.G);
  return G * to_dense(A) * G.transpose();
}

real_t sym_cond(const Eigen::MatrixXd& M) {
  const Eigen::VectorXd ev = sym_eig(M).values;
  return ev[ev.size() - 1] / ev[0];
}

}  // namespace

TEST_CASE("diagonal matrix gives the exact inverse square root") {
  const SparseMatrix A = from_triplets(2, 2, {{0, 0, 4.0}, {1, 1, 9.0}});
  const FsaiFactor f = build_fsai(A);
  REQUIRE(f.G.at(0, 0) == Catch::Approx(0.5));
  REQUIRE(f.G.at(1, 1) == Catch::Approx(1.0 / 3.0));
  REQUIRE(f.G.nnz() == 2);
  REQUIRE((gagt(f, A) - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-14);

  std::vector<real_t> r = {4.0, 9.0}, x(2);
  f.apply(r, x);
  REQUIRE(x[0] == Catch::Approx(1.0));
  REQUIRE(x[1] == Catch::Approx(1.0));
}

TEST_CASE("full lower pattern reproduces the exact inverse Cholesky factor") {
  const SparseMatrix A = laplacian_1d(2);
  const FsaiFactor f = build_fsai(A);
  // L = [[sqrt2,0],[-1/sqrt2, sqrt(3/2)]], G = L^{-1}
  REQUIRE(f.G.at(0, 0) == Catch::Approx(0.70711).margin(5e-6));
  REQUIRE(f.G.at(1, 0) == Catch::Approx(0.40825).margin(5e-6));
  REQUIRE(f.G.at(1, 1) == Catch::Approx(0.81650).margin(5e-6));
  REQUIRE((gagt(f, A) - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("G is lower triangular with positive diagonal and unit GAGt diagonal") {
  const StretchedGrid g = make_cube_grid(6);
  const SparseMatrix A = assemble_poisson(g);
  // regularized: pure Neumann is singular, shift to make it SPD
  const SparseMatrix As = sparse_add(1.0, A, 0.1, SparseMatrix::identity(A.n_rows));
  for (index_t power : {1, 2}) {
    const FsaiFactor f = build_fsai(As, power);
    for (index_t i = 0; i < f.G.n_rows; ++i) {
      for (index_t p = f.G.row_offsets[i]; p < f.G.row_offsets[i + 1]; ++p)
        REQUIRE(f.G.col_indices[p] <= i);
      REQUIRE(f.G.at(i, i) > 0.0);
    }
    const Eigen::MatrixXd M = gagt(f, As);
    for (index_t i = 0; i < As.n_rows; ++i) REQUIRE(M(i, i) == Catch::Approx(1.0).margin(1e-12));
    // preconditioned spectrum is positive
    REQUIRE(sym_eig(M).values[0] > 0.0);
  }
}

TEST_CASE("power-2 pattern contains the power-1 pattern and conditions better") {
  const SparseMatrix A = laplacian_1d(32);
  const FsaiFactor f1 = build_fsai(A, 1);
  const FsaiFactor f2 = build_fsai(A, 2);
  REQUIRE(f2.G.nnz() > f1.G.nnz());
  for (index_t i = 0; i < 32; ++i)
    for (index_t p = f1.G.row_offsets[i]; p < f1.G.row_offsets[i + 1]; ++p)
      REQUIRE(f2.G.at(i, f1.G.col_indices[p]) != 0.0);

  // diag-scaled A is the no-coupling baseline; FSAI must beat it
  const Eigen::MatrixXd D = to_dense(A);
  Eigen::MatrixXd scaled = D;
  for (index_t i = 0; i < 32; ++i)
    for (index_t j = 0; j < 32; ++j) scaled(i, j) /= std::sqrt(D(i, i) * D(j, j));
  REQUIRE(sym_cond(gagt(f1, A)) < sym_cond(scaled));
  REQUIRE(sym_cond(gagt(f2, A)) < sym_cond(gagt(f1, A)));

  REQUIRE_THROWS_AS(build_fsai(A, 3), std::invalid_argument);
}

TEST_CASE("multivector apply equals per-column apply and the dense product") {
  const StretchedGrid g = make_cube_grid(4);
  const SparseMatrix A =
      sparse_add(1.0, assemble_poisson(g), 0.05, SparseMatrix::identity(64));
  const FsaiFactor f = build_fsai(A);

  const index_t nb = 3;
  const auto R = random_vector(64 * nb, 13);
  std::vector<real_t> X(64 * nb), Xref(64 * nb);
  f.apply_mv(as_multivector(std::span<const real_t>(R), 64, nb),
             as_multivector(std::span<real_t>(X), 64, nb));
  for (index_t b = 0; b < nb; ++b)
    f.apply(std::span<const real_t>(R).subspan(64 * b, 64),
            std::span<real_t>(Xref).subspan(64 * b, 64));
  REQUIRE(rel_err(X, Xref) < 1e-14);

  // dense oracle: x = G^T G r
  const Eigen::MatrixXd GtG = to_dense(f.G).transpose() * to_dense(f.G);
  for (index_t b = 0; b < nb; ++b) {
    const Eigen::VectorXd want =
        GtG * to_eigen(std::span<const real_t>(R).subspan(64 * b, 64));
    REQUIRE(max_abs_err(std::span<const real_t>(X).subspan(64 * b, 64), from_eigen(want)) <
            1e-12);
  }
}

TEST_CASE("the applied operator is symmetric") {
  const SparseMatrix A = laplacian_1d(24);
  const FsaiFactor f = build_fsai(A, 2);
  const auto r = random_vector(24, 14);
  const auto q = random_vector(24, 15);
  std::vector<real_t> fr(24), fq(24);
  f.apply(r, fr);
  f.apply(q, fq);
  REQUIRE(dot(r, fq) == Catch::Approx(dot(q, fr)).epsilon(1e-12));
}

TEST_CASE("build rejects a non-SPD principal submatrix") {
  const SparseMatrix A = from_triplets(2, 2, {{0, 0, 1.0}, {1, 1, -1.0}});
  REQUIRE_THROWS_WITH(build_fsai(A), Catch::Matchers::ContainsSubstring("not SPD"));
}

TEST_CASE("row counter tracks factored rows") {
  const SparseMatrix A = laplacian_1d(17);
  instr::counters.reset();
  const FsaiFactor f = build_fsai(A);
  REQUIRE(instr::counters.fsai_rows_factored.load() == 17);
  (void)f;
}

TEST_CASE("denser pattern does not lose ground on the model problem") {
  const StretchedGrid g = make_cube_grid(16);
  const SymmetricProblem prob = make_symmetric_problem(g, 0);
  const auto b = make_compatible_rhs(prob.n(), 16);
  KrylovConfig cfg;
  cfg.tol = 1e-8;
  cfg.project_nullspace = true;

  index_t its[2];
  for (index_t power : {1, 2}) {
    const FsaiFactor f = build_fsai(prob.full, power);
    const auto M = make_preconditioner(f);
    std::vector<real_t> x(prob.n(), 0.0);
    const auto st = pcg(prob.full, b, x, M, cfg);
    REQUIRE(st.converged);
    its[power - 1] = st.iterations;
  }
  REQUIRE(its[1] <= its[0]);
}
