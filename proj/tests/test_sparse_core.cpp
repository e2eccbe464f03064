#include <catch2/catch_amalgamated.hpp>
#include <cstdio>
#include <filesystem>

#include "support/oracles.hpp"
#include "symamg/core/block_operator.hpp"
#include "symamg/core/kernels.hpp"
#include "symamg/core/rng.hpp"
#include "symamg/core/sparse.hpp"
#include "symamg/core/spgemm.hpp"
#include "symamg/io/matrix_market.hpp"

using namespace symamg;
using namespace symamg::testing;

namespace {

SparseMatrix random_sparse(index_t rows, index_t cols, real_t density, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Triplet> t;
  for (index_t i = 0; i < rows; ++i)
    for (index_t j = 0; j < cols; ++j)
      if (rng.uniform() < density) t.push_back({i, j, rng.symmetric()});
  return from_triplets(rows, cols, std::move(t));
}

SparseMatrix laplacian_1d(index_t n) {
  std::vector<Triplet> t;
  for (index_t i = 0; i < n; ++i) {
    t.push_back({i, i, 2.0});
    if (i > 0) t.push_back({i, i - 1, -1.0});
    if (i + 1 < n) t.push_back({i, i + 1, -1.0});
  }
  return from_triplets(n, n, std::move(t));
}

}  // namespace

TEST_CASE("from_triplets sorts rows and sums duplicates") {
  std::vector<Triplet> t = {{1, 1, 3.0}, {0, 2, 1.0}, {0, 0, 2.0}, {0, 2, 0.5}, {1, 0, -1.0}};
  const SparseMatrix A = from_triplets(2, 3, t);
  A.validate();
  REQUIRE(A.nnz() == 4);
  REQUIRE(A.at(0, 0) == 2.0);
  REQUIRE(A.at(0, 2) == 1.5);  // duplicate summed
  REQUIRE(A.at(1, 0) == -1.0);
  REQUIRE(A.at(1, 1) == 3.0);
  // column indices strictly increasing per row
  for (index_t i = 0; i < A.n_rows; ++i) {
    auto cols = A.row_cols(i);
    for (std::size_t p = 1; p < cols.size(); ++p) REQUIRE(cols[p] > cols[p - 1]);
  }
}

TEST_CASE("transpose agrees with hand examples and is an involution") {
  const SparseMatrix I3 = SparseMatrix::identity(3);
  REQUIRE(max_abs_diff(transpose(I3), I3) == 0.0);

  const SparseMatrix A = from_triplets(2, 2, {{0, 1, 1.0}});
  const SparseMatrix At = transpose(A);
  REQUIRE(At.at(1, 0) == 1.0);
  REQUIRE(At.at(0, 1) == 0.0);

  const SparseMatrix R = random_sparse(13, 9, 0.4, 7);
  REQUIRE(max_abs_diff(transpose(transpose(R)), R) == 0.0);
  transpose(R).validate();
}

TEST_CASE("permute_symmetric relabels rows and columns together") {
  // A(i,j) = 10i + j on a full 3x3 pattern makes positions identifiable.
  std::vector<Triplet> t;
  for (index_t i = 0; i < 3; ++i)
    for (index_t j = 0; j < 3; ++j) t.push_back({i, j, 10.0 * i + j});
  const SparseMatrix A = from_triplets(3, 3, std::move(t));
  const std::vector<index_t> perm = {2, 0, 1};  // new p holds old perm[p]
  const SparseMatrix P = permute_symmetric(A, perm);
  for (index_t p = 0; p < 3; ++p)
    for (index_t q = 0; q < 3; ++q) REQUIRE(P.at(p, q) == A.at(perm[p], perm[q]));
}

TEST_CASE("extract_block takes a contiguous submatrix") {
  const SparseMatrix A = laplacian_1d(6);
  const SparseMatrix B = extract_block(A, 2, 5, 1, 6);
  REQUIRE(B.n_rows == 3);
  REQUIRE(B.n_cols == 5);
  for (index_t i = 0; i < 3; ++i)
    for (index_t j = 0; j < 5; ++j) REQUIRE(B.at(i, j) == A.at(i + 2, j + 1));
  REQUIRE_THROWS_AS(extract_block(A, 4, 3, 0, 6), std::invalid_argument);
}

TEST_CASE("spmv matches the stated examples and a dense oracle") {
  const SparseMatrix I3 = SparseMatrix::identity(3);
  std::vector<real_t> x = {1.0, 2.0, 3.0}, y(3);
  spmv(I3, x, y);
  REQUIRE(y == x);

  const SparseMatrix T = laplacian_1d(2);  // [[2,-1],[-1,2]]
  std::vector<real_t> ones = {1.0, 1.0}, y2(2);
  spmv(T, ones, y2);
  REQUIRE(y2[0] == Catch::Approx(1.0));
  REQUIRE(y2[1] == Catch::Approx(1.0));

  const SparseMatrix R = random_sparse(8, 8, 0.5, 11);
  const auto xr = random_vector(8, 12);
  std::vector<real_t> yr(8);
  spmv(R, xr, yr);
  REQUIRE(rel_err(yr, dense_spmv(R, xr)) < 1e-14);

  std::vector<real_t> bad(7);
  REQUIRE_THROWS_AS(spmv(R, bad, yr), std::invalid_argument);
}

TEST_CASE("spmv_add accumulates instead of overwriting") {
  const SparseMatrix T = laplacian_1d(3);
  std::vector<real_t> x = {1.0, 0.0, -1.0};
  std::vector<real_t> y = {5.0, 5.0, 5.0};
  spmv_add(T, x, y);
  REQUIRE(y[0] == Catch::Approx(7.0));
  REQUIRE(y[1] == Catch::Approx(5.0));
  REQUIRE(y[2] == Catch::Approx(3.0));
}

TEST_CASE("spmm equals per-column spmv and loads values once per row") {
  const SparseMatrix I2 = SparseMatrix::identity(2);
  std::vector<real_t> xdata = {1.0, 2.0, 3.0, 4.0}, ydata(4);
  spmm(I2, as_multivector(std::span<const real_t>(xdata), 2, 2),
       as_multivector(std::span<real_t>(ydata), 2, 2));
  REQUIRE(ydata == xdata);

  const SparseMatrix T = laplacian_1d(2);
  std::vector<real_t> e = {1.0, 0.0, 0.0, 1.0}, col(4);
  spmm(T, as_multivector(std::span<const real_t>(e), 2, 2),
       as_multivector(std::span<real_t>(col), 2, 2));
  REQUIRE(col[0] == Catch::Approx(2.0));
  REQUIRE(col[1] == Catch::Approx(-1.0));
  REQUIRE(col[2] == Catch::Approx(-1.0));
  REQUIRE(col[3] == Catch::Approx(2.0));

  const SparseMatrix R = random_sparse(16, 16, 0.3, 21);
  const index_t nb = 4;
  const auto X = random_vector(16 * nb, 22);
  std::vector<real_t> Y(16 * nb), Yref(16 * nb);
  instr::counters.reset();
  spmm(R, as_multivector(std::span<const real_t>(X), 16, nb),
       as_multivector(std::span<real_t>(Y), 16, nb));
  const auto reads_mm = instr::counters.spmm_value_reads.load();
  for (index_t b = 0; b < nb; ++b)
    spmv(R, std::span<const real_t>(X).subspan(16 * b, 16),
         std::span<real_t>(Yref).subspan(16 * b, 16));
  REQUIRE(rel_err(Y, Yref) < 1e-14);
  // once per row per apply, independent of the four columns
  REQUIRE(reads_mm == static_cast<std::uint64_t>(R.nnz()));
}

TEST_CASE("spmm handles more columns than the stack buffer") {
  const SparseMatrix R = random_sparse(10, 10, 0.4, 31);
  const index_t nb = 70;  // beyond the fixed stack accumulator
  const auto X = random_vector(10 * nb, 32);
  std::vector<real_t> Y(10 * nb), Yref(10 * nb);
  spmm(R, as_multivector(std::span<const real_t>(X), 10, nb),
       as_multivector(std::span<real_t>(Y), 10, nb));
  for (index_t b = 0; b < nb; ++b)
    spmv(R, std::span<const real_t>(X).subspan(10 * b, 10),
         std::span<real_t>(Yref).subspan(10 * b, 10));
  REQUIRE(rel_err(Y, Yref) < 1e-14);
}

TEST_CASE("fused_block_apply matches hand values and the materialized operator") {
  // identity blocks, no outer part
  BlockOperator op;
  op.n_blocks = 2;
  op.inner = SparseMatrix::identity(2);
  op.outer = SparseMatrix(4, 4);
  std::vector<real_t> x = {1.0, 2.0, 3.0, 4.0}, y(4);
  op.apply(x, y);
  REQUIRE(y == x);

  // outer entries (1,2) = (2,1) = -1 couple the blocks
  op.outer = from_triplets(4, 4, {{1, 2, -1.0}, {2, 1, -1.0}});
  op.apply(x, y);
  REQUIRE(y[0] == Catch::Approx(1.0));
  REQUIRE(y[1] == Catch::Approx(-1.0));
  REQUIRE(y[2] == Catch::Approx(1.0));
  REQUIRE(y[3] == Catch::Approx(4.0));

  // random SPD block replicated 4 times plus a random symmetric coupling
  const index_t L = 32, nb = 4, n = L * nb;
  const SparseMatrix inner = sparse_from_dense(random_spd(L, 41));
  std::vector<Triplet> cross;
  Rng rng(42);
  for (int k = 0; k < 60; ++k) {
    const index_t i = static_cast<index_t>(rng.below(n));
    const index_t j = static_cast<index_t>(rng.below(n));
    if (i / L == j / L) continue;
    const real_t v = rng.symmetric();
    cross.push_back({i, j, v});
    cross.push_back({j, i, v});
  }
  BlockOperator big{nb, inner, from_triplets(n, n, std::move(cross))};
  const SparseMatrix H = materialize(big);
  const auto xr = random_vector(n, 43);
  std::vector<real_t> yf(n), ym(n);
  big.apply(xr, yf);
  spmv(H, xr, ym);
  REQUIRE(rel_err(yf, ym) < 1e-13);
}

TEST_CASE("split_block_operator keeps the parts disjoint and rejects non-replicated blocks") {
  const SparseMatrix inner = laplacian_1d(3);
  std::vector<Triplet> t;
  for (index_t b = 0; b < 2; ++b)
    for (index_t i = 0; i < 3; ++i)
      for (index_t p = inner.row_offsets[i]; p < inner.row_offsets[i + 1]; ++p)
        t.push_back({b * 3 + i, b * 3 + inner.col_indices[p], inner.values[p]});
  t.push_back({2, 3, -1.0});
  t.push_back({3, 2, -1.0});
  const SparseMatrix H = from_triplets(6, 6, t);
  const BlockOperator op = split_block_operator(H, 2);
  REQUIRE(max_abs_diff(op.inner, inner) == 0.0);
  REQUIRE(op.outer.nnz() == 2);
  REQUIRE(max_abs_diff(materialize(op), H) == 0.0);

  // perturb one diagonal block: replication is gone, split must refuse
  t[0].value += 1e-3;
  const SparseMatrix Hbad = from_triplets(6, 6, t);
  REQUIRE_THROWS_AS(split_block_operator(Hbad, 2), std::invalid_argument);
}

TEST_CASE("sparse multiply and add match dense oracles") {
  const SparseMatrix A = random_sparse(8, 6, 0.5, 51);
  const SparseMatrix B = random_sparse(6, 7, 0.5, 52);
  const SparseMatrix C = multiply(A, B);
  C.validate();
  const Eigen::MatrixXd D = to_dense(A) * to_dense(B);
  REQUIRE((to_dense(C) - D).cwiseAbs().maxCoeff() < 1e-13);

  const SparseMatrix S1 = random_sparse(5, 5, 0.6, 53);
  const SparseMatrix S2 = random_sparse(5, 5, 0.6, 54);
  const SparseMatrix S = sparse_add(2.0, S1, -0.5, S2);
  REQUIRE((to_dense(S) - (2.0 * to_dense(S1) - 0.5 * to_dense(S2))).cwiseAbs().maxCoeff() <
          1e-14);
}

TEST_CASE("triple_product_rap matches identity, nullspace and dense cases") {
  const SparseMatrix A = laplacian_1d(5);
  const SparseMatrix I5 = SparseMatrix::identity(5);
  REQUIRE(max_abs_diff(triple_product_rap(I5, A), A) == 0.0);

  // Neumann rows sum to zero, so the all-ones prolongation lands in the nullspace
  std::vector<Triplet> nt;
  for (index_t i = 0; i < 4; ++i) {
    const real_t d = (i == 0 || i == 3) ? 1.0 : 2.0;
    nt.push_back({i, i, d});
    if (i > 0) nt.push_back({i, i - 1, -1.0});
    if (i + 1 < 4) nt.push_back({i, i + 1, -1.0});
  }
  const SparseMatrix N = from_triplets(4, 4, std::move(nt));
  std::vector<Triplet> pt;
  for (index_t i = 0; i < 4; ++i) pt.push_back({i, 0, 1.0});
  const SparseMatrix ones = from_triplets(4, 1, std::move(pt));
  const SparseMatrix z = triple_product_rap(ones, N);
  REQUIRE(z.n_rows == 1);
  REQUIRE(max_abs(z) < 1e-14);

  const SparseMatrix Ar = random_sparse(8, 8, 0.5, 61);
  const SparseMatrix P = random_sparse(8, 3, 0.5, 62);
  const SparseMatrix RAP = triple_product_rap(P, Ar);
  RAP.validate();
  const Eigen::MatrixXd Dref = to_dense(P).transpose() * to_dense(Ar) * to_dense(P);
  REQUIRE((to_dense(RAP) - Dref).cwiseAbs().maxCoeff() < 1e-13);

  // Galerkin product of a symmetric matrix stays symmetric by structure
  const SparseMatrix As = symmetrize(Ar);
  const SparseMatrix RAPs = triple_product_rap(P, As);
  REQUIRE(max_abs_diff(RAPs, transpose(RAPs)) == 0.0);
}

TEST_CASE("dot and mean are deterministic and exact on known inputs") {
  std::vector<real_t> a = {1.0, 2.0, 3.0}, b = {4.0, -5.0, 6.0};
  REQUIRE(dot(a, b) == Catch::Approx(12.0));
  REQUIRE(norm2(std::vector<real_t>{3.0, 4.0}) == Catch::Approx(5.0));

  const auto v = random_vector(100003, 71);
  const auto w = random_vector(100003, 72);
  const real_t d1 = dot(v, w);
  for (int rep = 0; rep < 5; ++rep) REQUIRE(dot(v, w) == d1);  // bitwise stable

  std::vector<real_t> m = {1.0, 2.0, 3.0, 4.0};
  REQUIRE(mean(m) == Catch::Approx(2.5));
}

TEST_CASE("matrix market round trip preserves the matrix") {
  const SparseMatrix A = random_sparse(9, 9, 0.35, 81);
  const auto path = std::filesystem::temp_directory_path() / "symamg_mm_roundtrip.mtx";
  write_matrix_market(A, path.string());
  const SparseMatrix B = read_matrix_market(path.string());
  REQUIRE(B.n_rows == A.n_rows);
  REQUIRE(B.n_cols == A.n_cols);
  REQUIRE(max_abs_diff(A, B) < 1e-14);
  std::filesystem::remove(path);
}

TEST_CASE("splitmix stream is platform-independent") {
  Rng rng(1);
  // first outputs of splitmix64 seeded with 1; fixed reference values
  REQUIRE(rng.next() == 0x910a2dec89025cc1ull);
  REQUIRE(rng.next() == 0xbeeb8da1658eec67ull);
  Rng u(7);
  for (int i = 0; i < 100; ++i) {
    const double x = u.uniform();
    REQUIRE(x >= 0.0);
    REQUIRE(x < 1.0);
  }
}

TEST_CASE("validate rejects malformed storage") {
  SparseMatrix bad(2, 2);
  bad.row_offsets = {0, 1, 2};
  bad.col_indices = {0, 2};  // out of range
  bad.values = {1.0, 1.0};
  REQUIRE_THROWS_AS(bad.validate(), std::logic_error);

  SparseMatrix dup(1, 3);
  dup.row_offsets = {0, 2};
  dup.col_indices = {1, 1};  // not strictly increasing
  dup.values = {1.0, 2.0};
  REQUIRE_THROWS_AS(dup.validate(), std::logic_error);
}
