#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "support/oracles.hpp"
#include "symamg/core/kernels.hpp"
#include "symamg/model/grid.hpp"
#include "symamg/model/interface.hpp"
#include "symamg/model/poisson.hpp"
#include "symamg/model/problem.hpp"

using namespace symamg;
using namespace symamg::testing;

TEST_CASE("stretched axis hits the stated coordinates") {
  const StretchedGrid g2 = make_stretched_grid(2, 1, 1, 1.5, 1.5, 1.5);
  REQUIRE(g2.x_nodes[0] == 0.0);
  REQUIRE(g2.x_nodes[1] == Catch::Approx(0.5).margin(1e-15));
  REQUIRE(g2.x_nodes[2] == 1.0);

  // gamma -> 0 limit is the uniform grid
  const StretchedGrid gu = make_stretched_grid(4, 1, 1, 1e-4, 1e-4, 1e-4);
  for (index_t i = 0; i <= 4; ++i)
    REQUIRE(gu.x_nodes[i] == Catch::Approx(0.25 * i).margin(1e-6));

  // wall clustering at the shipped stretching
  const StretchedGrid gw = make_stretched_grid(64, 1, 1);
  REQUIRE(gw.x_nodes[1] - gw.x_nodes[0] < 1.0 / 64.0);

  REQUIRE_THROWS_AS(make_stretched_grid(0, 4, 4), std::invalid_argument);
}

TEST_CASE("stretched axis is strictly increasing and mirror-exact bitwise") {
  for (index_t n : {4, 8, 16, 33}) {
    const StretchedGrid g = make_stretched_grid(n, 2, 2, 1.5, 1.0, 2.0);
    REQUIRE(static_cast<index_t>(g.x_nodes.size()) == n + 1);
    for (index_t i = 0; i < n; ++i) REQUIRE(g.x_nodes[i + 1] > g.x_nodes[i]);
    // nodes reflect about 0.5 exactly; widths mirror bit for bit
    for (index_t i = 0; i <= n; ++i)
      REQUIRE(g.x_nodes[i] == Catch::Approx(1.0 - g.x_nodes[n - i]).margin(1e-15));
    for (index_t i = 0; i < n; ++i) REQUIRE(g.wx[i] == g.wx[n - 1 - i]);
  }
}

TEST_CASE("near-wall to center width ratio grows with stretching, not with n") {
  // the stretching profile fixes the center/wall cell width ratio; it must
  // not drift as the grid is refined
  const real_t r32 = [&] {
    const StretchedGrid g = make_cube_grid(32);
    return g.wx[15] / g.wx[0];
  }();
  const real_t r64 = [&] {
    const StretchedGrid g = make_cube_grid(64);
    return g.wx[31] / g.wx[0];
  }();
  const real_t expected = std::cosh(1.5) * std::cosh(1.5);
  REQUIRE(r32 == Catch::Approx(expected).epsilon(0.10));
  REQUIRE(r64 == Catch::Approx(expected).epsilon(0.05));
  // refinement converges towards the profile's limit ratio
  REQUIRE(std::abs(r64 - expected) < std::abs(r32 - expected));
}

TEST_CASE("two-cell Neumann assembly is the c[[1,-1],[-1,1]] matrix") {
  const StretchedGrid g = make_stretched_grid(2, 1, 1, 1e-4, 1e-4, 1e-4);
  const SparseMatrix A = assemble_poisson(g);
  REQUIRE(A.n_rows == 2);
  const real_t c = A.at(0, 0);
  REQUIRE(c > 0.0);
  REQUIRE(A.at(0, 1) == Catch::Approx(-c));
  REQUIRE(A.at(1, 0) == Catch::Approx(-c));
  REQUIRE(A.at(1, 1) == Catch::Approx(c));
}

TEST_CASE("assembly has zero row sums, symmetry, and the 7-point interior stencil") {
  const StretchedGrid g = make_stretched_grid(4, 4, 4, 1e-4, 1e-4, 1e-4);
  const SparseMatrix A = assemble_poisson(g);
  REQUIRE(A.n_rows == 64);
  REQUIRE(is_symmetric(A, 0.0));
  const real_t dmax = max_abs(A);
  for (real_t rs : row_sums(A)) REQUIRE(std::abs(rs) <= 1e-12 * dmax);

  // interior cell (1,1,1) of the near-uniform grid: -1,-1,-1,6,-1,-1,-1 scaled
  const index_t id = 1 + 4 * (1 + 4 * 1);
  const real_t diag = A.at(id, id);
  REQUIRE(A.row_cols(id).size() == 7);
  for (index_t nb : {id - 1, id + 1, id - 4, id + 4, id - 16, id + 16})
    REQUIRE(A.at(id, nb) == Catch::Approx(-diag / 6.0).epsilon(1e-3));

  // stretched grids keep both properties
  const StretchedGrid gs = make_cube_grid(8);
  const SparseMatrix As = assemble_poisson(gs);
  REQUIRE(is_symmetric(As, 0.0));
  const real_t dmax_s = max_abs(As);
  for (real_t rs : row_sums(As)) REQUIRE(std::abs(rs) <= 1e-12 * dmax_s);
}

TEST_CASE("mirrored problem on 4x1x1 matches the hand-permuted blocks") {
  // two cells per half, inward ordering: A_1 = c[[1,-1],[-1,2]], A_2 couples
  // only the two innermost cells
  const StretchedGrid g = make_stretched_grid(4, 1, 1, 1e-4, 1e-4, 1e-4);
  const SymmetricProblem prob = make_symmetric_problem(g, 1);
  REQUIRE(prob.n_b == 2);
  REQUIRE(prob.block_len == 2);
  const real_t c = prob.blocks[0].at(0, 0);
  REQUIRE(c > 0.0);
  REQUIRE(prob.blocks[0].at(0, 1) == Catch::Approx(-c));
  REQUIRE(prob.blocks[0].at(1, 1) == Catch::Approx(2.0 * c));
  REQUIRE(prob.blocks[1].nnz() == 1);
  REQUIRE(prob.blocks[1].at(1, 1) == Catch::Approx(-c));
}

TEST_CASE("mirrored ordering is a congruence of the lexicographic assembly") {
  const StretchedGrid g = make_stretched_grid(8, 8, 1, 1.5, 1.5, 1.0);
  const SymmetricProblem prob = make_symmetric_problem(g, 2);
  const SparseMatrix lex = assemble_poisson(g);
  const SparseMatrix expected = permute_symmetric(lex, prob.ordering);
  REQUIRE(max_abs_diff(prob.full, expected) == 0.0);

  // ordering is a permutation
  std::vector<char> seen(prob.n(), 0);
  for (index_t id : prob.ordering) {
    REQUIRE(id >= 0);
    REQUIRE(id < prob.n());
    REQUIRE(!seen[id]);
    seen[id] = 1;
  }
}

TEST_CASE("mirrored blocks replicate exactly and follow the xor pattern") {
  const StretchedGrid g = make_cube_grid(8);
  for (index_t s : {0, 1, 2, 3}) {
    const SymmetricProblem prob = make_symmetric_problem(g, s);
    REQUIRE(prob.n_b == (index_t(1) << s));
    REQUIRE(max_abs_diff(prob.materialize_from_blocks(), prob.full) == 0.0);
    REQUIRE(is_symmetric(prob.full, 0.0));
    const real_t dmax = max_abs(prob.full);
    for (real_t rs : row_sums(prob.full)) REQUIRE(std::abs(rs) <= 1e-12 * dmax);
    // off-diagonal couplings are far sparser than the subdomain block
    for (index_t i = 1; i < prob.n_b; ++i)
      REQUIRE(prob.blocks[i].nnz() * 10 <= prob.blocks[0].nnz());
  }
  REQUIRE_THROWS_AS(make_symmetric_problem(make_stretched_grid(6, 5, 4), 2),
                    std::invalid_argument);
}

TEST_CASE("block operator split reproduces the mirrored operator") {
  const StretchedGrid g = make_cube_grid(8);
  const SymmetricProblem prob = make_symmetric_problem(g, 2);
  const BlockOperator op = prob.to_block_operator();
  REQUIRE(op.n_blocks == 4);
  REQUIRE(max_abs_diff(op.inner, prob.blocks[0]) == 0.0);
  const auto x = random_vector(prob.n(), 5);
  std::vector<real_t> yf(prob.n()), ym(prob.n());
  op.apply(x, yf);
  spmv(prob.full, x, ym);
  REQUIRE(rel_err(yf, ym) < 1e-13);
}

TEST_CASE("repeated problem is an x-periodic block-circulant ring") {
  const StretchedGrid g = make_stretched_grid(4, 4, 4, 1.5, 1.5, 1.5);
  const SymmetricProblem prob = make_repeated_problem(g, 3);
  REQUIRE(prob.kind == SymmetryKind::repeated);
  REQUIRE(prob.n_b == 3);
  REQUIRE(prob.block_len == 64);
  REQUIRE(is_symmetric(prob.full, 0.0));
  const real_t dmax = max_abs(prob.full);
  for (real_t rs : row_sums(prob.full)) REQUIRE(std::abs(rs) <= 1e-12 * dmax);
  REQUIRE(max_abs_diff(prob.materialize_from_blocks(), prob.full) == 0.0);

  // circulant: block (b, c) depends only on (c - b) mod n_b
  const index_t L = prob.block_len;
  for (index_t b = 0; b < 3; ++b)
    for (index_t c = 0; c < 3; ++c) {
      const SparseMatrix got =
          extract_block(prob.full, b * L, (b + 1) * L, c * L, (c + 1) * L);
      REQUIRE(max_abs_diff(got, prob.blocks[(c - b + 3) % 3]) == 0.0);
    }
  REQUIRE_THROWS_AS(make_repeated_problem(g, 1), std::invalid_argument);
}

TEST_CASE("interface layout separates inner and interface unknowns") {
  // 1D chain of 8 cells split into two mirrored halves: only the two facing
  // cells couple across, so the interface is one cell per block
  const StretchedGrid g = make_stretched_grid(8, 1, 1, 1e-4, 1e-4, 1e-4);
  const SymmetricProblem prob = make_symmetric_problem(g, 1);
  const InnerInterfaceLayout lay = make_inner_interface_layout(prob);
  REQUIRE(lay.n_ifc() == 2);
  REQUIRE(lay.n_inn() == 6);
  REQUIRE(lay.inn_loc == 3);
  REQUIRE(lay.ifc_loc == 1);
  REQUIRE(lay.block_interface);

  // K is the tridiagonal inner block; B couples the innermost inner cell only
  REQUIRE(lay.K.n_rows == 3);
  REQUIRE(lay.K.at(0, 1) != 0.0);
  REQUIRE(lay.K.at(1, 2) != 0.0);
  REQUIRE(lay.K.at(0, 2) == 0.0);
  REQUIRE(lay.B.nnz() == 1);

  // permuted operator equals the layout's A
  const SparseMatrix expected = permute_symmetric(prob.full, lay.perm);
  REQUIRE(max_abs_diff(lay.A, expected) == 0.0);
}

TEST_CASE("interface layout replicates K and B across blocks bitwise") {
  const StretchedGrid g = make_cube_grid(8);
  const SymmetricProblem prob = make_symmetric_problem(g, 1);
  const InnerInterfaceLayout lay = make_inner_interface_layout(prob);
  REQUIRE(lay.n_ifc() == 2 * 8 * 8);  // one cell layer per side of the mirror plane

  const index_t L = lay.inn_loc;
  for (index_t b = 0; b < lay.n_b; ++b) {
    const SparseMatrix Kb = extract_block(lay.A, b * L, (b + 1) * L, b * L, (b + 1) * L);
    REQUIRE(max_abs_diff(Kb, lay.K) == 0.0);
    const SparseMatrix Bb = extract_block(lay.A, b * L, (b + 1) * L, lay.n_inn() + b * lay.ifc_loc,
                                          lay.n_inn() + (b + 1) * lay.ifc_loc);
    REQUIRE(max_abs_diff(Bb, lay.B) == 0.0);
  }

  // inner unknowns never couple outside their block, interface ones do
  for (index_t q = 0; q < lay.n(); ++q) {
    bool crosses = false;
    for (index_t p = lay.A.row_offsets[q]; p < lay.A.row_offsets[q + 1]; ++p) {
      const index_t j = lay.A.col_indices[p];
      if (q < lay.n_inn() && j < lay.n_inn() && j / L != q / L) crosses = true;
    }
    REQUIRE_FALSE(crosses);  // inner-to-inner coupling across blocks is impossible
  }
}

TEST_CASE("repeated problems expose the same interface machinery") {
  const StretchedGrid g = make_stretched_grid(4, 4, 4, 1.5, 1.5, 1.5);
  const SymmetricProblem prob = make_repeated_problem(g, 4);
  const InnerInterfaceLayout lay = make_inner_interface_layout(prob);
  REQUIRE(lay.n_b == 4);
  // ring: both x-boundary layers of every block touch a neighbor
  REQUIRE(lay.ifc_loc == 2 * 4 * 4);
  const SparseMatrix expected = permute_symmetric(prob.full, lay.perm);
  REQUIRE(max_abs_diff(lay.A, expected) == 0.0);
}

TEST_CASE("compatible rhs is reproducible and mean-free") {
  REQUIRE(make_compatible_rhs(1, 9)[0] == 0.0);

  const auto two = make_compatible_rhs(2, 10);
  REQUIRE(two[0] == Catch::Approx(-two[1]).margin(1e-16));

  const auto a = make_compatible_rhs(1000, 11);
  const auto b = make_compatible_rhs(1000, 11);
  REQUIRE(a == b);
  REQUIRE(std::abs(mean(a)) <= 1e-13);
  // uniform [-1,1) before the mean shift, so comfortably inside (-2, 2)
  for (real_t v : a) {
    REQUIRE(v > -2.0);
    REQUIRE(v < 2.0);
  }
}
