#pragma once

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "symamg/core/sparse.hpp"
#include "symamg/model/problem.hpp"

namespace symamg {

/// Two-level view of a symmetric problem: unknowns with no coupling outside
/// their own subdomain (inner) first, block by block, then the interface.
/// In this ordering the operator takes the form [[K_bar, B_bar], [B_bar^T,
/// C]] with K_bar = I (x) K and B_bar = I (x) B reproduced exactly; K and B
/// are the single-block representatives. When block_interface is false the
/// interface has been arbitrarily permuted, so only K keeps its replicated
/// meaning and B / C block structure is not available.
struct InnerInterfaceLayout {
  index_t n_b = 1;
  index_t inn_loc = 0;  // inner unknowns per block
  index_t ifc_loc = 0;  // interface unknowns per block (0 if not block-structured)
  index_t s = 0;        // mirrored reflection depth carried over from the problem
  bool block_interface = false;
  SparseMatrix A;                      // full operator, inner-interface ordering
  SparseMatrix K;                      // inn_loc x inn_loc
  SparseMatrix B;                      // inn_loc x ifc_loc
  SparseMatrix C;                      // n_ifc x n_ifc interface block
  std::vector<index_t> perm;           // perm[ii position] = source-ordering position
  std::vector<index_t> interface_ids;  // source-ordering ids of the interface unknowns

  index_t n_inn() const { return inn_loc * n_b; }
  index_t n_ifc() const { return static_cast<index_t>(interface_ids.size()); }
  index_t n() const { return A.n_rows; }
};

/// Builds the inner-interface layout of a mirrored or repeated problem. An
/// unknown is interface iff it couples to another subdomain. Passing a
/// permutation of 0..n_ifc-1 reorders the interface slots (the inner part is
/// never reordered); an empty span keeps the block-major interface order.
inline InnerInterfaceLayout make_inner_interface_layout(
    const SymmetricProblem& prob, std::span<const index_t> interface_perm = {}) {
  const index_t L = prob.block_len;
  const index_t nb = prob.n_b;
  const SparseMatrix& H = prob.full;

  std::vector<char> local_ifc(L, 0);
  for (index_t b = 0; b < nb; ++b) {
    for (index_t l = 0; l < L; ++l) {
      const index_t q = b * L + l;
      bool crosses = false;
      for (index_t p = H.row_offsets[q]; p < H.row_offsets[q + 1]; ++p)
        if (H.col_indices[p] / L != b) {
          crosses = true;
          break;
        }
      if (b == 0) {
        local_ifc[l] = crosses ? 1 : 0;
      } else if ((local_ifc[l] != 0) != crosses) {
        throw std::logic_error(
            "make_inner_interface_layout: interface classification is not replicated");
      }
    }
  }

  InnerInterfaceLayout lay;
  lay.n_b = nb;
  lay.s = prob.kind == SymmetryKind::mirrored ? prob.s : 0;
  std::vector<index_t> inner_local, ifc_local;
  for (index_t l = 0; l < L; ++l) (local_ifc[l] ? ifc_local : inner_local).push_back(l);
  lay.inn_loc = static_cast<index_t>(inner_local.size());
  lay.ifc_loc = static_cast<index_t>(ifc_local.size());
  const index_t n_inn = lay.inn_loc * nb;
  const index_t n_ifc = lay.ifc_loc * nb;

  lay.perm.resize(prob.n());
  for (index_t b = 0; b < nb; ++b)
    for (index_t t = 0; t < lay.inn_loc; ++t)
      lay.perm[b * lay.inn_loc + t] = b * L + inner_local[t];
  std::vector<index_t> ifc_positions(n_ifc);
  for (index_t b = 0; b < nb; ++b)
    for (index_t t = 0; t < lay.ifc_loc; ++t)
      ifc_positions[b * lay.ifc_loc + t] = b * L + ifc_local[t];

  lay.block_interface = interface_perm.empty();
  if (!interface_perm.empty()) {
    if (static_cast<index_t>(interface_perm.size()) != n_ifc)
      throw std::invalid_argument("make_inner_interface_layout: bad interface permutation size");
    std::vector<index_t> permuted(n_ifc);
    for (index_t t = 0; t < n_ifc; ++t) permuted[t] = ifc_positions[interface_perm[t]];
    ifc_positions = std::move(permuted);
    lay.ifc_loc = 0;
  }
  for (index_t t = 0; t < n_ifc; ++t) lay.perm[n_inn + t] = ifc_positions[t];
  lay.interface_ids = ifc_positions;

  lay.A = permute_symmetric(H, lay.perm);
  lay.K = extract_block(lay.A, 0, lay.inn_loc, 0, lay.inn_loc);
  for (index_t b = 1; b < nb; ++b) {
    SparseMatrix Kb = extract_block(lay.A, b * lay.inn_loc, (b + 1) * lay.inn_loc,
                                    b * lay.inn_loc, (b + 1) * lay.inn_loc);
    if (!structurally_equal(Kb, lay.K) || max_abs_diff(Kb, lay.K) != 0.0)
      throw std::logic_error("make_inner_interface_layout: K blocks are not replicated");
  }
  // Inner rows must have no entries in other blocks' inner or interface slots.
  for (index_t b = 0; b < nb; ++b) {
    for (index_t i = b * lay.inn_loc; i < (b + 1) * lay.inn_loc; ++i) {
      for (index_t p = lay.A.row_offsets[i]; p < lay.A.row_offsets[i + 1]; ++p) {
        const index_t j = lay.A.col_indices[p];
        if (j < n_inn && j / lay.inn_loc != b)
          throw std::logic_error("make_inner_interface_layout: inner unknown couples "
                                 "across subdomains");
      }
    }
  }
  lay.C = extract_block(lay.A, n_inn, n_inn + n_ifc, n_inn, n_inn + n_ifc);
  if (lay.block_interface) {
    lay.B = extract_block(lay.A, 0, lay.inn_loc, n_inn, n_inn + lay.ifc_loc);
    for (index_t b = 1; b < nb; ++b) {
      SparseMatrix Bb = extract_block(lay.A, b * lay.inn_loc, (b + 1) * lay.inn_loc,
                                      n_inn + b * lay.ifc_loc, n_inn + (b + 1) * lay.ifc_loc);
      if (!structurally_equal(Bb, lay.B) || max_abs_diff(Bb, lay.B) != 0.0)
        throw std::logic_error("make_inner_interface_layout: B blocks are not replicated");
    }
  }
  return lay;
}

}  // namespace symamg
