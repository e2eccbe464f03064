#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "symamg/krylov/gmres.hpp"
#include "symamg/krylov/pcg.hpp"
#include "symamg/krylov/types.hpp"
#include "symamg/transform/basis.hpp"
#include "symamg/transform/subsystems.hpp"

namespace symamg {

enum class KrylovMethod { pcg, gmres };

struct TransformedSolveResult {
  SolveStats stats;
  std::vector<real_t> x;  // in the problem's mirrored ordering
};

/// Solves the original system by decoupling: transform the right-hand side
/// into the reflection basis, run one Krylov solve on the stacked
/// block-diagonal operator (all subsystems at once, applied fused), and
/// transform the solution back. The basis is orthogonal, so the residual
/// history reported by the stacked solve is also the residual of the
/// original system. If the all-plus subsystem is singular the stacked null
/// vector (constant on that block, zero elsewhere) is installed for CG
/// projection unless the caller supplied one.
inline TransformedSolveResult solve_transformed(const SubsystemSet& set,
                                                std::span<const real_t> b,
                                                const PreconditionerHandle& M,
                                                KrylovMethod method, KrylovConfig cfg = {}) {
  const index_t n = set.stacked_n();
  if (static_cast<index_t>(b.size()) != n)
    throw std::invalid_argument("solve_transformed: rhs length mismatch");
  const SymmetryBasis basis{set.s, set.block_len};

  std::vector<real_t> bhat(b.begin(), b.end());
  basis.apply(bhat);

  if (cfg.project_nullspace && cfg.null_vector.empty()) {
    bool any_singular = false;
    for (index_t i = 0; i < set.n_sub(); ++i) any_singular = any_singular || set.singular[i];
    if (any_singular) {
      cfg.null_vector.assign(n, 0.0);
      for (index_t i = 0; i < set.n_sub(); ++i)
        if (set.singular[i])
          for (index_t t = 0; t < set.block_len; ++t)
            cfg.null_vector[static_cast<std::size_t>(i) * set.block_len + t] = 1.0;
    } else {
      cfg.project_nullspace = false;  // nothing to project against
    }
  }

  LinearOperator op{n, [&set](std::span<const real_t> v, std::span<real_t> y) {
                      set.apply_stacked(v, y);
                    }};
  TransformedSolveResult out;
  out.x.assign(n, 0.0);
  out.stats = method == KrylovMethod::pcg ? pcg(op, bhat, out.x, M, cfg)
                                          : gmres(op, bhat, out.x, M, cfg);
  basis.apply(out.x);
  return out;
}

}  // namespace symamg
