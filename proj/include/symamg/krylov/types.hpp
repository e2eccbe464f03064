#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "symamg/core/kernels.hpp"
#include "symamg/core/sparse.hpp"

namespace symamg {

struct KrylovConfig {
  real_t tol = 1e-8;          // on ||r|| / ||b||
  index_t max_iterations = 2000;
  index_t restart = 0;        // GMRES cycle length, 0 = full
  bool project_nullspace = false;
  std::vector<real_t> null_vector;  // empty with projection on = all ones
};

enum class FailureReason { none, max_iterations, breakdown, stagnation };

inline const char* to_string(FailureReason f) {
  switch (f) {
    case FailureReason::none: return "none";
    case FailureReason::max_iterations: return "max_iterations";
    case FailureReason::breakdown: return "breakdown";
    case FailureReason::stagnation: return "stagnation";
  }
  return "unknown";
}

struct SolveStats {
  bool converged = false;
  index_t iterations = 0;
  std::vector<real_t> relative_residuals;  // [0] = 1.0, one entry per iteration after
  real_t wall_seconds = 0.0;
  FailureReason failure = FailureReason::none;
  std::string message;
};

struct LinearOperator {
  index_t n = 0;
  std::function<void(std::span<const real_t>, std::span<real_t>)> apply;
};

/// Preconditioner application x = M(r). `symmetric` declares whether M is a
/// symmetric operator; solvers that require symmetry enforce the flag.
struct PreconditionerHandle {
  std::string name = "identity";
  bool symmetric = true;
  std::function<void(std::span<const real_t>, std::span<real_t>)> apply;
};

inline LinearOperator make_operator(const SparseMatrix& A) {
  if (A.n_rows != A.n_cols) throw std::invalid_argument("make_operator: matrix not square");
  return LinearOperator{A.n_rows,
                        [&A](std::span<const real_t> x, std::span<real_t> y) { spmv(A, x, y); }};
}

inline PreconditionerHandle identity_preconditioner() {
  return PreconditionerHandle{
      "identity", true,
      [](std::span<const real_t> r, std::span<real_t> x) { copy(r, x); }};
}

namespace detail {

/// Projects x orthogonal to w in place: x -= (w.x / w.w) w.
inline void project_out(std::span<const real_t> w, std::span<real_t> x, real_t w_dot_w) {
  const real_t c = dot({x.data(), x.size()}, w) / w_dot_w;
  for (std::size_t i = 0; i < x.size(); ++i) x[i] -= c * w[i];
}

inline std::vector<real_t> nullspace_vector(const KrylovConfig& cfg, index_t n) {
  if (!cfg.null_vector.empty()) {
    if (static_cast<index_t>(cfg.null_vector.size()) != n)
      throw std::invalid_argument("KrylovConfig: null vector length mismatch");
    return cfg.null_vector;
  }
  return std::vector<real_t>(n, 1.0);
}

}  // namespace detail

}  // namespace symamg
