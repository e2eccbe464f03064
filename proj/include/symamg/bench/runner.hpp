#pragma once

#include <algorithm>
#include <chrono>
#include <cstring>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "symamg/amg/hierarchy.hpp"
#include "symamg/bench/config.hpp"
#include "symamg/bench/report.hpp"
#include "symamg/fsai/fsai.hpp"
#include "symamg/krylov/gmres.hpp"
#include "symamg/krylov/pcg.hpp"
#include "symamg/lowrank/lrcamg.hpp"
#include "symamg/lowrank/lrcfsai.hpp"
#include "symamg/model/grid.hpp"
#include "symamg/model/interface.hpp"
#include "symamg/model/problem.hpp"
#include "symamg/reduction/amgr.hpp"
#include "symamg/schur/amgs.hpp"
#include "symamg/transform/subsystems.hpp"
#include "symamg/transform/symmetric_solve.hpp"

namespace symamg {
namespace detail {

class WallTimer {
 public:
  real_t seconds() const {
    return std::chrono::duration<real_t>(std::chrono::steady_clock::now() - t0_).count();
  }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

/// Per-(problem, size, variant) state shared between the preconditioner
/// rows. The subsystem decomposition and the inner-interface reordering are
/// built lazily and their one-time cost is charged to the first row that
/// asks for them.
struct GroupContext {
  SymmetricProblem prob;
  std::vector<real_t> rhs;

  std::optional<SubsystemSet> subs;
  std::optional<InnerInterfaceLayout> lay;
  std::vector<real_t> rhs_ii;  // rhs in the inner-interface ordering
  real_t pending_subs_time = 0.0;
  real_t pending_lay_time = 0.0;

  const SubsystemSet& subsystems() {
    if (!subs) {
      WallTimer t;
      subs = extract_subsystems(prob);
      pending_subs_time = t.seconds();
    }
    return *subs;
  }

  const InnerInterfaceLayout& layout() {
    if (!lay) {
      WallTimer t;
      lay = make_inner_interface_layout(prob);
      rhs_ii.resize(rhs.size());
      for (std::size_t p = 0; p < rhs.size(); ++p)
        rhs_ii[p] = rhs[static_cast<std::size_t>(lay->perm[p])];
      pending_lay_time = t.seconds();
    }
    return *lay;
  }

  real_t take_subs_time() { return std::exchange(pending_subs_time, 0.0); }
  real_t take_lay_time() { return std::exchange(pending_lay_time, 0.0); }
};

inline AmgConfig amg_config_from(const BenchConfig& cfg) {
  AmgConfig a;
  a.theta = cfg.amg_theta;
  a.smoother = cfg.amg_smoother == "fsai" ? SmootherKind::fsai : SmootherKind::jacobi;
  a.interp = cfg.amg_interp == "distance2" ? InterpScheme::distance2 : InterpScheme::direct;
  a.n_pre = a.n_post = cfg.amg_n_smooth;
  a.fsai_pattern_power = cfg.fsai_power;
  return a;
}

inline KrylovMethod choose_method(const BenchConfig& cfg, bool symmetric_handle) {
  if (cfg.method == "pcg") return KrylovMethod::pcg;
  if (cfg.method == "gmres") return KrylovMethod::gmres;
  return symmetric_handle ? KrylovMethod::pcg : KrylovMethod::gmres;
}

inline KrylovConfig krylov_config_from(const BenchConfig& cfg) {
  KrylovConfig k;
  k.tol = cfg.tol;
  k.max_iterations = cfg.max_iterations;
  k.restart = cfg.restart;
  return k;
}

/// Runs `solve` `reps` times, keeps the stats of the last run and reports
/// the median wall time (iteration counts are deterministic across reps).
template <class Fn>
SolveStats repeat_solve(index_t reps, Fn&& solve, real_t& median_out) {
  std::vector<real_t> times;
  times.reserve(static_cast<std::size_t>(reps));
  SolveStats stats;
  for (index_t r = 0; r < reps; ++r) {
    WallTimer t;
    stats = solve();
    times.push_back(t.seconds());
  }
  std::sort(times.begin(), times.end());
  median_out = times[times.size() / 2];
  return stats;
}

inline void append_note(std::string& note, const std::string& extra) {
  if (!note.empty()) note += "; ";
  note += extra;
}

inline void record_stats(ReportRow& row, const SolveStats& stats) {
  row.converged = stats.converged;
  row.iterations = stats.iterations;
  row.final_relres =
      stats.relative_residuals.empty() ? 0.0 : stats.relative_residuals.back();
  if (!stats.converged) {
    std::string why = to_string(stats.failure);
    if (!stats.message.empty()) why += ": " + stats.message;
    append_note(row.note, why);
  }
}

/// Direct solve on an explicit matrix (original or inner-interface
/// ordering). PCG projects out the constant nullspace; GMRES works in the
/// range of the operator as long as the rhs is compatible.
inline void solve_matrix(ReportRow& row, const SparseMatrix& A, std::span<const real_t> b,
                         const PreconditionerHandle& M, const BenchConfig& cfg) {
  const KrylovMethod method = choose_method(cfg, M.symmetric);
  KrylovConfig kc = krylov_config_from(cfg);
  kc.project_nullspace = method == KrylovMethod::pcg;
  row.method = method == KrylovMethod::pcg ? "pcg" : "gmres";
  std::vector<real_t> x(static_cast<std::size_t>(A.n_rows));
  const SolveStats stats = repeat_solve(
      cfg.repetitions,
      [&] {
        std::fill(x.begin(), x.end(), 0.0);
        return method == KrylovMethod::pcg ? pcg(A, b, x, M, kc) : gmres(A, b, x, M, kc);
      },
      row.t_solve);
  record_stats(row, stats);
}

/// Solve through the orthogonal symmetry transform: one stacked Krylov run
/// over the decoupled subsystems.
inline void solve_stacked(ReportRow& row, const SubsystemSet& set, std::span<const real_t> b,
                          const PreconditionerHandle& M, const BenchConfig& cfg) {
  const KrylovMethod method = choose_method(cfg, M.symmetric);
  KrylovConfig kc = krylov_config_from(cfg);
  kc.project_nullspace = method == KrylovMethod::pcg;
  row.method = method == KrylovMethod::pcg ? "pcg" : "gmres";
  const SolveStats stats = repeat_solve(
      cfg.repetitions, [&] { return solve_transformed(set, b, M, method, kc).stats; },
      row.t_solve);
  record_stats(row, stats);
}

inline ReportRow run_case(GroupContext& ctx, const PrecondSpec& spec, const BenchConfig& cfg,
                          std::ostream& log, bool verbose) {
  ReportRow row;
  row.problem = cfg.problem;
  row.n_axis = ctx.prob.grid.nx;
  row.s = ctx.prob.s;
  row.n_b = ctx.prob.n_b;
  row.n_unknowns = ctx.prob.n();
  row.precond = spec.name;

  try {
    if (spec.name == "none") {
      const auto M = identity_preconditioner();
      solve_matrix(row, ctx.prob.full, ctx.rhs, M, cfg);
    } else if (spec.name == "fsai") {
      const auto& set = ctx.subsystems();
      WallTimer t;
      const auto pre = build_subsystem_fsai(set, cfg.fsai_power);
      row.t_setup = t.seconds() + ctx.take_subs_time();
      const auto M = make_preconditioner(pre);
      solve_stacked(row, set, ctx.rhs, M, cfg);
    } else if (spec.name == "lrcfsai") {
      const auto& set = ctx.subsystems();
      row.rank = spec.rank;
      LrcfsaiConfig lc;
      lc.rank = spec.rank;
      lc.eig_tol = cfg.eig_tol;
      lc.fsai_pattern_power = cfg.fsai_power;
      WallTimer t;
      const auto pre = build_lrcfsai(set, lc);
      row.t_setup = t.seconds() + ctx.take_subs_time();
      if (!pre.eigs_converged) append_note(row.note, "eig tol not met");
      const auto M = make_preconditioner(pre);
      solve_stacked(row, set, ctx.rhs, M, cfg);
    } else if (spec.name == "amg") {
      WallTimer t;
      const auto hier = build_amg(ctx.prob.full, amg_config_from(cfg));
      row.t_setup = t.seconds();
      row.coarsening_ratio = hier.coarsening_ratio();
      row.coarse_nnzr = hier.coarse_avg_nnzr();
      if (verbose) log << hier.summary();
      const auto M = make_preconditioner(hier);
      solve_matrix(row, ctx.prob.full, ctx.rhs, M, cfg);
    } else if (spec.name == "lrcamg") {
      const auto& set = ctx.subsystems();
      row.rank = spec.rank;
      LrcamgConfig lc;
      lc.rank = spec.rank;
      lc.amg = amg_config_from(cfg);
      lc.eig_tol = cfg.eig_tol;
      WallTimer t;
      const auto pre = build_lrcamg(set, lc);
      row.t_setup = t.seconds() + ctx.take_subs_time();
      if (!pre.eigs_converged) append_note(row.note, "eig tol not met");
      const auto M = make_preconditioner(pre);
      solve_stacked(row, set, ctx.rhs, M, cfg);
    } else if (spec.name == "amgs") {
      const auto& lay = ctx.layout();
      row.rank = spec.has_rank ? spec.rank : cfg.amgs_rank;
      AmgsConfig ac;
      ac.amg = amg_config_from(cfg);
      ac.rank = row.rank;
      ac.eig_tol = cfg.eig_tol;
      ac.fsai_pattern_power = cfg.fsai_power;
      WallTimer t;
      const auto pre = build_amgs(lay, ac);
      row.t_setup = t.seconds() + ctx.take_lay_time();
      if (!pre.eigs_converged) append_note(row.note, "eig tol not met");
      const auto M = make_preconditioner(pre);
      solve_matrix(row, lay.A, ctx.rhs_ii, M, cfg);
    } else if (spec.name == "amgr") {
      const auto& lay = ctx.layout();
      AmgrConfig rc;
      rc.theta = cfg.amg_theta;
      rc.mis_power = cfg.amgr_mis_power;
      rc.n_smooth = cfg.amgr_n_smooth;
      rc.fsai_pattern_power = cfg.fsai_power;
      rc.coarse_amg = amg_config_from(cfg);
      WallTimer t;
      const auto pre = build_amgr(lay, rc);
      row.t_setup = t.seconds() + ctx.take_lay_time();
      row.coarsening_ratio = pre.coarsening_ratio();
      row.coarse_nnzr = pre.coarse_avg_nnzr();
      const auto M = make_preconditioner(pre);
      solve_matrix(row, lay.A, ctx.rhs_ii, M, cfg);
    } else {
      throw std::invalid_argument("unknown preconditioner: " + spec.name);
    }
  } catch (const std::exception& e) {
    row.converged = false;
    append_note(row.note, e.what());
  }

  log << "    " << row.precond;
  if (row.rank >= 0) log << ":" << row.rank;
  if (row.converged) {
    log << "  " << row.method << " iters=" << row.iterations << "  relres=" << row.final_relres
        << "  setup=" << row.t_setup << "s  solve=" << row.t_solve << "s\n";
  } else {
    log << "  FAILED (" << row.note << ")\n";
  }
  return row;
}

}  // namespace detail

/// Runs every (size x variant x preconditioner) combination of the config.
/// The first preconditioner of each group is the timing baseline: speedup =
/// baseline t_solve / row t_solve. Failures are recorded per row (note +
/// converged=NO), never thrown.
inline std::vector<ReportRow> run_bench(const BenchConfig& cfg, std::ostream& log,
                                        bool verbose = false) {
  std::vector<ReportRow> rows;
  const bool repeated = cfg.problem == "repeated";
  const auto& variants = repeated ? cfg.nb_values : cfg.s_values;
  if (cfg.fsai_power != 1)
    log << "note: approximate-inverse factors use pattern power " << cfg.fsai_power << "\n";

  for (const index_t n : cfg.sizes) {
    for (const index_t v : variants) {
      detail::GroupContext ctx;
      {
        detail::WallTimer t;
        const StretchedGrid grid = make_cube_grid(n, cfg.gamma);
        ctx.prob = repeated ? make_repeated_problem(grid, v) : make_symmetric_problem(grid, v);
        ctx.rhs = make_compatible_rhs(ctx.prob.n(), cfg.seed);
        log << "== " << cfg.problem << " n=" << n << (repeated ? " n_b=" : " s=") << v
            << "  unknowns=" << ctx.prob.n() << "  (assembled in " << t.seconds() << "s)\n";
      }

      const std::size_t first = rows.size();
      for (const auto& spec : cfg.preconds)
        rows.push_back(detail::run_case(ctx, spec, cfg, log, verbose));

      real_t base = 0.0;
      for (std::size_t i = first; i < rows.size(); ++i)
        if (rows[i].converged && rows[i].t_solve > 0.0) {
          base = rows[i].t_solve;
          break;
        }
      if (base > 0.0)
        for (std::size_t i = first; i < rows.size(); ++i)
          if (rows[i].converged && rows[i].t_solve > 0.0)
            rows[i].speedup = base / rows[i].t_solve;
    }
  }
  return rows;
}

inline bool all_converged(const std::vector<ReportRow>& rows) {
  return std::all_of(rows.begin(), rows.end(), [](const ReportRow& r) { return r.converged; });
}

}  // namespace symamg
