#pragma once

#include <string_view>
#include <vector>

namespace symamg {

/// Built-in benchmark configurations. `bench export` writes them as files;
/// `bench run <name>` accepts the names directly.
struct Preset {
  const char* name;
  const char* text;
};

inline const std::vector<Preset>& builtin_presets() {
  static const std::vector<Preset> presets = {
      {"table21",
       "# Conjugate gradients on the mirrored stretched-cube problem: per-subsystem\n"
       "# approximate inverse factors against the shared factor with low-rank\n"
       "# corrections of increasing rank.\n"
       "problem = mirrored\n"
       "n = 32\n"
       "s = 0, 1, 2, 3\n"
       "preconds = fsai, lrcfsai:0, lrcfsai:1, lrcfsai:2, lrcfsai:4, lrcfsai:8, lrcfsai:16\n"
       "method = pcg\n"
       "tol = 1e-8\n"
       "# Denser factor pattern; reported in the run output alongside the results.\n"
       "fsai_power = 2\n"},
      {"table22",
       "# GMRES with the multigrid family on the mirrored problem: one hierarchy on\n"
       "# the original operator, then one shared hierarchy per subsystem with and\n"
       "# without low-rank corrections.\n"
       "problem = mirrored\n"
       "n = 32\n"
       "s = 0, 1, 2, 3\n"
       "preconds = amg, lrcamg:0, lrcamg:16\n"
       "method = gmres\n"},
      {"table31",
       "# Schur-complement block preconditioner on the inner-interface ordering\n"
       "# against the plain multigrid baseline. Needs at least one reflection.\n"
       "problem = mirrored\n"
       "n = 32\n"
       "s = 1, 2, 3\n"
       "preconds = amg, amgs:16\n"
       "method = gmres\n"},
      {"table32",
       "# Multigrid reduction with the replicated block smoother, CG throughout.\n"
       "problem = mirrored\n"
       "n = 32\n"
       "s = 0, 1, 2, 3\n"
       "preconds = amg, amgr\n"
       "method = pcg\n"},
      {"table53-chain",
       "# Ring of identical stretched blocks: the reduction preconditioner builds\n"
       "# its smoother from one replicated block whatever the ring length.\n"
       "problem = repeated\n"
       "n = 16\n"
       "n_b = 2, 3, 4, 6, 8\n"
       "preconds = amg, amgr\n"
       "method = pcg\n"},
      {"scaling-cube",
       "# Grid sweep for iteration quasi-independence and timing trends.\n"
       "problem = mirrored\n"
       "n = 16, 24, 32, 48\n"
       "s = 3\n"
       "preconds = amg, amgr\n"
       "method = pcg\n"
       "repetitions = 3\n"},
  };
  return presets;
}

inline const Preset* find_preset(std::string_view name) {
  for (const auto& p : builtin_presets())
    if (name == p.name) return &p;
  return nullptr;
}

}  // namespace symamg
