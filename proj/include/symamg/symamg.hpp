#pragma once

#include "symamg/core/sparse.hpp"
#include "symamg/core/kernels.hpp"
#include "symamg/core/spgemm.hpp"
#include "symamg/core/block_operator.hpp"
#include "symamg/core/dense.hpp"
#include "symamg/core/rng.hpp"
#include "symamg/io/matrix_market.hpp"
#include "symamg/model/grid.hpp"
#include "symamg/model/poisson.hpp"
#include "symamg/model/problem.hpp"
#include "symamg/model/interface.hpp"
#include "symamg/transform/basis.hpp"
#include "symamg/transform/subsystems.hpp"
#include "symamg/transform/symmetric_solve.hpp"
#include "symamg/krylov/types.hpp"
#include "symamg/krylov/pcg.hpp"
#include "symamg/krylov/gmres.hpp"
#include "symamg/fsai/fsai.hpp"
#include "symamg/amg/strength.hpp"
#include "symamg/amg/mis.hpp"
#include "symamg/amg/interpolation.hpp"
#include "symamg/amg/hierarchy.hpp"
#include "symamg/lowrank/lanczos.hpp"
#include "symamg/lowrank/arnoldi.hpp"
#include "symamg/lowrank/theorems.hpp"
#include "symamg/lowrank/lrcfsai.hpp"
#include "symamg/lowrank/lrcamg.hpp"
#include "symamg/schur/amgs.hpp"
#include "symamg/reduction/amgr.hpp"
#include "symamg/bench/config.hpp"
#include "symamg/bench/report.hpp"
#include "symamg/bench/runner.hpp"
