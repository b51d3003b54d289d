#pragma once

// Umbrella header: auto-tuned sparse Krylov solvers with run-time SpMV
// kernel selection, restart-frequency adaptation and policy-driven
// meta-solvers.

#include "ktune/arnoldi.hpp"
#include "ktune/autotune.hpp"
#include "ktune/bicgstab.hpp"
#include "ktune/bss.hpp"
#include "ktune/common.hpp"
#include "ktune/csr.hpp"
#include "ktune/generate.hpp"
#include "ktune/gmres.hpp"
#include "ktune/ilu0.hpp"
#include "ktune/lanczos.hpp"
#include "ktune/matrix_market.hpp"
#include "ktune/meta.hpp"
#include "ktune/ortho.hpp"
#include "ktune/partition.hpp"
#include "ktune/policy.hpp"
#include "ktune/solver_types.hpp"
#include "ktune/spmv.hpp"
