#pragma once

#include <memory>
#include <optional>
#include <thread>
#include <variant>

#include "ktune/arnoldi.hpp"
#include "ktune/autotune.hpp"
#include "ktune/bicgstab.hpp"
#include "ktune/gmres.hpp"
#include "ktune/ilu0.hpp"
#include "ktune/lanczos.hpp"
#include "ktune/policy.hpp"

namespace ktune {

/// A tuned kernel bound to its matrix, plans and worker pool, counting
/// calls and in-kernel seconds for the benchmark report.
class UnsymEngine {
public:
    UnsymEngine(const CsrMatrix& a, UnsymChoice choice)
        : a_(a), choice_(std::move(choice)), pool_(choice_.workers) {}

    LinOp op() {
        return {a_.n, [this](std::span<const double> x, std::span<double> y) {
                    const double tic = steady_seconds();
                    spmv_unsym(choice_.kernel, a_,
                               choice_.kernel == UnsymKernel::u1_row ? &choice_.row_part
                                                                     : &choice_.nnz_part,
                               choice_.plan ? &*choice_.plan : nullptr, x, y, pool_);
                    seconds_ += steady_seconds() - tic;
                    ++calls_;
                }};
    }

    index_t calls() const { return calls_; }
    double kernel_seconds() const { return seconds_; }
    double flops_per_call() const { return 2.0 * static_cast<double>(a_.nnz()); }
    int workers() const { return choice_.workers; }
    const UnsymChoice& choice() const { return choice_; }

private:
    const CsrMatrix& a_;
    UnsymChoice choice_;
    WorkerPool pool_;
    index_t calls_ = 0;
    double seconds_ = 0.0;
};

class SymEngine {
public:
    SymEngine(const SymCsrMatrix& a, SymChoice choice)
        : a_(a), choice_(std::move(choice)), pool_(choice_.workers) {}

    LinOp op() {
        return {a_.n, [this](std::span<const double> x, std::span<double> y) {
                    const double tic = steady_seconds();
                    spmv_sym(choice_.kernel, a_,
                             choice_.kernel == SymKernel::s1_row ? choice_.row_part
                                                                 : choice_.nnz_part,
                             choice_.kernel == SymKernel::s3_nnz_zero_omit ? &choice_.regions
                                                                           : nullptr,
                             x, y, pool_);
                    seconds_ += steady_seconds() - tic;
                    ++calls_;
                }};
    }

    index_t calls() const { return calls_; }
    double kernel_seconds() const { return seconds_; }
    double flops_per_call() const { return static_cast<double>(a_.spmv_flops()); }
    int workers() const { return choice_.workers; }
    const SymChoice& choice() const { return choice_; }

private:
    const SymCsrMatrix& a_;
    SymChoice choice_;
    WorkerPool pool_;
    index_t calls_ = 0;
    double seconds_ = 0.0;
};

struct MetaOptions {
    int workers = 0;  // 0: the CPU policy keyword, else hardware concurrency
    SelectOptions tuning;
    std::optional<UnsymKernel> force_unsym;  // bypass tuning with a fixed kernel
    std::optional<SymKernel> force_sym;
    index_t force_jl = 64;
    index_t max_iters = 10000;
    std::uint64_t seed = 20080517;
    int max_accuracy_passes = 8;
};

struct MetaOutcome {
    std::variant<SolverResult, EigenResult> result;
    bool policy_satisfied = false;
    double achieved_residual = 0.0;  // true residual the satisfied flag was judged on
    int outer_passes = 0;
    TuningReport tuning;
    OrthoVariant ortho_used;
    SolverKind solver_used = SolverKind::auto_default;
    std::vector<index_t> msize_trajectory;
    int workers = 1;
    double elapsed_seconds = 0.0;
    std::size_t workspace_bytes = 0;
    index_t spmv_calls = 0;
    double spmv_seconds = 0.0;
    double spmv_flops_per_call = 0.0;

    const SolverResult& linear() const { return std::get<SolverResult>(result); }
    const EigenResult& eigen() const { return std::get<EigenResult>(result); }
};

namespace detail {

inline int resolve_workers(const MetaOptions& opts, const PolicyConfig& policy) {
    if (opts.workers > 0) return opts.workers;
    if (policy.cpu > 0) return policy.cpu;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

inline void append_trajectory(std::vector<index_t>& traj, index_t initial,
                              const std::vector<RestartEvent>& restarts) {
    traj.push_back(initial);
    for (const auto& e : restarts) traj.push_back(e.msize);
}

inline KrylovConfig make_inner_config(const WorkspacePlan& plan, const PolicyConfig& policy,
                                      double inner_tol, double time_left,
                                      const MetaOptions& opts, OrthoVariant ortho) {
    KrylovConfig cfg;
    cfg.restart_m = plan.restart_m_initial;
    cfg.m_max = plan.m_max;
    cfg.tol = inner_tol;
    cfg.max_iters = opts.max_iters;
    cfg.max_time = time_left;
    cfg.ortho = ortho;
    cfg.adapt_restart = policy.policy != PolicyKind::stable;
    cfg.restart_increment = 5;  // per-restart adaptation step of the meta protocol
    cfg.dafrt_window = 5;
    cfg.dafrt_theta = 10.0;
    cfg.seed = opts.seed;
    return cfg;
}

}  // namespace detail

/// Policy-driven linear solve: tunes the SpMV kernel (skipped under
/// STABLE), budgets the restart frequency, picks the re-orthogonalizer
/// from the accuracy requirement, runs GMRES(m) or BiCGStab with restart
/// adaptation, and under ACCURACY repeats with DGKS and a tightened inner
/// tolerance until the recomputed true residual meets the requirement or
/// the time budget runs out.
inline MetaOutcome linear_solve_meta(const CsrMatrix& a, std::span<const double> b,
                                     const PolicyConfig& policy, MetaOptions opts = {}) {
    require(a.n > 0, "linear solve: empty matrix");
    require(norm2(b) > 0.0, "linear solve: zero right-hand side");
    const double t_start = steady_seconds();

    MetaOutcome out;
    out.workers = detail::resolve_workers(opts, policy);
    out.solver_used =
        policy.solver == SolverKind::auto_default ? SolverKind::gmres : policy.solver;
    require(out.solver_used == SolverKind::gmres || out.solver_used == SolverKind::bicgstab,
            "linear solve: SOLVER must be GMRES or BICGSTAB");

    WorkerPool pool(out.workers);
    UnsymChoice choice;
    if (policy.policy == PolicyKind::stable || opts.force_unsym) {
        // Fixed arguments, no measurements.
        choice.kernel = opts.force_unsym.value_or(UnsymKernel::u1_row);
        choice.workers = out.workers;
        choice.row_part =
            build_row_partition(a.row_ptr, out.workers, PartitionScheme::row_based);
        choice.nnz_part =
            build_row_partition(a.row_ptr, out.workers, PartitionScheme::nnz_balanced);
        if (choice.kernel == UnsymKernel::u3_bss || choice.kernel == UnsymKernel::u4_ss) {
            choice.jl = opts.force_jl;
            choice.plan = build_bss_plan(a, choice.jl);
        }
        out.tuning.forced = true;
    } else {
        auto [c, report] = select_spmv_unsym(a, pool, opts.tuning);
        choice = std::move(c);
        out.tuning = std::move(report);
    }
    UnsymEngine engine(a, std::move(choice));
    const LinOp op = engine.op();

    const WorkspacePlan plan =
        plan_workspace(policy, a.n, a.storage_bytes(), out.solver_used);

    Precond precond;
    std::shared_ptr<IluFactors> factors;
    if (policy.preconditioner == PrecondKind::ilu0) {
        factors = std::make_shared<IluFactors>(ilu0_factorize(a));
        precond.apply = [factors](std::span<const double> r, std::span<double> z) {
            ilu0_apply(*factors, r, z);
        };
    }

    OrthoVariant ortho = select_reorthogonalizer(policy.residual, false);
    double inner_tol = policy.residual;
    const int passes =
        policy.policy == PolicyKind::accuracy ? std::max(1, opts.max_accuracy_passes) : 1;

    for (int pass = 1; pass <= passes; ++pass) {
        const double time_left = policy.maxtime - (steady_seconds() - t_start);
        if (pass > 1 && time_left <= 0.0) break;
        const KrylovConfig cfg = detail::make_inner_config(
            plan, policy, inner_tol, std::max(time_left, 1e-3), opts, ortho);

        SolverResult r = out.solver_used == SolverKind::gmres ? gmres_m(op, b, cfg, precond)
                                                              : bicgstab(op, b, cfg, precond);
        out.outer_passes = pass;
        out.ortho_used = ortho;
        detail::append_trajectory(out.msize_trajectory, cfg.restart_m, r.restarts);
        out.workspace_bytes = std::max(out.workspace_bytes, r.workspace_bytes);
        // The policy check recomputes the residual through the sequential
        // reference kernel, independent of the tuned path.
        out.achieved_residual = true_residual_linear(a, r.x, b);
        out.policy_satisfied = out.achieved_residual <= policy.residual;
        out.result = std::move(r);

        if (out.policy_satisfied || policy.policy != PolicyKind::accuracy) break;
        // Fault repair: doubled classical re-orthogonalization and a
        // narrowed convergence threshold for the retry.
        ortho = select_reorthogonalizer(policy.residual, true);
        inner_tol *= 0.1;
    }

    out.spmv_calls = engine.calls();
    out.spmv_seconds = engine.kernel_seconds();
    out.spmv_flops_per_call = engine.flops_per_call();
    out.elapsed_seconds = steady_seconds() - t_start;
    return out;
}

/// Policy-driven eigensolve: symmetric input dispatches to restarted
/// Lanczos on the symmetric kernels, general input to restarted Arnoldi.
/// The accuracy outer loop mirrors the linear one with the max recomputed
/// pair residual as the check.
inline MetaOutcome eigensolve_meta(const std::variant<CsrMatrix, SymCsrMatrix>& matrix,
                                   index_t k, const PolicyConfig& policy,
                                   MetaOptions opts = {}) {
    require(k >= 1, "eigensolve: k must be >= 1");
    const double t_start = steady_seconds();
    const bool symmetric_input = std::holds_alternative<SymCsrMatrix>(matrix);

    MetaOutcome out;
    out.workers = detail::resolve_workers(opts, policy);
    if (policy.solver == SolverKind::auto_default)
        out.solver_used = symmetric_input ? SolverKind::lanczos : SolverKind::arnoldi;
    else
        out.solver_used = policy.solver;
    require(out.solver_used == SolverKind::lanczos || out.solver_used == SolverKind::arnoldi,
            "eigensolve: SOLVER must be LANCZOS or ARNOLDI");
    require(out.solver_used != SolverKind::lanczos || symmetric_input,
            "eigensolve: LANCZOS needs symmetric input");

    WorkerPool pool(out.workers);
    std::optional<SymEngine> sym_engine;
    std::optional<UnsymEngine> unsym_engine;
    // Arnoldi on a symmetric file works on the expanded matrix.
    std::shared_ptr<CsrMatrix> expanded;

    std::size_t matrix_bytes = 0;
    if (out.solver_used == SolverKind::lanczos) {
        const auto& a = std::get<SymCsrMatrix>(matrix);
        require(a.n >= k, "eigensolve: k exceeds the matrix dimension");
        matrix_bytes = a.storage_bytes();
        SymChoice choice;
        if (policy.policy == PolicyKind::stable || opts.force_sym) {
            choice.kernel = opts.force_sym.value_or(SymKernel::s1_row);
            choice.workers = out.workers;
            choice.row_part =
                build_row_partition(a.row_ptr, out.workers, PartitionScheme::row_based);
            choice.nnz_part =
                build_row_partition(a.row_ptr, out.workers, PartitionScheme::nnz_balanced);
            choice.regions = build_reduction_regions(a, choice.nnz_part);
            out.tuning.forced = true;
        } else {
            auto [c, report] = select_spmv_sym(a, pool, opts.tuning);
            choice = std::move(c);
            out.tuning = std::move(report);
        }
        sym_engine.emplace(a, std::move(choice));
    } else {
        const CsrMatrix* ap;
        if (symmetric_input) {
            expanded = std::make_shared<CsrMatrix>(
                expand_symmetric(std::get<SymCsrMatrix>(matrix)));
            ap = expanded.get();
        } else {
            ap = &std::get<CsrMatrix>(matrix);
        }
        require(ap->n >= k, "eigensolve: k exceeds the matrix dimension");
        matrix_bytes = ap->storage_bytes();
        UnsymChoice choice;
        if (policy.policy == PolicyKind::stable || opts.force_unsym) {
            choice.kernel = opts.force_unsym.value_or(UnsymKernel::u1_row);
            choice.workers = out.workers;
            choice.row_part =
                build_row_partition(ap->row_ptr, out.workers, PartitionScheme::row_based);
            choice.nnz_part =
                build_row_partition(ap->row_ptr, out.workers, PartitionScheme::nnz_balanced);
            if (choice.kernel == UnsymKernel::u3_bss || choice.kernel == UnsymKernel::u4_ss) {
                choice.jl = opts.force_jl;
                choice.plan = build_bss_plan(*ap, choice.jl);
            }
            out.tuning.forced = true;
        } else {
            auto [c, report] = select_spmv_unsym(*ap, pool, opts.tuning);
            choice = std::move(c);
            out.tuning = std::move(report);
        }
        unsym_engine.emplace(*ap, std::move(choice));
    }
    const LinOp op = sym_engine ? sym_engine->op() : unsym_engine->op();
    const index_t n = op.n;

    const WorkspacePlan plan = plan_workspace(policy, n, matrix_bytes, out.solver_used, k);

    OrthoVariant ortho = select_reorthogonalizer(policy.residual, false);
    double inner_tol = policy.residual;
    const int passes =
        policy.policy == PolicyKind::accuracy ? std::max(1, opts.max_accuracy_passes) : 1;

    for (int pass = 1; pass <= passes; ++pass) {
        const double time_left = policy.maxtime - (steady_seconds() - t_start);
        if (pass > 1 && time_left <= 0.0) break;
        const KrylovConfig cfg = detail::make_inner_config(
            plan, policy, inner_tol, std::max(time_left, 1e-3), opts, ortho);

        EigenResult r = out.solver_used == SolverKind::lanczos ? lanczos_restarted(op, k, cfg)
                                                               : arnoldi_restarted(op, k, cfg);
        out.outer_passes = pass;
        out.ortho_used = ortho;
        detail::append_trajectory(out.msize_trajectory, cfg.restart_m, r.restarts);
        out.workspace_bytes = std::max(out.workspace_bytes, r.workspace_bytes);
        out.achieved_residual = r.max_residual;
        out.policy_satisfied = r.converged && r.max_residual <= policy.residual;
        out.result = std::move(r);

        if (out.policy_satisfied || policy.policy != PolicyKind::accuracy) break;
        ortho = select_reorthogonalizer(policy.residual, true);
        inner_tol *= 0.1;
    }

    out.spmv_calls = sym_engine ? sym_engine->calls() : unsym_engine->calls();
    out.spmv_seconds = sym_engine ? sym_engine->kernel_seconds() : unsym_engine->kernel_seconds();
    out.spmv_flops_per_call =
        sym_engine ? sym_engine->flops_per_call() : unsym_engine->flops_per_call();
    out.elapsed_seconds = steady_seconds() - t_start;
    return out;
}

}  // namespace ktune
