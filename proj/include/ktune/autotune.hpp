#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "ktune/spmv.hpp"

namespace ktune {

// ---------------------------------------------------------------------------
// Restart-frequency adaptation: monitor the max/min ratio of the recent
// residual samples; a small ratio means the residual is treading water and
// the restart frequency should grow.
// ---------------------------------------------------------------------------

/// max/min over the last t samples of the window. All samples must be
/// positive; the result is always >= 1.
inline double mm_ratio(std::span<const double> window, std::size_t t) {
    require(t >= 1, "mm ratio: window length must be >= 1");
    require(window.size() >= t, "mm ratio: not enough samples");
    double mx = 0.0, mn = std::numeric_limits<double>::infinity();
    for (double r : window.last(t)) {
        require(r > 0.0 && std::isfinite(r), "mm ratio: samples must be positive");
        mx = std::max(mx, r);
        mn = std::min(mn, r);
    }
    return mx / mn;
}

/// Rolling window of residual samples with the stagnation judgment.
class MMRatioMonitor {
public:
    explicit MMRatioMonitor(std::size_t t = 5, double theta = 10.0) : t_(t), theta_(theta) {
        require(t >= 1, "mm monitor: window length must be >= 1");
        require(theta > 0.0, "mm monitor: theta must be positive");
        window_.reserve(t);
    }

    void push(double r) {
        require(r > 0.0 && std::isfinite(r), "mm monitor: samples must be positive");
        if (window_.size() == t_) window_.erase(window_.begin());
        window_.push_back(r);
    }

    bool full() const { return window_.size() == t_; }

    double ratio() const { return mm_ratio(window_, t_); }

    /// Returns 1 when the window shows stagnation (ratio strictly below
    /// theta), 0 otherwise. The window is cleared either way, so the next
    /// judgment sees fresh samples only.
    int judge() {
        require(full(), "mm monitor: judgment requires a full window");
        const int irt = ratio() < theta_ ? 1 : 0;
        window_.clear();
        return irt;
    }

    std::size_t window_length() const { return t_; }
    double theta() const { return theta_; }
    std::span<const double> window() const { return window_; }

private:
    std::size_t t_;
    double theta_;
    std::vector<double> window_;
};

/// Holds the current restart frequency and grows it (never shrinks it) on a
/// stagnation verdict, saturating at the workspace cap.
class RestartController {
public:
    RestartController(index_t msize_initial, index_t msize_max, index_t increment = 1,
                      std::size_t window = 5, double theta = 10.0)
        : msize_(msize_initial),
          msize_max_(msize_max),
          increment_(increment),
          monitor_(window, theta) {
        require(msize_initial >= 1 && msize_initial <= msize_max,
                "restart controller: need 1 <= msize_initial <= msize_max");
        require(increment >= 1, "restart controller: increment must be >= 1");
    }

    index_t msize() const { return msize_; }
    index_t msize_max() const { return msize_max_; }

    index_t update(int irt) {
        if (irt == 1) msize_ = std::min(msize_ + increment_, msize_max_);
        return msize_;
    }

    /// Feeds one residual sample (typically once per restart); when the
    /// window fills, judges and applies the update. Returns the current
    /// restart frequency.
    index_t sample(double residual) {
        monitor_.push(residual);
        if (monitor_.full()) update(monitor_.judge());
        return msize_;
    }

    MMRatioMonitor& monitor() { return monitor_; }
    const MMRatioMonitor& monitor() const { return monitor_; }

private:
    index_t msize_;
    index_t msize_max_;
    index_t increment_;
    MMRatioMonitor monitor_;
};

// ---------------------------------------------------------------------------
// Empirical kernel selection, performed once before the iteration loop.
// ---------------------------------------------------------------------------

using TimerFn = std::function<double()>;

inline double steady_seconds() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

struct TuningCandidate {
    std::string name;   // kernel tag: "u1".."u4", "s1".."s3"
    int ordinal = 0;    // variant ordinal, first tie-break key
    index_t jl = 0;     // segment-lane count, 0 when not applicable
    int workers = 1;
    std::vector<double> trial_seconds;  // timed trials, after one warm-up
    double best_seconds = std::numeric_limits<double>::infinity();
    bool correct = false;
    int executions = 0;  // warm-up + timed runs
};

struct TuningReport {
    std::vector<TuningCandidate> candidates;
    int selected = -1;  // index into candidates, -1 before selection
    int trials_per_candidate = 3;
    bool forced = false;  // kernel fixed by the caller, no measurements

    int max_executions() const {
        int m = 0;
        for (const auto& c : candidates) m = std::max(m, c.executions);
        return m;
    }

    const TuningCandidate& selected_candidate() const {
        require(selected >= 0 && selected < static_cast<int>(candidates.size()),
                "tuning report: nothing selected");
        return candidates[static_cast<std::size_t>(selected)];
    }
};

struct SelectOptions {
    std::vector<index_t> jl_candidates = {8, 16, 32, 64, 128, 256};
    int timed_trials = 3;        // plus one warm-up; at most 4 executions per candidate
    bool sweep_workers = false;  // optional thread-count sweep, off by default
    TimerFn now;                 // injectable timer, defaults to the steady clock
};

/// Selected unsymmetric kernel together with the plans it needs.
struct UnsymChoice {
    UnsymKernel kernel = UnsymKernel::u1_row;
    index_t jl = 0;
    int workers = 1;
    RowPartition row_part;
    RowPartition nnz_part;
    std::optional<BssPlan> plan;
};

struct SymChoice {
    SymKernel kernel = SymKernel::s1_row;
    int workers = 1;
    RowPartition row_part;
    RowPartition nnz_part;
    ReductionRegions regions;
};

namespace detail {

/// Deterministic well-scaled probe vector for the setup correctness check.
inline std::vector<double> probe_vector(index_t n) {
    std::vector<double> x(static_cast<std::size_t>(n));
    std::uint64_t state = 0x9e3779b97f4a7c15ull;
    for (auto& v : x) {
        state = state * 6364136223846793005ull + 1442695040888963407ull;
        v = 0.5 + static_cast<double>(state >> 11) / 9007199254740992.0;  // [0.5, 1.5)
    }
    return x;
}

inline bool outputs_match(std::span<const double> y, std::span<const double> ref) {
    double scale = 1.0;
    for (double r : ref) scale = std::max(scale, std::abs(r));
    for (std::size_t i = 0; i < y.size(); ++i)
        if (std::abs(y[i] - ref[i]) > 1e-10 * scale) return false;
    return true;
}

inline std::vector<int> worker_sweep(int pool_size, bool sweep) {
    if (!sweep) return {pool_size};
    std::vector<int> out;
    for (int w = 1; w < pool_size; w *= 2) out.push_back(w);
    out.push_back(pool_size);
    return out;
}

/// Runs the warm-up + timed trials of one candidate and appends it to the
/// report. run(y) must compute the candidate's SpMV into y.
template <typename RunFn>
void time_candidate(TuningReport& report, const char* name, int ordinal, index_t jl, int workers,
                    std::span<const double> ref, index_t n, const SelectOptions& opts,
                    const TimerFn& now, RunFn&& run) {
    TuningCandidate cand;
    cand.name = name;
    cand.ordinal = ordinal;
    cand.jl = jl;
    cand.workers = workers;
    std::vector<double> y(static_cast<std::size_t>(n));
    run(y);  // warm-up doubles as the correctness cross-check
    cand.executions = 1;
    cand.correct = outputs_match(y, ref);
    if (cand.correct) {
        for (int t = 0; t < opts.timed_trials; ++t) {
            const double tic = now();
            run(y);
            const double toc = now();
            ++cand.executions;
            cand.trial_seconds.push_back(toc - tic);
            cand.best_seconds = std::min(cand.best_seconds, toc - tic);
        }
    }
    report.candidates.push_back(std::move(cand));
}

inline void pick_winner(TuningReport& report) {
    int best = -1;
    for (int i = 0; i < static_cast<int>(report.candidates.size()); ++i) {
        const auto& c = report.candidates[static_cast<std::size_t>(i)];
        if (!c.correct) continue;
        if (best < 0) {
            best = i;
            continue;
        }
        const auto& b = report.candidates[static_cast<std::size_t>(best)];
        const auto key = [](const TuningCandidate& x) {
            return std::make_tuple(x.best_seconds, x.ordinal, x.jl, x.workers);
        };
        if (key(c) < key(b)) best = i;
    }
    require(best >= 0, "kernel selection: every candidate failed the oracle check");
    report.selected = best;
}

}  // namespace detail

/// Times U1, U2 and U3 (at each segment-lane count) on the input matrix and
/// picks the fastest candidate that matches the sequential reference. Each
/// candidate runs one warm-up plus at most timed_trials trials, so the
/// setup cost is bounded by 4 SpMV executions per candidate.
inline std::pair<UnsymChoice, TuningReport> select_spmv_unsym(const CsrMatrix& a,
                                                              WorkerPool& pool,
                                                              SelectOptions opts = {}) {
    require(a.n > 0 && a.nnz() > 0, "kernel selection: empty matrix");
    const TimerFn now = opts.now ? opts.now : TimerFn(steady_seconds);
    const auto x = detail::probe_vector(a.n);
    const auto ref = spmv_ref(a, x);

    TuningReport report;
    report.trials_per_candidate = opts.timed_trials;

    struct Built {
        int workers;
        RowPartition row_part, nnz_part;
        std::vector<std::pair<index_t, BssPlan>> plans;
    };
    std::vector<Built> built;
    for (int w : detail::worker_sweep(pool.size(), opts.sweep_workers)) {
        Built b;
        b.workers = w;
        b.row_part = build_row_partition(a.row_ptr, w, PartitionScheme::row_based);
        b.nnz_part = build_row_partition(a.row_ptr, w, PartitionScheme::nnz_balanced);
        built.push_back(std::move(b));
    }
    // BSS plans do not depend on the worker count; build each lane count once.
    std::vector<std::pair<index_t, BssPlan>> bss_plans;
    for (index_t jl : opts.jl_candidates)
        if (a.nnz() >= 4 * jl) bss_plans.emplace_back(jl, build_bss_plan(a, jl));

    for (const auto& b : built) {
        WorkerPool run_pool(b.workers);
        detail::time_candidate(report, "u1", 0, 0, b.workers, ref, a.n, opts, now,
                               [&](std::span<double> y) {
                                   spmv_unsym(UnsymKernel::u1_row, a, &b.row_part, nullptr, x, y,
                                              run_pool);
                               });
        detail::time_candidate(report, "u2", 1, 0, b.workers, ref, a.n, opts, now,
                               [&](std::span<double> y) {
                                   spmv_unsym(UnsymKernel::u2_nnz, a, &b.nnz_part, nullptr, x, y,
                                              run_pool);
                               });
        for (const auto& [jl, plan] : bss_plans) {
            detail::time_candidate(report, "u3", 2, jl, b.workers, ref, a.n, opts, now,
                                   [&](std::span<double> y) {
                                       spmv_unsym(UnsymKernel::u3_bss, a, nullptr, &plan, x, y,
                                                  run_pool);
                                   });
        }
    }
    detail::pick_winner(report);

    const auto& winner = report.selected_candidate();
    UnsymChoice choice;
    choice.workers = winner.workers;
    choice.jl = winner.jl;
    choice.kernel = winner.ordinal == 0   ? UnsymKernel::u1_row
                    : winner.ordinal == 1 ? UnsymKernel::u2_nnz
                                          : UnsymKernel::u3_bss;
    choice.row_part = build_row_partition(a.row_ptr, winner.workers, PartitionScheme::row_based);
    choice.nnz_part =
        build_row_partition(a.row_ptr, winner.workers, PartitionScheme::nnz_balanced);
    if (choice.kernel == UnsymKernel::u3_bss) choice.plan = build_bss_plan(a, winner.jl);
    return {std::move(choice), std::move(report)};
}

/// Symmetric analogue over S1, S2, S3.
inline std::pair<SymChoice, TuningReport> select_spmv_sym(const SymCsrMatrix& a, WorkerPool& pool,
                                                          SelectOptions opts = {}) {
    require(a.n > 0 && a.nnz() > 0, "kernel selection: empty matrix");
    const TimerFn now = opts.now ? opts.now : TimerFn(steady_seconds);
    const auto x = detail::probe_vector(a.n);
    const auto ref = spmv_ref(expand_symmetric(a), x);

    TuningReport report;
    report.trials_per_candidate = opts.timed_trials;

    for (int w : detail::worker_sweep(pool.size(), opts.sweep_workers)) {
        WorkerPool run_pool(w);
        auto row_part = build_row_partition(a.row_ptr, w, PartitionScheme::row_based);
        auto nnz_part = build_row_partition(a.row_ptr, w, PartitionScheme::nnz_balanced);
        auto regions = build_reduction_regions(a, nnz_part);
        detail::time_candidate(report, "s1", 0, 0, w, ref, a.n, opts, now,
                               [&](std::span<double> y) {
                                   spmv_sym(SymKernel::s1_row, a, row_part, nullptr, x, y,
                                            run_pool);
                               });
        detail::time_candidate(report, "s2", 1, 0, w, ref, a.n, opts, now,
                               [&](std::span<double> y) {
                                   spmv_sym(SymKernel::s2_nnz, a, nnz_part, nullptr, x, y,
                                            run_pool);
                               });
        detail::time_candidate(report, "s3", 2, 0, w, ref, a.n, opts, now,
                               [&](std::span<double> y) {
                                   spmv_sym(SymKernel::s3_nnz_zero_omit, a, nnz_part, &regions, x,
                                            y, run_pool);
                               });
    }
    detail::pick_winner(report);

    const auto& winner = report.selected_candidate();
    SymChoice choice;
    choice.workers = winner.workers;
    choice.kernel = winner.ordinal == 0   ? SymKernel::s1_row
                    : winner.ordinal == 1 ? SymKernel::s2_nnz
                                          : SymKernel::s3_nnz_zero_omit;
    choice.row_part = build_row_partition(a.row_ptr, winner.workers, PartitionScheme::row_based);
    choice.nnz_part =
        build_row_partition(a.row_ptr, winner.workers, PartitionScheme::nnz_balanced);
    choice.regions = build_reduction_regions(a, choice.nnz_part);
    return {std::move(choice), std::move(report)};
}

}  // namespace ktune
