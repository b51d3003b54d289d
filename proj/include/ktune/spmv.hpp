#pragma once

#include <omp.h>

#include <span>
#include <string>
#include <vector>

#include "ktune/bss.hpp"
#include "ktune/csr.hpp"
#include "ktune/partition.hpp"

namespace ktune {

enum class UnsymKernel { u1_row, u2_nnz, u3_bss, u4_ss };
enum class SymKernel { s1_row, s2_nnz, s3_nnz_zero_omit };

inline const char* kernel_name(UnsymKernel k) {
    switch (k) {
        case UnsymKernel::u1_row: return "u1";
        case UnsymKernel::u2_nnz: return "u2";
        case UnsymKernel::u3_bss: return "u3";
        case UnsymKernel::u4_ss: return "u4";
    }
    return "?";
}

inline const char* kernel_name(SymKernel k) {
    switch (k) {
        case SymKernel::s1_row: return "s1";
        case SymKernel::s2_nnz: return "s2";
        case SymKernel::s3_nnz_zero_omit: return "s3";
    }
    return "?";
}

/// Thread team plus the per-worker scratch the symmetric kernels scatter
/// into and a shared slice-sum buffer for the scan kernels. A kernel call
/// needs exclusive use of its pool; the matrix and plan inputs are shared
/// read-only.
class WorkerPool {
public:
    explicit WorkerPool(int size) : size_(size) {
        require(size >= 1, "worker pool: size must be >= 1");
        scratch_.resize(static_cast<std::size_t>(size));
    }

    int size() const { return size_; }

    /// Worker-private reduction vector, resized (not zeroed) to n.
    std::vector<double>& scratch(int worker, index_t n) {
        auto& s = scratch_[static_cast<std::size_t>(worker)];
        if (static_cast<index_t>(s.size()) < n) s.resize(static_cast<std::size_t>(n));
        return s;
    }

    std::vector<double>& slice_sums(index_t count) {
        if (static_cast<index_t>(slice_sums_.size()) < count)
            slice_sums_.resize(static_cast<std::size_t>(count));
        return slice_sums_;
    }

private:
    int size_;
    std::vector<std::vector<double>> scratch_;
    std::vector<double> slice_sums_;
};

namespace detail {

/// Row-block kernel shared by U1/U2: each worker owns a contiguous row
/// range and accumulates its rows left to right, so the result is bitwise
/// equal to the sequential reference for any worker count.
inline void spmv_row_blocks(const CsrMatrix& a, const RowPartition& part,
                            std::span<const double> x, std::span<double> y, WorkerPool& pool) {
    const int workers = part.num_workers;
#pragma omp parallel for schedule(static) num_threads(pool.size())
    for (int p = 0; p < workers; ++p) {
        for (index_t i = part.lo(p); i < part.hi(p); ++i) {
            double s = 0.0;
            for (index_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k)
                s += a.values[k] * x[a.col_idx[k]];
            y[i] = s;
        }
    }
}

/// Combine phase shared by U3/U4: row i is the ordered sum of its slice
/// sums. Order is fixed by slice position, so the output does not depend
/// on the thread schedule.
inline void combine_slice_sums(const BssPlan& plan, std::span<const double> sums,
                               std::span<double> y, WorkerPool& pool) {
    const index_t n = plan.n;
#pragma omp parallel for schedule(static) num_threads(pool.size())
    for (index_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (index_t t = plan.row_slice_ptr[i]; t < plan.row_slice_ptr[i + 1]; ++t)
            s += sums[t];
        y[i] = s;
    }
}

}  // namespace detail

/// Unsymmetric SpMV, y = A*x.
///
/// U1/U2 take a RowPartition (row-based and nnz-balanced respectively).
/// U3/U4 take a BssPlan; U3 runs the branchless slice loop, U4 the
/// original per-element segment-flag scan. Both scan kernels accumulate
/// in the same order and agree bitwise on the same plan.
inline void spmv_unsym(UnsymKernel kernel, const CsrMatrix& a, const RowPartition* part,
                       const BssPlan* plan, std::span<const double> x, std::span<double> y,
                       WorkerPool& pool) {
    require(static_cast<index_t>(x.size()) == a.n && static_cast<index_t>(y.size()) == a.n,
            "spmv: dimension mismatch");
    switch (kernel) {
        case UnsymKernel::u1_row:
        case UnsymKernel::u2_nnz: {
            require(part != nullptr, "spmv: U1/U2 need a row partition");
            require(part->rows() == a.n, "spmv: partition built for a different matrix");
            const auto want = kernel == UnsymKernel::u1_row ? PartitionScheme::row_based
                                                            : PartitionScheme::nnz_balanced;
            require(part->scheme == want, "spmv: partition scheme does not match kernel");
            detail::spmv_row_blocks(a, *part, x, y, pool);
            return;
        }
        case UnsymKernel::u3_bss:
        case UnsymKernel::u4_ss: {
            require(plan != nullptr, "spmv: U3/U4 need a bss plan");
            require(plan->n == a.n && plan->nnz == a.nnz(),
                    "spmv: plan built for a different matrix");
            auto& sums = pool.slice_sums(plan->total_slices());
            const index_t jl = plan->jl;
            if (kernel == UnsymKernel::u3_bss) {
#pragma omp parallel for schedule(static) num_threads(pool.size())
                for (index_t p = 0; p < jl; ++p) {
                    for (index_t t = plan->lane_slice_ptr[p]; t < plan->lane_slice_ptr[p + 1];
                         ++t) {
                        const index_t lo = plan->slice_start[t];
                        const index_t hi = lo + plan->slice_len[t];
                        double s = 0.0;
                        for (index_t k = lo; k < hi; ++k)
                            s += a.values[k] * x[a.col_idx[k]];
                        sums[t] = s;
                    }
                }
            } else {
#pragma omp parallel for schedule(static) num_threads(pool.size())
                for (index_t p = 0; p < jl; ++p) {
                    index_t t = plan->lane_slice_ptr[p];
                    const index_t lo = plan->slice_start[t];
                    const index_t hi =
                        plan->slice_start[plan->lane_slice_ptr[p + 1] - 1] +
                        plan->slice_len[plan->lane_slice_ptr[p + 1] - 1];
                    double s = 0.0;
                    for (index_t k = lo; k < hi; ++k) {
                        if (k != lo && plan->row_start_flag[k]) {  // segment boundary
                            sums[t++] = s;
                            s = 0.0;
                        }
                        s += a.values[k] * x[a.col_idx[k]];
                    }
                    sums[t] = s;
                }
            }
            detail::combine_slice_sums(*plan, sums, y, pool);
            return;
        }
    }
}

/// Symmetric SpMV on diagonal+upper storage.
///
/// Each worker writes row-direction products for its row range into y and
/// scatters transpose products into its private scratch vector. The
/// cross-worker reduction of the scratch vectors then runs over the full
/// index range for S1/S2 and only over the precomputed nonzero regions for
/// S3. Per-element reduction order is fixed (ascending worker), so results
/// are reproducible at a given worker count.
inline void spmv_sym(SymKernel kernel, const SymCsrMatrix& a, const RowPartition& part,
                     const ReductionRegions* regions, std::span<const double> x,
                     std::span<double> y, WorkerPool& pool) {
    require(static_cast<index_t>(x.size()) == a.n && static_cast<index_t>(y.size()) == a.n,
            "spmv: dimension mismatch");
    require(part.rows() == a.n, "spmv: partition built for a different matrix");
    const auto want = kernel == SymKernel::s1_row ? PartitionScheme::row_based
                                                  : PartitionScheme::nnz_balanced;
    require(part.scheme == want, "spmv: partition scheme does not match kernel");
    const bool omit = kernel == SymKernel::s3_nnz_zero_omit;
    require(!omit || regions != nullptr, "spmv: S3 needs reduction regions");
    if (omit)
        require(regions->num_workers == part.num_workers,
                "spmv: regions built for a different partition");

    const int workers = part.num_workers;
    std::vector<std::vector<double>*> scratch(workers);
    for (int p = 0; p < workers; ++p) scratch[p] = &pool.scratch(p, a.n);

#pragma omp parallel for schedule(static) num_threads(pool.size())
    for (int p = 0; p < workers; ++p) {
        double* sp = scratch[p]->data();
        if (omit) {
            for (index_t j = regions->lo[p]; j < regions->hi[p]; ++j) sp[j] = 0.0;
        } else {
            for (index_t j = 0; j < a.n; ++j) sp[j] = 0.0;
        }
        for (index_t i = part.lo(p); i < part.hi(p); ++i) {
            const double xi = x[i];
            double s = 0.0;
            for (index_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
                const index_t j = a.col_idx[k];
                const double v = a.values[k];
                s += v * x[j];
                if (j != i) sp[j] += v * xi;
            }
            y[i] = s;
        }
    }

    // Reduction. Chunked over the index range so it parallelizes, with the
    // per-element accumulation order fixed by ascending worker index.
    const int red_chunks = pool.size();
#pragma omp parallel for schedule(static) num_threads(pool.size())
    for (int c = 0; c < red_chunks; ++c) {
        const index_t c_lo = a.n * c / red_chunks;
        const index_t c_hi = a.n * (c + 1) / red_chunks;
        for (int p = 0; p < workers; ++p) {
            const double* sp = scratch[p]->data();
            const index_t lo = omit ? std::max(regions->lo[p], c_lo) : c_lo;
            const index_t hi = omit ? std::min(regions->hi[p], c_hi) : c_hi;
            for (index_t j = lo; j < hi; ++j) y[j] += sp[j];
        }
    }
}

// Allocating convenience wrappers.

inline std::vector<double> spmv_unsym(UnsymKernel kernel, const CsrMatrix& a,
                                      const RowPartition* part, const BssPlan* plan,
                                      std::span<const double> x, WorkerPool& pool) {
    std::vector<double> y(a.n);
    spmv_unsym(kernel, a, part, plan, x, y, pool);
    return y;
}

inline std::vector<double> spmv_sym(SymKernel kernel, const SymCsrMatrix& a,
                                    const RowPartition& part, const ReductionRegions* regions,
                                    std::span<const double> x, WorkerPool& pool) {
    std::vector<double> y(a.n);
    spmv_sym(kernel, a, part, regions, x, y, pool);
    return y;
}

}  // namespace ktune
