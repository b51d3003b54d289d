#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "ktune/csr.hpp"

namespace ktune {

enum class PartitionScheme { row_based, nnz_balanced };

/// Contiguous row ranges, one per worker. boundaries has num_workers+1
/// entries with boundaries[0]=0 and boundaries[P]=n.
struct RowPartition {
    int num_workers = 1;
    std::vector<index_t> boundaries;
    PartitionScheme scheme = PartitionScheme::row_based;

    index_t lo(int p) const { return boundaries[p]; }
    index_t hi(int p) const { return boundaries[p + 1]; }
    index_t rows() const { return boundaries.back(); }
};

/// ROW_BASED splits rows into near-equal contiguous counts. NNZ_BALANCED
/// places boundary p at the smallest row r whose nonzero prefix reaches
/// p*nnz/P, balancing per-worker nonzeros to within one row.
inline RowPartition build_row_partition(std::span<const index_t> row_ptr, int num_workers,
                                        PartitionScheme scheme) {
    require(num_workers >= 1, "row partition: num_workers must be >= 1");
    const index_t n = static_cast<index_t>(row_ptr.size()) - 1;
    RowPartition part;
    part.num_workers = num_workers;
    part.scheme = scheme;
    part.boundaries.resize(num_workers + 1);
    part.boundaries[0] = 0;
    part.boundaries[num_workers] = n;
    if (scheme == PartitionScheme::row_based) {
        for (int p = 1; p < num_workers; ++p)
            part.boundaries[p] = n * p / num_workers;
    } else {
        const index_t nnz = row_ptr.back();
        for (int p = 1; p < num_workers; ++p) {
            // Smallest r with row_ptr[r] * P >= p * nnz, in exact integer
            // arithmetic.
            const index_t target = p * nnz;
            auto it = std::lower_bound(row_ptr.begin(), row_ptr.end() - 1, target,
                                       [&](index_t prefix, index_t t) {
                                           return prefix * num_workers < t;
                                       });
            part.boundaries[p] = static_cast<index_t>(it - row_ptr.begin());
        }
    }
    return part;
}

/// Per-worker bounds on the transpose-scatter targets of a symmetric SpMV:
/// the minimal [lo, hi) covering every strictly-upper column index in the
/// worker's row range. Workers with no off-diagonal entries get lo == hi.
struct ReductionRegions {
    int num_workers = 1;
    std::vector<index_t> lo, hi;

    /// Total cross-worker reduction work, the quantity the zero-omission
    /// kernel minimizes.
    index_t total_width() const {
        index_t w = 0;
        for (int p = 0; p < num_workers; ++p) w += hi[p] - lo[p];
        return w;
    }
};

inline ReductionRegions build_reduction_regions(const SymCsrMatrix& a,
                                                const RowPartition& part) {
    require(part.rows() == a.n, "reduction regions: partition/matrix dimension mismatch");
    ReductionRegions r;
    r.num_workers = part.num_workers;
    r.lo.assign(part.num_workers, 0);
    r.hi.assign(part.num_workers, 0);
    for (int p = 0; p < part.num_workers; ++p) {
        index_t lo = a.n, hi = 0;
        for (index_t i = part.lo(p); i < part.hi(p); ++i) {
            for (index_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
                const index_t j = a.col_idx[k];
                if (j == i) continue;  // diagonal does not scatter
                lo = std::min(lo, j);
                hi = std::max(hi, j + 1);
            }
        }
        if (hi > lo) {
            r.lo[p] = lo;
            r.hi[p] = hi;
        }
    }
    return r;
}

}  // namespace ktune
