#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "ktune/csr.hpp"

namespace ktune {

/// Execution plan for the segmented-scan SpMV kernels.
///
/// The nonzero array is split into jl near-equal contiguous chunks (one per
/// lane); each chunk is cut at row boundaries into slices. A slice never
/// crosses a row, so its destination row (carry target) is known up front
/// and the scan kernel's inner loop runs without a row-boundary branch.
/// The flag array marks row starts, which is what the branchy original
/// scan kernel tests per element instead.
struct BssPlan {
    index_t jl = 0;       // lane count after clamping to nnz
    index_t n = 0;        // matrix dimension the plan was built for
    index_t nnz = 0;

    std::vector<index_t> slice_start;  // offset into values, ascending
    std::vector<index_t> slice_len;
    std::vector<index_t> slice_row;        // carry target per slice
    std::vector<index_t> lane_slice_ptr;   // jl+1: lane p owns slices [ptr[p], ptr[p+1])
    std::vector<index_t> row_slice_ptr;    // n+1: row i collects slices [ptr[i], ptr[i+1])
    std::vector<std::uint8_t> row_start_flag;  // nnz: 1 where an element begins a row

    index_t total_slices() const { return static_cast<index_t>(slice_start.size()); }
};

inline BssPlan build_bss_plan(const CsrMatrix& a, index_t jl) {
    require(jl >= 1, "bss plan: jl must be >= 1");
    require(a.nnz() > 0, "bss plan: empty matrix");
    BssPlan plan;
    plan.jl = std::min<index_t>(jl, a.nnz());
    plan.n = a.n;
    plan.nnz = a.nnz();

    plan.row_start_flag.assign(static_cast<std::size_t>(a.nnz()), 0);
    for (index_t i = 0; i < a.n; ++i)
        if (a.row_ptr[i] < a.row_ptr[i + 1]) plan.row_start_flag[a.row_ptr[i]] = 1;

    plan.lane_slice_ptr.assign(plan.jl + 1, 0);
    index_t row = 0;
    for (index_t p = 0; p < plan.jl; ++p) {
        const index_t chunk_lo = a.nnz() * p / plan.jl;
        const index_t chunk_hi = a.nnz() * (p + 1) / plan.jl;
        index_t pos = chunk_lo;
        while (pos < chunk_hi) {
            while (a.row_ptr[row + 1] <= pos) ++row;  // skip empty rows too
            const index_t cut = std::min(chunk_hi, a.row_ptr[row + 1]);
            plan.slice_start.push_back(pos);
            plan.slice_len.push_back(cut - pos);
            plan.slice_row.push_back(row);
            pos = cut;
        }
        plan.lane_slice_ptr[p + 1] = plan.total_slices();
    }

    // Slices are ordered by start offset, hence grouped by row; a counting
    // pass gives each row its slice range for the combine phase.
    plan.row_slice_ptr.assign(a.n + 1, 0);
    for (index_t r : plan.slice_row) ++plan.row_slice_ptr[r + 1];
    for (index_t i = 0; i < a.n; ++i) plan.row_slice_ptr[i + 1] += plan.row_slice_ptr[i];
    return plan;
}

}  // namespace ktune
