#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "ktune/common.hpp"

namespace ktune {

/// Square sparse matrix in compressed-row storage. Column indices are
/// strictly increasing within each row; empty rows are allowed.
struct CsrMatrix {
    index_t n = 0;
    std::vector<index_t> row_ptr;  // length n+1, row_ptr[0]=0, nondecreasing
    std::vector<index_t> col_idx;  // length nnz
    std::vector<double> values;    // length nnz

    index_t nnz() const { return static_cast<index_t>(values.size()); }

    index_t row_nnz(index_t i) const { return row_ptr[i + 1] - row_ptr[i]; }

    index_t max_row_nnz() const {
        index_t m = 0;
        for (index_t i = 0; i < n; ++i) m = std::max(m, row_nnz(i));
        return m;
    }

    /// Bytes held by the index/value arrays (workspace budgeting input).
    std::size_t storage_bytes() const {
        return row_ptr.size() * sizeof(index_t) + col_idx.size() * sizeof(index_t) +
               values.size() * sizeof(double);
    }

    void validate() const { validate_impl(false); }

protected:
    void validate_impl(bool upper_only) const {
        require(n >= 0, "csr: negative dimension");
        require(static_cast<index_t>(row_ptr.size()) == n + 1, "csr: row_ptr length != n+1");
        require(col_idx.size() == values.size(), "csr: col_idx/values length mismatch");
        require(row_ptr.front() == 0, "csr: row_ptr[0] != 0");
        require(row_ptr.back() == nnz(), "csr: row_ptr[n] != nnz");
        for (index_t i = 0; i < n; ++i) {
            require(row_ptr[i] <= row_ptr[i + 1], "csr: row_ptr not nondecreasing");
            for (index_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
                require(col_idx[k] >= 0 && col_idx[k] < n, "csr: column index out of range");
                if (k > row_ptr[i])
                    require(col_idx[k - 1] < col_idx[k], "csr: columns not strictly increasing");
                if (upper_only)
                    require(col_idx[k] >= i, "sym csr: entry below the diagonal");
            }
        }
    }
};

/// Symmetric matrix stored as diagonal plus strictly upper triangle.
/// Represents A = U + U^T - diag(U) where U is the stored part.
struct SymCsrMatrix : CsrMatrix {
    void validate() const { validate_impl(true); }

    /// Flop count of one A*x with this storage: every off-diagonal entry
    /// contributes twice, each diagonal entry once.
    index_t spmv_flops() const { return 4 * nnz() - 2 * n; }
};

/// Sequential reference SpMV, the oracle every parallel kernel is checked
/// against. Accumulates each row strictly left to right.
inline void spmv_ref(const CsrMatrix& a, std::span<const double> x, std::span<double> y) {
    require(static_cast<index_t>(x.size()) == a.n && static_cast<index_t>(y.size()) == a.n,
            "spmv_ref: dimension mismatch");
    for (index_t i = 0; i < a.n; ++i) {
        double s = 0.0;
        for (index_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k)
            s += a.values[k] * x[a.col_idx[k]];
        y[i] = s;
    }
}

inline std::vector<double> spmv_ref(const CsrMatrix& a, std::span<const double> x) {
    std::vector<double> y(a.n);
    spmv_ref(a, x, y);
    return y;
}

/// Expands symmetric storage to a full CsrMatrix with sorted rows and
/// exact value copies. Used as the oracle path for the symmetric kernels.
inline CsrMatrix expand_symmetric(const SymCsrMatrix& s) {
    CsrMatrix a;
    a.n = s.n;
    std::vector<index_t> count(s.n, 0);
    for (index_t i = 0; i < s.n; ++i) {
        for (index_t k = s.row_ptr[i]; k < s.row_ptr[i + 1]; ++k) {
            ++count[i];
            if (s.col_idx[k] != i) ++count[s.col_idx[k]];
        }
    }
    a.row_ptr.assign(s.n + 1, 0);
    for (index_t i = 0; i < s.n; ++i) a.row_ptr[i + 1] = a.row_ptr[i] + count[i];
    a.col_idx.resize(a.row_ptr.back());
    a.values.resize(a.row_ptr.back());
    std::vector<index_t> next(a.row_ptr.begin(), a.row_ptr.end() - 1);
    // Mirrored (lower) entries first: within row j they arrive with
    // ascending source row i < j, so each row stays sorted once the
    // native upper entries (col >= row) are appended afterwards.
    for (index_t i = 0; i < s.n; ++i) {
        for (index_t k = s.row_ptr[i]; k < s.row_ptr[i + 1]; ++k) {
            index_t j = s.col_idx[k];
            if (j == i) continue;
            a.col_idx[next[j]] = i;
            a.values[next[j]] = s.values[k];
            ++next[j];
        }
    }
    for (index_t i = 0; i < s.n; ++i) {
        for (index_t k = s.row_ptr[i]; k < s.row_ptr[i + 1]; ++k) {
            a.col_idx[next[i]] = s.col_idx[k];
            a.values[next[i]] = s.values[k];
            ++next[i];
        }
    }
    return a;
}

}  // namespace ktune
