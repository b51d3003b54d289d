#pragma once

#include <cmath>
#include <cstdint>

#include "ktune/csr.hpp"

namespace ktune {

/// 1-D Laplacian tridiag(-1, 2, -1), stored as diagonal + superdiagonal.
inline SymCsrMatrix gen_laplacian1d(index_t n) {
    require(n >= 2, "laplacian1d: n must be >= 2");
    SymCsrMatrix a;
    a.n = n;
    a.row_ptr.assign(n + 1, 0);
    for (index_t i = 0; i < n; ++i) {
        a.col_idx.push_back(i);
        a.values.push_back(2.0);
        if (i + 1 < n) {
            a.col_idx.push_back(i + 1);
            a.values.push_back(-1.0);
        }
        a.row_ptr[i + 1] = static_cast<index_t>(a.col_idx.size());
    }
    return a;
}

/// 2-D Poisson 5-point stencil on an nx-by-ny grid, upper storage.
inline SymCsrMatrix gen_poisson2d(index_t nx, index_t ny) {
    require(nx >= 2 && ny >= 2, "poisson2d: grid must be at least 2x2");
    SymCsrMatrix a;
    a.n = nx * ny;
    a.row_ptr.assign(a.n + 1, 0);
    for (index_t gx = 0; gx < nx; ++gx) {
        for (index_t gy = 0; gy < ny; ++gy) {
            const index_t i = gx * ny + gy;
            a.col_idx.push_back(i);
            a.values.push_back(4.0);
            if (gy + 1 < ny) {
                a.col_idx.push_back(i + 1);
                a.values.push_back(-1.0);
            }
            if (gx + 1 < nx) {
                a.col_idx.push_back(i + ny);
                a.values.push_back(-1.0);
            }
            a.row_ptr[i + 1] = static_cast<index_t>(a.col_idx.size());
        }
    }
    return a;
}

/// Diagonal matrix with entries spread geometrically from 1 to cond.
inline CsrMatrix gen_diag_matrix(index_t n, double cond) {
    require(n >= 1, "diag: n must be >= 1");
    require(cond >= 1.0, "diag: condition number must be >= 1");
    CsrMatrix a;
    a.n = n;
    a.row_ptr.assign(n + 1, 0);
    for (index_t i = 0; i < n; ++i) {
        a.col_idx.push_back(i);
        a.values.push_back(n == 1 ? 1.0
                                  : std::pow(cond, static_cast<double>(i) /
                                                       static_cast<double>(n - 1)));
        a.row_ptr[i + 1] = i + 1;
    }
    return a;
}

/// Heavily row-imbalanced matrix: a dense first row next to
/// diagonal-only rows, so the fat row carries about half of all nonzeros.
/// Exercises the regime where row-based work splitting collapses.
inline CsrMatrix gen_skewed_rows(index_t n, std::uint64_t seed) {
    require(n >= 2, "skewed_rows: n must be >= 2");
    CsrMatrix a;
    a.n = n;
    a.row_ptr.assign(n + 1, 0);
    std::uint64_t state = seed ? seed : 1;
    const auto next = [&state]() {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        return 0.5 + static_cast<double>(state >> 11) / 18014398509481984.0;  // [0.5, 1)
    };
    for (index_t j = 0; j < n; ++j) {
        a.col_idx.push_back(j);
        a.values.push_back(j == 0 ? static_cast<double>(n) : next());
    }
    a.row_ptr[1] = n;
    for (index_t i = 1; i < n; ++i) {
        a.col_idx.push_back(i);
        a.values.push_back(2.0 + next());
        a.row_ptr[i + 1] = a.row_ptr[i] + 1;
    }
    return a;
}

}  // namespace ktune
