#pragma once

#include <algorithm>
#include <span>
#include <string>
#include <vector>

#include "ktune/csr.hpp"

namespace ktune {

/// Combined LU factors on the sparsity pattern of A (no fill). L has an
/// implicit unit diagonal; diag_ptr locates U's diagonal in each row.
struct IluFactors {
    index_t n = 0;
    std::vector<index_t> row_ptr, col_idx, diag_ptr;
    std::vector<double> values;
};

/// Standard ILU(0): for each row i and each k < i in its pattern,
/// a_ik <- a_ik / a_kk, then a_ij <- a_ij - a_ik * a_kj for the j > k
/// present in row i's pattern.
inline IluFactors ilu0_factorize(const CsrMatrix& a) {
    IluFactors f;
    f.n = a.n;
    f.row_ptr = a.row_ptr;
    f.col_idx = a.col_idx;
    f.values = a.values;
    f.diag_ptr.assign(static_cast<std::size_t>(a.n), -1);

    for (index_t i = 0; i < a.n; ++i) {
        for (index_t k = f.row_ptr[i]; k < f.row_ptr[i + 1]; ++k) {
            if (f.col_idx[k] == i) {
                f.diag_ptr[i] = k;
                break;
            }
        }
        require(f.diag_ptr[i] >= 0,
                "ilu0: structurally missing diagonal in row " + std::to_string(i));
    }

    for (index_t i = 0; i < a.n; ++i) {
        for (index_t kp = f.row_ptr[i]; kp < f.row_ptr[i + 1]; ++kp) {
            const index_t k = f.col_idx[kp];
            if (k >= i) break;  // columns are sorted; lower part exhausted
            const double pivot = f.values[f.diag_ptr[k]];
            require(pivot != 0.0, "ilu0: zero pivot at row " + std::to_string(k));
            const double lik = f.values[kp] / pivot;
            f.values[kp] = lik;
            // Subtract lik * row_k over the columns j > k that row i has.
            index_t pi = kp + 1;
            index_t pk = f.diag_ptr[k] + 1;
            while (pi < f.row_ptr[i + 1] && pk < f.row_ptr[k + 1]) {
                if (f.col_idx[pi] == f.col_idx[pk]) {
                    f.values[pi] -= lik * f.values[pk];
                    ++pi;
                    ++pk;
                } else if (f.col_idx[pi] < f.col_idx[pk]) {
                    ++pi;
                } else {
                    ++pk;
                }
            }
        }
        require(f.values[f.diag_ptr[i]] != 0.0,
                "ilu0: zero pivot at row " + std::to_string(i));
    }
    return f;
}

/// Solves L U z = r by forward then backward substitution on the stored
/// pattern.
inline void ilu0_apply(const IluFactors& f, std::span<const double> r, std::span<double> z) {
    require(static_cast<index_t>(r.size()) == f.n && static_cast<index_t>(z.size()) == f.n,
            "ilu0: dimension mismatch");
    for (index_t i = 0; i < f.n; ++i) {
        double s = r[i];
        for (index_t k = f.row_ptr[i]; f.col_idx[k] < i; ++k) s -= f.values[k] * z[f.col_idx[k]];
        z[i] = s;
    }
    for (index_t i = f.n - 1; i >= 0; --i) {
        double s = z[i];
        for (index_t k = f.diag_ptr[i] + 1; k < f.row_ptr[i + 1]; ++k)
            s -= f.values[k] * z[f.col_idx[k]];
        z[i] = s / f.values[f.diag_ptr[i]];
    }
}

inline std::vector<double> ilu0_apply(const IluFactors& f, std::span<const double> r) {
    std::vector<double> z(static_cast<std::size_t>(f.n));
    ilu0_apply(f, r, z);
    return z;
}

}  // namespace ktune
