#pragma once

#include <lapacke.h>

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "ktune/common.hpp"

namespace ktune {

/// Eigendecomposition of a symmetric tridiagonal matrix (the projected
/// problem of the symmetric restarted eigensolver). Eigenvalues ascend;
/// eigenvectors are the columns of a column-major m x m block.
struct TridiagEig {
    std::vector<double> values;   // length m, ascending
    std::vector<double> vectors;  // m x m column-major
};

inline TridiagEig tridiag_eig(std::span<const double> diag, std::span<const double> offdiag) {
    const auto m = static_cast<lapack_int>(diag.size());
    require(offdiag.size() + 1 == diag.size() || (diag.size() == 1 && offdiag.empty()),
            "tridiag eig: off-diagonal length must be m-1");
    TridiagEig out;
    out.values.assign(diag.begin(), diag.end());
    std::vector<double> e(offdiag.begin(), offdiag.end());
    e.resize(diag.size());  // lapack wants length >= m-1 workspace
    out.vectors.assign(static_cast<std::size_t>(m) * m, 0.0);
    const lapack_int info = LAPACKE_dsteqr(LAPACK_COL_MAJOR, 'I', m, out.values.data(), e.data(),
                                           out.vectors.data(), m);
    require(info == 0, "tridiag eig: dsteqr failed, info=" + std::to_string(info));
    return out;
}

/// Eigendecomposition of a small dense real matrix (the projected
/// Hessenberg problem of the unsymmetric restarted eigensolver). Complex
/// conjugate pairs are adjacent; for a pair at positions (j, j+1) the
/// column j holds the real part of the eigenvector and column j+1 the
/// imaginary part.
struct DenseEig {
    std::vector<double> re, im;   // eigenvalues
    std::vector<double> vectors;  // m x m column-major, packed as above
};

inline DenseEig dense_eig(std::span<const double> a_colmajor, index_t m) {
    require(static_cast<index_t>(a_colmajor.size()) == m * m, "dense eig: bad matrix size");
    DenseEig out;
    out.re.resize(static_cast<std::size_t>(m));
    out.im.resize(static_cast<std::size_t>(m));
    out.vectors.resize(static_cast<std::size_t>(m) * m);
    std::vector<double> work(a_colmajor.begin(), a_colmajor.end());
    const auto lm = static_cast<lapack_int>(m);
    const lapack_int info =
        LAPACKE_dgeev(LAPACK_COL_MAJOR, 'N', 'V', lm, work.data(), lm, out.re.data(),
                      out.im.data(), nullptr, lm, out.vectors.data(), lm);
    require(info == 0, "dense eig: dgeev failed, info=" + std::to_string(info));
    return out;
}

}  // namespace ktune
