#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "ktune/common.hpp"

namespace ktune {

enum class OrthoKind { cgs, mgs, dgks, bcgs };

/// Re-orthogonalization variant. CGS runs one classical pass (fast, least
/// accurate), MGS projects sequentially, DGKS runs the classical pass
/// twice, BCGS is classical within blocks of block_len and sequential
/// across blocks.
struct OrthoVariant {
    OrthoKind kind = OrthoKind::mgs;
    int block_len = 4;
};

inline const char* ortho_name(OrthoKind k) {
    switch (k) {
        case OrthoKind::cgs: return "cgs";
        case OrthoKind::mgs: return "mgs";
        case OrthoKind::dgks: return "dgks";
        case OrthoKind::bcgs: return "bcgs";
    }
    return "?";
}

/// Column-major view of an orthonormal basis (k columns of length n).
struct BasisView {
    const double* data = nullptr;
    index_t n = 0;
    index_t cols = 0;

    std::span<const double> col(index_t j) const {
        return {data + j * n, static_cast<std::size_t>(n)};
    }
};

struct OrthoResult {
    double norm = 0.0;      // h[k], the normalization factor
    bool breakdown = false; // v was (numerically) inside span(Q)
};

namespace detail {

/// One classical pass: h_accum += Q^T w, w -= Q (Q^T w), over columns
/// [first, first+count).
inline void classical_pass(const BasisView& q, index_t first, index_t count,
                           std::span<double> w, std::span<double> h_accum,
                           std::span<double> coeff_scratch) {
    for (index_t j = 0; j < count; ++j)
        coeff_scratch[j] = dot(q.col(first + j), w);
    for (index_t j = 0; j < count; ++j) {
        axpy(-coeff_scratch[j], q.col(first + j), w);
        h_accum[first + j] += coeff_scratch[j];
    }
}

}  // namespace detail

/// Orthogonalizes v against the basis in place: on return v holds the new
/// unit vector (unless breakdown), h[0..k-1] the projection coefficients
/// and h[k] the normalization factor. Breakdown is flagged when the
/// residual norm falls below 1e-14 of the input norm.
inline OrthoResult orthogonalize(OrthoVariant variant, const BasisView& q, std::span<double> v,
                                 std::span<double> h) {
    require(variant.block_len >= 1, "orthogonalize: block length must be >= 1");
    require(q.n == static_cast<index_t>(v.size()), "orthogonalize: dimension mismatch");
    require(static_cast<index_t>(h.size()) >= q.cols + 1, "orthogonalize: h too short");

    const index_t k = q.cols;
    const double input_norm = norm2(v);
    std::fill(h.begin(), h.begin() + k + 1, 0.0);
    std::vector<double> scratch(static_cast<std::size_t>(k));

    switch (variant.kind) {
        case OrthoKind::cgs:
            detail::classical_pass(q, 0, k, v, h, scratch);
            break;
        case OrthoKind::dgks:
            detail::classical_pass(q, 0, k, v, h, scratch);
            detail::classical_pass(q, 0, k, v, h, scratch);
            break;
        case OrthoKind::mgs:
            for (index_t j = 0; j < k; ++j) {
                const double c = dot(q.col(j), v);
                axpy(-c, q.col(j), v);
                h[j] += c;
            }
            break;
        case OrthoKind::bcgs:
            for (index_t b = 0; b < k; b += variant.block_len)
                detail::classical_pass(q, b, std::min<index_t>(variant.block_len, k - b), v, h,
                                       scratch);
            break;
    }

    OrthoResult r;
    r.norm = norm2(v);
    h[k] = r.norm;
    if (r.norm <= 1e-14 * input_norm) {
        r.breakdown = true;
        return r;
    }
    scal(1.0 / r.norm, v);
    return r;
}

}  // namespace ktune
