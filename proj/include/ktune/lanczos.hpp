#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <vector>

#include "ktune/dense_eig.hpp"
#include "ktune/solver_types.hpp"

namespace ktune {

namespace detail {

/// Deterministic pseudo-random start vector (splitmix64 stream).
inline std::vector<double> seeded_vector(index_t n, std::uint64_t seed) {
    std::vector<double> v(static_cast<std::size_t>(n));
    std::uint64_t state = seed;
    for (auto& x : v) {
        state += 0x9e3779b97f4a7c15ull;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        z ^= z >> 31;
        x = static_cast<double>(z >> 11) / 4503599627370496.0 - 1.0;  // [-1,1)
    }
    return v;
}

/// Index order of the Ritz values by descending magnitude. Stable, so
/// complex conjugate partners stay adjacent.
inline std::vector<index_t> magnitude_order(std::span<const double> re,
                                            std::span<const double> im) {
    std::vector<index_t> idx(re.size());
    std::iota(idx.begin(), idx.end(), index_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](index_t a, index_t b) {
        const double ma = std::hypot(re[a], im.empty() ? 0.0 : im[a]);
        const double mb = std::hypot(re[b], im.empty() ? 0.0 : im[b]);
        return ma > mb;
    });
    return idx;
}

}  // namespace detail

/// Explicitly restarted Lanczos for the k largest-magnitude eigenpairs of
/// a symmetric operator. Every new basis vector is fully re-orthogonalized
/// against the locked and active columns with the configured variant, so
/// the choice of Gram-Schmidt implementation directly shapes the quality
/// of the recurrence. Convergence inside the loop is judged from the cheap
/// residual estimate |beta * y_last|; true residuals are recomputed at
/// exit and a discrepancy is flagged as fault convergence.
inline EigenResult lanczos_restarted(const LinOp& a, index_t k, const KrylovConfig& cfg) {
    const index_t n = a.n;
    require(k >= 1, "lanczos: k must be >= 1");
    require(k <= n, "lanczos: k exceeds the matrix dimension");
    require(cfg.restart_m >= k + 2, "lanczos: restart_m must be >= k+2");
    require(cfg.restart_m <= cfg.m_max, "lanczos: restart_m exceeds m_max");

    const double t_start = steady_seconds();
    EigenResult res;

    std::optional<RestartController> controller;
    if (cfg.adapt_restart)
        controller.emplace(cfg.restart_m, cfg.m_max, cfg.restart_increment, cfg.dafrt_window,
                           cfg.dafrt_theta);
    index_t msize = cfg.restart_m;
    index_t msize_peak = msize;

    // Columns [0, nlocked) hold converged eigenvectors; the active Lanczos
    // basis grows behind them.
    std::vector<double> vecs(static_cast<std::size_t>(n * (k + cfg.m_max + 2)));
    index_t nlocked = 0;
    std::vector<double> locked_vals;

    std::vector<double> h(static_cast<std::size_t>(k + cfg.m_max + 2));
    std::vector<double> w(static_cast<std::size_t>(n));
    std::vector<double> start = detail::seeded_vector(n, cfg.seed);
    std::uint64_t reseed = cfg.seed;

    bool out_of_budget = false;
    while (nlocked < k && !out_of_budget) {
        msize_peak = std::max(msize_peak, msize);

        // Seat the start vector orthogonal to the locked set.
        bool seated = false;
        for (int attempt = 0; attempt < 16 && !seated; ++attempt) {
            std::copy(start.begin(), start.end(), w.begin());
            const BasisView locked{vecs.data(), n, nlocked};
            if (!orthogonalize({OrthoKind::dgks}, locked, w, h).breakdown)
                seated = true;
            else
                start = detail::seeded_vector(n, ++reseed);
        }
        if (!seated) {
            res.breakdown = true;
            res.breakdown_reason = "invariant subspace exhausted before k pairs";
            break;
        }
        std::copy(w.begin(), w.end(), vecs.begin() + nlocked * n);

        std::vector<double> alpha, beta;
        index_t ma = 0;
        for (index_t j = 0; j < msize; ++j) {
            if (res.iterations >= cfg.max_iters ||
                steady_seconds() - t_start > cfg.max_time) {
                out_of_budget = true;
                break;
            }
            a.apply({vecs.data() + (nlocked + j) * n, static_cast<std::size_t>(n)}, w);
            ++res.iterations;
            const BasisView q{vecs.data(), n, nlocked + j + 1};
            const auto ortho = orthogonalize(cfg.ortho, q, w, h);
            alpha.push_back(h[nlocked + j]);
            ma = j + 1;
            if (ortho.breakdown) {
                beta.push_back(0.0);  // the subspace closed exactly
                break;
            }
            beta.push_back(ortho.norm);
            std::copy(w.begin(), w.end(), vecs.begin() + (nlocked + j + 1) * n);
        }
        if (ma == 0) break;  // budget ran out before the first step

        const auto eig = tridiag_eig(alpha, std::span<const double>(beta).first(ma - 1));
        const double beta_last = beta[ma - 1];
        const auto order = detail::magnitude_order(eig.values, {});

        // Form the wanted Ritz vectors before touching the locked region:
        // locking writes over the active basis columns.
        const index_t want = std::min<index_t>(k - nlocked, ma);
        double sample = 0.0;
        std::vector<std::pair<double, std::vector<double>>> ready;  // (value, vector)
        std::vector<double> restart_dir;
        for (index_t t = 0; t < want; ++t) {
            const index_t i = order[static_cast<std::size_t>(t)];
            const double* y = eig.vectors.data() + i * ma;
            const double est = std::abs(beta_last * y[ma - 1]);
            sample = std::max(sample, est);
            fill_zero(w);
            for (index_t l = 0; l < ma; ++l)
                axpy(y[l], {vecs.data() + (nlocked + l) * n, static_cast<std::size_t>(n)}, w);
            if (est < cfg.tol)
                ready.emplace_back(eig.values[i], std::vector<double>(w.begin(), w.end()));
            else if (restart_dir.empty())
                restart_dir.assign(w.begin(), w.end());  // best unconverged restarts the cycle
        }
        for (auto& [val, vec] : ready) {
            const BasisView locked{vecs.data(), n, nlocked};
            std::vector<double> hc(static_cast<std::size_t>(nlocked + 1));
            std::span<double> vs(vec);
            if (orthogonalize({OrthoKind::dgks}, locked, vs, hc).breakdown) continue;
            std::copy(vec.begin(), vec.end(), vecs.begin() + nlocked * n);
            ++nlocked;
            locked_vals.push_back(val);
        }

        if (nlocked >= k) break;
        if (!restart_dir.empty())
            start = std::move(restart_dir);
        else
            start = detail::seeded_vector(n, ++reseed);

        if (!out_of_budget) {
            if (controller && sample > 0.0) msize = controller->sample(sample);
            res.restarts.push_back({res.iterations, msize});
            if (sample > 0.0) res.residual_history.push_back(sample);
        }
    }

    res.converged = nlocked >= k;
    // Order the reported pairs by descending magnitude.
    std::vector<index_t> order(static_cast<std::size_t>(nlocked));
    std::iota(order.begin(), order.end(), index_t{0});
    std::stable_sort(order.begin(), order.end(), [&](index_t x, index_t y) {
        return std::abs(locked_vals[x]) > std::abs(locked_vals[y]);
    });
    for (index_t t = 0; t < nlocked; ++t) {
        const index_t i = order[static_cast<std::size_t>(t)];
        res.eigenvalues_re.push_back(locked_vals[i]);
        res.eigenvalues_im.push_back(0.0);
        res.eigenvectors.emplace_back(vecs.begin() + i * n, vecs.begin() + (i + 1) * n);
        res.eigenvectors_im.emplace_back();
        res.residuals.push_back(true_residual_eigen(a, locked_vals[i], res.eigenvectors.back()));
        res.max_residual = std::max(res.max_residual, res.residuals.back());
    }
    res.fault_convergence = res.converged && res.max_residual > cfg.tol;
    res.workspace_bytes = detail::krylov_workspace_bytes(n, msize_peak);
    res.elapsed_seconds = steady_seconds() - t_start;
    return res;
}

/// Convenience overload on symmetric storage via the sequential kernel.
inline EigenResult lanczos_restarted(const SymCsrMatrix& a, index_t k, const KrylovConfig& cfg) {
    const CsrMatrix full = expand_symmetric(a);
    const LinOp op = make_ref_op(full);
    return lanczos_restarted(op, k, cfg);
}

}  // namespace ktune
