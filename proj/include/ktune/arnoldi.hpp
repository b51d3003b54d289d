#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <vector>

#include "ktune/dense_eig.hpp"
#include "ktune/lanczos.hpp"
#include "ktune/solver_types.hpp"

namespace ktune {

/// Explicitly restarted Arnoldi for the k largest-magnitude eigenpairs of
/// a general real operator. Mirrors the restarted Lanczos flow with a full
/// Hessenberg Ritz problem; complex Ritz values surface as conjugate
/// pairs, whose two real spanning columns are locked together.
inline EigenResult arnoldi_restarted(const LinOp& a, index_t k, const KrylovConfig& cfg) {
    const index_t n = a.n;
    require(k >= 1, "arnoldi: k must be >= 1");
    require(k <= n, "arnoldi: k exceeds the matrix dimension");
    require(cfg.restart_m >= k + 2, "arnoldi: restart_m must be >= k+2");
    require(cfg.restart_m <= cfg.m_max, "arnoldi: restart_m exceeds m_max");

    const double t_start = steady_seconds();
    EigenResult res;

    std::optional<RestartController> controller;
    if (cfg.adapt_restart)
        controller.emplace(cfg.restart_m, cfg.m_max, cfg.restart_increment, cfg.dafrt_window,
                           cfg.dafrt_theta);
    index_t msize = cfg.restart_m;
    index_t msize_peak = msize;

    // A conjugate pair may overshoot k by one entry, hence the extra column.
    std::vector<double> vecs(static_cast<std::size_t>(n * (k + cfg.m_max + 3)));
    index_t nlocked = 0;

    struct Found {
        double re, im;
        std::vector<double> vre, vim;  // vim empty for a real pair
    };
    std::vector<Found> found;

    std::vector<double> h(static_cast<std::size_t>(k + cfg.m_max + 3));
    std::vector<double> w(static_cast<std::size_t>(n));
    std::vector<double> start = detail::seeded_vector(n, cfg.seed);
    std::uint64_t reseed = cfg.seed;

    const auto lock_column = [&](std::vector<double> v) {
        const BasisView locked{vecs.data(), n, nlocked};
        std::vector<double> hc(static_cast<std::size_t>(nlocked + 1));
        std::span<double> vs(v);
        if (orthogonalize({OrthoKind::dgks}, locked, vs, hc).breakdown) return false;
        std::copy(v.begin(), v.end(), vecs.begin() + nlocked * n);
        ++nlocked;
        return true;
    };

    bool out_of_budget = false;
    while (static_cast<index_t>(found.size()) < k && !out_of_budget) {
        msize_peak = std::max(msize_peak, msize);

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

        std::vector<double> hess(static_cast<std::size_t>(msize * msize), 0.0);
        double beta_last = 0.0;
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
            for (index_t i = 0; i <= j; ++i) hess[j * msize + i] = h[nlocked + i];
            beta_last = ortho.breakdown ? 0.0 : ortho.norm;
            ma = j + 1;
            if (ortho.breakdown) break;
            if (j + 1 < msize) hess[j * msize + j + 1] = ortho.norm;
            std::copy(w.begin(), w.end(), vecs.begin() + (nlocked + j + 1) * n);
        }
        if (ma == 0) break;

        // Square Ritz problem of the cycle.
        std::vector<double> hsq(static_cast<std::size_t>(ma * ma));
        for (index_t j = 0; j < ma; ++j)
            std::copy(hess.begin() + j * msize, hess.begin() + j * msize + ma,
                      hsq.begin() + j * ma);
        const auto eig = dense_eig(hsq, ma);
        const auto order = detail::magnitude_order(eig.re, eig.im);

        const auto ritz_vector = [&](const double* y) {
            std::vector<double> z(static_cast<std::size_t>(n), 0.0);
            for (index_t l = 0; l < ma; ++l)
                axpy(y[l], {vecs.data() + (nlocked + l) * n, static_cast<std::size_t>(n)},
                     std::span<double>(z));
            return z;
        };

        const index_t want = k - static_cast<index_t>(found.size());
        double sample = 0.0;
        index_t taken = 0;
        std::vector<Found> ready;
        std::vector<double> restart_dir;
        std::vector<bool> visited(static_cast<std::size_t>(ma), false);
        for (index_t t = 0; t < ma && taken < want; ++t) {
            const index_t i = order[static_cast<std::size_t>(t)];
            if (visited[static_cast<std::size_t>(i)]) continue;
            if (eig.im[i] == 0.0) {
                visited[static_cast<std::size_t>(i)] = true;
                const double* y = eig.vectors.data() + i * ma;
                const double est = std::abs(beta_last * y[ma - 1]);
                sample = std::max(sample, est);
                auto z = ritz_vector(y);
                ++taken;
                if (est < cfg.tol)
                    ready.push_back({eig.re[i], 0.0, std::move(z), {}});
                else if (restart_dir.empty())
                    restart_dir = std::move(z);
            } else {
                const index_t base = eig.im[i] > 0.0 ? i : i - 1;
                if (visited[static_cast<std::size_t>(base)]) continue;
                visited[static_cast<std::size_t>(base)] = true;
                visited[static_cast<std::size_t>(base + 1)] = true;
                const double* yr = eig.vectors.data() + base * ma;
                const double* yi = eig.vectors.data() + (base + 1) * ma;
                const double est = std::abs(beta_last) * std::hypot(yr[ma - 1], yi[ma - 1]);
                sample = std::max(sample, est);
                auto zr = ritz_vector(yr);
                auto zi = ritz_vector(yi);
                taken += 2;
                if (est < cfg.tol) {
                    ready.push_back({eig.re[base], std::abs(eig.im[base]), std::move(zr),
                                     std::move(zi)});
                } else if (restart_dir.empty()) {
                    restart_dir = std::move(zr);
                }
            }
        }

        for (auto& f : ready) {
            if (f.vim.empty()) {
                std::vector<double> v = f.vre;
                if (!lock_column(std::move(v))) continue;
                // The locked (deflated, unit) column is the reported vector.
                f.vre.assign(vecs.begin() + (nlocked - 1) * n, vecs.begin() + nlocked * n);
                found.push_back(std::move(f));
            } else {
                // Deflate with an orthonormal spanning pair; report the
                // complex eigenvector normalized as a complex vector.
                if (!lock_column(f.vre)) continue;
                if (!lock_column(f.vim)) continue;
                const double nz =
                    std::sqrt(dot(f.vre, f.vre) + dot(f.vim, f.vim));
                scal(1.0 / nz, f.vre);
                scal(1.0 / nz, f.vim);
                Found conj{f.re, -f.im, f.vre, f.vim};
                scal(-1.0, conj.vim);
                found.push_back(f);
                found.push_back(std::move(conj));
            }
        }

        if (static_cast<index_t>(found.size()) >= k) break;
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

    res.converged = static_cast<index_t>(found.size()) >= k;
    std::stable_sort(found.begin(), found.end(), [](const Found& x, const Found& y) {
        return std::hypot(x.re, x.im) > std::hypot(y.re, y.im);
    });
    for (auto& f : found) {
        res.eigenvalues_re.push_back(f.re);
        res.eigenvalues_im.push_back(f.im);
        double r;
        if (f.vim.empty())
            r = true_residual_eigen(a, f.re, f.vre);
        else
            r = true_residual_eigen(a, f.re, f.im, f.vre, f.vim);
        res.eigenvectors.push_back(std::move(f.vre));
        res.eigenvectors_im.push_back(std::move(f.vim));
        res.residuals.push_back(r);
        res.max_residual = std::max(res.max_residual, r);
    }
    res.fault_convergence = res.converged && res.max_residual > cfg.tol;
    res.workspace_bytes = detail::krylov_workspace_bytes(n, msize_peak);
    res.elapsed_seconds = steady_seconds() - t_start;
    return res;
}

inline EigenResult arnoldi_restarted(const CsrMatrix& a, index_t k, const KrylovConfig& cfg) {
    const LinOp op = make_ref_op(a);
    return arnoldi_restarted(op, k, cfg);
}

}  // namespace ktune
