#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "ktune/solver_types.hpp"

namespace ktune {

/// Restarted GMRES(m) with a configurable orthogonalizer, optional right
/// preconditioning and optional restart-frequency adaptation. The initial
/// guess is zero. Convergence is judged on the recurrence residual from
/// the Givens update; the true residual is recomputed once at exit and a
/// discrepancy is flagged as fault convergence.
inline SolverResult gmres_m(const LinOp& a, std::span<const double> b, const KrylovConfig& cfg,
                            const Precond& precond = {}) {
    const index_t n = a.n;
    require(static_cast<index_t>(b.size()) == n, "gmres: dimension mismatch");
    require(cfg.restart_m >= 1 && cfg.restart_m <= cfg.m_max, "gmres: need 1 <= m <= m_max");
    require(cfg.tol > 0.0, "gmres: tol must be positive");

    const double t_start = steady_seconds();
    SolverResult res;
    res.x.assign(static_cast<std::size_t>(n), 0.0);

    const double nb = norm2(b);
    if (nb == 0.0) {  // zero right-hand side: x = 0 is exact
        res.converged = true;
        res.workspace_bytes = detail::krylov_workspace_bytes(n, cfg.restart_m);
        res.elapsed_seconds = steady_seconds() - t_start;
        return res;
    }

    std::optional<RestartController> controller;
    if (cfg.adapt_restart)
        controller.emplace(cfg.restart_m, cfg.m_max, cfg.restart_increment, cfg.dafrt_window,
                           cfg.dafrt_theta);
    index_t msize = cfg.restart_m;
    index_t msize_peak = msize;

    // Column-major Krylov basis and triangularized Hessenberg columns,
    // grown on demand so the memory policy only pays for the restart
    // frequency it actually reaches.
    std::vector<double> basis, r_cols;
    const index_t r_stride = cfg.m_max + 1;
    std::vector<double> h(static_cast<std::size_t>(cfg.m_max + 2));
    std::vector<double> cs(static_cast<std::size_t>(cfg.m_max + 1));
    std::vector<double> sn(static_cast<std::size_t>(cfg.m_max + 1));
    std::vector<double> g(static_cast<std::size_t>(cfg.m_max + 2));
    std::vector<double> r(static_cast<std::size_t>(n));
    std::vector<double> z(static_cast<std::size_t>(n));
    std::vector<double> w(static_cast<std::size_t>(n));

    const auto precondition = [&](std::span<const double> in, std::span<double> out) {
        if (precond.is_identity())
            std::copy(in.begin(), in.end(), out.begin());
        else
            precond.apply(in, out);
    };

    double rr = 1.0;
    bool stop = false;
    while (!stop) {
        basis.resize(static_cast<std::size_t>(n * (msize + 1)));
        r_cols.resize(static_cast<std::size_t>(r_stride * msize));
        msize_peak = std::max(msize_peak, msize);

        a.apply(res.x, r);
        for (index_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
        const double beta = norm2(r);
        rr = beta / nb;
        if (rr < cfg.tol) {
            res.converged = true;
            break;
        }

        for (index_t i = 0; i < n; ++i) basis[i] = r[i] / beta;
        fill_zero(g);
        g[0] = beta;

        index_t j = 0;
        bool lucky = false;
        while (j < msize) {
            if (res.iterations >= cfg.max_iters ||
                steady_seconds() - t_start > cfg.max_time) {
                stop = true;
                break;
            }
            precondition({basis.data() + j * n, static_cast<std::size_t>(n)}, z);
            a.apply(z, w);

            const BasisView q{basis.data(), n, j + 1};
            const auto ortho = orthogonalize(cfg.ortho, q, w, h);
            if (ortho.breakdown) {
                h[j + 1] = 0.0;  // subspace exhausted: the relation closes exactly
                lucky = true;
            } else {
                std::copy(w.begin(), w.end(), basis.begin() + (j + 1) * n);
            }

            for (index_t i = 0; i < j; ++i) {
                const double t1 = h[i], t2 = h[i + 1];
                h[i] = cs[i] * t1 + sn[i] * t2;
                h[i + 1] = -sn[i] * t1 + cs[i] * t2;
            }
            const double denom = std::hypot(h[j], h[j + 1]);
            if (denom == 0.0) {
                cs[j] = 1.0;
                sn[j] = 0.0;
            } else {
                cs[j] = h[j] / denom;
                sn[j] = h[j + 1] / denom;
            }
            h[j] = denom;
            g[j + 1] = -sn[j] * g[j];
            g[j] *= cs[j];
            std::copy(h.begin(), h.begin() + j + 1, r_cols.begin() + j * r_stride);

            ++res.iterations;
            rr = std::abs(g[j + 1]) / nb;
            res.residual_history.push_back(rr);
            ++j;
            if (lucky || rr < cfg.tol) break;
        }

        if (j > 0) {
            // Back-substitute R y = g and apply the (right-preconditioned)
            // correction x += M^{-1} (Q y).
            std::vector<double> y(static_cast<std::size_t>(j));
            for (index_t i = j - 1; i >= 0; --i) {
                double s = g[i];
                for (index_t l = i + 1; l < j; ++l) s -= r_cols[l * r_stride + i] * y[l];
                const double rii = r_cols[i * r_stride + i];
                y[i] = rii != 0.0 ? s / rii : 0.0;
            }
            fill_zero(w);
            for (index_t l = 0; l < j; ++l)
                axpy(y[l], {basis.data() + l * n, static_cast<std::size_t>(n)}, w);
            precondition(w, z);
            axpy(1.0, z, res.x);
        }

        if (rr < cfg.tol) {
            res.converged = true;
            break;
        }
        if (lucky) {
            // Exhausted subspace without meeting tol: nothing further can
            // be extracted from this operator; report what we have.
            res.breakdown = true;
            res.breakdown_reason = "arnoldi breakdown before reaching tol";
            break;
        }
        if (stop) break;

        if (controller) {
            msize = controller->sample(rr);
            res.restarts.push_back({res.iterations, msize});
        } else {
            res.restarts.push_back({res.iterations, msize});
        }
    }

    res.recurrence_residual = rr;
    a.apply(res.x, r);
    for (index_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
    res.true_residual = norm2(r) / nb;
    res.fault_convergence = res.converged && res.true_residual > cfg.tol;
    res.workspace_bytes = detail::krylov_workspace_bytes(n, msize_peak);
    res.elapsed_seconds = steady_seconds() - t_start;
    return res;
}

/// Convenience overload building the sequential operator from a matrix.
inline SolverResult gmres_m(const CsrMatrix& a, std::span<const double> b,
                            const KrylovConfig& cfg, const Precond& precond = {}) {
    const LinOp op = make_ref_op(a);
    return gmres_m(op, b, cfg, precond);
}

}  // namespace ktune
