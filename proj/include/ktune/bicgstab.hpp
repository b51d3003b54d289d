#pragma once

#include <cmath>
#include <vector>

#include "ktune/solver_types.hpp"

namespace ktune {

/// Preconditioned BiCGStab (van der Vorst) with right preconditioning and
/// zero initial guess. One iteration costs two operator applications.
/// rho/omega collapse is reported as breakdown rather than an exception so
/// the caller still sees the best iterate.
inline SolverResult bicgstab(const LinOp& a, std::span<const double> b, const KrylovConfig& cfg,
                             const Precond& precond = {}) {
    const index_t n = a.n;
    require(static_cast<index_t>(b.size()) == n, "bicgstab: dimension mismatch");
    require(cfg.tol > 0.0, "bicgstab: tol must be positive");

    const double t_start = steady_seconds();
    SolverResult res;
    res.x.assign(static_cast<std::size_t>(n), 0.0);
    // Eight length-n work vectors; no Krylov basis is stored.
    res.workspace_bytes = static_cast<std::size_t>(8) * 8 * static_cast<std::size_t>(n);

    const double nb = norm2(b);
    if (nb == 0.0) {
        res.converged = true;
        res.elapsed_seconds = steady_seconds() - t_start;
        return res;
    }

    std::vector<double> r(b.begin(), b.end());  // r0 = b - A*0
    std::vector<double> r_hat(r);
    std::vector<double> p(static_cast<std::size_t>(n), 0.0);
    std::vector<double> v(static_cast<std::size_t>(n), 0.0);
    std::vector<double> s(static_cast<std::size_t>(n));
    std::vector<double> t(static_cast<std::size_t>(n));
    std::vector<double> phat(static_cast<std::size_t>(n));
    std::vector<double> shat(static_cast<std::size_t>(n));

    const auto precondition = [&](std::span<const double> in, std::span<double> out) {
        if (precond.is_identity())
            std::copy(in.begin(), in.end(), out.begin());
        else
            precond.apply(in, out);
    };

    double rho_old = 1.0, alpha = 1.0, omega = 1.0;
    double rr = norm2(r) / nb;
    if (rr < cfg.tol) res.converged = true;

    while (!res.converged && res.iterations < cfg.max_iters &&
           steady_seconds() - t_start <= cfg.max_time) {
        const double rho = dot(r_hat, r);
        if (std::abs(rho) < 1e-14 * norm2(r_hat) * norm2(r)) {
            res.breakdown = true;
            res.breakdown_reason = "rho breakdown";
            break;
        }
        const double beta = (rho / rho_old) * (alpha / omega);
        for (index_t i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
        precondition(p, phat);
        a.apply(phat, v);
        const double rhv = dot(r_hat, v);
        if (rhv == 0.0) {
            res.breakdown = true;
            res.breakdown_reason = "rho breakdown";
            break;
        }
        alpha = rho / rhv;
        for (index_t i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];

        // Early exit on a tiny intermediate residual (omega would be 0/0).
        if (norm2(s) / nb < cfg.tol) {
            axpy(alpha, phat, res.x);
            ++res.iterations;
            rr = norm2(s) / nb;
            res.residual_history.push_back(rr);
            res.converged = true;
            break;
        }

        precondition(s, shat);
        a.apply(shat, t);
        const double tt = dot(t, t);
        omega = tt != 0.0 ? dot(t, s) / tt : 0.0;
        const double nt = norm2(t);
        if (nt == 0.0 || std::abs(omega) < 1e-14 * norm2(s) / nt) {
            res.breakdown = true;
            res.breakdown_reason = "omega breakdown";
            break;
        }
        for (index_t i = 0; i < n; ++i) res.x[i] += alpha * phat[i] + omega * shat[i];
        for (index_t i = 0; i < n; ++i) r[i] = s[i] - omega * t[i];
        rho_old = rho;

        ++res.iterations;
        rr = norm2(r) / nb;
        res.residual_history.push_back(rr);
        if (rr < cfg.tol) res.converged = true;
    }

    res.recurrence_residual = rr;
    a.apply(res.x, t);
    for (index_t i = 0; i < n; ++i) t[i] = b[i] - t[i];
    res.true_residual = norm2(t) / nb;
    res.fault_convergence = res.converged && res.true_residual > cfg.tol;
    res.elapsed_seconds = steady_seconds() - t_start;
    return res;
}

inline SolverResult bicgstab(const CsrMatrix& a, std::span<const double> b,
                             const KrylovConfig& cfg, const Precond& precond = {}) {
    const LinOp op = make_ref_op(a);
    return bicgstab(op, b, cfg, precond);
}

}  // namespace ktune
