#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ktune/autotune.hpp"
#include "ktune/csr.hpp"
#include "ktune/ortho.hpp"

namespace ktune {

/// Type-erased y = A*x. Solvers run against this so the same code serves
/// the tuned parallel kernels, the sequential reference, and test stubs.
struct LinOp {
    index_t n = 0;
    std::function<void(std::span<const double>, std::span<double>)> apply;
};

/// Preconditioner application z = M^{-1} r; an empty apply means identity.
struct Precond {
    std::function<void(std::span<const double>, std::span<double>)> apply;

    bool is_identity() const { return !apply; }
};

inline LinOp make_ref_op(const CsrMatrix& a) {
    return {a.n, [&a](std::span<const double> x, std::span<double> y) { spmv_ref(a, x, y); }};
}

namespace detail {

/// Workspace model shared by the Krylov solvers: basis plus projected
/// system for restart frequency m.
inline std::size_t krylov_workspace_bytes(index_t n, index_t m) {
    const index_t mp2 = m + 2;
    return static_cast<std::size_t>(8) * static_cast<std::size_t>(n * mp2 + mp2 * mp2);
}

}  // namespace detail

struct KrylovConfig {
    index_t restart_m = 30;  // initial restart frequency
    index_t m_max = 30;      // workspace cap on the Krylov dimension
    double tol = 1e-8;       // relative recurrence-residual target
    index_t max_iters = 10000;
    double max_time = 1000.0;  // seconds
    OrthoVariant ortho{};      // MGS by default
    // Restart adaptation parameters; engaged when adapt_restart is true.
    bool adapt_restart = false;
    index_t restart_increment = 1;
    std::size_t dafrt_window = 5;
    double dafrt_theta = 10.0;
    std::uint64_t seed = 20080517;  // start-vector seed for the eigensolvers
};

struct RestartEvent {
    index_t at_iteration;
    index_t msize;
};

struct SolverResult {
    std::vector<double> x;
    bool converged = false;
    bool breakdown = false;
    std::string breakdown_reason;
    bool fault_convergence = false;  // recurrence satisfied tol, true residual did not
    index_t iterations = 0;
    std::vector<RestartEvent> restarts;
    double recurrence_residual = 0.0;
    double true_residual = 0.0;
    std::vector<double> residual_history;  // recurrence residual per inner iteration
    double elapsed_seconds = 0.0;
    std::size_t workspace_bytes = 0;
};

struct EigenResult {
    std::vector<double> eigenvalues_re;
    std::vector<double> eigenvalues_im;
    // Unit-norm eigenvectors. For a complex pair the real part sits in
    // eigenvectors and the imaginary part in eigenvectors_im (empty for a
    // real eigenvalue); the complex 2-norm of the pair is 1.
    std::vector<std::vector<double>> eigenvectors;
    std::vector<std::vector<double>> eigenvectors_im;
    std::vector<double> residuals;                  // recomputed ||A v - lambda v||_2 per pair
    double max_residual = 0.0;
    bool converged = false;
    bool breakdown = false;
    std::string breakdown_reason;
    bool fault_convergence = false;
    index_t iterations = 0;  // Krylov steps, i.e. operator applications
    std::vector<RestartEvent> restarts;
    std::vector<double> residual_history;  // per-restart residual estimate samples
    double elapsed_seconds = 0.0;
    std::size_t workspace_bytes = 0;
};

/// ||b - A x||_2 / ||b||_2 recomputed from scratch.
inline double true_residual_linear(const LinOp& a, std::span<const double> x,
                                   std::span<const double> b) {
    require(a.n == static_cast<index_t>(x.size()) && a.n == static_cast<index_t>(b.size()),
            "true residual: dimension mismatch");
    std::vector<double> r(b.size());
    a.apply(x, r);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
    const double nb = norm2(b);
    require(nb > 0.0, "true residual: zero right-hand side");
    return norm2(r) / nb;
}

inline double true_residual_linear(const CsrMatrix& a, std::span<const double> x,
                                   std::span<const double> b) {
    const LinOp op = make_ref_op(a);
    return true_residual_linear(op, x, b);
}

/// ||A v - lambda v||_2 for a real eigenpair.
inline double true_residual_eigen(const LinOp& a, double lambda, std::span<const double> v) {
    require(a.n == static_cast<index_t>(v.size()), "true residual: dimension mismatch");
    std::vector<double> r(v.size());
    a.apply(v, r);
    axpy(-lambda, v, r);
    return norm2(r);
}

inline double true_residual_eigen(const CsrMatrix& a, double lambda, std::span<const double> v) {
    const LinOp op = make_ref_op(a);
    return true_residual_eigen(op, lambda, v);
}

/// Complex-pair residual ||A z - lambda z||_2 with z = vr + i*vi and
/// lambda = re + i*im, evaluated with two real products.
inline double true_residual_eigen(const LinOp& a, double re, double im,
                                  std::span<const double> vr, std::span<const double> vi) {
    std::vector<double> ar(vr.size()), ai(vi.size());
    a.apply(vr, ar);
    a.apply(vi, ai);
    double s = 0.0;
    for (std::size_t i = 0; i < vr.size(); ++i) {
        const double rr = ar[i] - re * vr[i] + im * vi[i];
        const double ri = ai[i] - re * vi[i] - im * vr[i];
        s += rr * rr + ri * ri;
    }
    return std::sqrt(s);
}

}  // namespace ktune
