#pragma once

// Preconditioned conjugate gradients in standard and flexible form, with the
// condition number estimate from the Lanczos tridiagonal implied by the CG
// coefficients.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "sgfem/linalg.hpp"
#include "sgfem/matrix_market.hpp"

namespace sgfem {

using LinearMap = std::function<void(std::span<const double>, std::span<double>)>;

enum class CgVariant {
    Standard,  // Fletcher-Reeves beta
    Flexible,  // Polak-Ribiere beta from successive residual differences
};

struct CgOptions {
    double tol = 1e-8;
    int maxit = 1000;
    CgVariant variant = CgVariant::Flexible;
    int refresh_every = 50;          // explicit residual recomputation period
    std::ostream* trace = nullptr;   // CSV "iteration,relative_residual"
};

struct SolveReport {
    int iterations = 0;
    Vector history;  // relative residuals, history[0] = 1
    double kappa = 1.0;
    double seconds = 0.0;
    std::size_t matvecs = 0;
    std::size_t preconditioner_applies = 0;
    bool converged = false;
    bool breakdown = false;
    Vector alphas;
    Vector betas;
};

struct SolveResult {
    Vector x;
    SolveReport report;
};

/// kappa = lambda_max / lambda_min of the Lanczos tridiagonal built from CG's
/// step lengths alpha_k and direction updates beta_k. Fewer than two steps give 1.
inline double lanczos_condition_estimate(std::span<const double> alphas, std::span<const double> betas)
{
    const std::size_t m = alphas.size();
    if (m < 2) return 1.0;
    DenseMatrix t(m, m);
    t(0, 0) = 1.0 / alphas[0];
    for (std::size_t k = 1; k < m; ++k) {
        const double beta = k - 1 < betas.size() ? betas[k - 1] : 0.0;
        t(k, k) = 1.0 / alphas[k] + beta / alphas[k - 1];
        t(k, k - 1) = t(k - 1, k) = std::sqrt(std::max(beta, 0.0)) / alphas[k - 1];
    }
    const auto eig = sym_eig(t);
    const double hi = eig.values.front();
    const double lo = eig.values.back();
    if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
    return std::max(1.0, hi / lo);
}

/// Zero initial guess; stops when ||b - A x|| <= tol ||b||.
inline SolveResult flexible_cg(const LinearMap& apply_a, const LinearMap& apply_m, std::span<const double> b,
                               const CgOptions& opt = {})
{
    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t n = b.size();
    SolveResult res;
    res.x.assign(n, 0.0);
    SolveReport& rep = res.report;
    const double bnorm = norm2(b);
    rep.history.push_back(1.0);
    if (opt.trace) *opt.trace << "iteration,relative_residual\n0,1\n";
    if (bnorm == 0.0) {
        rep.converged = true;
        rep.history.back() = 0.0;
        return res;
    }

    Vector r(b.begin(), b.end()), r_old, z(n), p(n), q(n);
    apply_m(r, z);
    ++rep.preconditioner_applies;
    p = z;
    double rz = dot(r, z);

    for (int it = 0; it < opt.maxit; ++it) {
        apply_a(p, q);
        ++rep.matvecs;
        const double pq = dot(p, q);
        if (!(pq > 0.0)) {
            rep.breakdown = true;
            break;
        }
        const double alpha = rz / pq;
        rep.alphas.push_back(alpha);
        if (opt.variant == CgVariant::Flexible) r_old = r;
        axpy(alpha, p, res.x);
        axpy(-alpha, q, r);
        if (opt.refresh_every > 0 && (it + 1) % opt.refresh_every == 0) {
            apply_a(res.x, q);
            ++rep.matvecs;
            for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - q[i];
        }
        const double rel = norm2(r) / bnorm;
        rep.history.push_back(rel);
        rep.iterations = it + 1;
        if (opt.trace) *opt.trace << it + 1 << ',' << format_real(rel) << '\n';
        if (rel <= opt.tol) {
            rep.converged = true;
            break;
        }
        apply_m(r, z);
        ++rep.preconditioner_applies;
        const double rz_new = dot(r, z);
        double beta = 0.0;
        if (opt.variant == CgVariant::Flexible) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += z[i] * (r[i] - r_old[i]);
            beta = s / rz;
        } else {
            beta = rz_new / rz;
        }
        rep.betas.push_back(beta);
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
        rz = rz_new;
        if (!(rz > 0.0)) {
            rep.breakdown = true;
            break;
        }
    }
    rep.kappa = lanczos_condition_estimate(rep.alphas, rep.betas);
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

inline SolveResult preconditioned_cg(const LinearMap& apply_a, const LinearMap& apply_m, std::span<const double> b,
                                     CgOptions opt = {})
{
    opt.variant = CgVariant::Standard;
    return flexible_cg(apply_a, apply_m, b, opt);
}

}  // namespace sgfem
