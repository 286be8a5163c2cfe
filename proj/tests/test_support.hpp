#pragma once

// Shared helpers for the test suites: seeded random data and dense oracles
// built directly from the tensor formula, independent of the operator code.

#include <cmath>
#include <random>
#include <span>
#include <vector>

#include "sgfem/sgfem.hpp"

namespace sgtest {

using sgfem::DenseMatrix;
using sgfem::Vector;

inline Vector random_vector(std::size_t n, unsigned seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vector v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

inline DenseMatrix random_dense(std::size_t r, std::size_t c, unsigned seed)
{
    return DenseMatrix(r, c, random_vector(r * c, seed));
}

inline DenseMatrix random_spd(std::size_t n, unsigned seed)
{
    const DenseMatrix b = random_dense(n, n, seed);
    DenseMatrix a = b.transpose().multiply(b);
    for (std::size_t i = 0; i < n; ++i) a(i, i) += static_cast<double>(n);
    return a;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b)
{
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline double max_abs(std::span<const double> a)
{
    double m = 0.0;
    for (double x : a) m = std::max(m, std::abs(x));
    return m;
}

inline double rel_diff(std::span<const double> a, std::span<const double> b)
{
    return max_abs_diff(a, b) / std::max(max_abs(b), 1e-300);
}

inline double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b)
{
    return max_abs_diff(a.values(), b.values());
}

/// Gauss-Hermite nodes and weights for the standard normal density via
/// Golub-Welsch on the probabilists' Jacobi matrix (off-diagonal sqrt(k)).
struct GaussRule {
    Vector nodes;
    Vector weights;
};

inline GaussRule gauss_hermite(std::size_t n)
{
    DenseMatrix j(n, n);
    for (std::size_t k = 1; k < n; ++k) j(k, k - 1) = j(k - 1, k) = std::sqrt(static_cast<double>(k));
    const auto eig = sgfem::sym_eig(j);
    GaussRule g{eig.values, Vector(n)};
    for (std::size_t i = 0; i < n; ++i) g.weights[i] = eig.vectors(0, i) * eig.vectors(0, i);
    return g;
}

/// E[He_a He_b He_c] by quadrature.
inline double quad_triple_1d(int a, int b, int c)
{
    const auto rule = gauss_hermite(static_cast<std::size_t>((a + b + c + 1) / 2 + 1));
    double s = 0.0;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        const double x = rule.nodes[q];
        s += rule.weights[q] * sgfem::hermite_eval_1d(a, x) * sgfem::hermite_eval_1d(b, x) * sgfem::hermite_eval_1d(c, x);
    }
    return s;
}

/// Global matrix from sum_i kron(G_i, K_i) with G_i(j,k) computed from triple_product.
inline DenseMatrix dense_truncated(const sgfem::GalerkinOperator& op, const sgfem::TruncationSet& trunc);

inline DenseMatrix dense_global(const sgfem::GalerkinOperator& op) { return dense_truncated(op, op.full_truncation()); }

/// Copy of `a` keeping only blocks (j,k) for which keep(j,k) is true.
template <class Keep>
DenseMatrix block_filter(const DenseMatrix& a, std::size_t nd, Keep keep)
{
    DenseMatrix out(a.rows(), a.cols());
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c)
            if (keep(r / nd, c / nd)) out(r, c) = a(r, c);
    return out;
}

/// Sub-block of rows [r0, r0+nr) x cols [c0, c0+nc).
inline DenseMatrix sub(const DenseMatrix& a, std::size_t r0, std::size_t nr, std::size_t c0, std::size_t nc)
{
    DenseMatrix s(nr, nc);
    for (std::size_t r = 0; r < nr; ++r)
        for (std::size_t c = 0; c < nc; ++c) s(r, c) = a(r0 + r, c0 + c);
    return s;
}

inline void put(DenseMatrix& a, std::size_t r0, std::size_t c0, const DenseMatrix& s)
{
    for (std::size_t r = 0; r < s.rows(); ++r)
        for (std::size_t c = 0; c < s.cols(); ++c) a(r0 + r, c0 + c) = s(r, c);
}

inline DenseMatrix add(const DenseMatrix& a, const DenseMatrix& b, double beta = 1.0)
{
    DenseMatrix c = a;
    for (std::size_t i = 0; i < c.values().size(); ++i) c.values()[i] += beta * b.values()[i];
    return c;
}

/// Dense inverse of the symmetric block Gauss-Seidel splitting (L+D) D^-1 (D+U).
/// D holds the blocks of `a_diag` within one group; L/U hold the strictly
/// lower/upper blocks of `a_off` across groups.
template <class SameGroup>
DenseMatrix dense_sgs_inverse(const DenseMatrix& a_diag, const DenseMatrix& a_off, std::size_t nd, SameGroup same_group)
{
    const DenseMatrix d = block_filter(a_diag, nd, same_group);
    const DenseMatrix l = block_filter(a_off, nd, [&](std::size_t j, std::size_t k) { return j > k && !same_group(j, k); });
    const DenseMatrix u = block_filter(a_off, nd, [&](std::size_t j, std::size_t k) { return j < k && !same_group(j, k); });
    const DenseMatrix m = add(l, d).multiply(sgfem::inverse(d)).multiply(add(d, u));
    return sgfem::inverse(m);
}

/// Global matrix restricted to the retained coefficient indices.
inline DenseMatrix dense_truncated(const sgfem::GalerkinOperator& op, const sgfem::TruncationSet& trunc)
{
    const auto& outer = op.tensor().outer_basis();
    const auto& inner = op.tensor().inner_basis();
    const std::size_t nd = op.ndof(), nb = op.blocks();
    DenseMatrix a(nd * nb, nd * nb);
    for (std::size_t i : trunc.indices()) {
        if (i >= op.coefficients()) continue;
        const DenseMatrix ki = op.stiffness(i).to_dense();
        for (std::size_t j = 0; j < nb; ++j)
            for (std::size_t k = 0; k < nb; ++k) {
                const double c = sgfem::triple_product(outer[i], inner[j], inner[k]);
                if (c == 0.0) continue;
                for (std::size_t r = 0; r < nd; ++r)
                    for (std::size_t s = 0; s < nd; ++s) a(j * nd + r, k * nd + s) += c * ki(r, s);
            }
    }
    return a;
}

/// Small instances for the dense-oracle tests.
struct SmallCase {
    int N, P, n;
};

inline std::vector<SmallCase> oracle_cases() { return {{1, 1, 2}, {2, 1, 3}, {2, 2, 3}}; }

inline sgfem::StochasticProblem small_problem(SmallCase c, double cov = 1.0)
{
    sgfem::ProblemSpec s;
    s.dimension = c.N;
    s.degree = c.P;
    s.mesh = c.n;
    s.cov = cov;
    return sgfem::build_problem(s);
}

}  // namespace sgtest
