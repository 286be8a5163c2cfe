#pragma once

// Lognormal coefficient k(x, xi) = exp(g(x, xi)), with g a truncated discrete
// Karhunen-Loeve expansion of a Gaussian field with the separable exponential
// kernel sigma^2 exp(-|x - y|_1 / L), and its Hermite chaos coefficients k_i(x).

#include <cmath>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sgfem/chaos_basis.hpp"
#include "sgfem/fem.hpp"
#include "sgfem/linalg.hpp"

namespace sgfem {

struct CovarianceSpec {
    double sigma = 1.0;             // standard deviation of the Gaussian field
    double correlation_length = 0.5;

    void validate() const
    {
        if (!(sigma >= 0.0)) throw std::invalid_argument("CovarianceSpec: sigma must be >= 0");
        if (!(correlation_length > 0.0)) throw std::invalid_argument("CovarianceSpec: correlation length must be > 0");
    }
};

/// How a requested coefficient of variation maps to the Gaussian parameters.
enum class SigmaMode {
    MomentMatch,    // lognormal marginal has exactly the requested mean and CoV
    GaussianSigma,  // sigma_g = CoV directly
};

inline SigmaMode parse_sigma_mode(const std::string& s)
{
    if (s == "moment-match") return SigmaMode::MomentMatch;
    if (s == "gaussian-sigma") return SigmaMode::GaussianSigma;
    throw std::invalid_argument("unknown sigma mode '" + s + "' (expected moment-match|gaussian-sigma)");
}

inline const char* to_string(SigmaMode m) { return m == SigmaMode::MomentMatch ? "moment-match" : "gaussian-sigma"; }

struct GaussianParameters {
    double mean;   // g_0
    double sigma;  // sigma_g
};

/// exp(N(g0, sigma^2)) has mean `mean` and coefficient of variation `cov`.
inline GaussianParameters lognormal_from_moments(double mean, double cov)
{
    if (!(mean > 0.0)) throw std::invalid_argument("lognormal_from_moments: mean must be > 0");
    if (!(cov >= 0.0)) throw std::invalid_argument("lognormal_from_moments: cov must be >= 0");
    const double s2 = std::log1p(cov * cov);
    return {std::log(mean) - 0.5 * s2, std::sqrt(s2)};
}

inline GaussianParameters gaussian_parameters(double mean, double cov, SigmaMode mode)
{
    if (mode == SigmaMode::MomentMatch) return lognormal_from_moments(mean, cov);
    if (!(mean > 0.0)) throw std::invalid_argument("gaussian_parameters: mean must be > 0");
    if (!(cov >= 0.0)) throw std::invalid_argument("gaussian_parameters: cov must be >= 0");
    return {std::log(mean) - 0.5 * cov * cov, cov};
}

inline double covariance(Point x, Point y, const CovarianceSpec& spec)
{
    const double d = std::abs(x.x - y.x) + std::abs(x.y - y.y);
    return spec.sigma * spec.sigma * std::exp(-d / spec.correlation_length);
}

struct KLExpansion {
    double mean = 0.0;                // g_0, spatially constant
    Vector eigenvalues;               // retained, descending
    Vector all_eigenvalues;           // full discrete spectrum, descending
    std::vector<Vector> modes;        // g_i = sqrt(lambda_i) phi_i at the nodes
    std::vector<Vector> eigenfunctions;  // phi_i at the nodes, W-orthonormal

    std::size_t size() const { return modes.size(); }

    /// Sum of retained eigenvalues over the full trace.
    double energy_fraction() const
    {
        double kept = 0.0, total = 0.0;
        for (double l : eigenvalues) kept += l;
        for (double l : all_eigenvalues) total += l;
        return total > 0.0 ? kept / total : 1.0;
    }
};

/// Lumped-mass Galerkin discretization of the covariance eigenproblem:
/// W^{1/2} C W^{1/2} z = lambda z, phi = W^{-1/2} z.
inline KLExpansion discrete_kl(const Mesh& mesh, const CovarianceSpec& spec, std::size_t modes, double mean = 0.0)
{
    spec.validate();
    const std::size_t n = mesh.node_count();
    if (modes > n) throw std::invalid_argument("discrete_kl: more modes requested than nodes");
    const Vector w = mesh.lumped_mass();
    Vector sw(n);
    for (std::size_t i = 0; i < n; ++i) sw[i] = std::sqrt(w[i]);
    DenseMatrix b(n, n);
    const auto& x = mesh.nodes();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j) b(i, j) = b(j, i) = sw[i] * covariance(x[i], x[j], spec) * sw[j];

    KLExpansion kl;
    kl.mean = mean;
    if (modes == 0 && spec.sigma == 0.0) return kl;
    const SymEigResult eig = sym_eig(b);
    kl.all_eigenvalues = eig.values;
    const double top = eig.values.empty() ? 0.0 : eig.values.front();
    for (std::size_t m = 0; m < modes; ++m) {
        const double lambda = eig.values[m];
        if (!(lambda > 1e-12 * top))
            throw std::runtime_error("discrete_kl: only " + std::to_string(m) + " positive eigenvalues, " +
                                     std::to_string(modes) + " requested");
        Vector phi(n), g(n);
        for (std::size_t i = 0; i < n; ++i) {
            phi[i] = eig.vectors(i, m) / sw[i];
            g[i] = std::sqrt(lambda) * phi[i];
        }
        kl.eigenvalues.push_back(lambda);
        kl.eigenfunctions.push_back(std::move(phi));
        kl.modes.push_back(std::move(g));
    }
    return kl;
}

/// CSV: node id, x, y, g_1..g_N
inline void write_kl_csv(std::ostream& os, const Mesh& mesh, const KLExpansion& kl)
{
    os << "node,x,y";
    for (std::size_t m = 0; m < kl.size(); ++m) os << ",g_" << m + 1;
    os << '\n';
    for (std::size_t i = 0; i < mesh.node_count(); ++i) {
        os << i << ',' << format_real(mesh.nodes()[i].x) << ',' << format_real(mesh.nodes()[i].y);
        for (const auto& g : kl.modes) os << ',' << format_real(g[i]);
        os << '\n';
    }
}

/// Chaos coefficient of exp(g0 + sum_d g_d xi_d) for multi-index m at one point:
/// prod_d g_d^{m_d} / m_d!  *  exp(g0 + |g|^2 / 2).
inline double lognormal_chaos_coefficient(const MultiIndex& m, double mean, std::span<const double> g)
{
    if (g.size() != m.size()) throw DimensionError("lognormal_chaos_coefficient: dimension mismatch");
    double sq = 0.0;
    for (double v : g) sq += v * v;
    double c = std::exp(mean + 0.5 * sq);
    for (std::size_t d = 0; d < m.size(); ++d)
        for (int p = 1; p <= m[d]; ++p) c *= g[d] / p;
    return c;
}

/// values[i][q] = k_i at quadrature point q.
struct CoefficientFields {
    std::vector<Vector> values;

    std::size_t size() const { return values.size(); }
};

inline CoefficientFields gpc_coefficients(const KLExpansion& kl, const MultiIndexSet& basis, const Mesh& mesh)
{
    if (static_cast<std::size_t>(basis.dimension()) != kl.size())
        throw std::invalid_argument("gpc_coefficients: basis dimension must equal the number of KL modes");
    std::vector<Vector> at_quad;
    for (const auto& g : kl.modes) at_quad.push_back(mesh.interpolate(g));
    const std::size_t nq = mesh.quadrature().size();
    CoefficientFields out;
    out.values.assign(basis.size(), Vector(nq, 0.0));
    Vector gq(kl.size());
    for (std::size_t q = 0; q < nq; ++q) {
        for (std::size_t d = 0; d < kl.size(); ++d) gq[d] = at_quad[d][q];
        for (std::size_t i = 0; i < basis.size(); ++i)
            out.values[i][q] = lognormal_chaos_coefficient(basis[i], kl.mean, gq);
    }
    return out;
}

/// Nodal exp(g(x, xi)).
inline Vector sample_field(const KLExpansion& kl, std::span<const double> xi)
{
    if (xi.size() != kl.size()) throw DimensionError("sample_field: length(xi) must equal the number of modes");
    const std::size_t n = kl.modes.empty() ? 0 : kl.modes.front().size();
    Vector out(n);
    for (std::size_t i = 0; i < n; ++i) {
        double g = kl.mean;
        for (std::size_t d = 0; d < kl.size(); ++d) g += xi[d] * kl.modes[d][i];
        out[i] = std::exp(g);
    }
    return out;
}

/// sum_i k_i psi_i(xi) for the chaos coefficients of one point.
inline double evaluate_chaos_sum(const MultiIndexSet& basis, std::span<const double> coeffs, std::span<const double> xi)
{
    if (coeffs.size() != basis.size()) throw DimensionError("evaluate_chaos_sum: coefficient count mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < basis.size(); ++i) s += coeffs[i] * hermite_eval(basis[i], xi);
    return s;
}

}  // namespace sgfem
