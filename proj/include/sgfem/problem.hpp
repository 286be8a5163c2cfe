#pragma once

// Assembles the full stochastic Galerkin system for -div(k grad u) = f on the
// unit square with homogeneous Dirichlet data and lognormal k.

#include <memory>
#include <stdexcept>
#include <vector>

#include "sgfem/chaos_basis.hpp"
#include "sgfem/fem.hpp"
#include "sgfem/galerkin_operator.hpp"
#include "sgfem/random_field.hpp"

namespace sgfem {

struct ProblemSpec {
    int dimension = 4;          // N
    int degree = 4;             // P; the coefficient uses 2P
    int mesh = 10;              // elements per side
    double cov = 1.0;           // coefficient of variation of k (fraction)
    double mean = 1.0;          // mean of k
    double correlation_length = 0.5;
    double source = 1.0;        // constant f
    SigmaMode sigma_mode = SigmaMode::MomentMatch;

    int coefficient_degree() const { return 2 * degree; }
};

struct StochasticProblem {
    ProblemSpec spec;
    Mesh mesh;
    GaussianParameters gaussian;
    KLExpansion kl;
    std::unique_ptr<GalerkinOperator> op;
    Vector rhs;  // global, only block 0 nonzero

    const GalerkinOperator& A() const { return *op; }
};

/// Boundary rows of K_0 get a unit diagonal; those of K_i, i > 0, are zeroed.
/// Boundary unknowns then decouple with blocks c_0jj I, which keeps A SPD.
inline std::vector<SparseMatrixCSR> build_stiffness_set(const Mesh& mesh, const CoefficientFields& fields)
{
    const StiffnessAssembler assembler(mesh);
    std::vector<SparseMatrixCSR> ks;
    ks.reserve(fields.size());
    for (std::size_t i = 0; i < fields.size(); ++i) {
        SparseMatrixCSR k = assembler.assemble(fields.values[i]);
        apply_dirichlet_in_place(k, {}, mesh, i == 0 ? 1.0 : 0.0);
        ks.push_back(std::move(k));
    }
    return ks;
}

inline StochasticProblem build_problem(const ProblemSpec& spec)
{
    if (spec.dimension < 1) throw std::invalid_argument("build_problem: N must be >= 1");
    if (spec.degree < 0) throw std::invalid_argument("build_problem: P must be >= 0");
    StochasticProblem p{spec, Mesh(spec.mesh), {}, {}, nullptr, {}};
    p.gaussian = gaussian_parameters(spec.mean, spec.cov, spec.sigma_mode);
    const CovarianceSpec cov{p.gaussian.sigma, spec.correlation_length};
    if (p.gaussian.sigma > 0.0) {
        p.kl = discrete_kl(p.mesh, cov, static_cast<std::size_t>(spec.dimension), p.gaussian.mean);
    } else {
        p.kl.mean = p.gaussian.mean;
        for (int d = 0; d < spec.dimension; ++d) p.kl.modes.push_back(Vector(p.mesh.node_count(), 0.0));
    }

    CijkTensor tensor = build_c_tensor(spec.dimension, spec.degree, spec.coefficient_degree());
    const CoefficientFields fields = gpc_coefficients(p.kl, tensor.outer_basis(), p.mesh);
    p.op = std::make_unique<GalerkinOperator>(build_stiffness_set(p.mesh, fields), std::move(tensor));

    Vector f = assemble_load(p.mesh, spec.source);
    for (std::size_t b : p.mesh.boundary_nodes()) f[b] = 0.0;
    p.rhs.assign(p.op->size(), 0.0);
    std::copy(f.begin(), f.end(), p.rhs.begin());
    return p;
}

}  // namespace sgfem
