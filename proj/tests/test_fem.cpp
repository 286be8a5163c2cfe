#include <gtest/gtest.h>

#include <sstream>

#include "test_support.hpp"

using namespace sgfem;

namespace {

Vector ones_at_quadrature(const Mesh& m) { return Vector(m.quadrature().size(), 1.0); }

}  // namespace

TEST(Mesh, Counts)
{
    EXPECT_EQ(build_mesh(10).node_count(), 121u);
    EXPECT_EQ(build_mesh(10).node_count() * 70, 8470u);
    EXPECT_EQ(build_mesh(5).node_count() * 70, 2520u);
    const Mesh one(1);
    EXPECT_EQ(one.node_count(), 4u);
    EXPECT_EQ(one.element_count(), 1u);
    EXPECT_EQ(one.boundary_nodes().size(), 4u);
    EXPECT_EQ(Mesh(4).boundary_nodes().size(), 16u);
    EXPECT_THROW(Mesh(0), std::invalid_argument);
}

TEST(Mesh, QuadratureWeightsSumToElementArea)
{
    const Mesh m(7);
    std::vector<double> area(m.element_count(), 0.0);
    for (const auto& q : m.quadrature()) area[q.element] += q.weight;
    for (double a : area) EXPECT_NEAR(a, m.h() * m.h(), 1e-15);
    double total = 0.0;
    for (double w : m.lumped_mass()) total += w;
    EXPECT_NEAR(total, 1.0, 1e-14);
}

TEST(Mesh, InterpolationReproducesBilinearFields)
{
    const Mesh m(3);
    Vector nodal(m.node_count());
    for (std::size_t i = 0; i < nodal.size(); ++i) nodal[i] = 1.0 + 2.0 * m.nodes()[i].x - m.nodes()[i].y + 3.0 * m.nodes()[i].x * m.nodes()[i].y;
    const auto at_q = m.interpolate(nodal);
    for (std::size_t q = 0; q < at_q.size(); ++q) {
        const auto p = m.quadrature()[q].at;
        EXPECT_NEAR(at_q[q], 1.0 + 2.0 * p.x - p.y + 3.0 * p.x * p.y, 1e-14);
    }
}

TEST(Stiffness, UnitElementMatrix)
{
    const Mesh m(1);
    const auto k = assemble_stiffness(m, ones_at_quadrature(m)).to_dense();
    // nodes: 0 (0,0), 1 (1,0), 2 (0,1), 3 (1,1)
    for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(k(i, i), 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(k(0, 1), -1.0 / 6.0, 1e-15);
    EXPECT_NEAR(k(0, 2), -1.0 / 6.0, 1e-15);
    EXPECT_NEAR(k(0, 3), -1.0 / 3.0, 1e-15);
    EXPECT_NEAR(k(1, 2), -1.0 / 3.0, 1e-15);
}

TEST(Stiffness, RowSumsVanishAndExactSymmetry)
{
    const Mesh m(6);
    Vector coeff(m.quadrature().size());
    for (std::size_t q = 0; q < coeff.size(); ++q) coeff[q] = 1.0 + m.quadrature()[q].at.x * m.quadrature()[q].at.y;
    const auto k1 = assemble_stiffness(m, ones_at_quadrature(m));
    const auto row = spmv(k1, Vector(m.node_count(), 1.0));
    for (double r : row) EXPECT_NEAR(r, 0.0, 1e-14);
    const auto kv = assemble_stiffness(m, coeff);
    EXPECT_TRUE(kv.is_symmetric(0.0));
    EXPECT_TRUE(kv.same_pattern(k1));
    EXPECT_THROW(assemble_stiffness(m, Vector(3, 1.0)), DimensionError);
}

TEST(Load, PartitionOfUnity)
{
    double s = 0.0;
    for (double v : assemble_load(Mesh(5), 1.0)) s += v;
    EXPECT_NEAR(s, 1.0, 1e-14);
    for (double v : assemble_load(Mesh(5), 0.0)) EXPECT_EQ(v, 0.0);
    for (double v : assemble_load(Mesh(1), 1.0)) EXPECT_NEAR(v, 0.25, 1e-15);
}

TEST(Dirichlet, MatchesEliminatedSystem)
{
    const Mesh m(5);
    Vector coeff(m.quadrature().size());
    for (std::size_t q = 0; q < coeff.size(); ++q) coeff[q] = 2.0 + std::sin(3.0 * m.quadrature()[q].at.x);
    const auto k = assemble_stiffness(m, coeff);
    const auto f = assemble_load(m, 1.0);
    const auto [kt, ft] = apply_dirichlet(k, f, m);
    EXPECT_TRUE(kt.is_symmetric(0.0));
    EXPECT_EQ(kt.rows(), m.node_count());
    const auto u = Factorization::cholesky(kt).solve(ft);
    for (std::size_t b : m.boundary_nodes()) EXPECT_EQ(u[b], 0.0);

    std::vector<std::size_t> interior;
    for (std::size_t i = 0; i < m.node_count(); ++i)
        if (!m.is_boundary(i)) interior.push_back(i);
    const auto kd = k.to_dense();
    DenseMatrix kr(interior.size(), interior.size());
    Vector fr(interior.size());
    for (std::size_t a = 0; a < interior.size(); ++a) {
        fr[a] = f[interior[a]];
        for (std::size_t b = 0; b < interior.size(); ++b) kr(a, b) = kd(interior[a], interior[b]);
    }
    const auto ur = factorize(kr).solve(fr);
    for (std::size_t a = 0; a < interior.size(); ++a) EXPECT_NEAR(u[interior[a]], ur[a], 1e-12);
}

TEST(Dirichlet, PatchTestAndSpd)
{
    const Mesh m(4);
    auto [k, f] = apply_dirichlet(assemble_stiffness(m, ones_at_quadrature(m)), assemble_load(m, 0.0), m);
    EXPECT_NO_THROW(Factorization::cholesky(k));
    for (double v : Factorization::cholesky(k).solve(f)) EXPECT_EQ(v, 0.0);
}

TEST(Dirichlet, ZeroDiagonalVariantKeepsPattern)
{
    const Mesh m(3);
    auto k = assemble_stiffness(m, ones_at_quadrature(m));
    const auto pattern = k;
    apply_dirichlet_in_place(k, {}, m, 0.0);
    EXPECT_TRUE(k.same_pattern(pattern));
    for (std::size_t b : m.boundary_nodes()) EXPECT_EQ(k.at(b, b), 0.0);
}

TEST(Convergence, EnergyIncreasesMonotonicallyUnderRefinement)
{
    double prev = 0.0;
    for (int n : {2, 4, 8, 16}) {
        const Mesh m(n);
        const auto [k, f] = apply_dirichlet(assemble_stiffness(m, ones_at_quadrature(m)), assemble_load(m, 1.0), m);
        const double energy = dot(f, Factorization::cholesky(k).solve(f));
        EXPECT_GT(energy, prev) << "n=" << n;
        prev = energy;
    }
}

TEST(Mesh, CsvExport)
{
    std::ostringstream os;
    Mesh(1).write_csv(os);
    EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "node,x,y,boundary");
}
