#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "test_support.hpp"

using namespace sgfem;

TEST(LognormalMoments, UnitMeanUnitCov)
{
    const auto g = lognormal_from_moments(1.0, 1.0);
    EXPECT_NEAR(g.sigma, std::sqrt(std::log(2.0)), 1e-15);
    EXPECT_NEAR(g.sigma, 0.832555, 1e-6);
    EXPECT_NEAR(g.mean, -std::log(2.0) / 2.0, 1e-15);
}

TEST(LognormalMoments, SmallCovLimit)
{
    const auto g = lognormal_from_moments(std::exp(0.5), 1e-9);
    EXPECT_NEAR(g.mean, 0.5, 1e-12);
    EXPECT_NEAR(g.sigma, 0.0, 1e-8);
    const auto z = lognormal_from_moments(2.0, 0.0);
    EXPECT_EQ(z.sigma, 0.0);
    EXPECT_THROW(lognormal_from_moments(0.0, 1.0), std::invalid_argument);
}

TEST(LognormalMoments, MonteCarloRoundTrip)
{
    for (double cov : {0.25, 1.0}) {
        const double mu = 1.5;
        const auto g = lognormal_from_moments(mu, cov);
        std::mt19937_64 rng(20240611);
        std::normal_distribution<double> n01;
        const int samples = 1000000;
        double s = 0.0, s2 = 0.0;
        for (int i = 0; i < samples; ++i) {
            const double k = std::exp(g.mean + g.sigma * n01(rng));
            s += k;
            s2 += k * k;
        }
        const double mean = s / samples;
        const double sd = std::sqrt(s2 / samples - mean * mean);
        EXPECT_NEAR(mean / mu, 1.0, 0.01) << "cov " << cov;
        EXPECT_NEAR(sd / mean / cov, 1.0, 0.01) << "cov " << cov;
    }
}

TEST(GaussianSigmaMode, UsesCovAsGaussianSigma)
{
    const auto g = gaussian_parameters(1.0, 1.0, SigmaMode::GaussianSigma);
    EXPECT_DOUBLE_EQ(g.sigma, 1.0);
    EXPECT_DOUBLE_EQ(g.mean, -0.5);
    EXPECT_EQ(parse_sigma_mode("moment-match"), SigmaMode::MomentMatch);
    EXPECT_THROW(parse_sigma_mode("nope"), std::invalid_argument);
}

TEST(Covariance, KernelValues)
{
    const CovarianceSpec spec{0.8, 0.5};
    const Point a{0.1, 0.2};
    EXPECT_DOUBLE_EQ(covariance(a, a, spec), 0.64);
    EXPECT_NEAR(covariance(a, Point{0.4, 0.4}, spec), 0.64 * std::exp(-1.0), 1e-15);
    const Point b{0.7, 0.9};
    const double c1 = 0.64 * std::exp(-std::abs(a.x - b.x) / 0.5);
    const double c2 = 0.64 * std::exp(-std::abs(a.y - b.y) / 0.5);
    EXPECT_NEAR(covariance(a, b, spec), c1 * c2 / 0.64, 1e-15);
}

TEST(DiscreteKL, TraceOrthonormalityOrdering)
{
    const Mesh mesh(8);
    const double sigma = 0.9;
    const auto kl = discrete_kl(mesh, CovarianceSpec{sigma, 0.5}, 6);
    double total = 0.0;
    for (double l : kl.all_eigenvalues) total += l;
    EXPECT_NEAR(total, sigma * sigma, 0.01 * sigma * sigma);
    for (std::size_t i = 1; i < kl.eigenvalues.size(); ++i) EXPECT_GE(kl.eigenvalues[i - 1], kl.eigenvalues[i]);
    EXPECT_GT(kl.eigenvalues.back(), 0.0);
    const Vector w = mesh.lumped_mass();
    for (std::size_t a = 0; a < kl.size(); ++a)
        for (std::size_t b = 0; b < kl.size(); ++b) {
            double s = 0.0;
            for (std::size_t n = 0; n < w.size(); ++n) s += kl.eigenfunctions[a][n] * w[n] * kl.eigenfunctions[b][n];
            EXPECT_NEAR(s, a == b ? 1.0 : 0.0, 1e-8);
        }
    for (std::size_t n = 0; n < w.size(); ++n)
        EXPECT_NEAR(kl.modes[0][n], std::sqrt(kl.eigenvalues[0]) * kl.eigenfunctions[0][n], 1e-14);
    EXPECT_GT(kl.energy_fraction(), 0.0);
    EXPECT_LE(kl.energy_fraction(), 1.0);
}

TEST(DiscreteKL, SingleElementLeadingPair)
{
    // four corner nodes, lumped weight 1/4 each; the weighted covariance has
    // constant row sums, so the constant vector is the leading eigenvector
    const Mesh mesh(1);
    const double sigma = 1.3, l = 0.5;
    const auto kl = discrete_kl(mesh, CovarianceSpec{sigma, l}, 1);
    const double e1 = std::exp(-1.0 / l);
    const double expected = 0.25 * sigma * sigma * (1.0 + 2.0 * e1 + e1 * e1);
    EXPECT_NEAR(kl.eigenvalues[0], expected, 1e-13);
    for (double phi : kl.eigenfunctions[0]) EXPECT_NEAR(phi, 1.0, 1e-12);
}

TEST(DiscreteKL, TooManyModesRejected)
{
    const Mesh mesh(1);
    EXPECT_THROW(discrete_kl(mesh, CovarianceSpec{1.0, 0.5}, 5), std::invalid_argument);
}

TEST(ChaosCoefficients, MeanTermAndDeterministicLimit)
{
    const MultiIndexSet basis(2, 4);
    const Vector g{0.3, -0.2};
    EXPECT_NEAR(lognormal_chaos_coefficient(basis[0], -0.1, g), std::exp(-0.1 + 0.5 * (0.09 + 0.04)), 1e-15);
    const Vector zero{0.0, 0.0};
    EXPECT_DOUBLE_EQ(lognormal_chaos_coefficient(basis[0], 0.4, zero), std::exp(0.4));
    for (std::size_t i = 1; i < basis.size(); ++i) EXPECT_EQ(lognormal_chaos_coefficient(basis[i], 0.4, zero), 0.0);
}

TEST(ChaosCoefficients, MatchQuadratureProjection)
{
    const MultiIndexSet basis(2, 4);
    const double g0 = -0.3;
    const Vector g{0.6, -0.4};
    const auto rule = sgtest::gauss_hermite(40);
    for (std::size_t i = 0; i < basis.size(); ++i) {
        double s = 0.0;
        for (std::size_t a = 0; a < rule.nodes.size(); ++a)
            for (std::size_t b = 0; b < rule.nodes.size(); ++b) {
                const Vector xi{rule.nodes[a], rule.nodes[b]};
                s += rule.weights[a] * rule.weights[b] * std::exp(g0 + g[0] * xi[0] + g[1] * xi[1]) *
                     hermite_eval(basis[i], xi);
            }
        const double projection = s / basis_norm_sq(basis[i]);
        EXPECT_NEAR(lognormal_chaos_coefficient(basis[i], g0, g), projection, 1e-10) << "i=" << i;
    }
}

TEST(ChaosCoefficients, FieldsAtQuadraturePoints)
{
    const Mesh mesh(3);
    const auto kl = discrete_kl(mesh, CovarianceSpec{0.7, 0.5}, 2, -0.2);
    const MultiIndexSet basis(2, 2);
    const auto f = gpc_coefficients(kl, basis, mesh);
    ASSERT_EQ(f.size(), basis.size());
    const auto g1 = mesh.interpolate(kl.modes[0]);
    const auto g2 = mesh.interpolate(kl.modes[1]);
    for (std::size_t q = 0; q < mesh.quadrature().size(); ++q) {
        EXPECT_GT(f.values[0][q], 0.0);
        EXPECT_NEAR(f.values[0][q], std::exp(-0.2 + 0.5 * (g1[q] * g1[q] + g2[q] * g2[q])), 1e-14);
        EXPECT_NEAR(f.values[4][q], f.values[0][q] * g1[q] * g2[q], 1e-14);  // index (1,1)
    }
    EXPECT_THROW(gpc_coefficients(kl, MultiIndexSet(3, 2), mesh), std::invalid_argument);
}

TEST(SampleField, ZeroAndSingleMode)
{
    const Mesh mesh(4);
    const auto kl = discrete_kl(mesh, CovarianceSpec{0.5, 0.5}, 1, 0.25);
    for (double v : sample_field(kl, Vector{0.0})) EXPECT_DOUBLE_EQ(v, std::exp(0.25));
    const auto s = sample_field(kl, Vector{1.0});
    for (std::size_t n = 0; n < s.size(); ++n) EXPECT_NEAR(s[n], std::exp(0.25 + kl.modes[0][n]), 1e-14);
    EXPECT_THROW(sample_field(kl, Vector{1.0, 2.0}), DimensionError);
}

TEST(SampleField, ChaosSumConvergesWithDegree)
{
    const Mesh mesh(6);
    const auto gp = lognormal_from_moments(1.0, 1.0);
    const auto kl = discrete_kl(mesh, CovarianceSpec{gp.sigma, 0.5}, 2, gp.mean);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::vector<Vector> xis(10);
    for (auto& xi : xis) xi = {u(rng), u(rng)};
    double prev = std::numeric_limits<double>::infinity();
    for (int pp : {2, 4, 6, 8}) {
        const MultiIndexSet basis(2, pp);
        double worst = 0.0;
        for (const auto& xi : xis) {
            const auto exact = sample_field(kl, xi);
            for (std::size_t n = 0; n < mesh.node_count(); ++n) {
                const Vector g{kl.modes[0][n], kl.modes[1][n]};
                Vector c(basis.size());
                for (std::size_t i = 0; i < basis.size(); ++i) c[i] = lognormal_chaos_coefficient(basis[i], kl.mean, g);
                worst = std::max(worst, std::abs(evaluate_chaos_sum(basis, c, xi) - exact[n]) / exact[n]);
            }
        }
        EXPECT_LT(worst, prev) << "P'=" << pp;
        prev = worst;
    }
}

TEST(KLCsv, HeaderAndRows)
{
    const Mesh mesh(2);
    const auto kl = discrete_kl(mesh, CovarianceSpec{1.0, 0.5}, 2);
    std::ostringstream os;
    write_kl_csv(os, mesh, kl);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, "node,x,y,g_1,g_2");
    int rows = 0;
    while (std::getline(is, line)) ++rows;
    EXPECT_EQ(rows, 9);
}
