#include <gtest/gtest.h>

#include "precond_oracles.hpp"

using namespace sgfem;
using sgtest::SmallCase;

using sgtest::dense_ahgs;
using sgtest::dense_gs;
using sgtest::dense_hs;
using sgtest::dense_kron;

namespace {

double rel_matrix_diff(const DenseMatrix& a, const DenseMatrix& b) { return sgtest::max_abs_diff(a, b) / b.max_abs(); }

}  // namespace

class PrecondOracle : public ::testing::TestWithParam<SmallCase> {};

TEST_P(PrecondOracle, GaussSeidelMatchesSplitting)
{
    const auto prob = sgtest::small_problem(GetParam());
    const auto& op = prob.A();
    for (const auto& trunc : {op.full_truncation(), standard_truncation(op.dimension(), 1)}) {
        const auto m = make_preconditioner(PrecondKind::GaussSeidel, op, trunc);
        EXPECT_LE(rel_matrix_diff(probe(*m, op.size()), dense_gs(op, trunc)), 1e-11) << trunc.describe();
    }
}

TEST_P(PrecondOracle, ApproxHierGaussSeidelMatchesLevelSplitting)
{
    const auto prob = sgtest::small_problem(GetParam());
    const auto& op = prob.A();
    for (const auto& trunc : {op.full_truncation(), standard_truncation(op.dimension(), 1)}) {
        const auto m = make_preconditioner(PrecondKind::ApproxHierGaussSeidel, op, trunc);
        EXPECT_LE(rel_matrix_diff(probe(*m, op.size()), dense_ahgs(op, trunc)), 1e-11) << trunc.describe();
    }
}

TEST_P(PrecondOracle, KroneckerMatchesDenseKronecker)
{
    const auto prob = sgtest::small_problem(GetParam());
    const auto& op = prob.A();
    const auto m = make_preconditioner(PrecondKind::Kronecker, op, op.full_truncation());
    EXPECT_LE(rel_matrix_diff(probe(*m, op.size()), dense_kron(op)), 1e-11);
}

TEST_P(PrecondOracle, HierSchurMatchesStageComposition)
{
    const auto prob = sgtest::small_problem(GetParam());
    const auto& op = prob.A();
    for (const auto& trunc : {op.full_truncation(), standard_truncation(op.dimension(), 1)}) {
        for (bool approx : {false, true}) {
            const auto m = make_preconditioner(approx ? PrecondKind::ApproxHierSchur : PrecondKind::HierSchur, op, trunc);
            EXPECT_LE(rel_matrix_diff(probe(*m, op.size()), dense_hs(op, trunc, approx)), 1e-11)
                << trunc.describe() << (approx ? " ahS" : " hS");
        }
    }
}

TEST_P(PrecondOracle, MeanBasedIsScaledBlockSolve)
{
    const auto prob = sgtest::small_problem(GetParam());
    const auto& op = prob.A();
    const std::size_t nd = op.ndof();
    const auto k0inv = inverse(op.stiffness(0).to_dense());
    DenseMatrix oracle(op.size(), op.size());
    for (std::size_t j = 0; j < op.blocks(); ++j) {
        const double g = basis_norm_sq(op.tensor().inner_basis()[j]);
        for (std::size_t r = 0; r < nd; ++r)
            for (std::size_t s = 0; s < nd; ++s) oracle(j * nd + r, j * nd + s) = k0inv(r, s) / g;
    }
    const auto m = make_preconditioner(PrecondKind::MeanBased, op, op.full_truncation());
    EXPECT_LE(rel_matrix_diff(probe(*m, op.size()), oracle), 1e-12);
}

TEST_P(PrecondOracle, ZeroTruncationCoincidence)
{
    const auto prob = sgtest::small_problem(GetParam());
    const auto& op = prob.A();
    const auto t0 = standard_truncation(op.dimension(), 0);
    const auto ahs = probe(*make_preconditioner(PrecondKind::ApproxHierSchur, op, t0), op.size());
    const auto gs = probe(*make_preconditioner(PrecondKind::GaussSeidel, op, t0), op.size());
    const auto ahgs = probe(*make_preconditioner(PrecondKind::ApproxHierGaussSeidel, op, t0), op.size());
    EXPECT_LE(sgtest::max_abs_diff(ahs, gs), 1e-12 * gs.max_abs());
    EXPECT_LE(sgtest::max_abs_diff(ahgs, gs), 1e-12 * gs.max_abs());
    // all three reduce to block-diagonal solves with the full diagonal blocks
    const DenseMatrix blockdiag = inverse(sgtest::block_filter(sgtest::dense_global(op), op.ndof(),
                                                               [](std::size_t j, std::size_t k) { return j == k; }));
    EXPECT_LE(rel_matrix_diff(gs, blockdiag), 1e-11);
}

TEST_P(PrecondOracle, SymmetricProbes)
{
    const auto prob = sgtest::small_problem(GetParam());
    const auto& op = prob.A();
    const auto x = sgtest::random_vector(op.size(), 11), y = sgtest::random_vector(op.size(), 12);
    for (PrecondKind k : all_preconditioners()) {
        const auto m = make_preconditioner(k, op, op.full_truncation());
        const double lhs = dot(m->apply(x), y), rhs = dot(x, m->apply(y));
        EXPECT_LE(std::abs(lhs - rhs), 1e-10 * norm2(x) * norm2(y)) << display_name(k);
        const auto p = probe(*m, op.size());
        EXPECT_TRUE(p.is_symmetric(1e-10)) << display_name(k);
    }
}

TEST_P(PrecondOracle, Linearity)
{
    const auto prob = sgtest::small_problem(GetParam());
    const auto& op = prob.A();
    const auto r = sgtest::random_vector(op.size(), 21), s = sgtest::random_vector(op.size(), 22);
    Vector comb(op.size());
    for (std::size_t i = 0; i < comb.size(); ++i) comb[i] = 2.5 * r[i] - 0.75 * s[i];
    for (PrecondKind k : all_preconditioners()) {
        const auto m = make_preconditioner(k, op, standard_truncation(op.dimension(), 1));
        const auto mr = m->apply(r), ms = m->apply(s), mc = m->apply(comb);
        Vector expect(op.size());
        for (std::size_t i = 0; i < expect.size(); ++i) expect[i] = 2.5 * mr[i] - 0.75 * ms[i];
        EXPECT_LE(sgtest::max_abs_diff(mc, expect), 1e-12 * sgtest::max_abs(expect)) << display_name(k);
    }
}

INSTANTIATE_TEST_SUITE_P(SmallInstances, PrecondOracle,
                         ::testing::Values(SmallCase{1, 1, 2}, SmallCase{2, 1, 3}, SmallCase{2, 2, 3}),
                         [](const auto& info) {
                             return "N" + std::to_string(info.param.N) + "P" + std::to_string(info.param.P) + "n" +
                                    std::to_string(info.param.n);
                         });

TEST(MeanBased, InverseRoundTrip)
{
    const auto prob = sgtest::small_problem({2, 2, 3});
    const auto& op = prob.A();
    const auto e = sgtest::random_vector(op.size(), 3);
    Vector r(op.size());
    for (std::size_t j = 0; j < op.blocks(); ++j) {
        const auto k0e = spmv(op.stiffness(0), op.block(std::span<const double>(e), j));
        const double g = op.tensor()(0, j, j);
        for (std::size_t l = 0; l < op.ndof(); ++l) r[j * op.ndof() + l] = g * k0e[l];
    }
    const auto m = make_preconditioner(PrecondKind::MeanBased, op, op.full_truncation());
    EXPECT_LE(sgtest::max_abs_diff(m->apply(r), e), 1e-12);
}

TEST(MeanBased, DeterministicCaseIsExact)
{
    const auto prob = sgtest::small_problem({1, 0, 4});
    const auto& op = prob.A();
    ASSERT_EQ(op.blocks(), 1u);
    const auto x = sgtest::random_vector(op.size(), 5);
    const auto m = make_preconditioner(PrecondKind::MeanBased, op, op.full_truncation());
    EXPECT_LE(sgtest::max_abs_diff(m->apply(op.apply(x)), x), 1e-12);
}

TEST(Kronecker, UnitWeightsReduceToMeanBased)
{
    const auto prob = sgtest::small_problem({2, 2, 3});
    const auto& op = prob.A();
    Vector w(op.coefficients(), 0.0);
    w[0] = 1.0;
    const KroneckerPreconditioner k(op, w);
    const MeanBasedPreconditioner mb(op);
    const auto r = sgtest::random_vector(op.size(), 8);
    EXPECT_LE(sgtest::max_abs_diff(k.apply(r), mb.apply(r)), 1e-14 * sgtest::max_abs(mb.apply(r)));
    EXPECT_DOUBLE_EQ(kronecker_weights(op)[0], 1.0);
}

TEST(Hierarchical, SingleDimensionCoincidences)
{
    const auto prob = sgtest::small_problem({1, 3, 3});
    const auto& op = prob.A();
    for (const auto& trunc : {op.full_truncation(), standard_truncation(1, 2)}) {
        const auto hs = probe(*make_preconditioner(PrecondKind::HierSchur, op, trunc), op.size());
        const auto ahs = probe(*make_preconditioner(PrecondKind::ApproxHierSchur, op, trunc), op.size());
        const auto gs = probe(*make_preconditioner(PrecondKind::GaussSeidel, op, trunc), op.size());
        const auto ahgs = probe(*make_preconditioner(PrecondKind::ApproxHierGaussSeidel, op, trunc), op.size());
        EXPECT_LE(sgtest::max_abs_diff(hs, ahs), 1e-12 * hs.max_abs());
        EXPECT_LE(sgtest::max_abs_diff(gs, ahgs), 1e-12 * gs.max_abs());
    }
}

TEST(Hierarchical, InnerCgLevelSolvesApproachDirect)
{
    const auto prob = sgtest::small_problem({2, 2, 3});
    const auto& op = prob.A();
    LevelSolve inner;
    inner.mode = LevelSolve::Mode::InnerCG;
    inner.tol = 1e-13;
    const auto direct = make_preconditioner(PrecondKind::HierSchur, op, op.full_truncation());
    const auto iter = make_preconditioner(PrecondKind::HierSchur, op, op.full_truncation(), inner);
    const auto r = sgtest::random_vector(op.size(), 6);
    const auto a = direct->apply(r), b = iter->apply(r);
    EXPECT_LE(sgtest::max_abs_diff(a, b), 1e-9 * sgtest::max_abs(a));
}

TEST(Names, RoundTrip)
{
    for (PrecondKind k : all_preconditioners()) {
        EXPECT_EQ(parse_precond(to_string(k)), k);
        EXPECT_EQ(parse_precond(display_name(k)), k);
    }
    EXPECT_THROW(parse_precond("jacobi"), std::invalid_argument);
}

TEST(Apply, RejectsWrongLength)
{
    const auto prob = sgtest::small_problem({1, 1, 2});
    for (PrecondKind k : all_preconditioners()) {
        const auto m = make_preconditioner(k, prob.A(), prob.A().full_truncation());
        EXPECT_THROW(m->apply(Vector(3, 1.0)), DimensionError) << display_name(k);
    }
}
