#pragma once

// Preconditioners for the stochastic Galerkin operator. Every kind except the
// mean-based and Kronecker ones uses truncated MAT-VECs for its off-diagonal
// couplings; diagonal blocks and level blocks always carry the full sum.

#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sgfem/galerkin_operator.hpp"
#include "sgfem/krylov.hpp"
#include "sgfem/linalg.hpp"

namespace sgfem {

enum class PrecondKind { MeanBased, Kronecker, HierSchur, ApproxHierSchur, GaussSeidel, ApproxHierGaussSeidel };

inline const std::vector<PrecondKind>& all_preconditioners()
{
    static const std::vector<PrecondKind> kinds{PrecondKind::MeanBased,   PrecondKind::Kronecker,
                                                PrecondKind::HierSchur,   PrecondKind::ApproxHierSchur,
                                                PrecondKind::GaussSeidel, PrecondKind::ApproxHierGaussSeidel};
    return kinds;
}

inline const char* to_string(PrecondKind k)
{
    switch (k) {
    case PrecondKind::MeanBased: return "mb";
    case PrecondKind::Kronecker: return "kron";
    case PrecondKind::HierSchur: return "hs";
    case PrecondKind::ApproxHierSchur: return "ahs";
    case PrecondKind::GaussSeidel: return "gs";
    case PrecondKind::ApproxHierGaussSeidel: return "ahgs";
    }
    return "?";
}

/// Column label used in reports.
inline const char* display_name(PrecondKind k)
{
    switch (k) {
    case PrecondKind::MeanBased: return "mb";
    case PrecondKind::Kronecker: return "K";
    case PrecondKind::HierSchur: return "hS";
    case PrecondKind::ApproxHierSchur: return "ahS";
    case PrecondKind::GaussSeidel: return "GS";
    case PrecondKind::ApproxHierGaussSeidel: return "ahGS";
    }
    return "?";
}

inline PrecondKind parse_precond(const std::string& s)
{
    for (PrecondKind k : all_preconditioners())
        if (s == to_string(k) || s == display_name(k)) return k;
    throw std::invalid_argument("unknown preconditioner '" + s + "' (expected mb|kron|hs|ahs|gs|ahgs)");
}

/// How hS performs its level solves with D_l.
struct LevelSolve {
    enum class Mode { Direct, InnerCG } mode = Mode::Direct;
    double tol = 1e-8;
    int maxit = 500;
};

class Preconditioner {
public:
    virtual ~Preconditioner() = default;
    virtual PrecondKind kind() const = 0;
    /// v = M^{-1} r; r and v are global-length and must not alias.
    virtual void apply(std::span<const double> r, std::span<double> v) const = 0;

    Vector apply(std::span<const double> r) const
    {
        Vector v(r.size());
        apply(r, v);
        return v;
    }

    LinearMap as_map() const
    {
        return [this](std::span<const double> r, std::span<double> v) { apply(r, v); };
    }
};

// ---------------------------------------------------------------------------

/// v_(j) = K_0^{-1} r_(j) / (G_0)_jj
class MeanBasedPreconditioner final : public Preconditioner {
public:
    explicit MeanBasedPreconditioner(const GalerkinOperator& op) : op_(op), k0_(op.diag_factor(0))
    {
        for (std::size_t j = 0; j < op.blocks(); ++j) scale_.push_back(1.0 / op.tensor()(0, j, j));
    }

    PrecondKind kind() const override { return PrecondKind::MeanBased; }

    using Preconditioner::apply;
    void apply(std::span<const double> r, std::span<double> v) const override
    {
        check(r, v);
        for (std::size_t j = 0; j < op_.blocks(); ++j) {
            auto vj = op_.block(v, j);
            const auto rj = op_.block(r, j);
            std::copy(rj.begin(), rj.end(), vj.begin());
            k0_->solve_in_place(vj);
            for (double& x : vj) x *= scale_[j];
        }
    }

private:
    void check(std::span<const double> r, std::span<double> v) const
    {
        if (r.size() != op_.size() || v.size() != op_.size()) throw DimensionError("preconditioner: length mismatch");
    }

    const GalerkinOperator& op_;
    std::shared_ptr<const Factorization> k0_;
    Vector scale_;
};

/// tr(K_a^T K_0) / tr(K_0^T K_0) for every a; one fused pass over the shared pattern.
inline Vector kronecker_weights(const GalerkinOperator& op)
{
    const auto& k0 = op.stiffness(0).values();
    const double denom = dot(k0, k0);
    Vector w;
    w.reserve(op.coefficients());
    for (const auto& k : op.stiffness()) w.push_back(dot(k.values(), k0) / denom);
    return w;
}

/// G = sum_a w_a G_a
inline DenseMatrix kronecker_g(const GalerkinOperator& op, std::span<const double> weights)
{
    if (weights.size() != op.coefficients()) throw DimensionError("kronecker_g: one weight per coefficient required");
    DenseMatrix g(op.blocks(), op.blocks());
    for (const auto& e : op.tensor().entries()) g(e.j, e.k) += weights[e.i] * e.value;
    return g;
}

/// (G ⊗ K_0)^{-1} = (G^{-1} ⊗ I)(I ⊗ K_0^{-1})
class KroneckerPreconditioner final : public Preconditioner {
public:
    explicit KroneckerPreconditioner(const GalerkinOperator& op) : KroneckerPreconditioner(op, kronecker_weights(op)) {}

    KroneckerPreconditioner(const GalerkinOperator& op, std::span<const double> weights)
        : op_(op), k0_(op.diag_factor(0)), g_(kronecker_g(op, weights)), g_factor_(factorize(g_))
    {
    }

    PrecondKind kind() const override { return PrecondKind::Kronecker; }
    const DenseMatrix& g() const { return g_; }

    using Preconditioner::apply;
    void apply(std::span<const double> r, std::span<double> v) const override
    {
        if (r.size() != op_.size() || v.size() != op_.size()) throw DimensionError("preconditioner: length mismatch");
        std::copy(r.begin(), r.end(), v.begin());
        for (std::size_t j = 0; j < op_.blocks(); ++j) k0_->solve_in_place(op_.block(v, j));
        const std::size_t nb = op_.blocks(), nd = op_.ndof();
        Vector col(nb);
        for (std::size_t l = 0; l < nd; ++l) {
            for (std::size_t j = 0; j < nb; ++j) col[j] = v[j * nd + l];
            g_factor_.solve_in_place(col);
            for (std::size_t j = 0; j < nb; ++j) v[j * nd + l] = col[j];
        }
    }

private:
    const GalerkinOperator& op_;
    std::shared_ptr<const Factorization> k0_;
    DenseMatrix g_;
    Factorization g_factor_;
};

// ---------------------------------------------------------------------------

namespace detail {

/// Block-diagonal solve with the full diagonal blocks over a range of blocks.
inline void diag_block_solve(const GalerkinOperator& op, BlockRange blocks, std::span<double> x)
{
    for (std::size_t j = blocks.first; j < blocks.last; ++j) op.diag_factor(j)->solve_in_place(op.block(x, j));
}

/// Solve with a level block given by `range`, placed at the range's position of a global vector.
inline void level_solve_direct(const GalerkinOperator& op, int level, std::span<double> x)
{
    const BlockRange r = op.levels().range(level);
    op.level_factor(level)->solve_in_place(x.subspan(r.first * op.ndof(), r.size() * op.ndof()));
}

inline void level_solve_inner_cg(const GalerkinOperator& op, int level, const LevelSolve& cfg, std::span<double> x)
{
    const BlockRange r = op.levels().range(level);
    const std::size_t n = op.size();
    const std::size_t off = r.first * op.ndof(), len = r.size() * op.ndof();
    const TruncationSet full = op.full_truncation();
    Vector gin(n, 0.0), gout(n, 0.0);
    auto apply_a = [&](std::span<const double> in, std::span<double> out) {
        std::fill(gin.begin(), gin.end(), 0.0);
        std::copy(in.begin(), in.end(), gin.begin() + static_cast<std::ptrdiff_t>(off));
        std::fill(gout.begin(), gout.end(), 0.0);
        op.tmatvec_add(r, r, full, gin, gout);
        std::copy_n(gout.begin() + static_cast<std::ptrdiff_t>(off), len, out.begin());
    };
    auto apply_m = [&](std::span<const double> in, std::span<double> out) {
        std::copy(in.begin(), in.end(), out.begin());
        for (std::size_t j = 0; j < r.size(); ++j) op.diag_factor(r.first + j)->solve_in_place(out.subspan(j * op.ndof(), op.ndof()));
    };
    CgOptions opt;
    opt.tol = cfg.tol;
    opt.maxit = cfg.maxit;
    const Vector rhs(x.begin() + static_cast<std::ptrdiff_t>(off), x.begin() + static_cast<std::ptrdiff_t>(off + len));
    const SolveResult s = flexible_cg(apply_a, apply_m, rhs, opt);
    std::copy(s.x.begin(), s.x.end(), x.begin() + static_cast<std::ptrdiff_t>(off));
}

}  // namespace detail

/// Hierarchical Schur complement preconditioner over degree levels. With
/// `approximate` every level solve uses the level's diagonal blocks only.
class HierarchicalSchurPreconditioner final : public Preconditioner {
public:
    HierarchicalSchurPreconditioner(const GalerkinOperator& op, TruncationSet trunc, bool approximate,
                                    LevelSolve level_solve = {})
        : op_(op), trunc_(std::move(trunc)), approximate_(approximate), level_solve_(level_solve)
    {
        op_.diag_factor(0);
        const int top = op_.levels().levels() - 1;
        for (int l = 1; l <= top; ++l) {
            if (approximate_)
                for (std::size_t j = op_.levels().offset(l); j < op_.levels().offset(l + 1); ++j) op_.diag_factor(j);
            else if (level_solve_.mode == LevelSolve::Mode::Direct)
                op_.level_factor(l);
        }
    }

    PrecondKind kind() const override { return approximate_ ? PrecondKind::ApproxHierSchur : PrecondKind::HierSchur; }

    using Preconditioner::apply;
    void apply(std::span<const double> r, std::span<double> v) const override
    {
        if (r.size() != op_.size() || v.size() != op_.size()) throw DimensionError("preconditioner: length mismatch");
        const LevelMap& lv = op_.levels();
        const int top = lv.levels() - 1;
        const std::size_t nd = op_.ndof();
        Vector w(r.begin(), r.end());
        Vector t(op_.size(), 0.0);

        // pre-correction: r_{l-1} = r_l^{l-1} - B_l D_l^{-1} r_l^l, l = P..1
        for (int l = top; l >= 1; --l) {
            const BlockRange rl = lv.range(l);
            std::fill(t.begin(), t.end(), 0.0);
            std::copy_n(w.begin() + static_cast<std::ptrdiff_t>(rl.first * nd), rl.size() * nd,
                        t.begin() + static_cast<std::ptrdiff_t>(rl.first * nd));
            solve_level(l, t);
            op_.tmatvec_add(lv.below(l), rl, trunc_, t, w, -1.0);
        }

        // A_0 v_0 = g_0
        std::fill(v.begin(), v.end(), 0.0);
        {
            auto v0 = op_.block(v, 0);
            std::copy_n(w.begin(), nd, v0.begin());
            op_.diag_factor(0)->solve_in_place(v0);
        }

        // post-correction: v_l^l = D_l^{-1} (r_l^l - C_l v_l^{l-1}), l = 1..P
        for (int l = 1; l <= top; ++l) {
            const BlockRange rl = lv.range(l);
            std::copy_n(w.begin() + static_cast<std::ptrdiff_t>(rl.first * nd), rl.size() * nd,
                        v.begin() + static_cast<std::ptrdiff_t>(rl.first * nd));
            op_.tmatvec_add(rl, lv.below(l), trunc_, v, v, -1.0);
            solve_level(l, v);
        }
    }

private:
    void solve_level(int l, std::span<double> x) const
    {
        if (approximate_)
            detail::diag_block_solve(op_, op_.levels().range(l), x);
        else if (level_solve_.mode == LevelSolve::Mode::Direct)
            detail::level_solve_direct(op_, l, x);
        else
            detail::level_solve_inner_cg(op_, l, level_solve_, x);
    }

    const GalerkinOperator& op_;
    TruncationSet trunc_;
    bool approximate_;
    LevelSolve level_solve_;
};

/// Symmetric block Gauss-Seidel sweep over a partition of the blocks into
/// contiguous groups: forward over the groups, then backward. Each group is
/// solved with its diagonal blocks only (exact when groups are single blocks).
/// Off-group couplings use truncated MAT-VECs starting from v = 0.
class SymmetricGaussSeidelPreconditioner final : public Preconditioner {
public:
    /// hierarchical = false: one group per block (GS); true: one group per degree level (ahGS).
    SymmetricGaussSeidelPreconditioner(const GalerkinOperator& op, TruncationSet trunc, bool hierarchical)
        : op_(op), trunc_(std::move(trunc)), hierarchical_(hierarchical)
    {
        if (hierarchical_) {
            for (int l = 0; l < op.levels().levels(); ++l) groups_.push_back(op.levels().range(l));
        } else {
            for (std::size_t j = 0; j < op.blocks(); ++j) groups_.push_back({j, j + 1});
        }
        for (std::size_t j = 0; j < op.blocks(); ++j) op.diag_factor(j);
    }

    PrecondKind kind() const override
    {
        return hierarchical_ ? PrecondKind::ApproxHierGaussSeidel : PrecondKind::GaussSeidel;
    }

    using Preconditioner::apply;
    void apply(std::span<const double> r, std::span<double> v) const override
    {
        if (r.size() != op_.size() || v.size() != op_.size()) throw DimensionError("preconditioner: length mismatch");
        const std::size_t nd = op_.ndof();
        const std::size_t last = op_.blocks();
        std::fill(v.begin(), v.end(), 0.0);
        Vector lower(op_.size(), 0.0);  // sum over earlier groups, forward values
        Vector upper(op_.size(), 0.0);  // sum over later groups, backward values

        auto update = [&](const BlockRange& g, bool with_upper) {
            for (std::size_t p = g.first * nd; p < g.last * nd; ++p)
                v[p] = r[p] - lower[p] - (with_upper ? upper[p] : 0.0);
            detail::diag_block_solve(op_, g, v);
        };

        for (const BlockRange& g : groups_) {
            update(g, false);
            op_.tmatvec_add({g.last, last}, g, trunc_, v, lower);
        }
        for (std::size_t gi = groups_.size(); gi-- > 0;) {
            const BlockRange& g = groups_[gi];
            update(g, true);
            op_.tmatvec_add({0, g.first}, g, trunc_, v, upper);
        }
    }

private:
    const GalerkinOperator& op_;
    TruncationSet trunc_;
    bool hierarchical_;
    std::vector<BlockRange> groups_;
};

inline std::unique_ptr<Preconditioner> make_preconditioner(PrecondKind kind, const GalerkinOperator& op,
                                                           const TruncationSet& trunc, LevelSolve level_solve = {})
{
    switch (kind) {
    case PrecondKind::MeanBased: return std::make_unique<MeanBasedPreconditioner>(op);
    case PrecondKind::Kronecker: return std::make_unique<KroneckerPreconditioner>(op);
    case PrecondKind::HierSchur: return std::make_unique<HierarchicalSchurPreconditioner>(op, trunc, false, level_solve);
    case PrecondKind::ApproxHierSchur: return std::make_unique<HierarchicalSchurPreconditioner>(op, trunc, true);
    case PrecondKind::GaussSeidel: return std::make_unique<SymmetricGaussSeidelPreconditioner>(op, trunc, false);
    case PrecondKind::ApproxHierGaussSeidel:
        return std::make_unique<SymmetricGaussSeidelPreconditioner>(op, trunc, true);
    }
    throw std::invalid_argument("make_preconditioner: unknown kind");
}

/// Dense M^{-1} obtained by applying the preconditioner to unit vectors.
inline DenseMatrix probe(const Preconditioner& m, std::size_t n)
{
    DenseMatrix out(n, n);
    Vector e(n, 0.0), col(n);
    for (std::size_t c = 0; c < n; ++c) {
        e[c] = 1.0;
        m.apply(e, col);
        e[c] = 0.0;
        for (std::size_t r = 0; r < n; ++r) out(r, c) = col[r];
    }
    return out;
}

}  // namespace sgfem
