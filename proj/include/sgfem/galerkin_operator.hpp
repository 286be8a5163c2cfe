#pragma once

// Matrix-free stochastic Galerkin operator A with blocks
//   K^{(j,k)} = sum_i c_ijk K_i,   j, k = 0..M,  i = 0..M'.
// Global vectors are block-major: entry (j, l) lives at j * N_dof + l.

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sgfem/chaos_basis.hpp"
#include "sgfem/linalg.hpp"

namespace sgfem {

/// Half-open range of stochastic block indices.
struct BlockRange {
    std::size_t first = 0;
    std::size_t last = 0;

    std::size_t size() const { return last - first; }
    bool empty() const { return last <= first; }
    bool contains(std::size_t j) const { return j >= first && j < last; }
};

/// Blocks grouped by total degree: level l covers [offset(l), offset(l+1)).
class LevelMap {
public:
    LevelMap() = default;
    explicit LevelMap(const MultiIndexSet& basis)
    {
        for (int l = 0; l <= basis.degree() + 1; ++l) offsets_.push_back(basis.level_offset(l));
    }

    int levels() const { return static_cast<int>(offsets_.size()) - 1; }  // P + 1
    std::size_t offset(int l) const { return offsets_.at(static_cast<std::size_t>(l)); }
    std::size_t count(int l) const { return offset(l + 1) - offset(l); }
    BlockRange range(int l) const { return {offset(l), offset(l + 1)}; }
    /// Blocks of all levels below l.
    BlockRange below(int l) const { return {0, offset(l)}; }
    /// Blocks of all levels above l.
    BlockRange above(int l) const { return {offset(l + 1), offsets_.back()}; }
    const std::vector<std::size_t>& offsets() const { return offsets_; }

private:
    std::vector<std::size_t> offsets_;
};

inline LevelMap level_structure(int dimension, int degree) { return LevelMap(MultiIndexSet(dimension, degree)); }

enum class TruncationKind { Full, Standard, Adaptive };

/// Retained coefficient indices; 0 is always present, sorted ascending.
class TruncationSet {
public:
    TruncationSet(std::vector<std::size_t> indices, TruncationKind kind, double parameter)
        : indices_(std::move(indices)), kind_(kind), parameter_(parameter)
    {
        std::sort(indices_.begin(), indices_.end());
        indices_.erase(std::unique(indices_.begin(), indices_.end()), indices_.end());
        if (indices_.empty() || indices_.front() != 0) indices_.insert(indices_.begin(), 0);
        mask_.assign(indices_.back() + 1, 0);
        for (std::size_t i : indices_) mask_[i] = 1;
    }

    const std::vector<std::size_t>& indices() const { return indices_; }
    std::size_t size() const { return indices_.size(); }
    bool contains(std::size_t i) const { return i < mask_.size() && mask_[i] != 0; }
    TruncationKind kind() const { return kind_; }
    /// l_t for standard truncation, tau for adaptive.
    double parameter() const { return parameter_; }

    std::string describe() const
    {
        switch (kind_) {
        case TruncationKind::Full: return "full";
        case TruncationKind::Standard: return "lt=" + std::to_string(static_cast<int>(parameter_));
        case TruncationKind::Adaptive: return "tau=" + format_real(parameter_);
        }
        return "?";
    }

private:
    std::vector<std::size_t> indices_;
    std::vector<char> mask_;
    TruncationKind kind_;
    double parameter_;
};

/// {0..M_t} with M_t + 1 = (N + l_t)! / (N! l_t!).
inline TruncationSet standard_truncation(int dimension, int lt)
{
    if (lt < 0) throw std::invalid_argument("standard_truncation: l_t must be >= 0");
    std::vector<std::size_t> idx(basis_count(dimension, lt));
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    return TruncationSet(std::move(idx), TruncationKind::Standard, lt);
}

/// {0} plus every i with max_jk(c_ijk) * norm(K_i) >= tau.
inline TruncationSet adaptive_truncation(double tau, std::span<const double> norms, const CijkTensor& c)
{
    if (!(tau >= 0.0)) throw std::invalid_argument("adaptive_truncation: tau must be >= 0");
    if (norms.size() != c.outer_size()) throw DimensionError("adaptive_truncation: one norm per K_i required");
    std::vector<std::size_t> idx{0};
    for (std::size_t i = 1; i < c.outer_size(); ++i)
        if (c.max_in_slice(i) * norms[i] >= tau) idx.push_back(i);
    return TruncationSet(std::move(idx), TruncationKind::Adaptive, tau);
}

struct MatvecCounters {
    std::size_t products = 0;     // K_i * vector products actually performed
    std::size_t summations = 0;   // tensor entries visited (c_ijk K_i v_k terms)

    MatvecCounters& operator+=(const MatvecCounters& o)
    {
        products += o.products;
        summations += o.summations;
        return *this;
    }
};

enum class MatrixNorm { Frobenius, Two };

inline MatrixNorm parse_matrix_norm(const std::string& s)
{
    if (s == "frob") return MatrixNorm::Frobenius;
    if (s == "two") return MatrixNorm::Two;
    throw std::invalid_argument("unknown norm '" + s + "' (expected frob|two)");
}

/// Largest |eigenvalue| of a symmetric sparse matrix: Lanczos with full
/// reorthogonalization, stopped once the extreme Ritz value settles.
inline double two_norm_estimate(const SparseMatrixCSR& a, int max_steps = 80, double tol = 1e-12)
{
    const std::size_t n = a.cols();
    if (n == 0) return 0.0;
    const std::size_t steps = std::min<std::size_t>(n, static_cast<std::size_t>(max_steps));
    std::vector<Vector> q;
    Vector alpha, beta;
    Vector x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = 1.0 + 0.1 * static_cast<double>(i % 7);
    double nx = norm2(x);
    for (double& v : x) v /= nx;
    q.push_back(x);
    Vector w(n);
    double prev = -1.0;
    auto ritz_max = [&] {
        const std::size_t m = alpha.size();
        DenseMatrix t(m, m);
        for (std::size_t i = 0; i < m; ++i) {
            t(i, i) = alpha[i];
            if (i + 1 < m) t(i, i + 1) = t(i + 1, i) = beta[i];
        }
        const auto e = sym_eig(t);
        return std::max(std::abs(e.values.front()), std::abs(e.values.back()));
    };
    for (std::size_t k = 0; k < steps; ++k) {
        spmv(a, q[k], w);
        alpha.push_back(dot(w, q[k]));
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& qi : q) {
                const double h = dot(w, qi);
                for (std::size_t i = 0; i < n; ++i) w[i] -= h * qi[i];
            }
        const double b = norm2(w);
        const bool last = k + 1 == steps || b <= 1e-14 * std::abs(alpha.front()) || b == 0.0;
        if (last || (k + 1) % 5 == 0) {
            const double cur = ritz_max();
            if (last || std::abs(cur - prev) <= tol * cur) return cur;
            prev = cur;
        }
        beta.push_back(b);
        for (double& v : w) v /= b;
        q.push_back(w);
    }
    return ritz_max();
}

class GalerkinOperator {
public:
    GalerkinOperator(std::vector<SparseMatrixCSR> stiffness, CijkTensor tensor)
        : k_(std::move(stiffness)), c_(std::move(tensor)), levels_(c_.inner_basis())
    {
        if (k_.empty()) throw std::invalid_argument("GalerkinOperator: no stiffness matrices");
        if (k_.size() != c_.outer_size())
            throw DimensionError("GalerkinOperator: need one stiffness matrix per coefficient basis function");
        ndof_ = k_.front().rows();
        for (const auto& k : k_)
            if (!k.same_pattern(k_.front())) throw std::invalid_argument("GalerkinOperator: K_i must share one sparsity pattern");
        build_groups();
    }

    GalerkinOperator(const GalerkinOperator&) = delete;
    GalerkinOperator& operator=(const GalerkinOperator&) = delete;

    std::size_t ndof() const { return ndof_; }
    std::size_t blocks() const { return c_.inner_size(); }        // M + 1
    std::size_t coefficients() const { return c_.outer_size(); }  // M' + 1
    std::size_t size() const { return ndof_ * blocks(); }
    int dimension() const { return c_.inner_basis().dimension(); }
    int degree() const { return c_.inner_basis().degree(); }
    const CijkTensor& tensor() const { return c_; }
    const LevelMap& levels() const { return levels_; }
    const std::vector<SparseMatrixCSR>& stiffness() const { return k_; }
    const SparseMatrixCSR& stiffness(std::size_t i) const { return k_.at(i); }

    TruncationSet full_truncation() const
    {
        std::vector<std::size_t> idx(coefficients());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        return TruncationSet(std::move(idx), TruncationKind::Full, static_cast<double>(c_.outer_basis().degree()));
    }

    std::span<double> block(std::span<double> v, std::size_t j) const { return v.subspan(j * ndof_, ndof_); }
    std::span<const double> block(std::span<const double> v, std::size_t j) const { return v.subspan(j * ndof_, ndof_); }

    /// w_(j) += alpha * sum_{k in cols} sum_{i in trunc} c_ijk K_i v_(k)  for j in rows.
    /// K_i v_(k) is formed once per (i, k) and shared across the row blocks.
    MatvecCounters tmatvec_add(BlockRange rows, BlockRange cols, const TruncationSet& trunc, std::span<const double> v,
                               std::span<double> w, double alpha = 1.0) const
    {
        if (v.size() != size() || w.size() != size()) throw DimensionError("tmatvec: vector length mismatch");
        if (rows.last > blocks() || cols.last > blocks()) throw DimensionError("tmatvec: block range out of bounds");
        MatvecCounters cnt;
        if (rows.empty() || cols.empty()) return cnt;
        Vector y(ndof_);
        for (std::size_t k = cols.first; k < cols.last; ++k) {
            const auto vk = block(v, k);
            for (std::size_t g = col_group_offsets_[k]; g < col_group_offsets_[k + 1]; ++g) {
                const Group& grp = groups_[g];
                if (!trunc.contains(grp.i)) continue;
                const GroupEntry* first = group_entries_.data() + grp.begin;
                const GroupEntry* last = group_entries_.data() + grp.end;
                const GroupEntry* lo = std::lower_bound(first, last, rows.first,
                                                        [](const GroupEntry& e, std::size_t j) { return e.j < j; });
                if (lo == last || lo->j >= rows.last) continue;
                spmv(k_[grp.i], vk, y);
                ++cnt.products;
                for (const GroupEntry* e = lo; e != last && e->j < rows.last; ++e) {
                    axpy(alpha * e->c, y, block(w, e->j));
                    ++cnt.summations;
                }
            }
        }
        counters_ += cnt;
        return cnt;
    }

    /// Truncated MAT-VEC returning a global-length vector, zero outside `rows`.
    Vector tmatvec(BlockRange rows, BlockRange cols, const TruncationSet& trunc, std::span<const double> v) const
    {
        Vector w(size(), 0.0);
        tmatvec_add(rows, cols, trunc, v, w);
        return w;
    }

    /// Full operator w = A v.
    void apply(std::span<const double> v, std::span<double> w) const
    {
        std::fill(w.begin(), w.end(), 0.0);
        tmatvec_add(all(), all(), full_, v, w);
    }

    Vector apply(std::span<const double> v) const
    {
        Vector w(size());
        apply(v, w);
        return w;
    }

    BlockRange all() const { return {0, blocks()}; }

    /// K^{(j,k)} with the full coefficient sum.
    SparseMatrixCSR assemble_block(std::size_t j, std::size_t k) const
    {
        if (j >= blocks() || k >= blocks()) throw std::out_of_range("assemble_block: block index out of range");
        Vector vals(k_.front().nnz(), 0.0);
        for (std::size_t i = 0; i < coefficients(); ++i) {
            const double cijk = c_(i, j, k);
            if (cijk != 0.0) axpy(cijk, k_[i].values(), vals);
        }
        return k_.front().with_values(std::move(vals));
    }

    SparseMatrixCSR assemble_diag_block(std::size_t j) const { return assemble_block(j, j); }

    /// D_l over the blocks of level l, block-major inside the level, full coefficient sum.
    SparseMatrixCSR assemble_level_block(int level) const { return assemble_range_block(levels_.range(level)); }

    SparseMatrixCSR assemble_range_block(BlockRange r) const
    {
        if (r.last > blocks() || r.empty()) throw std::out_of_range("assemble_range_block: bad block range");
        const std::size_t nb = r.size();
        const std::size_t nnz = k_.front().nnz();
        std::vector<Vector> vals(nb * nb);
        for (const auto& e : c_.entries()) {
            if (!r.contains(e.j) || !r.contains(e.k)) continue;
            Vector& dst = vals[(e.j - r.first) * nb + (e.k - r.first)];
            if (dst.empty()) dst.assign(nnz, 0.0);
            axpy(e.value, k_[e.i].values(), dst);
        }
        const auto& off = k_.front().offsets();
        const auto& col = k_.front().columns();
        std::vector<std::size_t> offsets{0}, columns;
        std::vector<double> values;
        for (std::size_t bj = 0; bj < nb; ++bj)
            for (std::size_t row = 0; row < ndof_; ++row) {
                for (std::size_t bk = 0; bk < nb; ++bk) {
                    const Vector& src = vals[bj * nb + bk];
                    if (src.empty()) continue;
                    for (std::size_t p = off[row]; p < off[row + 1]; ++p) {
                        columns.push_back(bk * ndof_ + col[p]);
                        values.push_back(src[p]);
                    }
                }
                offsets.push_back(columns.size());
            }
        return SparseMatrixCSR(nb * ndof_, nb * ndof_, std::move(offsets), std::move(columns), std::move(values));
    }

    /// Explicit global matrix; refuses when the dimension exceeds `cap`.
    DenseMatrix assemble_global_dense(std::size_t cap = 5000) const
    {
        if (size() > cap)
            throw std::length_error("assemble_global_dense: dimension " + std::to_string(size()) + " exceeds cap " +
                                    std::to_string(cap) + "; raise the cap to at least " + std::to_string(size()));
        DenseMatrix a(size(), size());
        for (const auto& e : c_.entries()) {
            const auto& k = k_[e.i];
            for (std::size_t r = 0; r < ndof_; ++r)
                for (std::size_t p = k.offsets()[r]; p < k.offsets()[r + 1]; ++p)
                    a(e.j * ndof_ + r, e.k * ndof_ + k.columns()[p]) += e.value * k.values()[p];
        }
        return a;
    }

    /// Cached factorization of K^{(j,j)}.
    std::shared_ptr<const Factorization> diag_factor(std::size_t j) const
    {
        std::lock_guard<std::mutex> lock(cache_mutex_);
        auto it = diag_cache_.find(j);
        if (it != diag_cache_.end()) return it->second;
        auto f = std::make_shared<const Factorization>(factorize_checked(assemble_diag_block(j), "diagonal block " + std::to_string(j)));
        diag_cache_.emplace(j, f);
        return f;
    }

    /// Cached factorization of the level block D_l.
    std::shared_ptr<const Factorization> level_factor(int level) const
    {
        std::lock_guard<std::mutex> lock(cache_mutex_);
        auto it = level_cache_.find(level);
        if (it != level_cache_.end()) return it->second;
        auto f = std::make_shared<const Factorization>(
            factorize_checked(assemble_level_block(level), "level block " + std::to_string(level)));
        level_cache_.emplace(level, f);
        return f;
    }

    Vector stiffness_norms(MatrixNorm kind = MatrixNorm::Frobenius) const
    {
        Vector out;
        out.reserve(k_.size());
        for (const auto& k : k_) out.push_back(kind == MatrixNorm::Frobenius ? k.frobenius() : two_norm_estimate(k));
        return out;
    }

    MatvecCounters counters() const { return counters_; }
    void reset_counters() const { counters_ = {}; }

private:
    struct GroupEntry {
        std::size_t j;
        double c;
    };
    struct Group {
        std::size_t i;
        std::size_t begin;
        std::size_t end;
    };

    static Factorization factorize_checked(const SparseMatrixCSR& a, const std::string& what)
    {
        try {
            return factorize(a, FactorKind::Auto);
        } catch (const FactorizationError& e) {
            throw FactorizationError(what + ": " + e.what());
        }
    }

    // Tensor entries regrouped by (k, i), each group sorted by j.
    void build_groups()
    {
        std::vector<CijkEntry> sorted = c_.entries();
        std::sort(sorted.begin(), sorted.end(), [](const CijkEntry& a, const CijkEntry& b) {
            if (a.k != b.k) return a.k < b.k;
            if (a.i != b.i) return a.i < b.i;
            return a.j < b.j;
        });
        col_group_offsets_.assign(blocks() + 1, 0);
        for (std::size_t p = 0; p < sorted.size();) {
            const std::size_t k = sorted[p].k, i = sorted[p].i;
            Group g{i, group_entries_.size(), 0};
            while (p < sorted.size() && sorted[p].k == k && sorted[p].i == i) {
                group_entries_.push_back({sorted[p].j, sorted[p].value});
                ++p;
            }
            g.end = group_entries_.size();
            groups_.push_back(g);
            col_group_offsets_[k + 1] = groups_.size();
        }
        for (std::size_t k = 1; k <= blocks(); ++k)
            col_group_offsets_[k] = std::max(col_group_offsets_[k], col_group_offsets_[k - 1]);
    }

    std::vector<SparseMatrixCSR> k_;
    CijkTensor c_;
    LevelMap levels_;
    std::size_t ndof_ = 0;
    std::vector<Group> groups_;
    std::vector<GroupEntry> group_entries_;
    std::vector<std::size_t> col_group_offsets_;
    TruncationSet full_{full_indices(), TruncationKind::Full, 0.0};

    std::vector<std::size_t> full_indices() const
    {
        std::vector<std::size_t> idx(c_.outer_size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        return idx;
    }

    mutable MatvecCounters counters_;
    mutable std::mutex cache_mutex_;
    mutable std::map<std::size_t, std::shared_ptr<const Factorization>> diag_cache_;
    mutable std::map<int, std::shared_ptr<const Factorization>> level_cache_;
};

/// Distinct (j, k) pairs with any retained coefficient, and retained tensor entries.
struct CouplingPattern {
    std::size_t nnz = 0;
    std::size_t entries = 0;
};

inline CouplingPattern coupling_pattern(const CijkTensor& c, const TruncationSet& trunc)
{
    std::vector<char> seen(c.inner_size() * c.inner_size(), 0);
    CouplingPattern out;
    for (const auto& e : c.entries()) {
        if (!trunc.contains(e.i)) continue;
        ++out.entries;
        char& s = seen[e.j * c.inner_size() + e.k];
        if (!s) {
            s = 1;
            ++out.nnz;
        }
    }
    return out;
}

}  // namespace sgfem
