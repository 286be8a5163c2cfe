#pragma once

// Multivariate Hermite polynomial chaos in the probabilists' (unnormalized)
// convention: E[He_n^2] = n!. Multi-indices are graded by total degree and
// ordered lexicographically descending within a degree, so every lower-degree
// set is a prefix of every higher-degree set.

#include <cstdint>
#include <map>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include "sgfem/linalg.hpp"
#include "sgfem/matrix_market.hpp"

namespace sgfem {

using MultiIndex = std::vector<int>;

/// (n + p)! / (n! p!) without intermediate overflow for the sizes used here.
inline std::size_t basis_count(int n, int p)
{
    if (n < 0 || p < 0) throw std::invalid_argument("basis_count: negative argument");
    std::uint64_t c = 1;
    for (int k = 1; k <= p; ++k) {
        c = c * static_cast<std::uint64_t>(n + k) / static_cast<std::uint64_t>(k);
        if (c > (std::uint64_t{1} << 40)) throw std::overflow_error("basis_count: basis too large");
    }
    return static_cast<std::size_t>(c);
}

class MultiIndexSet {
public:
    MultiIndexSet(int dimension, int degree) : dim_(dimension), degree_(degree)
    {
        if (dimension < 1) throw std::invalid_argument("MultiIndexSet: dimension must be >= 1");
        if (degree < 0) throw std::invalid_argument("MultiIndexSet: degree must be >= 0");
        indices_.reserve(basis_count(dimension, degree));
        level_offsets_.push_back(0);
        MultiIndex current(static_cast<std::size_t>(dim_), 0);
        for (int d = 0; d <= degree_; ++d) {
            fill_degree(current, 0, d);
            level_offsets_.push_back(indices_.size());
        }
        for (std::size_t i = 0; i < indices_.size(); ++i) lookup_.emplace(indices_[i], i);
    }

    int dimension() const { return dim_; }
    int degree() const { return degree_; }
    std::size_t size() const { return indices_.size(); }
    const MultiIndex& operator[](std::size_t i) const { return indices_.at(i); }
    const std::vector<MultiIndex>& indices() const { return indices_; }

    /// Indices of total degree l occupy [level_offset(l), level_offset(l+1)).
    std::size_t level_offset(int l) const { return level_offsets_.at(static_cast<std::size_t>(l)); }

    int total_degree(std::size_t i) const
    {
        int s = 0;
        for (int v : indices_.at(i)) s += v;
        return s;
    }

    /// Position of a multi-index, or size() if absent.
    std::size_t find(const MultiIndex& m) const
    {
        auto it = lookup_.find(m);
        return it == lookup_.end() ? indices_.size() : it->second;
    }

private:
    void fill_degree(MultiIndex& cur, std::size_t pos, int remaining)
    {
        if (pos + 1 == cur.size()) {
            cur[pos] = remaining;
            indices_.push_back(cur);
            return;
        }
        for (int v = remaining; v >= 0; --v) {
            cur[pos] = v;
            fill_degree(cur, pos + 1, remaining - v);
        }
        cur[pos] = 0;
    }

    int dim_;
    int degree_;
    std::vector<MultiIndex> indices_;
    std::vector<std::size_t> level_offsets_;
    std::map<MultiIndex, std::size_t> lookup_;
};

inline MultiIndexSet multi_index_set(int dimension, int degree) { return MultiIndexSet(dimension, degree); }

/// Probabilists' Hermite polynomial He_n(x).
inline double hermite_eval_1d(int n, double x)
{
    if (n < 0) throw std::invalid_argument("hermite_eval_1d: negative degree");
    if (n == 0) return 1.0;
    double prev = 1.0, cur = x;
    for (int k = 1; k < n; ++k) {
        const double next = x * cur - k * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

/// psi_m(xi) = prod_d He_{m_d}(xi_d)
inline double hermite_eval(const MultiIndex& m, std::span<const double> xi)
{
    if (xi.size() != m.size()) throw DimensionError("hermite_eval: dimension mismatch");
    double v = 1.0;
    for (std::size_t d = 0; d < m.size(); ++d) v *= hermite_eval_1d(m[d], xi[d]);
    return v;
}

inline double factorial(int n)
{
    double f = 1.0;
    for (int k = 2; k <= n; ++k) f *= k;
    return f;
}

/// E[He_a He_b He_c] for a standard Gaussian.
inline double triple_product_1d(int a, int b, int c)
{
    if (a < 0 || b < 0 || c < 0) throw std::invalid_argument("triple_product_1d: negative degree");
    const int total = a + b + c;
    if (total % 2 != 0) return 0.0;
    const int s = total / 2;
    if (s < a || s < b || s < c) return 0.0;
    // a! b! c! / ((s-a)! (s-b)! (s-c)!) = C(a, s-b) * b! * c!/(s-a)!
    double v = 1.0;
    const int kb = s - b;
    for (int k = 1; k <= kb; ++k) v = v * (a - kb + k) / k;
    v *= factorial(b);
    for (int k = s - a + 1; k <= c; ++k) v *= k;
    return v;
}

/// E[psi_i psi_j psi_k] as the product of univariate factors.
inline double triple_product(const MultiIndex& i, const MultiIndex& j, const MultiIndex& k)
{
    double v = 1.0;
    for (std::size_t d = 0; d < i.size(); ++d) {
        v *= triple_product_1d(i[d], j[d], k[d]);
        if (v == 0.0) return 0.0;
    }
    return v;
}

/// E[psi_j^2] = prod_d j_d!
inline double basis_norm_sq(const MultiIndex& m)
{
    double v = 1.0;
    for (int e : m) v *= factorial(e);
    return v;
}

struct CijkEntry {
    std::size_t i;
    std::size_t j;
    std::size_t k;
    double value;
};

/// Sparse c_ijk = E[psi_i psi_j psi_k], i over the coefficient basis (degree P'),
/// j and k over the solution basis (degree P). Sorted by (i, j, k).
class CijkTensor {
public:
    CijkTensor(MultiIndexSet outer, MultiIndexSet inner) : outer_(std::move(outer)), inner_(std::move(inner))
    {
        if (outer_.dimension() != inner_.dimension()) throw std::invalid_argument("CijkTensor: dimension mismatch");
        for (std::size_t i = 0; i < outer_.size(); ++i)
            for (std::size_t j = 0; j < inner_.size(); ++j)
                for (std::size_t k = 0; k < inner_.size(); ++k) {
                    const double v = triple_product(outer_[i], inner_[j], inner_[k]);
                    if (v != 0.0) entries_.push_back({i, j, k, v});
                }
        row_offsets_.assign(outer_.size() + 1, 0);
        for (const auto& e : entries_) ++row_offsets_[e.i + 1];
        for (std::size_t i = 0; i < outer_.size(); ++i) row_offsets_[i + 1] += row_offsets_[i];
        max_value_.assign(outer_.size(), 0.0);
        for (const auto& e : entries_) max_value_[e.i] = std::max(max_value_[e.i], e.value);
    }

    std::size_t outer_size() const { return outer_.size(); }  // M' + 1
    std::size_t inner_size() const { return inner_.size(); }  // M + 1
    const MultiIndexSet& outer_basis() const { return outer_; }
    const MultiIndexSet& inner_basis() const { return inner_; }
    const std::vector<CijkEntry>& entries() const { return entries_; }
    std::size_t stored_entries() const { return entries_.size(); }

    /// Entries with first index i.
    std::span<const CijkEntry> slice(std::size_t i) const
    {
        if (i >= outer_.size()) throw std::out_of_range("CijkTensor::slice: index out of range");
        return {entries_.data() + row_offsets_[i], row_offsets_[i + 1] - row_offsets_[i]};
    }

    double max_in_slice(std::size_t i) const { return max_value_.at(i); }

    double operator()(std::size_t i, std::size_t j, std::size_t k) const
    {
        for (const auto& e : slice(i))
            if (e.j == j && e.k == k) return e.value;
        return 0.0;
    }

private:
    MultiIndexSet outer_;
    MultiIndexSet inner_;
    std::vector<CijkEntry> entries_;
    std::vector<std::size_t> row_offsets_;
    std::vector<double> max_value_;
};

inline CijkTensor build_c_tensor(int dimension, int degree, int coeff_degree)
{
    if (coeff_degree < degree) throw std::invalid_argument("build_c_tensor: coefficient degree must be >= solution degree");
    return CijkTensor(MultiIndexSet(dimension, coeff_degree), MultiIndexSet(dimension, degree));
}

/// G_alpha(j, k) = c_{alpha j k}
inline DenseMatrix g_matrix(std::size_t alpha, const CijkTensor& c)
{
    if (alpha >= c.outer_size()) throw std::out_of_range("g_matrix: alpha out of range");
    DenseMatrix g(c.inner_size(), c.inner_size());
    for (const auto& e : c.slice(alpha)) g(e.j, e.k) = e.value;
    return g;
}

/// One "i j k value" line per stored entry.
inline void write_tensor_triples(std::ostream& os, const CijkTensor& c)
{
    for (const auto& e : c.entries()) os << e.i << ' ' << e.j << ' ' << e.k << ' ' << format_real(e.value) << '\n';
}

inline std::vector<CijkEntry> read_tensor_triples(std::istream& is)
{
    std::vector<CijkEntry> out;
    CijkEntry e{};
    std::string value;
    while (is >> e.i >> e.j >> e.k >> value) {
        e.value = std::stod(value);
        out.push_back(e);
    }
    return out;
}

}  // namespace sgfem
