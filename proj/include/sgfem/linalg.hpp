#pragma once

// Dense and sparse linear-algebra kernels used throughout the solver:
// row-major dense matrices, CSR sparse matrices, Cholesky / LU
// factorizations and a cyclic Jacobi symmetric eigensolver.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sgfem {

using Vector = std::vector<double>;

class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class FactorizationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline double dot(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size()) throw DimensionError("dot: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

/// y += alpha * x
inline void axpy(double alpha, std::span<const double> x, std::span<double> y)
{
    if (x.size() != y.size()) throw DimensionError("axpy: length mismatch");
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

// ---------------------------------------------------------------------------
// DenseMatrix
// ---------------------------------------------------------------------------

class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
        : rows_(rows), cols_(cols), data_(std::move(values))
    {
        if (data_.size() != rows_ * cols_) throw DimensionError("DenseMatrix: entry count != rows*cols");
    }

    static DenseMatrix identity(std::size_t n)
    {
        DenseMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
    const std::vector<double>& values() const { return data_; }
    std::vector<double>& values() { return data_; }

    Vector multiply(std::span<const double> x) const
    {
        if (x.size() != cols_) throw DimensionError("DenseMatrix::multiply: length(x) != cols");
        Vector y(rows_, 0.0);
        for (std::size_t r = 0; r < rows_; ++r) {
            double s = 0.0;
            for (std::size_t c = 0; c < cols_; ++c) s += data_[r * cols_ + c] * x[c];
            y[r] = s;
        }
        return y;
    }

    DenseMatrix multiply(const DenseMatrix& b) const
    {
        if (cols_ != b.rows_) throw DimensionError("DenseMatrix::multiply: inner dimension mismatch");
        DenseMatrix c(rows_, b.cols_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t k = 0; k < cols_; ++k) {
                const double a = (*this)(i, k);
                if (a == 0.0) continue;
                for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += a * b(k, j);
            }
        return c;
    }

    DenseMatrix transpose() const
    {
        DenseMatrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    double max_abs() const
    {
        double m = 0.0;
        for (double v : data_) m = std::max(m, std::abs(v));
        return m;
    }

    double frobenius() const { return std::sqrt(std::inner_product(data_.begin(), data_.end(), data_.begin(), 0.0)); }

    bool is_symmetric(double tol = 0.0) const
    {
        if (rows_ != cols_) return false;
        const double scale = std::max(1.0, max_abs());
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = i + 1; j < cols_; ++j)
                if (std::abs((*this)(i, j) - (*this)(j, i)) > tol * scale) return false;
        return true;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// ---------------------------------------------------------------------------
// SparseMatrixCSR
// ---------------------------------------------------------------------------

struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
};

class SparseMatrixCSR {
public:
    SparseMatrixCSR() : offsets_(1, 0) {}

    SparseMatrixCSR(std::size_t rows, std::size_t cols, std::vector<std::size_t> offsets,
                    std::vector<std::size_t> columns, std::vector<double> values)
        : rows_(rows), cols_(cols), offsets_(std::move(offsets)), columns_(std::move(columns)),
          values_(std::move(values))
    {
        validate();
    }

    /// Builds from unsorted triplets; duplicates are summed in input order.
    static SparseMatrixCSR from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> entries)
    {
        for (const auto& t : entries)
            if (t.row >= rows || t.col >= cols) throw DimensionError("from_triplets: index out of range");
        std::stable_sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
            return a.row != b.row ? a.row < b.row : a.col < b.col;
        });
        std::vector<std::size_t> offsets(rows + 1, 0);
        std::vector<std::size_t> columns;
        std::vector<double> values;
        columns.reserve(entries.size());
        values.reserve(entries.size());
        std::size_t e = 0;
        for (std::size_t r = 0; r < rows; ++r) {
            while (e < entries.size() && entries[e].row == r) {
                const std::size_t c = entries[e].col;
                double v = 0.0;
                while (e < entries.size() && entries[e].row == r && entries[e].col == c) v += entries[e++].value;
                columns.push_back(c);
                values.push_back(v);
            }
            offsets[r + 1] = columns.size();
        }
        return SparseMatrixCSR(rows, cols, std::move(offsets), std::move(columns), std::move(values));
    }

    static SparseMatrixCSR from_dense(const DenseMatrix& a)
    {
        std::vector<Triplet> t;
        for (std::size_t i = 0; i < a.rows(); ++i)
            for (std::size_t j = 0; j < a.cols(); ++j)
                if (a(i, j) != 0.0) t.push_back({i, j, a(i, j)});
        return from_triplets(a.rows(), a.cols(), std::move(t));
    }

    static SparseMatrixCSR identity(std::size_t n)
    {
        std::vector<std::size_t> off(n + 1), col(n);
        std::iota(off.begin(), off.end(), std::size_t{0});
        std::iota(col.begin(), col.end(), std::size_t{0});
        return SparseMatrixCSR(n, n, std::move(off), std::move(col), Vector(n, 1.0));
    }

    /// Same pattern, new values.
    SparseMatrixCSR with_values(std::vector<double> values) const
    {
        if (values.size() != values_.size()) throw DimensionError("with_values: nnz mismatch");
        SparseMatrixCSR m = *this;
        m.values_ = std::move(values);
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t nnz() const { return values_.size(); }
    const std::vector<std::size_t>& offsets() const { return offsets_; }
    const std::vector<std::size_t>& columns() const { return columns_; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

    bool same_pattern(const SparseMatrixCSR& o) const
    {
        return rows_ == o.rows_ && cols_ == o.cols_ && offsets_ == o.offsets_ && columns_ == o.columns_;
    }

    double at(std::size_t r, std::size_t c) const
    {
        auto first = columns_.begin() + static_cast<std::ptrdiff_t>(offsets_[r]);
        auto last = columns_.begin() + static_cast<std::ptrdiff_t>(offsets_[r + 1]);
        auto it = std::lower_bound(first, last, c);
        return (it != last && *it == c) ? values_[static_cast<std::size_t>(it - columns_.begin())] : 0.0;
    }

    DenseMatrix to_dense() const
    {
        DenseMatrix d(rows_, cols_);
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t p = offsets_[r]; p < offsets_[r + 1]; ++p) d(r, columns_[p]) = values_[p];
        return d;
    }

    bool is_symmetric(double tol = 0.0) const
    {
        if (rows_ != cols_) return false;
        double scale = 1.0;
        for (double v : values_) scale = std::max(scale, std::abs(v));
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t p = offsets_[r]; p < offsets_[r + 1]; ++p)
                if (std::abs(values_[p] - at(columns_[p], r)) > tol * scale) return false;
        return true;
    }

    double frobenius() const { return std::sqrt(std::inner_product(values_.begin(), values_.end(), values_.begin(), 0.0)); }

private:
    void validate() const
    {
        if (offsets_.size() != rows_ + 1 || offsets_.front() != 0 || offsets_.back() != columns_.size() ||
            columns_.size() != values_.size())
            throw DimensionError("SparseMatrixCSR: inconsistent offsets");
        for (std::size_t r = 0; r < rows_; ++r) {
            if (offsets_[r] > offsets_[r + 1]) throw DimensionError("SparseMatrixCSR: offsets decrease");
            for (std::size_t p = offsets_[r]; p < offsets_[r + 1]; ++p) {
                if (columns_[p] >= cols_) throw DimensionError("SparseMatrixCSR: column index out of range");
                if (p > offsets_[r] && columns_[p] <= columns_[p - 1])
                    throw DimensionError("SparseMatrixCSR: columns not strictly increasing");
            }
        }
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<std::size_t> offsets_;
    std::vector<std::size_t> columns_;
    std::vector<double> values_;
};

/// y = A x (overwrites y). Row sums are accumulated left to right.
inline void spmv(const SparseMatrixCSR& a, std::span<const double> x, std::span<double> y)
{
    if (x.size() != a.cols() || y.size() != a.rows()) throw DimensionError("spmv: dimension mismatch");
    const auto& off = a.offsets();
    const auto& col = a.columns();
    const auto& val = a.values();
    for (std::size_t r = 0; r < a.rows(); ++r) {
        double s = 0.0;
        for (std::size_t p = off[r]; p < off[r + 1]; ++p) s += val[p] * x[col[p]];
        y[r] = s;
    }
}

inline Vector spmv(const SparseMatrixCSR& a, std::span<const double> x)
{
    Vector y(a.rows());
    spmv(a, x, y);
    return y;
}

// ---------------------------------------------------------------------------
// Factorization
// ---------------------------------------------------------------------------

enum class FactorKind { Auto, Cholesky, LU };

/// Reverse Cuthill-McKee ordering of the symmetrized pattern. perm[new] = old.
inline std::vector<std::size_t> reverse_cuthill_mckee(const SparseMatrixCSR& a)
{
    const std::size_t n = a.rows();
    std::vector<std::vector<std::size_t>> adj(n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t p = a.offsets()[r]; p < a.offsets()[r + 1]; ++p) {
            const std::size_t c = a.columns()[p];
            if (c == r) continue;
            adj[r].push_back(c);
            adj[c].push_back(r);
        }
    std::vector<std::size_t> degree(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::sort(adj[i].begin(), adj[i].end());
        adj[i].erase(std::unique(adj[i].begin(), adj[i].end()), adj[i].end());
        degree[i] = adj[i].size();
    }
    std::vector<std::size_t> order;
    order.reserve(n);
    std::vector<char> seen(n, 0);
    while (order.size() < n) {
        // start each component at an unvisited node of minimum degree
        std::size_t start = n;
        for (std::size_t i = 0; i < n; ++i)
            if (!seen[i] && (start == n || degree[i] < degree[start])) start = i;
        std::queue<std::size_t> q;
        q.push(start);
        seen[start] = 1;
        while (!q.empty()) {
            const std::size_t u = q.front();
            q.pop();
            order.push_back(u);
            std::vector<std::size_t> next;
            for (std::size_t v : adj[u])
                if (!seen[v]) {
                    seen[v] = 1;
                    next.push_back(v);
                }
            std::stable_sort(next.begin(), next.end(),
                             [&](std::size_t x, std::size_t y) { return degree[x] < degree[y]; });
            for (std::size_t v : next) q.push(v);
        }
    }
    std::reverse(order.begin(), order.end());
    return order;
}

/// Direct solver for a square matrix. Cholesky is stored in envelope (skyline)
/// form over an optional symmetric permutation; LU is dense with partial pivoting.
class Factorization {
public:
    FactorKind kind() const { return kind_; }
    std::size_t size() const { return n_; }
    const std::vector<std::size_t>& permutation() const { return perm_; }

    /// Envelope storage entries; useful for reporting fill.
    std::size_t stored_entries() const { return kind_ == FactorKind::Cholesky ? env_.size() : lu_.values().size(); }

    Vector solve(std::span<const double> b) const
    {
        Vector x(b.begin(), b.end());
        solve_in_place(x);
        return x;
    }

    void solve_in_place(std::span<double> x) const
    {
        if (x.size() != n_) throw DimensionError("Factorization::solve: length mismatch");
        if (kind_ == FactorKind::Cholesky)
            solve_cholesky(x);
        else
            solve_lu(x);
    }

    static Factorization cholesky(const SparseMatrixCSR& a, bool reorder = true)
    {
        if (a.rows() != a.cols()) throw DimensionError("factorize: matrix not square");
        Factorization f;
        f.kind_ = FactorKind::Cholesky;
        f.n_ = a.rows();
        if (reorder) {
            f.perm_ = reverse_cuthill_mckee(a);
        } else {
            f.perm_.resize(f.n_);
            std::iota(f.perm_.begin(), f.perm_.end(), std::size_t{0});
        }
        std::vector<std::size_t> inv(f.n_);
        for (std::size_t i = 0; i < f.n_; ++i) inv[f.perm_[i]] = i;

        // envelope: first column of row i in the lower triangle of P A P^T
        std::vector<std::size_t> first(f.n_);
        for (std::size_t i = 0; i < f.n_; ++i) first[i] = i;
        for (std::size_t r = 0; r < f.n_; ++r)
            for (std::size_t p = a.offsets()[r]; p < a.offsets()[r + 1]; ++p) {
                const std::size_t pr = inv[r];
                const std::size_t pc = inv[a.columns()[p]];
                const std::size_t hi = std::max(pr, pc), lo = std::min(pr, pc);
                first[hi] = std::min(first[hi], lo);
            }
        f.row_start_.resize(f.n_ + 1);
        f.first_ = first;
        f.row_start_[0] = 0;
        for (std::size_t i = 0; i < f.n_; ++i) f.row_start_[i + 1] = f.row_start_[i] + (i - first[i] + 1);
        f.env_.assign(f.row_start_[f.n_], 0.0);
        for (std::size_t r = 0; r < f.n_; ++r)
            for (std::size_t p = a.offsets()[r]; p < a.offsets()[r + 1]; ++p) {
                const std::size_t pr = inv[r];
                const std::size_t pc = inv[a.columns()[p]];
                if (pc > pr) continue;  // lower triangle only
                f.env_at(pr, pc) = a.values()[p];
            }
        f.factor_envelope();
        return f;
    }

    static Factorization cholesky(const DenseMatrix& a)
    {
        if (a.rows() != a.cols()) throw DimensionError("factorize: matrix not square");
        Factorization f;
        f.kind_ = FactorKind::Cholesky;
        f.n_ = a.rows();
        f.perm_.resize(f.n_);
        std::iota(f.perm_.begin(), f.perm_.end(), std::size_t{0});
        f.first_.assign(f.n_, 0);
        f.row_start_.resize(f.n_ + 1);
        f.row_start_[0] = 0;
        for (std::size_t i = 0; i < f.n_; ++i) f.row_start_[i + 1] = f.row_start_[i] + i + 1;
        f.env_.resize(f.row_start_[f.n_]);
        for (std::size_t i = 0; i < f.n_; ++i)
            for (std::size_t j = 0; j <= i; ++j) f.env_at(i, j) = a(i, j);
        f.factor_envelope();
        return f;
    }

    static Factorization lu(const DenseMatrix& a)
    {
        if (a.rows() != a.cols()) throw DimensionError("factorize: matrix not square");
        Factorization f;
        f.kind_ = FactorKind::LU;
        f.n_ = a.rows();
        f.lu_ = a;
        f.perm_.resize(f.n_);
        std::iota(f.perm_.begin(), f.perm_.end(), std::size_t{0});
        const double scale = std::max(a.max_abs(), 1e-300);
        auto& m = f.lu_;
        for (std::size_t k = 0; k < f.n_; ++k) {
            std::size_t piv = k;
            for (std::size_t i = k + 1; i < f.n_; ++i)
                if (std::abs(m(i, k)) > std::abs(m(piv, k))) piv = i;
            if (std::abs(m(piv, k)) <= 1e-14 * scale)
                throw FactorizationError("LU: singular pivot at column " + std::to_string(k));
            if (piv != k) {
                for (std::size_t j = 0; j < f.n_; ++j) std::swap(m(k, j), m(piv, j));
                std::swap(f.perm_[k], f.perm_[piv]);
            }
            const double d = m(k, k);
            for (std::size_t i = k + 1; i < f.n_; ++i) {
                const double l = m(i, k) / d;
                m(i, k) = l;
                if (l == 0.0) continue;
                for (std::size_t j = k + 1; j < f.n_; ++j) m(i, j) -= l * m(k, j);
            }
        }
        return f;
    }

private:
    double& env_at(std::size_t i, std::size_t j) { return env_[row_start_[i] + (j - first_[i])]; }
    double env_get(std::size_t i, std::size_t j) const { return env_[row_start_[i] + (j - first_[i])]; }

    void factor_envelope()
    {
        for (std::size_t i = 0; i < n_; ++i) {
            const std::size_t fi = first_[i];
            double* li = &env_[row_start_[i]];
            for (std::size_t j = fi; j < i; ++j) {
                const std::size_t fj = first_[j];
                const std::size_t k0 = std::max(fi, fj);
                const double* lj = &env_[row_start_[j]];
                double s = li[j - fi];
                for (std::size_t k = k0; k < j; ++k) s -= li[k - fi] * lj[k - fj];
                li[j - fi] = s / lj[j - fj];
            }
            double d = li[i - fi];
            for (std::size_t k = fi; k < i; ++k) d -= li[k - fi] * li[k - fi];
            if (!(d > 0.0)) throw FactorizationError("Cholesky: non-positive pivot at row " + std::to_string(i));
            li[i - fi] = std::sqrt(d);
        }
    }

    void solve_cholesky(std::span<double> x) const
    {
        Vector y(n_);
        for (std::size_t i = 0; i < n_; ++i) y[i] = x[perm_[i]];
        for (std::size_t i = 0; i < n_; ++i) {
            const std::size_t fi = first_[i];
            const double* li = &env_[row_start_[i]];
            double s = y[i];
            for (std::size_t k = fi; k < i; ++k) s -= li[k - fi] * y[k];
            y[i] = s / li[i - fi];
        }
        for (std::size_t ii = n_; ii-- > 0;) {
            const std::size_t fi = first_[ii];
            const double* li = &env_[row_start_[ii]];
            y[ii] /= li[ii - fi];
            const double yi = y[ii];
            for (std::size_t k = fi; k < ii; ++k) y[k] -= li[k - fi] * yi;
        }
        for (std::size_t i = 0; i < n_; ++i) x[perm_[i]] = y[i];
    }

    void solve_lu(std::span<double> x) const
    {
        Vector y(n_);
        for (std::size_t i = 0; i < n_; ++i) y[i] = x[perm_[i]];
        for (std::size_t i = 0; i < n_; ++i) {
            double s = y[i];
            for (std::size_t k = 0; k < i; ++k) s -= lu_(i, k) * y[k];
            y[i] = s;
        }
        for (std::size_t i = n_; i-- > 0;) {
            double s = y[i];
            for (std::size_t k = i + 1; k < n_; ++k) s -= lu_(i, k) * y[k];
            y[i] = s / lu_(i, i);
        }
        std::copy(y.begin(), y.end(), x.begin());
    }

    FactorKind kind_ = FactorKind::Cholesky;
    std::size_t n_ = 0;
    std::vector<std::size_t> perm_;
    // Cholesky envelope
    std::vector<std::size_t> first_;
    std::vector<std::size_t> row_start_;
    std::vector<double> env_;
    // LU
    DenseMatrix lu_;
};

/// Cholesky is tried first for symmetric input (Auto), LU is the fallback.
inline Factorization factorize(const SparseMatrixCSR& a, FactorKind kind = FactorKind::Auto)
{
    if (a.rows() != a.cols()) throw DimensionError("factorize: matrix not square");
    if (kind == FactorKind::Cholesky) return Factorization::cholesky(a);
    if (kind == FactorKind::LU) return Factorization::lu(a.to_dense());
    if (a.is_symmetric(1e-12)) {
        try {
            return Factorization::cholesky(a);
        } catch (const FactorizationError&) {
        }
    }
    return Factorization::lu(a.to_dense());
}

inline Factorization factorize(const DenseMatrix& a, FactorKind kind = FactorKind::Auto)
{
    if (a.rows() != a.cols()) throw DimensionError("factorize: matrix not square");
    if (kind == FactorKind::Cholesky) return Factorization::cholesky(a);
    if (kind == FactorKind::LU) return Factorization::lu(a);
    if (a.is_symmetric(1e-12)) {
        try {
            return Factorization::cholesky(a);
        } catch (const FactorizationError&) {
        }
    }
    return Factorization::lu(a);
}

inline Vector solve(const Factorization& f, std::span<const double> b) { return f.solve(b); }

/// Dense inverse by column solves. Oracle use only.
inline DenseMatrix inverse(const DenseMatrix& a)
{
    const auto f = factorize(a, FactorKind::LU);
    const std::size_t n = a.rows();
    DenseMatrix inv(n, n);
    Vector e(n);
    for (std::size_t c = 0; c < n; ++c) {
        std::fill(e.begin(), e.end(), 0.0);
        e[c] = 1.0;
        const Vector x = f.solve(e);
        for (std::size_t r = 0; r < n; ++r) inv(r, c) = x[r];
    }
    return inv;
}

// ---------------------------------------------------------------------------
// Symmetric eigensolver
// ---------------------------------------------------------------------------

struct SymEigResult {
    Vector values;        // descending
    DenseMatrix vectors;  // column i is the eigenvector of values[i]
};

/// Cyclic Jacobi rotations. Eigenvalues come back in descending order; each
/// eigenvector is signed so its largest-magnitude component (first on ties) is positive.
inline SymEigResult sym_eig(const DenseMatrix& input, double symmetry_tol = 1e-12, int max_sweeps = 100)
{
    if (input.rows() != input.cols()) throw DimensionError("sym_eig: matrix not square");
    if (!input.is_symmetric(symmetry_tol)) throw std::invalid_argument("sym_eig: matrix not symmetric");
    const std::size_t n = input.rows();
    DenseMatrix a = input;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) a(i, j) = a(j, i) = 0.5 * (input(i, j) + input(j, i));
    DenseMatrix v = DenseMatrix::identity(n);

    const double total = a.frobenius();
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
        if (std::sqrt(2.0 * off) <= 1e-15 * total || total == 0.0) break;
        for (std::size_t p = 0; p + 1 < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                if (std::abs(apq) < 1e-300) {
                    a(p, q) = a(q, p) = 0.0;
                    continue;
                }
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                a(p, q) = a(q, p) = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });
    SymEigResult res{Vector(n), DenseMatrix(n, n)};
    for (std::size_t c = 0; c < n; ++c) {
        const std::size_t src = order[c];
        res.values[c] = a(src, src);
        std::size_t big = 0;
        for (std::size_t r = 1; r < n; ++r)
            if (std::abs(v(r, src)) > std::abs(v(big, src))) big = r;
        const double sign = v(big, src) < 0.0 ? -1.0 : 1.0;
        for (std::size_t r = 0; r < n; ++r) res.vectors(r, c) = sign * v(r, src);
    }
    return res;
}

}  // namespace sgfem
