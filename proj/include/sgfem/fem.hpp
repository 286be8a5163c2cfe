#pragma once

// Bilinear (Q1) finite elements on a uniform n x n grid of the unit square,
// 2x2 Gauss quadrature, lexicographic node numbering (x fastest).

#include <array>
#include <cmath>
#include <functional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "sgfem/linalg.hpp"
#include "sgfem/matrix_market.hpp"

namespace sgfem {

struct Point {
    double x;
    double y;
};

struct QuadraturePoint {
    Point at;
    double weight;
    std::size_t element;
};

class Mesh {
public:
    static constexpr std::size_t points_per_element = 4;

    explicit Mesh(int n) : n_(n)
    {
        if (n < 1) throw std::invalid_argument("Mesh: need at least one element per side");
        const std::size_t side = static_cast<std::size_t>(n) + 1;
        h_ = 1.0 / n;
        nodes_.reserve(side * side);
        for (std::size_t iy = 0; iy < side; ++iy)
            for (std::size_t ix = 0; ix < side; ++ix) {
                nodes_.push_back({static_cast<double>(ix) * h_, static_cast<double>(iy) * h_});
                if (ix == 0 || iy == 0 || ix + 1 == side || iy + 1 == side) boundary_.push_back(iy * side + ix);
            }
        is_boundary_.assign(nodes_.size(), 0);
        for (std::size_t b : boundary_) is_boundary_[b] = 1;

        const double g = 1.0 / std::sqrt(3.0);
        const std::array<double, 2> gp{-g, g};
        for (std::size_t ey = 0; ey < static_cast<std::size_t>(n); ++ey)
            for (std::size_t ex = 0; ex < static_cast<std::size_t>(n); ++ex) {
                const std::size_t bl = ey * side + ex;
                elements_.push_back({bl, bl + 1, bl + 1 + side, bl + side});
                const double x0 = static_cast<double>(ex) * h_, y0 = static_cast<double>(ey) * h_;
                for (double eta : gp)
                    for (double xi : gp)
                        quad_.push_back({{x0 + 0.5 * h_ * (1.0 + xi), y0 + 0.5 * h_ * (1.0 + eta)},
                                         0.25 * h_ * h_,
                                         elements_.size() - 1});
            }
    }

    int elements_per_side() const { return n_; }
    double h() const { return h_; }
    std::size_t node_count() const { return nodes_.size(); }
    std::size_t element_count() const { return elements_.size(); }
    const std::vector<Point>& nodes() const { return nodes_; }
    const std::vector<std::array<std::size_t, 4>>& elements() const { return elements_; }
    const std::vector<std::size_t>& boundary_nodes() const { return boundary_; }
    bool is_boundary(std::size_t node) const { return is_boundary_.at(node) != 0; }
    /// Four points per element, element-major.
    const std::vector<QuadraturePoint>& quadrature() const { return quad_; }

    /// Row sums of the consistent Q1 mass matrix (diagonal lumped mass).
    Vector lumped_mass() const
    {
        Vector w(nodes_.size(), 0.0);
        const double quarter = 0.25 * h_ * h_;
        for (const auto& el : elements_)
            for (std::size_t a : el) w[a] += quarter;
        return w;
    }

    /// Bilinear interpolation of a nodal field at every quadrature point.
    Vector interpolate(std::span<const double> nodal) const
    {
        if (nodal.size() != nodes_.size()) throw DimensionError("Mesh::interpolate: nodal length mismatch");
        Vector out(quad_.size());
        for (std::size_t q = 0; q < quad_.size(); ++q) {
            const auto shape = shape_values(q % points_per_element);
            const auto& el = elements_[quad_[q].element];
            double s = 0.0;
            for (std::size_t a = 0; a < 4; ++a) s += shape[a] * nodal[el[a]];
            out[q] = s;
        }
        return out;
    }

    /// Q1 shape functions at local quadrature point lq (0..3).
    static std::array<double, 4> shape_values(std::size_t lq)
    {
        const auto [xi, eta] = local_point(lq);
        return {0.25 * (1 - xi) * (1 - eta), 0.25 * (1 + xi) * (1 - eta), 0.25 * (1 + xi) * (1 + eta),
                0.25 * (1 - xi) * (1 + eta)};
    }

    static std::pair<double, double> local_point(std::size_t lq)
    {
        const double g = 1.0 / std::sqrt(3.0);
        const double xi = (lq % 2 == 0) ? -g : g;
        const double eta = (lq / 2 == 0) ? -g : g;
        return {xi, eta};
    }

    void write_csv(std::ostream& os) const
    {
        os << "node,x,y,boundary\n";
        for (std::size_t i = 0; i < nodes_.size(); ++i)
            os << i << ',' << format_real(nodes_[i].x) << ',' << format_real(nodes_[i].y) << ','
               << (is_boundary_[i] ? 1 : 0) << '\n';
    }

private:
    int n_;
    double h_;
    std::vector<Point> nodes_;
    std::vector<std::array<std::size_t, 4>> elements_;
    std::vector<std::size_t> boundary_;
    std::vector<char> is_boundary_;
    std::vector<QuadraturePoint> quad_;
};

inline Mesh build_mesh(int n) { return Mesh(n); }

/// Shared-pattern stiffness assembler: the CSR pattern and the element-to-value
/// scatter map are computed once, then any coefficient is assembled by scatter.
class StiffnessAssembler {
public:
    explicit StiffnessAssembler(const Mesh& mesh) : mesh_(&mesh)
    {
        std::vector<Triplet> t;
        t.reserve(mesh.element_count() * 16);
        for (const auto& el : mesh.elements())
            for (std::size_t a = 0; a < 4; ++a)
                for (std::size_t b = 0; b < 4; ++b) t.push_back({el[a], el[b], 0.0});
        pattern_ = SparseMatrixCSR::from_triplets(mesh.node_count(), mesh.node_count(), std::move(t));
        scatter_.reserve(mesh.element_count() * 16);
        for (const auto& el : mesh.elements())
            for (std::size_t a = 0; a < 4; ++a)
                for (std::size_t b = 0; b < 4; ++b) scatter_.push_back(position(el[a], el[b]));

        // w_q * grad N_a . grad N_b on the reference element; independent of h in 2D
        for (std::size_t lq = 0; lq < 4; ++lq) {
            const auto [xi, eta] = Mesh::local_point(lq);
            const std::array<double, 4> sx{-1, 1, 1, -1}, sy{-1, -1, 1, 1};
            std::array<double, 4> dx{}, dy{};
            for (std::size_t a = 0; a < 4; ++a) {
                dx[a] = 0.25 * sx[a] * (1 + sy[a] * eta);
                dy[a] = 0.25 * sy[a] * (1 + sx[a] * xi);
            }
            for (std::size_t a = 0; a < 4; ++a)
                for (std::size_t b = 0; b < 4; ++b) local_[lq][a * 4 + b] = dx[a] * dx[b] + dy[a] * dy[b];
        }
    }

    const SparseMatrixCSR& pattern() const { return pattern_; }

    /// K_lm = int coeff grad phi_l . grad phi_m, coeff given at quadrature points.
    SparseMatrixCSR assemble(std::span<const double> coeff) const
    {
        if (coeff.size() != mesh_->quadrature().size())
            throw DimensionError("assemble_stiffness: coefficient must be given at every quadrature point");
        Vector values(pattern_.nnz(), 0.0);
        std::size_t s = 0;
        for (std::size_t e = 0; e < mesh_->element_count(); ++e) {
            const double* kq = coeff.data() + e * 4;
            for (std::size_t ab = 0; ab < 16; ++ab) {
                const double v = kq[0] * local_[0][ab] + kq[1] * local_[1][ab] + kq[2] * local_[2][ab] +
                                 kq[3] * local_[3][ab];
                values[scatter_[s++]] += v;
            }
        }
        return pattern_.with_values(std::move(values));
    }

private:
    std::size_t position(std::size_t r, std::size_t c) const
    {
        const auto& off = pattern_.offsets();
        const auto& col = pattern_.columns();
        auto first = col.begin() + static_cast<std::ptrdiff_t>(off[r]);
        auto last = col.begin() + static_cast<std::ptrdiff_t>(off[r + 1]);
        return static_cast<std::size_t>(std::lower_bound(first, last, c) - col.begin());
    }

    const Mesh* mesh_;
    SparseMatrixCSR pattern_;
    std::vector<std::size_t> scatter_;
    std::array<std::array<double, 16>, 4> local_{};
};

inline SparseMatrixCSR assemble_stiffness(const Mesh& mesh, std::span<const double> coeff)
{
    return StiffnessAssembler(mesh).assemble(coeff);
}

/// f_l = int f phi_l for a constant source.
inline Vector assemble_load(const Mesh& mesh, double f)
{
    Vector out(mesh.node_count(), 0.0);
    for (std::size_t q = 0; q < mesh.quadrature().size(); ++q) {
        const auto shape = Mesh::shape_values(q % Mesh::points_per_element);
        const auto& el = mesh.elements()[mesh.quadrature()[q].element];
        const double w = mesh.quadrature()[q].weight * f;
        for (std::size_t a = 0; a < 4; ++a) out[el[a]] += w * shape[a];
    }
    return out;
}

/// Zeroes boundary rows and columns (pattern kept), puts `diagonal` on boundary
/// diagonal entries and zeroes boundary load entries.
inline void apply_dirichlet_in_place(SparseMatrixCSR& k, std::span<double> f, const Mesh& mesh, double diagonal = 1.0)
{
    if (k.rows() != mesh.node_count() || k.cols() != mesh.node_count())
        throw DimensionError("apply_dirichlet: matrix size does not match mesh");
    if (!f.empty() && f.size() != mesh.node_count()) throw DimensionError("apply_dirichlet: load size does not match mesh");
    auto& val = k.values();
    for (std::size_t r = 0; r < k.rows(); ++r)
        for (std::size_t p = k.offsets()[r]; p < k.offsets()[r + 1]; ++p) {
            const std::size_t c = k.columns()[p];
            if (mesh.is_boundary(r) || mesh.is_boundary(c)) val[p] = (r == c) ? diagonal : 0.0;
        }
    if (!f.empty())
        for (std::size_t b : mesh.boundary_nodes()) f[b] = 0.0;
}

inline std::pair<SparseMatrixCSR, Vector> apply_dirichlet(SparseMatrixCSR k, Vector f, const Mesh& mesh,
                                                          double diagonal = 1.0)
{
    apply_dirichlet_in_place(k, f, mesh, diagonal);
    return {std::move(k), std::move(f)};
}

}  // namespace sgfem
