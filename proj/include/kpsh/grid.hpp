#pragma once

#include "kpsh/complex_calculus.hpp"
#include "kpsh/core.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace kpsh {

/// Lattice points of h Z^{2n} inside the closed ball |z| <= r. Interior nodes have
/// every axis neighbour (+-e_a) and cross neighbour (+-e_a +-e_b) in the ball; all
/// other nodes form the Dirichlet collar.
class BallGrid {
public:
    BallGrid(int n, double r, double h) : n_(n), dim_(2 * n), r_(r), h_(h)
    {
        if (n < 1 || !(r > 0.0) || !(h > 0.0)) {
            throw DomainError("grid needs n >= 1, r > 0, h > 0");
        }
        if (h > r / 4.0 * (1.0 + 1e-12)) {
            throw DomainError("grid spacing must satisfy h <= r/4");
        }
        half_ = static_cast<int>(std::floor(r / h + 1e-9));
        side_ = 2 * half_ + 1;
        double box = 1.0;
        for (int d = 0; d < dim_; ++d) {
            box *= side_;
        }
        if (box > 2e8) {
            throw ResolutionError("grid lookup box too large (" + std::to_string(box) + " cells)");
        }
        stride_.assign(static_cast<std::size_t>(dim_), 1);
        for (int d = 1; d < dim_; ++d) {
            stride_[d] = stride_[d - 1] * side_;
        }
        lookup_.assign(static_cast<std::size_t>(box), -1);
        const double limit = (r / h) * (r / h) * (1.0 + 1e-12);
        std::vector<int> c(static_cast<std::size_t>(dim_), -half_);
        for (std::int64_t cell = 0; cell < static_cast<std::int64_t>(box); ++cell) {
            double norm2 = 0.0;
            for (int v : c) {
                norm2 += static_cast<double>(v) * v;
            }
            if (norm2 <= limit) {
                lookup_[static_cast<std::size_t>(cell)] = static_cast<int>(cell_of_node_.size());
                cell_of_node_.push_back(cell);
                coords_.insert(coords_.end(), c.begin(), c.end());
            }
            for (int d = 0; d < dim_; ++d) {
                if (++c[d] <= half_) {
                    break;
                }
                c[d] = -half_;
            }
        }
        const int count = node_count();
        unknown_of_node_.assign(static_cast<std::size_t>(count), -1);
        for (int node = 0; node < count; ++node) {
            if (has_full_stencil(node)) {
                unknown_of_node_[node] = static_cast<int>(interior_.size());
                interior_.push_back(node);
            }
        }
        if (interior_.empty()) {
            throw ResolutionError("grid has no interior nodes");
        }
    }

    [[nodiscard]] int n() const { return n_; }
    [[nodiscard]] int dim() const { return dim_; }
    [[nodiscard]] double radius() const { return r_; }
    [[nodiscard]] double spacing() const { return h_; }
    [[nodiscard]] int half_width() const { return half_; }
    [[nodiscard]] int node_count() const { return static_cast<int>(cell_of_node_.size()); }
    [[nodiscard]] int interior_count() const { return static_cast<int>(interior_.size()); }
    [[nodiscard]] int collar_count() const { return node_count() - interior_count(); }
    [[nodiscard]] const std::vector<int>& interior_nodes() const { return interior_; }
    [[nodiscard]] bool is_interior(int node) const { return unknown_of_node_[node] >= 0; }
    /// Position of node among the interior unknowns, or -1 for collar nodes.
    [[nodiscard]] int unknown_index(int node) const { return unknown_of_node_[node]; }

    [[nodiscard]] std::span<const int> lattice(int node) const
    {
        return {coords_.data() + static_cast<std::size_t>(node) * dim_, static_cast<std::size_t>(dim_)};
    }

    [[nodiscard]] Point position(int node) const
    {
        Point p(dim_);
        const auto c = lattice(node);
        for (int d = 0; d < dim_; ++d) {
            p(d) = c[d] * h_;
        }
        return p;
    }

    /// Node at integer lattice coordinates, if inside the ball.
    [[nodiscard]] std::optional<int> find(std::span<const int> c) const
    {
        std::int64_t cell = 0;
        for (int d = 0; d < dim_; ++d) {
            if (c[d] < -half_ || c[d] > half_) {
                return std::nullopt;
            }
            cell += static_cast<std::int64_t>(c[d] + half_) * stride_[d];
        }
        const int node = lookup_[static_cast<std::size_t>(cell)];
        if (node < 0) {
            return std::nullopt;
        }
        return node;
    }

    /// Neighbour node + sa e_a (+ sb e_b when b >= 0), or nullopt outside the ball.
    [[nodiscard]] std::optional<int> neighbor(int node, int a, int sa, int b = -1, int sb = 0) const
    {
        std::vector<int> c(lattice(node).begin(), lattice(node).end());
        c[a] += sa;
        if (b >= 0) {
            c[b] += sb;
        }
        return find(c);
    }

    /// Neighbour that is known to exist (interior stencils); unchecked fast path.
    [[nodiscard]] int stencil_neighbor(int node, int a, int sa, int b = -1, int sb = 0) const
    {
        std::int64_t cell = cell_of_node_[node] + sa * stride_[a];
        if (b >= 0) {
            cell += sb * stride_[b];
        }
        return lookup_[static_cast<std::size_t>(cell)];
    }

private:
    [[nodiscard]] bool has_full_stencil(int node) const
    {
        for (int a = 0; a < dim_; ++a) {
            for (int sa : {-1, 1}) {
                if (!neighbor(node, a, sa)) {
                    return false;
                }
                for (int b = a + 1; b < dim_; ++b) {
                    for (int sb : {-1, 1}) {
                        if (!neighbor(node, a, sa, b, sb)) {
                            return false;
                        }
                    }
                }
            }
        }
        return true;
    }

    int n_;
    int dim_;
    double r_;
    double h_;
    int half_ = 0;
    int side_ = 0;
    std::vector<std::int64_t> stride_;
    std::vector<int> lookup_;
    std::vector<std::int64_t> cell_of_node_;
    std::vector<int> coords_;
    std::vector<int> interior_;
    std::vector<int> unknown_of_node_;
};

/// Node values of a function on a BallGrid.
struct GridFunction {
    std::shared_ptr<const BallGrid> grid;
    std::vector<double> values;

    static GridFunction sample(std::shared_ptr<const BallGrid> grid, const std::function<double(const Point&)>& fn)
    {
        GridFunction g{grid, std::vector<double>(static_cast<std::size_t>(grid->node_count()))};
        for (int node = 0; node < grid->node_count(); ++node) {
            g.values[node] = fn(grid->position(node));
        }
        return g;
    }

    [[nodiscard]] double operator[](int node) const { return values[static_cast<std::size_t>(node)]; }
};

/// Second-order central-difference jet at an interior node; mixed derivatives use the
/// four-point cross stencil.
[[nodiscard]] inline Jet finite_difference_jet(const GridFunction& g, int node)
{
    const BallGrid& grid = *g.grid;
    if (node < 0 || node >= grid.node_count() || !grid.is_interior(node)) {
        throw StencilError("node " + std::to_string(node) + " lacks a full stencil");
    }
    const int dim = grid.dim();
    const double h = grid.spacing();
    const double center = g[node];
    RealVector du(dim);
    Eigen::MatrixXd d2(dim, dim);
    for (int a = 0; a < dim; ++a) {
        const double up = g[grid.stencil_neighbor(node, a, 1)];
        const double dn = g[grid.stencil_neighbor(node, a, -1)];
        du(a) = (up - dn) / (2.0 * h);
        d2(a, a) = (up - 2.0 * center + dn) / (h * h);
        for (int b = a + 1; b < dim; ++b) {
            const double pp = g[grid.stencil_neighbor(node, a, 1, b, 1)];
            const double pm = g[grid.stencil_neighbor(node, a, 1, b, -1)];
            const double mp = g[grid.stencil_neighbor(node, a, -1, b, 1)];
            const double mm = g[grid.stencil_neighbor(node, a, -1, b, -1)];
            d2(a, b) = (pp - pm - mp + mm) / (4.0 * h * h);
            d2(b, a) = d2(a, b);
        }
    }
    return Jet::from_real(grid.position(node), center, std::move(du), RealSymmetricMatrix(std::move(d2)));
}

} // namespace kpsh
