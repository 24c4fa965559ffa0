#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace quasilog {

struct Interval {
    double lo = 0.0;
    double hi = 1.0;

    double length() const noexcept { return hi - lo; }
    bool operator==(const Interval&) const = default;
};

/// Uniform finite-difference grid on an interval or a rectangle.
///
/// Only interior nodes carry unknowns; the Dirichlet boundary is implicit.
/// Node ordering is lexicographic with x running fastest:
/// node = i + nx * j for lattice indices 0 ≤ i < nx, 0 ≤ j < ny.
class Grid {
public:
    static Grid interval(Interval x, int n);
    static Grid rectangle(Interval x, Interval y, int nx, int ny);

    int dimension() const noexcept { return dimension_; }
    int nx() const noexcept { return nx_; }
    int ny() const noexcept { return ny_; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(nx_) * ny_; }

    const Interval& x_extent() const noexcept { return x_; }
    const Interval& y_extent() const noexcept { return y_; }
    double hx() const noexcept { return hx_; }
    double hy() const noexcept { return hy_; }
    /// Mesh width for square cells; the larger one otherwise.
    double h() const noexcept { return hx_ > hy_ ? hx_ : hy_; }
    /// Weight of one node in discrete integrals (h or hx*hy).
    double cell_volume() const noexcept { return dimension_ == 1 ? hx_ : hx_ * hy_; }

    std::size_t index(int i, int j = 0) const noexcept {
        return static_cast<std::size_t>(i) + static_cast<std::size_t>(nx_) * j;
    }
    std::array<int, 2> lattice(std::size_t node) const noexcept {
        return {static_cast<int>(node % nx_), static_cast<int>(node / nx_)};
    }
    double x(std::size_t node) const noexcept { return x_.lo + (lattice(node)[0] + 1) * hx_; }
    double y(std::size_t node) const noexcept {
        return dimension_ == 1 ? 0.0 : y_.lo + (lattice(node)[1] + 1) * hy_;
    }

    /// Distance from a node to the outer boundary ∂Ω.
    double boundary_distance(std::size_t node) const noexcept;

    bool operator==(const Grid&) const = default;

private:
    Grid() = default;

    int dimension_ = 1;
    Interval x_{};
    Interval y_{};
    int nx_ = 1;
    int ny_ = 1;
    double hx_ = 0.5;
    double hy_ = 1.0;
};

/// One real value per interior node of a grid.
class GridFunction {
public:
    explicit GridFunction(Grid grid, double fill = 0.0);
    GridFunction(Grid grid, std::vector<double> values);

    const Grid& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return values_.size(); }

    double& operator[](std::size_t node) { return values_[node]; }
    double operator[](std::size_t node) const { return values_[node]; }

    std::span<double> values() noexcept { return values_; }
    std::span<const double> values() const noexcept { return values_; }
    std::vector<double>& data() noexcept { return values_; }
    const std::vector<double>& data() const noexcept { return values_; }

    double sup_norm() const noexcept;
    /// Discrete L² norm: sqrt(cell_volume * Σ v²).
    double l2_norm() const noexcept;
    double min() const noexcept;
    double max() const noexcept;

private:
    Grid grid_;
    std::vector<double> values_;
};

/// max |a - b| over nodes; grids must agree.
double sup_distance(const GridFunction& a, const GridFunction& b);

/// CSV with header `index,x[,y],value`.
void write_csv(std::ostream& out, const GridFunction& field);

/// Shortest round-trip decimal representation, independent of the global locale.
std::string format_number(double value);

}  // namespace quasilog
