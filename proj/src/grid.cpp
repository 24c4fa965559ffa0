#include "quasilog/grid.hpp"

#include "quasilog/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>
#include <string>

namespace quasilog {

namespace {

void check_extent(const Interval& extent, const char* axis) {
    if (!(extent.hi > extent.lo) || !std::isfinite(extent.lo) || !std::isfinite(extent.hi)) {
        throw DomainError(std::string("empty or non-finite extent on axis ") + axis);
    }
}

void check_count(int n, const char* axis) {
    if (n < 1) {
        throw DomainError(std::string("need at least one interior node on axis ") + axis);
    }
}

}  // namespace

Grid Grid::interval(Interval x, int n) {
    check_extent(x, "x");
    check_count(n, "x");
    Grid grid;
    grid.dimension_ = 1;
    grid.x_ = x;
    grid.y_ = Interval{0.0, 0.0};
    grid.nx_ = n;
    grid.ny_ = 1;
    grid.hx_ = x.length() / (n + 1);
    grid.hy_ = 0.0;
    return grid;
}

Grid Grid::rectangle(Interval x, Interval y, int nx, int ny) {
    check_extent(x, "x");
    check_extent(y, "y");
    check_count(nx, "x");
    check_count(ny, "y");
    Grid grid;
    grid.dimension_ = 2;
    grid.x_ = x;
    grid.y_ = y;
    grid.nx_ = nx;
    grid.ny_ = ny;
    grid.hx_ = x.length() / (nx + 1);
    grid.hy_ = y.length() / (ny + 1);
    return grid;
}

double Grid::boundary_distance(std::size_t node) const noexcept {
    const double px = x(node);
    double d = std::min(px - x_.lo, x_.hi - px);
    if (dimension_ == 2) {
        const double py = y(node);
        d = std::min({d, py - y_.lo, y_.hi - py});
    }
    return d;
}

GridFunction::GridFunction(Grid grid, double fill) : grid_(grid), values_(grid.size(), fill) {}

GridFunction::GridFunction(Grid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) {
        throw DomainError("grid function length " + std::to_string(values_.size()) +
                          " does not match node count " + std::to_string(grid_.size()));
    }
}

double GridFunction::sup_norm() const noexcept {
    double m = 0.0;
    for (double v : values_) {
        m = std::max(m, std::abs(v));
    }
    return m;
}

double GridFunction::l2_norm() const noexcept {
    double s = 0.0;
    for (double v : values_) {
        s += v * v;
    }
    return std::sqrt(grid_.cell_volume() * s);
}

double GridFunction::min() const noexcept {
    return *std::min_element(values_.begin(), values_.end());
}

double GridFunction::max() const noexcept {
    return *std::max_element(values_.begin(), values_.end());
}

double sup_distance(const GridFunction& a, const GridFunction& b) {
    if (!(a.grid() == b.grid())) {
        throw DomainError("sup_distance between functions on different grids");
    }
    double d = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        d = std::max(d, std::abs(a[k] - b[k]));
    }
    return d;
}

std::string format_number(double value) {
    char buffer[64];
    const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
    return std::string(buffer, result.ptr);
}

void write_csv(std::ostream& out, const GridFunction& field) {
    const Grid& grid = field.grid();
    const bool planar = grid.dimension() == 2;
    out << (planar ? "index,x,y,value\n" : "index,x,value\n");
    for (std::size_t k = 0; k < field.size(); ++k) {
        out << k << ',' << format_number(grid.x(k)) << ',';
        if (planar) {
            out << format_number(grid.y(k)) << ',';
        }
        out << format_number(field[k]) << '\n';
    }
}

}  // namespace quasilog
