#pragma once

#include "quasilog/grid.hpp"

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace quasilog {

enum class WeightMode { zero, constant, bump };

std::string to_string(WeightMode mode);
WeightMode weight_mode_from_string(const std::string& name);

/// Geometry of the crowding weight b(x).
///
/// In bump mode b(x) = b0 * max(0, 1 - |x-c|²/ρ²)², which is C¹ and positive
/// exactly on the open ball (disk in 2D, subinterval in 1D) of radius ρ.
struct WeightShape {
    WeightMode mode = WeightMode::zero;
    double b0 = 1.0;
    std::array<double, 2> center{0.5, 0.5};
    double radius = 0.25;

    /// b evaluated at an arbitrary point (y ignored in 1D).
    double evaluate(double x, double y, int dimension) const;
    /// Distance from a point to the support center (1D uses x only).
    double center_distance(double x, double y, int dimension) const;
};

/// Discrete b(x) ≥ 0 with the support Ω₊ and its complement, the refuge Ω_{b,0}.
class WeightField {
public:
    WeightField(GridFunction values, WeightShape shape);

    const Grid& grid() const noexcept { return values_.grid(); }
    const GridFunction& values() const noexcept { return values_; }
    double operator[](std::size_t node) const { return values_[node]; }
    const WeightShape& shape() const noexcept { return shape_; }

    /// true where b = 0.
    bool in_refuge(std::size_t node) const { return refuge_[node] != 0; }
    std::size_t refuge_count() const noexcept { return refuge_count_; }
    bool is_constant() const noexcept { return shape_.mode == WeightMode::constant; }

    /// Refuge nodes form one edge-connected component.
    bool refuge_connected() const;
    double max() const noexcept { return values_.max(); }

private:
    GridFunction values_;
    WeightShape shape_;
    std::vector<char> refuge_;
    std::size_t refuge_count_ = 0;
};

/// Sample b on a grid. Bump supports must have closure strictly inside Ω.
WeightField build_weight(const Grid& grid, const WeightShape& shape);

}  // namespace quasilog
