#include "quasilog/weight.hpp"

#include "quasilog/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>

namespace quasilog {

std::string to_string(WeightMode mode) {
    switch (mode) {
        case WeightMode::zero: return "zero";
        case WeightMode::constant: return "constant";
        case WeightMode::bump: return "disk-bump";
    }
    return "unknown";
}

WeightMode weight_mode_from_string(const std::string& name) {
    if (name == "zero") return WeightMode::zero;
    if (name == "constant") return WeightMode::constant;
    if (name == "disk-bump" || name == "bump") return WeightMode::bump;
    throw DomainError("unknown weight mode '" + name + "' (expected zero|constant|disk-bump)");
}

double WeightShape::center_distance(double x, double y, int dimension) const {
    const double dx = x - center[0];
    const double dy = dimension == 2 ? y - center[1] : 0.0;
    return std::sqrt(dx * dx + dy * dy);
}

double WeightShape::evaluate(double x, double y, int dimension) const {
    switch (mode) {
        case WeightMode::zero: return 0.0;
        case WeightMode::constant: return b0;
        case WeightMode::bump: {
            const double d = center_distance(x, y, dimension);
            const double hinge = std::max(0.0, 1.0 - (d * d) / (radius * radius));
            return b0 * hinge * hinge;
        }
    }
    return 0.0;
}

WeightField::WeightField(GridFunction values, WeightShape shape)
    : values_(std::move(values)), shape_(shape), refuge_(values_.size(), 0) {
    for (std::size_t k = 0; k < values_.size(); ++k) {
        if (!(values_[k] >= 0.0)) {
            throw DomainError("weight must be nonnegative at every node");
        }
        if (values_[k] == 0.0) {
            refuge_[k] = 1;
            ++refuge_count_;
        }
    }
}

bool WeightField::refuge_connected() const {
    if (refuge_count_ == 0) {
        return false;
    }
    const Grid& g = grid();
    std::vector<char> seen(refuge_.size(), 0);
    std::size_t start = 0;
    while (!refuge_[start]) {
        ++start;
    }
    std::queue<std::size_t> frontier;
    frontier.push(start);
    seen[start] = 1;
    std::size_t reached = 1;
    while (!frontier.empty()) {
        const std::size_t node = frontier.front();
        frontier.pop();
        const auto [i, j] = g.lattice(node);
        const std::array<std::array<int, 2>, 4> steps{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
        for (const auto& [di, dj] : steps) {
            const int ni = i + di;
            const int nj = j + dj;
            if (ni < 0 || ni >= g.nx() || nj < 0 || nj >= g.ny()) {
                continue;
            }
            const std::size_t next = g.index(ni, nj);
            if (refuge_[next] && !seen[next]) {
                seen[next] = 1;
                ++reached;
                frontier.push(next);
            }
        }
    }
    return reached == refuge_count_;
}

WeightField build_weight(const Grid& grid, const WeightShape& shape) {
    if (shape.mode != WeightMode::zero && !(shape.b0 > 0.0)) {
        throw ConfigurationError("weight amplitude b0 must be positive");
    }
    if (shape.mode == WeightMode::bump) {
        if (!(shape.radius > 0.0)) {
            throw ConfigurationError("bump radius must be positive");
        }
        const auto& cx = shape.center[0];
        const bool inside_x = cx - shape.radius > grid.x_extent().lo &&
                              cx + shape.radius < grid.x_extent().hi;
        bool inside_y = true;
        if (grid.dimension() == 2) {
            const auto& cy = shape.center[1];
            inside_y = cy - shape.radius > grid.y_extent().lo && cy + shape.radius < grid.y_extent().hi;
        }
        if (!inside_x || !inside_y) {
            throw ConfigurationError("bump support touches the boundary: its closure must lie inside the domain");
        }
    }
    GridFunction values(grid);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        values[k] = shape.evaluate(grid.x(k), grid.y(k), grid.dimension());
    }
    return WeightField(std::move(values), shape);
}

}  // namespace quasilog
