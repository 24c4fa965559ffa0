#pragma once

#include "quasilog/grid.hpp"
#include "quasilog/weight.hpp"

#include <Eigen/SparseCore>

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace quasilog {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Symmetric sparse operator -Δ_h + V with an optional diagonal potential.
class LinearOperator {
public:
    explicit LinearOperator(SparseMatrix stencil, std::vector<double> potential = {});

    std::size_t size() const noexcept { return static_cast<std::size_t>(stencil_.rows()); }
    const SparseMatrix& stencil() const noexcept { return stencil_; }
    /// Diagonal potential; empty means V ≡ 0.
    const std::vector<double>& potential() const noexcept { return potential_; }

    LinearOperator with_potential(std::vector<double> potential) const;
    /// stencil + diag(potential) + shift * I.
    SparseMatrix assembled(double shift = 0.0) const;

    std::vector<double> apply(std::span<const double> x) const;
    double entry(std::size_t row, std::size_t col) const;
    bool is_symmetric(double tolerance = 0.0) const;
    /// min_i (a_ii - Σ_{j≠i} |a_ij|), a lower bound for the spectrum.
    double gershgorin_lower_bound() const;

private:
    SparseMatrix stencil_;
    std::vector<double> potential_;
};

/// 3-point (1D) or 5-point (2D) Dirichlet stencil for -Δ with boundary values eliminated.
LinearOperator assemble_laplacian(const Grid& grid);

/// Principal submatrix of a grid operator on a node subset, with the node map back to the grid.
struct RestrictedOperator {
    LinearOperator op;
    std::vector<std::size_t> nodes;
};

/// -Δ on the refuge Ω_{b,0}: nodes of Ω₊ act as homogeneous Dirichlet boundary.
RestrictedOperator refuge_operator(const Grid& grid, const WeightField& weight);

/// Factorized solver for the sparse symmetric systems used throughout.
///
/// Systems below `direct_limit` unknowns use a sparse LDLᵀ factorization
/// (falling back to LU if a pivot breaks down); larger positive definite
/// systems use conjugate gradients with an incomplete Cholesky preconditioner.
class SparseSolver {
public:
    static constexpr std::size_t direct_limit = 100000;

    explicit SparseSolver(const SparseMatrix& matrix, bool positive_definite = true);
    ~SparseSolver();
    SparseSolver(SparseSolver&&) noexcept;
    SparseSolver& operator=(SparseSolver&&) noexcept;

    std::vector<double> solve(std::span<const double> rhs) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Solve -Δe = 1 on the box enlarged by `enlargement` on every side (same mesh width) and
/// restrict e to the nodes of the original grid.
GridFunction auxiliary_supersolution_field(const Grid& grid, double enlargement);

/// Default enlargement: a quarter of the longest side.
double default_enlargement(const Grid& grid);

}  // namespace quasilog
