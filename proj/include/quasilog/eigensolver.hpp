#pragma once

#include "quasilog/grid.hpp"
#include "quasilog/linear_operator.hpp"
#include "quasilog/weight.hpp"

#include <vector>

namespace quasilog {

/// Principal eigenpair of a symmetric operator.
struct EigenResult {
    double lambda1 = 0.0;
    /// Positive eigenvector, normalized so max = 1.
    std::vector<double> phi;
    int iterations = 0;
    /// ‖(A - λ₁)φ‖₂ / ‖φ‖₂ at exit.
    double residual = 0.0;
};

struct EigenOptions {
    /// Stop when the relative eigen-residual ‖(A-λ)φ‖₂ / ‖φ‖₂ ≤ tol * max(1, ‖A‖_∞).
    double tol = 1e-10;
    int max_iter = 5000;
};

/// Smallest eigenvalue by shifted inverse power iteration.
///
/// The shift sits one unit below the Gershgorin lower bound, so the shifted
/// matrix is positive definite and is factored once. The eigenvalue is the
/// Rayleigh quotient of the final iterate, accumulated in extended precision.
EigenResult principal_eigen(const LinearOperator& op, EigenOptions options = {});

/// λ₁[-Δ + V] on the full grid.
EigenResult principal_eigen(const Grid& grid, const std::vector<double>& potential = {},
                            EigenOptions options = {});

/// λ_{b,0} and φ_{b,0} extended by zero outside the refuge.
struct RefugeEigen {
    double lambda = 0.0;
    GridFunction phi;
    int iterations = 0;
    double residual = 0.0;
};

RefugeEigen refuge_eigenvalue(const Grid& grid, const WeightField& weight, EigenOptions options = {});

/// Closed-form smallest eigenvalue of the discrete Dirichlet Laplacian on the grid:
/// Σ_axes (4/h²) sin²(π h / (2 L)).
double discrete_laplacian_lambda1(const Grid& grid);

}  // namespace quasilog
