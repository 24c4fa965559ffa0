#pragma once

#include "quasilog/dual_transform.hpp"
#include "quasilog/eigensolver.hpp"
#include "quasilog/grid.hpp"
#include "quasilog/linear_operator.hpp"
#include "quasilog/weight.hpp"

#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace quasilog {

struct SolverConfig {
    /// Newton stops once ‖Av - r(v)‖_∞ ≤ newton_tol * max(1, ‖v‖_∞) ...
    double newton_tol = 1e-9;
    /// ... and the last step satisfies ‖δ‖_∞ ≤ step_tol * max(1, ‖v‖_∞).
    double step_tol = 1e-11;
    int max_newton = 200;
    /// Backtracking factor of the line search.
    double damping = 0.5;
    bool monotone_fallback = true;
    /// Shift of the monotone scheme; 0 picks a Lipschitz bound automatically.
    double monotone_shift = 0.0;
    int max_monotone = 20000;
    int continuation_steps = 40;
    /// ‖v‖_∞ at or below this declares the trivial solution.
    double zero_threshold = 1e-8;
    /// Warm-start continuation from the previous branch point; otherwise each point is seeded cold.
    bool warm_start = true;
    EigenOptions eigen{};

    void validate() const;
};

/// The discretized dual problem -Δv = λ f f' - b f^p f' on a grid.
class DualProblem {
public:
    DualProblem(WeightField weight, DualTransform transform);

    const Grid& grid() const noexcept { return weight_.grid(); }
    const WeightField& weight() const noexcept { return weight_; }
    const DualTransform& transform() const noexcept { return transform_; }
    const LinearOperator& laplacian() const noexcept { return laplacian_; }

    /// Nodewise reaction λ f(v) f'(v) - b f(v)^p f'(v).
    std::vector<double> reaction(double lambda, std::span<const double> v) const;
    std::vector<double> reaction_derivative(double lambda, std::span<const double> v) const;
    /// A v - reaction(v) via the assembled sparse operator.
    std::vector<double> residual(double lambda, std::span<const double> v) const;

private:
    WeightField weight_;
    DualTransform transform_;
    LinearOperator laplacian_;
};

/// Principal eigen-data shared by the solvers: λ₁, φ₁ and, when b vanishes somewhere, λ_{b,0}, φ_{b,0}.
struct Spectrum {
    double lambda1 = 0.0;
    GridFunction phi1;
    std::optional<RefugeEigen> refuge;

    /// +∞ when the refuge is empty (b > 0 everywhere).
    double lambda_b0() const noexcept {
        return refuge ? refuge->lambda : std::numeric_limits<double>::infinity();
    }
};

Spectrum analyze_spectrum(const WeightField& weight, EigenOptions options = {});

struct Solution {
    GridFunction value;
    int newton_iterations = 0;
    int monotone_iterations = 0;
    /// Final ‖Av - r(v)‖_∞.
    double residual = 0.0;
    bool used_fallback = false;

    bool is_zero(double threshold) const { return value.sup_norm() <= threshold; }
};

/// Residual ‖A_h v - r(v)‖_∞ evaluated directly from the stencil, independent of the sparse assembly.
double dual_residual_sup(const DualProblem& problem, double lambda, const GridFunction& v);

/// Damped Newton for the dual problem with a monotone-iteration fallback.
///
/// Iterates are clipped at zero, matching the extension of the reaction by 0 for v < 0.
/// If Newton stalls and the fallback is enabled, Newton restarts from the supersolution;
/// failing that, the order-preserving scheme v ← (A + M)⁻¹(r(v) + M v) runs downward
/// from it, with periodic Newton polishing of the iterate.
Solution solve_dual(const DualProblem& problem, double lambda, const SolverConfig& config,
                    const GridFunction& init);

/// ε(λ) φ_{b,0} with ε(λ) = h⁻¹(λ_{b,0}/λ), zero on Ω₊.
struct Subsolution {
    GridFunction field;
    double epsilon = 0.0;
    /// Nodes where A v > r(v) + 1e-8.
    int violations = 0;
    double worst_excess = 0.0;
};

Subsolution subsolution(const DualProblem& problem, double lambda, const RefugeEigen& refuge);

/// K(λ) e with K(λ) = (1 + margin) λ / sqrt(2κ) · max(1, 1/min e).
struct Supersolution {
    GridFunction field;
    double K = 0.0;
    /// Nodes where A v < r(v).
    int violations = 0;
};

Supersolution supersolution(const DualProblem& problem, double lambda, double margin = 0.1);
Supersolution supersolution(const DualProblem& problem, double lambda, const GridFunction& e,
                            double margin = 0.1);

/// Ψ = f_κ(Θ) nodewise.
GridFunction recover_primal(const DualTransform& transform, const GridFunction& theta);

struct BranchPoint {
    double lambda = 0.0;
    double kappa = 0.0;
    double sup_norm = 0.0;
    double l2_norm = 0.0;
    /// λ₁ of the linearization; NaN when the point is trivial or the solve failed.
    double stability_eig = std::numeric_limits<double>::quiet_NaN();
    int newton_iters = 0;
    bool converged_to_zero = false;
    bool solved = true;
    std::string note;
};

struct BranchResult {
    std::vector<BranchPoint> points;
    std::vector<GridFunction> solutions;
    /// Consecutive positive solutions that failed Θ_next > Θ_prev at some node.
    int monotonicity_violations = 0;
};

/// Positive solution when one exists. Seeds are tried in order: `warm` if given, the subsolution
/// (λ > λ_{b,0}), the bifurcation seed and the supersolution. A collapse to zero above λ₁ moves on
/// to the next seed; the last solve is returned if every seed collapses.
Solution solve_positive(const DualProblem& problem, const Spectrum& spectrum, double lambda,
                        const SolverConfig& config, const GridFunction* warm = nullptr);

/// Natural-parameter continuation on a uniform λ grid.
BranchResult branch_continuation(const DualProblem& problem, const Spectrum& spectrum, double lambda_from,
                                 double lambda_to, int steps, const SolverConfig& config);

/// Seed δφ₁ where δ zeroes the one-mode Galerkin projection ⟨A δφ₁ - r(δφ₁), φ₁⟩.
GridFunction bifurcation_seed(const DualProblem& problem, const Spectrum& spectrum, double lambda);

/// Diagonal potential of the linearization, written out term by term:
/// -λ[(f')² - 2κ f² (f')⁴] + b f^{p-1}[(p-1)(f')² + (f')⁴].
std::vector<double> stability_potential(const DualProblem& problem, double lambda, const GridFunction& theta);

/// λ₁ of the linearized operator at a solution.
double stability_eigen(const DualProblem& problem, double lambda, const GridFunction& theta,
                       EigenOptions options = {});

/// Classical logistic problem -Δu = λu - b u^p (κ = 0), solved by its own Newton iteration.
///
/// Returns the zero function when no positive solution exists: λ ≤ λ₁, b ≡ 0, or λ ≥ λ_{b,0}.
Solution solve_logistic(const WeightField& weight, double p, double lambda, const SolverConfig& config,
                        const Spectrum& spectrum);

}  // namespace quasilog
