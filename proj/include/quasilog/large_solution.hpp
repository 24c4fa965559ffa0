#pragma once

#include "quasilog/stationary.hpp"
#include "quasilog/weight.hpp"

#include <functional>
#include <iosfwd>
#include <limits>
#include <vector>

namespace quasilog {

/// Absorption term of the radial problem -Δv = λv - B(r) a(v).
enum class Absorption {
    /// a(v) = g(v) = f_1(v)^{p+1}/v, the κ-uniform lower bound of the dual absorption.
    dual_g,
    /// a(v) = v^p, the classical logistic absorption.
    power,
};

struct RadialProblem {
    int dimension = 2;
    double radius = 1.0;
    double lambda = 0.0;
    double p = 4.0;
    Absorption absorption = Absorption::dual_g;
    /// B(r) ≥ 0 on [0, radius]; a constant when left empty.
    std::function<double(double)> weight;
    double b0 = 1.0;

    double weight_at(double r) const { return weight ? weight(r) : b0; }
    double absorb(double v) const;
    double absorb_derivative(double v) const;
};

/// Radially symmetric profile on a mesh of [0, R].
struct RadialProfile {
    std::vector<double> r;
    std::vector<double> values;
    int dimension = 2;
    /// Boundary value; +∞ tags a large-solution limit.
    double boundary_value = 0.0;
    int newton_iterations = 0;
    /// max_i |R_i| / (V_i + Σ|coefficient·operand|), the componentwise backward error of the finite-volume equations.
    double residual = 0.0;

    /// Piecewise-linear interpolation in r.
    double at(double radius) const;
    /// max over nodes with r ≤ limit.
    double max_within(double limit) const;
};

/// Mesh with `mesh_n` uniform cells of width R/mesh_n, the last one replaced by a geometric
/// layer whose widths shrink by 0.9 toward r = R down to ~1e-12 R.
std::vector<double> graded_radial_mesh(double radius, int mesh_n);

/// Finite-volume damped Newton for -r^{1-N}(r^{N-1} v')' = λv - B(r)a(v), v'(0) = 0, v(R) = M.
RadialProfile solve_radial(const RadialProblem& problem, double boundary_value, int mesh_n,
                           const RadialProfile* warm_start = nullptr);

/// Constant weight b0 and the dual absorption g.
RadialProfile solve_dirichlet_ball(int dimension, double radius, double lambda, double b0, double p,
                                   double boundary_value, int mesh_n = 400);

struct LargeSolutionOptions {
    int mesh_n = 400;
    double first_value = 10.0;
    int max_doublings = 200;
    /// Stop once the profiles of consecutive schedule entries differ by at most this on [0, R/2].
    double tolerance = 1e-6;
};

struct LargeSolution {
    RadialProfile profile;
    /// Schedule values M_k = first_value * 2^k that were solved.
    std::vector<double> schedule;
    /// sup over [0, R/2] of |profile(M_k) - profile(M_{k-1})|, one entry per k ≥ 1.
    std::vector<double> interior_differences;
    bool differences_monotone = true;
};

/// Minimal large solution as the limit M ↑ ∞ along M_k = first_value·2^k.
LargeSolution minimal_large_solution(const RadialProblem& problem, const LargeSolutionOptions& options = {});
/// Constant b0 with the dual absorption; requires p > 3.
LargeSolution minimal_large_solution(int dimension, double radius, double lambda, double b0, double p,
                                     const LargeSolutionOptions& options = {});

/// Profile CSV with header `r,value,M_tag`.
void write_profile_csv(std::ostream& out, const RadialProfile& profile);

/// G(t) = ∫_0^t g(s) ds.
double absorption_primitive(double p, double t);

struct KellerOssermanReport {
    double p = 0.0;
    double T = 0.0;
    /// ∫_1^T dt / sqrt(G(t)).
    double partial_integral = 0.0;
    /// Integrals over the decades [10^k, 10^{k+1}] for k = 0, 1, ... up to the Cauchy threshold.
    std::vector<double> decade_increments;
    /// Increment over [10³, 10⁴].
    double increment_1e3_1e4 = 0.0;
    /// Smallest decade start 10^k with increment below 1e-6.
    double cauchy_threshold = std::numeric_limits<double>::infinity();
    /// (p+1)/4: exponent of the analytic tail bound 1/sqrt(G) ≲ t^{-(p+1)/4}.
    double tail_exponent = 0.0;
    /// Bound on ∫_T^∞ dt/sqrt(G) from G(t) ≥ G(1) + 2C/(p+1)(t^{(p+1)/2} - 1) with C = g(1).
    double analytic_tail = 0.0;
};

KellerOssermanReport keller_osserman_margin(double p, double T);

struct CompactBoundRow {
    double kappa = 0.0;
    double compact_max = 0.0;
};

struct CompactBoundReport {
    std::vector<CompactBoundRow> rows;
    /// b used in the comparison problem: half the minimum of b over the comparison ball.
    double effective_b = 0.0;
    double ball_radius = 0.0;
    /// max over [0, R/2] of the minimal large solution on the comparison ball.
    double cap = 0.0;
    bool all_below = false;
};

/// Compares max_K Θ_{λ,κ} against the radial large solution on the ball of radius 2·compact_radius
/// around the bump center.
CompactBoundReport compact_bound_check(const WeightField& weight, double p, const std::vector<double>& kappas,
                                       double lambda, double compact_radius, const SolverConfig& config,
                                       const LargeSolutionOptions& options = {});

}  // namespace quasilog
