// Classical logistic problem, kept free of the dual transform so it can serve as a reference
// for the κ → 0 limit and for the κ = 0 dual solver.
#include "quasilog/errors.hpp"
#include "quasilog/stationary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace quasilog {

namespace {

double logistic_term(double lambda, double b, double p, double u) {
    if (u <= 0.0) {
        return 0.0;
    }
    return lambda * u - (b == 0.0 ? 0.0 : b * std::pow(u, p));
}

double logistic_slope(double lambda, double b, double p, double u) {
    if (b == 0.0) {
        return lambda;
    }
    return lambda - p * b * std::pow(std::max(u, 0.0), p - 1.0);
}

struct LogisticNewton {
    bool converged = false;
    int iterations = 0;
    double residual = 0.0;
};

// Undamped Newton with clipping at zero, updating u in place.
LogisticNewton logistic_newton(const WeightField& weight, const LinearOperator& laplacian, double p, double lambda,
                               const SolverConfig& config, std::vector<double>& u) {
    const std::size_t n = u.size();
    LogisticNewton out;
    for (int it = 1; it <= std::max(config.max_newton, 400); ++it) {
        std::vector<double> res = laplacian.apply(u);
        std::vector<double> potential(n);
        for (std::size_t k = 0; k < n; ++k) {
            res[k] -= logistic_term(lambda, weight[k], p, u[k]);
            potential[k] = -logistic_slope(lambda, weight[k], p, u[k]);
            res[k] = -res[k];
        }
        std::vector<double> delta;
        try {
            const SparseSolver solver(laplacian.with_potential(potential).assembled(), false);
            delta = solver.solve(res);
        } catch (const NumericError&) {
            out.iterations = it;
            return out;
        }
        double step = 0.0;
        double top = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            u[k] = std::max(0.0, u[k] + delta[k]);
            step = std::max(step, std::abs(delta[k]));
            top = std::max(top, u[k]);
        }
        const std::vector<double> after = laplacian.apply(u);
        out.residual = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            out.residual = std::max(out.residual, std::abs(after[k] - logistic_term(lambda, weight[k], p, u[k])));
        }
        out.iterations = it;
        const double scale = std::max(1.0, top);
        if (top <= 1e-3 * config.zero_threshold) {
            return out;
        }
        if (out.residual <= config.newton_tol * scale && step <= config.step_tol * scale) {
            out.converged = true;
            return out;
        }
    }
    return out;
}

}  // namespace

Solution solve_logistic(const WeightField& weight, double p, double lambda, const SolverConfig& config,
                        const Spectrum& spectrum) {
    config.validate();
    if (!(p > 1.0)) {
        throw DomainError("logistic exponent must exceed 1");
    }
    const Grid& grid = weight.grid();
    const std::size_t n = grid.size();
    GridFunction zero(grid);
    const bool no_absorption = weight.max() == 0.0;
    if (no_absorption || lambda <= spectrum.lambda1 || lambda >= spectrum.lambda_b0()) {
        return {zero, 0, 0, 0.0, false};
    }

    // Newton from a constant above the solution. The reaction is concave in u, so iterates
    // decrease monotonically as long as the start makes the Jacobian inverse-positive.
    double b_min = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) {
        if (weight[k] > 0.0) {
            b_min = std::min(b_min, weight[k]);
        }
    }
    const double level = std::max(1.0, std::pow(10.0 * std::max(lambda, 1.0) / (p * b_min), 1.0 / (p - 1.0)));
    std::vector<double> u(n, std::min(level, 1e8));
    const LinearOperator laplacian = assemble_laplacian(grid);

    // On the refuge the Jacobian is -Δ - λ, which degenerates as λ ↑ λ_{b,0}. Close to it, start
    // from the midpoint of (λ₁, λ_{b,0}) and shrink the gap to λ_{b,0} geometrically with warm
    // starts, halving a step whenever Newton fails or collapses onto zero.
    std::vector<double> ladder;
    if (spectrum.refuge) {
        const double mid = 0.5 * (spectrum.lambda1 + spectrum.lambda_b0());
        for (double gap = spectrum.lambda_b0() - mid; spectrum.lambda_b0() - gap < lambda; gap *= 0.75) {
            ladder.push_back(spectrum.lambda_b0() - gap);
        }
    }
    ladder.push_back(lambda);

    int iterations = 0;
    LogisticNewton last;
    double reached = -1.0;
    for (double rung : ladder) {
        for (int halving = 0;; ++halving) {
            const double target = reached < 0.0 ? rung : reached + (rung - reached) * std::ldexp(1.0, -halving);
            std::vector<double> trial = u;
            last = logistic_newton(weight, laplacian, p, target, config, trial);
            iterations += last.iterations;
            if (last.converged && *std::max_element(trial.begin(), trial.end()) > config.zero_threshold) {
                u.swap(trial);
                reached = target;
                if (target == rung) break;
                halving = -1;
                continue;
            }
            if (reached < 0.0 || halving >= 30) {
                throw ConvergenceError("logistic Newton iteration did not converge", last.residual);
            }
        }
    }
    GridFunction out(grid, std::move(u));
    return {std::move(out), iterations, 0, last.residual, false};
}

}  // namespace quasilog
