#include "quasilog/stationary.hpp"

#include "quasilog/errors.hpp"

#include <algorithm>
#include <cmath>

namespace quasilog {

namespace {

double sup_norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) {
        s = std::max(s, std::abs(x));
    }
    return s;
}

double l2_squared(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) {
        s += x * x;
    }
    return s;
}

double scale_of(std::span<const double> v) { return std::max(1.0, sup_norm(v)); }

void require_same_grid(const DualProblem& problem, const GridFunction& v, const char* what) {
    if (!(v.grid() == problem.grid())) {
        throw DomainError(std::string(what) + " lives on a different grid than the problem");
    }
}

struct NewtonOutcome {
    bool converged = false;
    int iterations = 0;
    double residual = 0.0;
};

// Damped Newton on R(v) = A v - r(v), updating v in place.
NewtonOutcome newton(const DualProblem& problem, double lambda, const SolverConfig& config,
                     std::vector<double>& v) {
    NewtonOutcome out;
    const std::size_t n = v.size();
    std::vector<double> res = problem.residual(lambda, v);
    double res_sup = sup_norm(res);
    double res_l2 = std::sqrt(l2_squared(res));
    std::vector<double> trial(n);
    for (int it = 1; it <= config.max_newton; ++it) {
        const std::vector<double> d = problem.reaction_derivative(lambda, v);
        std::vector<double> neg_d(n);
        std::vector<double> rhs(n);
        for (std::size_t k = 0; k < n; ++k) {
            neg_d[k] = -d[k];
            rhs[k] = -res[k];
        }
        std::vector<double> delta;
        try {
            const SparseSolver solver(problem.laplacian().with_potential(neg_d).assembled(), false);
            delta = solver.solve(rhs);
        } catch (const NumericError&) {
            out.iterations = it;
            out.residual = res_sup;
            return out;
        }

        double alpha = 1.0;
        bool accepted = false;
        std::vector<double> trial_res;
        for (int ls = 0; ls < 40; ++ls) {
            for (std::size_t k = 0; k < n; ++k) {
                trial[k] = std::max(0.0, v[k] + alpha * delta[k]);
            }
            trial_res = problem.residual(lambda, trial);
            const double l2 = std::sqrt(l2_squared(trial_res));
            if (l2 <= (1.0 - 1e-4 * alpha) * res_l2 ||
                sup_norm(trial_res) <= config.newton_tol * scale_of(trial)) {
                accepted = true;
                break;
            }
            alpha *= config.damping;
        }
        out.iterations = it;
        if (!accepted) {
            out.residual = res_sup;
            return out;
        }
        double step = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            step = std::max(step, std::abs(trial[k] - v[k]));
        }
        v.swap(trial);
        res = std::move(trial_res);
        res_sup = sup_norm(res);
        res_l2 = std::sqrt(l2_squared(res));
        const double scale = scale_of(v);
        if (res_sup <= config.newton_tol * scale && step <= config.step_tol * scale) {
            out.converged = true;
            out.residual = res_sup;
            return out;
        }
    }
    out.residual = res_sup;
    return out;
}

// Upper barrier for the monotone scheme: K(λ)e when κ > 0, the constant (λ/b)^{1/(p-1)} for κ = 0
// with b bounded below.
std::vector<double> monotone_upper(const DualProblem& problem, double lambda) {
    if (!problem.transform().is_identity()) {
        return supersolution(problem, lambda).field.data();
    }
    double b_min = problem.weight().values().min();
    if (b_min > 0.0) {
        const double level = std::pow(std::max(lambda, 0.0) / b_min, 1.0 / (problem.transform().p() - 1.0));
        return std::vector<double>(problem.grid().size(), level);
    }
    throw ConvergenceError("Newton stalled and no supersolution is available for kappa = 0 with a refuge",
                           std::numeric_limits<double>::quiet_NaN());
}

// Smallest M with r' + M ≥ 0 on [0, top] for every weight value, padded by 5%; never below λ.
double automatic_shift(const DualProblem& problem, double lambda, double top) {
    const double b_max = problem.weight().max();
    double worst = 0.0;
    const int samples = 400;
    for (int k = 0; k <= samples; ++k) {
        const double t = top * std::pow(1e-8, 1.0 - static_cast<double>(k) / samples);
        for (double b : {0.0, b_max}) {
            worst = std::max(worst, -problem.transform().reaction_derivative(lambda, b, t));
        }
    }
    return std::max(lambda, 1.05 * worst);
}

}  // namespace

void SolverConfig::validate() const {
    if (!(newton_tol > 0.0)) throw ConfigurationError("newton_tol must be positive");
    if (!(step_tol > 0.0)) throw ConfigurationError("step_tol must be positive");
    if (!(damping > 0.0 && damping < 1.0)) throw ConfigurationError("damping must lie in (0,1)");
    if (max_newton < 1) throw ConfigurationError("max_newton must be at least 1");
    if (!(monotone_shift >= 0.0)) throw ConfigurationError("monotone_shift must be nonnegative");
    if (max_monotone < 1) throw ConfigurationError("max_monotone must be at least 1");
    if (continuation_steps < 2) throw ConfigurationError("continuation_steps must be at least 2");
    if (!(zero_threshold > 0.0)) throw ConfigurationError("zero_threshold must be positive");
}

DualProblem::DualProblem(WeightField weight, DualTransform transform)
    : weight_(std::move(weight)), transform_(transform), laplacian_(assemble_laplacian(weight_.grid())) {}

std::vector<double> DualProblem::reaction(double lambda, std::span<const double> v) const {
    std::vector<double> out(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) {
        out[k] = transform_.reaction(lambda, weight_[k], v[k]);
    }
    return out;
}

std::vector<double> DualProblem::reaction_derivative(double lambda, std::span<const double> v) const {
    std::vector<double> out(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) {
        out[k] = transform_.reaction_derivative(lambda, weight_[k], v[k]);
    }
    return out;
}

std::vector<double> DualProblem::residual(double lambda, std::span<const double> v) const {
    std::vector<double> out = laplacian_.apply(v);
    for (std::size_t k = 0; k < v.size(); ++k) {
        out[k] -= transform_.reaction(lambda, weight_[k], v[k]);
    }
    return out;
}

Spectrum analyze_spectrum(const WeightField& weight, EigenOptions options) {
    const Grid& grid = weight.grid();
    EigenResult full = principal_eigen(grid, {}, options);
    Spectrum spectrum{full.lambda1, GridFunction(grid, std::move(full.phi)), std::nullopt};
    if (weight.refuge_count() > 0) {
        spectrum.refuge = refuge_eigenvalue(grid, weight, options);
    }
    return spectrum;
}

double dual_residual_sup(const DualProblem& problem, double lambda, const GridFunction& v) {
    require_same_grid(problem, v, "residual argument");
    const Grid& g = problem.grid();
    const double cx = 1.0 / (g.hx() * g.hx());
    const double cy = g.dimension() == 2 ? 1.0 / (g.hy() * g.hy()) : 0.0;
    const auto at = [&](int i, int j) {
        if (i < 0 || i >= g.nx() || j < 0 || j >= g.ny()) {
            return 0.0;
        }
        return v[g.index(i, j)];
    };
    const DualTransform& tr = problem.transform();
    double worst = 0.0;
    for (std::size_t node = 0; node < g.size(); ++node) {
        const auto [i, j] = g.lattice(node);
        const double c = v[node];
        double lap = cx * (2.0 * c - at(i - 1, j) - at(i + 1, j));
        if (g.dimension() == 2) {
            lap += cy * (2.0 * c - at(i, j - 1) - at(i, j + 1));
        }
        const double r = reaction(tr.kappa(), tr.p(), lambda, problem.weight()[node], c);
        worst = std::max(worst, std::abs(lap - r));
    }
    return worst;
}

Solution solve_dual(const DualProblem& problem, double lambda, const SolverConfig& config,
                    const GridFunction& init) {
    config.validate();
    require_same_grid(problem, init, "initial guess");
    if (!std::isfinite(lambda)) {
        throw DomainError("lambda must be finite");
    }
    std::vector<double> v = init.data();
    for (double& x : v) {
        if (!std::isfinite(x) || x < -1e-12 * scale_of(init.values())) {
            throw DomainError("initial guess must be finite and nonnegative");
        }
        x = std::max(0.0, x);
    }

    const NewtonOutcome first = newton(problem, lambda, config, v);
    if (first.converged) {
        return {GridFunction(problem.grid(), std::move(v)), first.iterations, 0, first.residual, false};
    }
    if (!config.monotone_fallback) {
        throw ConvergenceError("Newton iteration stalled", first.residual);
    }

    // Order-preserving iteration downward from an upper barrier. Newton is tried from the barrier
    // itself and then every `polish_every` sweeps; a polished iterate is kept only if it is positive
    // and stays below the monotone iterate, i.e. it is the limit the sweeps are heading for.
    std::vector<double> w = monotone_upper(problem, lambda);
    int newton_total = first.iterations;
    const auto try_polish = [&](const std::vector<double>& from) -> std::optional<std::vector<double>> {
        std::vector<double> trial = from;
        const NewtonOutcome out = newton(problem, lambda, config, trial);
        newton_total += out.iterations;
        if (!out.converged || sup_norm(trial) <= config.zero_threshold) return std::nullopt;
        const double tol = config.newton_tol * scale_of(from);
        for (std::size_t k = 0; k < trial.size(); ++k) {
            if (trial[k] > from[k] + tol) return std::nullopt;
        }
        return trial;
    };
    if (auto direct = try_polish(w)) {
        const double res = sup_norm(problem.residual(lambda, *direct));
        return {GridFunction(problem.grid(), std::move(*direct)), newton_total, 0, res, true};
    }

    const double shift = config.monotone_shift > 0.0 ? config.monotone_shift
                                                     : automatic_shift(problem, lambda, sup_norm(w));
    const SparseSolver shifted(problem.laplacian().assembled(shift));
    constexpr int polish_every = 200;
    int sweeps = 0;
    for (; sweeps < config.max_monotone; ++sweeps) {
        std::vector<double> rhs = problem.reaction(lambda, w);
        for (std::size_t k = 0; k < w.size(); ++k) {
            rhs[k] += shift * w[k];
        }
        std::vector<double> next = shifted.solve(rhs);
        double step = 0.0;
        for (std::size_t k = 0; k < w.size(); ++k) {
            next[k] = std::max(0.0, next[k]);
            step = std::max(step, std::abs(next[k] - w[k]));
        }
        w.swap(next);
        if (step <= 1e-6 * scale_of(w)) {
            ++sweeps;
            break;
        }
        if ((sweeps + 1) % polish_every == 0) {
            if (auto polished = try_polish(w)) {
                const double res = sup_norm(problem.residual(lambda, *polished));
                return {GridFunction(problem.grid(), std::move(*polished)), newton_total, sweeps + 1, res, true};
            }
        }
    }
    const NewtonOutcome polish = newton(problem, lambda, config, w);
    newton_total += polish.iterations;
    if (!polish.converged) {
        throw ConvergenceError("Newton and the monotone fallback both failed to converge", polish.residual);
    }
    return {GridFunction(problem.grid(), std::move(w)), newton_total, sweeps,
            polish.residual, true};
}

Subsolution subsolution(const DualProblem& problem, double lambda, const RefugeEigen& refuge) {
    require_same_grid(problem, refuge.phi, "refuge eigenfunction");
    if (problem.transform().is_identity()) {
        throw PreconditionError("subsolution requires kappa > 0");
    }
    if (!(lambda > refuge.lambda)) {
        throw PreconditionError("subsolution requires lambda > lambda_{b,0}");
    }
    const double eps = problem.transform().h_inverse(refuge.lambda / lambda);
    GridFunction field(problem.grid());
    for (std::size_t k = 0; k < field.size(); ++k) {
        field[k] = eps * refuge.phi[k];
    }
    Subsolution out{field, eps, 0, 0.0};
    const std::vector<double> res = problem.residual(lambda, field.values());
    for (double excess : res) {
        out.worst_excess = std::max(out.worst_excess, excess);
        if (excess > 1e-8) {
            ++out.violations;
        }
    }
    return out;
}

Supersolution supersolution(const DualProblem& problem, double lambda, double margin) {
    if (problem.transform().is_identity()) {
        throw PreconditionError("supersolution K(lambda) e requires kappa > 0");
    }
    return supersolution(problem, lambda,
                         auxiliary_supersolution_field(problem.grid(), default_enlargement(problem.grid())),
                         margin);
}

Supersolution supersolution(const DualProblem& problem, double lambda, const GridFunction& e, double margin) {
    require_same_grid(problem, e, "auxiliary field");
    if (problem.transform().is_identity()) {
        throw PreconditionError("supersolution K(lambda) e requires kappa > 0");
    }
    if (!(margin >= 0.0)) {
        throw DomainError("supersolution margin must be nonnegative");
    }
    const double kappa = problem.transform().kappa();
    const double K = (1.0 + margin) * std::max(lambda, 0.0) / std::sqrt(2.0 * kappa) * std::max(1.0, 1.0 / e.min());
    GridFunction field(problem.grid());
    for (std::size_t k = 0; k < field.size(); ++k) {
        field[k] = K * e[k];
    }
    Supersolution out{field, K, 0};
    const std::vector<double> res = problem.residual(lambda, field.values());
    for (double r : res) {
        if (r < 0.0) {
            ++out.violations;
        }
    }
    return out;
}

GridFunction recover_primal(const DualTransform& transform, const GridFunction& theta) {
    GridFunction psi(theta.grid());
    for (std::size_t k = 0; k < theta.size(); ++k) {
        if (theta[k] < 0.0) {
            throw DomainError("recover_primal requires a nonnegative field");
        }
        psi[k] = transform.value(theta[k]);
    }
    return psi;
}

GridFunction bifurcation_seed(const DualProblem& problem, const Spectrum& spectrum, double lambda) {
    const GridFunction& phi = spectrum.phi1;
    require_same_grid(problem, phi, "principal eigenfunction");
    const double mu = spectrum.lambda1 * l2_squared(phi.values());
    // q(δ) = ⟨r(δφ), φ⟩ / δ; the Galerkin amplitude solves q(δ) = μ.
    const auto q = [&](double delta) {
        double s = 0.0;
        for (std::size_t k = 0; k < phi.size(); ++k) {
            s += problem.transform().reaction(lambda, problem.weight()[k], delta * phi[k]) * phi[k];
        }
        return s / delta;
    };
    double lo = 1e-6;
    GridFunction seed(phi.grid());
    double delta = 0.1;
    if (q(lo) > mu) {
        double hi = 2.0 * lo;
        int grow = 0;
        while (q(hi) > mu && grow < 400) {
            lo = hi;
            hi *= 2.0;
            ++grow;
        }
        if (grow < 400) {
            for (int it = 0; it < 200 && hi / lo > 1.0 + 1e-12; ++it) {
                const double mid = std::sqrt(lo * hi);
                (q(mid) > mu ? lo : hi) = mid;
            }
            delta = std::sqrt(lo * hi);
        }
    }
    for (std::size_t k = 0; k < phi.size(); ++k) {
        seed[k] = delta * phi[k];
    }
    return seed;
}

Solution solve_positive(const DualProblem& problem, const Spectrum& spectrum, double lambda,
                        const SolverConfig& config, const GridFunction* warm) {
    std::vector<GridFunction> seeds;
    if (warm != nullptr) {
        seeds.push_back(*warm);
    }
    if (spectrum.refuge && !problem.transform().is_identity() && lambda > spectrum.lambda_b0()) {
        seeds.push_back(subsolution(problem, lambda, *spectrum.refuge).field);
    }
    seeds.push_back(bifurcation_seed(problem, spectrum, lambda));
    if (!problem.transform().is_identity() && lambda > spectrum.lambda1) {
        seeds.push_back(supersolution(problem, lambda).field);
    }

    std::optional<Solution> accepted;
    std::optional<ConvergenceError> convergence;
    std::string failure;
    int iterations = 0;
    for (const GridFunction& seed : seeds) {
        try {
            Solution sol = solve_dual(problem, lambda, config, seed);
            iterations += sol.newton_iterations;
            const bool zero = sol.is_zero(config.zero_threshold);
            accepted = std::move(sol);
            // A collapse onto the trivial branch above λ₁ is the unstable solution: try the next seed.
            if (!(zero && lambda > spectrum.lambda1)) {
                break;
            }
        } catch (const ConvergenceError& err) {
            convergence = err;
        } catch (const NumericError& err) {
            failure = err.what();
        }
    }
    if (!accepted) {
        if (convergence) throw *convergence;
        throw NumericError(failure.empty() ? "no seed produced a solution" : failure);
    }
    accepted->newton_iterations = iterations;
    return *accepted;
}

BranchResult branch_continuation(const DualProblem& problem, const Spectrum& spectrum, double lambda_from,
                                 double lambda_to, int steps, const SolverConfig& config) {
    config.validate();
    if (steps < 2) {
        throw DomainError("branch continuation needs at least two steps");
    }
    if (!std::isfinite(lambda_from) || !std::isfinite(lambda_to)) {
        throw DomainError("lambda range must be finite");
    }
    BranchResult result;
    std::optional<GridFunction> previous;
    std::optional<GridFunction> last_positive;
    double last_positive_lambda = 0.0;
    for (int s = 0; s < steps; ++s) {
        const double lambda = lambda_from + (lambda_to - lambda_from) * s / (steps - 1);
        BranchPoint point;
        point.lambda = lambda;
        point.kappa = problem.transform().kappa();
        std::optional<Solution> accepted;
        try {
            accepted = solve_positive(problem, spectrum, lambda, config,
                                      config.warm_start && previous ? &*previous : nullptr);
        } catch (const Error& err) {
            point.solved = false;
            point.note = err.what();
            point.sup_norm = std::numeric_limits<double>::quiet_NaN();
            point.l2_norm = std::numeric_limits<double>::quiet_NaN();
            result.points.push_back(point);
            result.solutions.emplace_back(problem.grid(), std::numeric_limits<double>::quiet_NaN());
            continue;
        }
        point.newton_iters = accepted->newton_iterations;
        const GridFunction& theta = accepted->value;
        point.sup_norm = theta.sup_norm();
        point.l2_norm = theta.l2_norm();
        point.converged_to_zero = point.sup_norm <= config.zero_threshold;
        if (!point.converged_to_zero) {
            try {
                point.stability_eig = stability_eigen(problem, lambda, theta, config.eigen);
            } catch (const Error& err) {
                point.note = err.what();
            }
            if (last_positive && lambda != last_positive_lambda) {
                const bool up = lambda > last_positive_lambda;
                for (std::size_t k = 0; k < theta.size(); ++k) {
                    const double gap = up ? theta[k] - (*last_positive)[k] : (*last_positive)[k] - theta[k];
                    if (!(gap > 0.0)) {
                        ++result.monotonicity_violations;
                        point.note = "monotonicity violated";
                        break;
                    }
                }
            }
            last_positive = theta;
            last_positive_lambda = lambda;
        }
        previous = theta;
        result.points.push_back(point);
        result.solutions.push_back(theta);
    }
    return result;
}

std::vector<double> stability_potential(const DualProblem& problem, double lambda, const GridFunction& theta) {
    require_same_grid(problem, theta, "solution");
    const double kappa = problem.transform().kappa();
    const double p = problem.transform().p();
    std::vector<double> potential(theta.size());
    for (std::size_t k = 0; k < theta.size(); ++k) {
        const TransformValue tv = problem.transform().evaluate(std::max(theta[k], 0.0));
        const double fp2 = tv.fp * tv.fp;
        const double fp4 = fp2 * fp2;
        const double b = problem.weight()[k];
        double absorption = 0.0;
        if (b != 0.0) {
            absorption = b * std::pow(tv.f, p - 1.0) * ((p - 1.0) * fp2 + fp4);
        }
        potential[k] = -lambda * (fp2 - 2.0 * kappa * tv.f * tv.f * fp4) + absorption;
    }
    return potential;
}

double stability_eigen(const DualProblem& problem, double lambda, const GridFunction& theta,
                       EigenOptions options) {
    return principal_eigen(problem.laplacian().with_potential(stability_potential(problem, lambda, theta)), options)
        .lambda1;
}

}  // namespace quasilog
