#include "quasilog/experiment.hpp"

#include "quasilog/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

namespace quasilog {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

Check at_most(std::string id, double measured, double threshold) {
    return {std::move(id), measured <= threshold ? CheckStatus::pass : CheckStatus::fail, measured, threshold};
}

Check above(std::string id, double measured, double threshold) {
    return {std::move(id), measured > threshold ? CheckStatus::pass : CheckStatus::fail, measured, threshold};
}

Check skipped(std::string id, double threshold) { return {std::move(id), CheckStatus::skipped, nan, threshold}; }

Check from_sweep(const SweepCheck& c) {
    Check out{c.id, c.pass ? CheckStatus::pass : CheckStatus::fail, c.measured, c.threshold};
    out.exploratory = c.exploratory;
    return out;
}

std::string num(double v) { return format_number(v); }

// index,x[,y] prefix of a nodal CSV row.
void node_prefix(std::ostream& out, const Grid& grid, std::size_t k) {
    out << k << ',' << num(grid.x(k)) << ',';
    if (grid.dimension() == 2) out << num(grid.y(k)) << ',';
}

std::string node_header(const Grid& grid) { return grid.dimension() == 2 ? "index,x,y," : "index,x,"; }

// Nodes where lower > upper beyond a rounding slack.
int order_violations(const GridFunction& lower, const GridFunction& upper) {
    const double slack = 1e-10 * std::max(1.0, std::max(lower.sup_norm(), upper.sup_norm()));
    int count = 0;
    for (std::size_t k = 0; k < lower.size(); ++k) {
        if (lower[k] > upper[k] + slack) ++count;
    }
    return count;
}

// b f^{p-1}(max Θ) - λ for a constant weight.
double a_priori_excess(const ExperimentConfig& config, double lambda, const GridFunction& theta) {
    const DualTransform tr = config.transform();
    return config.weight.b0 * std::pow(tr.value(theta.max()), config.p - 1.0) - lambda;
}

// max_k |V_k + r'_k| / max(1, |r'_k|).
double potential_mismatch(const DualProblem& problem, double lambda, const GridFunction& theta) {
    const std::vector<double> v = stability_potential(problem, lambda, theta);
    const std::vector<double> d = problem.reaction_derivative(lambda, theta.values());
    double worst = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) {
        worst = std::max(worst, std::abs(v[k] + d[k]) / std::max(1.0, std::abs(d[k])));
    }
    return worst;
}

std::vector<Compact> make_compacts(const ExperimentConfig& config, const WeightField& weight) {
    if (config.compact == "refuge") return {refuge_compact(weight, config.compact_margin)};
    if (config.compact == "support") return {support_compact(weight, config.compact_radius)};
    return {};
}

std::string sweep_csv(const SweepReport& report) {
    std::ostringstream out;
    write_sweep_csv(out, report);
    return out.str();
}

ExperimentResult run_eig(const ExperimentConfig& config) {
    const WeightField weight = config.weight_field();
    const Grid& grid = weight.grid();
    const Spectrum spectrum = analyze_spectrum(weight, config.solver.eigen);
    const EigenResult direct = principal_eigen(grid, {}, config.solver.eigen);
    const double discrete = discrete_laplacian_lambda1(grid);
    double continuum = std::pow(std::numbers::pi / grid.x_extent().length(), 2);
    if (grid.dimension() == 2) continuum += std::pow(std::numbers::pi / grid.y_extent().length(), 2);

    ExperimentResult result;
    result.checks.push_back(at_most("lambda1_discrete_rel", std::abs(spectrum.lambda1 - discrete) / discrete, 1e-9));
    result.checks.push_back(
        at_most("lambda1_continuum_rel", std::abs(spectrum.lambda1 - continuum) / continuum, config.continuum_tol));
    result.checks.push_back(above("phi1_positive", spectrum.phi1.min(), 0.0));
    if (spectrum.refuge) {
        result.checks.push_back(above("refuge_connected", weight.refuge_connected() ? 1.0 : 0.0, 0.0));
        result.checks.push_back(above("lambda_b0_above_lambda1", spectrum.lambda_b0() - spectrum.lambda1, 0.0));
    } else {
        result.checks.push_back(skipped("refuge_connected", 0.0));
        result.checks.push_back(skipped("lambda_b0_above_lambda1", 0.0));
    }

    std::ostringstream table;
    table << "quantity,value\n";
    table << "lambda1," << num(spectrum.lambda1) << '\n';
    table << "lambda1_discrete_closed_form," << num(discrete) << '\n';
    table << "lambda1_continuum," << num(continuum) << '\n';
    table << "lambda_b0," << num(spectrum.lambda_b0()) << '\n';
    table << "iterations," << direct.iterations << '\n';
    table << "residual," << num(direct.residual) << '\n';
    result.artifacts.push_back({"eig.csv", table.str()});
    std::ostringstream phi;
    write_csv(phi, spectrum.phi1);
    result.artifacts.push_back({"phi1.csv", phi.str()});
    if (spectrum.refuge) {
        std::ostringstream phib;
        write_csv(phib, spectrum.refuge->phi);
        result.artifacts.push_back({"phi_b0.csv", phib.str()});
    }
    return result;
}

ExperimentResult run_solve(const ExperimentConfig& config) {
    const WeightField weight = config.weight_field();
    const DualProblem problem(weight, config.transform());
    const Spectrum spectrum = analyze_spectrum(weight, config.solver.eigen);
    const double lambda = config.absolute_lambda(config.lambda, spectrum);
    const bool exists = lambda > spectrum.lambda1;
    if (exists && config.kappa == 0.0 && lambda >= spectrum.lambda_b0()) {
        throw PreconditionError("kappa = 0 has no positive solution for lambda >= lambda_{b,0}");
    }
    const Solution reference = solve_positive(problem, spectrum, lambda, config.solver);

    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double base = std::max(1.0, reference.value.sup_norm());
    const Grid& grid = problem.grid();

    // Above λ₁ a start that Newton drives onto the trivial solution is reseeded from the same start
    // through the positive-solution pipeline; such starts are counted separately.
    std::vector<Solution> runs{reference};
    std::vector<double> amplitudes{nan};
    std::vector<int> reseeded{0};
    for (int s = 0; s < config.starts; ++s) {
        const double amplitude = base * std::pow(10.0, unit(rng));
        GridFunction init(grid);
        for (std::size_t k = 0; k < init.size(); ++k) init[k] = amplitude * (0.25 + 0.75 * unit(rng));
        Solution run = solve_dual(problem, lambda, config.solver, init);
        const bool collapsed = exists && run.is_zero(config.solver.zero_threshold);
        if (collapsed) run = solve_positive(problem, spectrum, lambda, config.solver, &init);
        runs.push_back(std::move(run));
        amplitudes.push_back(amplitude);
        reseeded.push_back(collapsed ? 1 : 0);
    }

    ExperimentResult result;
    double certificate = 0.0;
    double spread = 0.0;
    double largest = 0.0;
    for (const Solution& run : runs) {
        certificate = std::max(certificate, dual_residual_sup(problem, lambda, run.value) /
                                                std::max(1.0, run.value.sup_norm()));
        spread = std::max(spread, sup_distance(run.value, reference.value));
        largest = std::max(largest, run.value.sup_norm());
    }
    result.checks.push_back(at_most("residual_certificate", certificate, config.solver.newton_tol));
    if (exists) {
        result.checks.push_back(skipped("trivial_below_lambda1", config.solver.zero_threshold));
        result.checks.push_back(above("positive_solution", reference.value.sup_norm(), config.solver.zero_threshold));
        if (config.starts > 0) {
            result.checks.push_back(at_most("unique_across_starts", spread, 1e-6));
            Check collapses = at_most("reseeded_starts", std::count(reseeded.begin(), reseeded.end(), 1), 0.0);
            collapses.exploratory = true;
            result.checks.push_back(collapses);
        } else {
            result.checks.push_back(skipped("unique_across_starts", 1e-6));
        }
    } else {
        result.checks.push_back(at_most("trivial_below_lambda1", largest, config.solver.zero_threshold));
        result.checks.push_back(skipped("positive_solution", config.solver.zero_threshold));
        result.checks.push_back(skipped("unique_across_starts", 1e-6));
    }
    if (weight.is_constant()) {
        result.checks.push_back(at_most("a_priori_bound", a_priori_excess(config, lambda, reference.value), 1e-8));
    } else {
        result.checks.push_back(skipped("a_priori_bound", 1e-8));
    }
    if (exists && config.kappa > 0.0) {
        int violations = order_violations(reference.value, supersolution(problem, lambda).field);
        if (spectrum.refuge && lambda > spectrum.lambda_b0()) {
            violations += order_violations(subsolution(problem, lambda, *spectrum.refuge).field, reference.value);
        }
        result.checks.push_back(at_most("sandwich_violations", violations, 0.0));
    } else {
        result.checks.push_back(skipped("sandwich_violations", 0.0));
    }

    const GridFunction psi = recover_primal(problem.transform(), reference.value);
    std::ostringstream field;
    field << node_header(grid) << "theta,psi\n";
    for (std::size_t k = 0; k < grid.size(); ++k) {
        node_prefix(field, grid, k);
        field << num(reference.value[k]) << ',' << num(psi[k]) << '\n';
    }
    result.artifacts.push_back({"solution.csv", field.str()});
    std::ostringstream starts;
    starts << "start,amplitude,sup_norm,distance_to_reference,newton_iterations,monotone_iterations,reseeded\n";
    for (std::size_t s = 0; s < runs.size(); ++s) {
        starts << s << ',' << num(amplitudes[s]) << ',' << num(runs[s].value.sup_norm()) << ','
               << num(sup_distance(runs[s].value, reference.value)) << ',' << runs[s].newton_iterations << ','
               << runs[s].monotone_iterations << ',' << reseeded[s] << '\n';
    }
    result.artifacts.push_back({"starts.csv", starts.str()});
    return result;
}

ExperimentResult run_branch(const ExperimentConfig& config) {
    const WeightField weight = config.weight_field();
    const DualProblem problem(weight, config.transform());
    const Spectrum spectrum = analyze_spectrum(weight, config.solver.eigen);
    SolverConfig solver = config.solver;
    solver.warm_start = config.mode == SweepMode::warm;
    const double from = config.absolute_lambda(config.lambda_from, spectrum);
    const double to = config.absolute_lambda(config.lambda_to, spectrum);
    const BranchResult branch = branch_continuation(problem, spectrum, from, to, config.steps, solver);
    const double lambda1 = spectrum.lambda1;

    ExperimentResult result;
    int unsolved = 0;
    int nonzero_below = 0;
    int zero_above = 0;
    int below = 0;
    int above_count = 0;
    int sup_violations = 0;
    double bound = -std::numeric_limits<double>::infinity();
    double min_eig = std::numeric_limits<double>::infinity();
    double mismatch = 0.0;
    int sandwich = 0;
    bool sandwich_built = false;
    const BranchPoint* first_positive = nullptr;
    const BranchPoint* last_positive = nullptr;
    for (std::size_t s = 0; s < branch.points.size(); ++s) {
        const BranchPoint& pt = branch.points[s];
        if (!pt.solved) {
            ++unsolved;
            continue;
        }
        if (pt.lambda <= lambda1) {
            ++below;
            if (!pt.converged_to_zero) ++nonzero_below;
        } else {
            ++above_count;
            if (pt.converged_to_zero) ++zero_above;
        }
        if (pt.converged_to_zero) continue;
        const GridFunction& theta = branch.solutions[s];
        if (last_positive && !(pt.sup_norm > last_positive->sup_norm)) ++sup_violations;
        if (!first_positive) first_positive = &pt;
        last_positive = &pt;
        if (weight.is_constant()) bound = std::max(bound, a_priori_excess(config, pt.lambda, theta));
        min_eig = std::min(min_eig, std::isnan(pt.stability_eig) ? -std::numeric_limits<double>::infinity()
                                                                  : pt.stability_eig);
        mismatch = std::max(mismatch, potential_mismatch(problem, pt.lambda, theta));
        if (config.kappa > 0.0) {
            sandwich_built = true;
            sandwich += order_violations(theta, supersolution(problem, pt.lambda).field);
            if (spectrum.refuge && pt.lambda > spectrum.lambda_b0()) {
                sandwich += order_violations(subsolution(problem, pt.lambda, *spectrum.refuge).field, theta);
            }
        }
    }
    result.checks.push_back(at_most("unsolved_points", unsolved, 0.0));
    result.checks.push_back(below ? at_most("nonzero_below_lambda1", nonzero_below, 0.0)
                                  : skipped("nonzero_below_lambda1", 0.0));
    result.checks.push_back(above_count ? at_most("zero_above_lambda1", zero_above, 0.0)
                                        : skipped("zero_above_lambda1", 0.0));
    result.checks.push_back(last_positive ? at_most("sup_increasing_violations", sup_violations, 0.0)
                                          : skipped("sup_increasing_violations", 0.0));
    result.checks.push_back(last_positive ? at_most("nodewise_increasing_violations", branch.monotonicity_violations, 0.0)
                                          : skipped("nodewise_increasing_violations", 0.0));

    // Onset check: the first positive point must sit just above λ₁ and be small against the
    // solution at 1.5 λ₁.
    double onset = nan;
    if (first_positive && first_positive->lambda <= 1.01 * lambda1) {
        const Solution mid = solve_positive(problem, spectrum, 1.5 * lambda1, solver);
        onset = first_positive->sup_norm / mid.value.sup_norm();
        result.checks.push_back(at_most("bifurcation_ratio", onset, 0.1));
    } else {
        result.checks.push_back(skipped("bifurcation_ratio", 0.1));
    }
    if (weight.is_constant() && last_positive) {
        result.checks.push_back(at_most("a_priori_bound", bound, 1e-8));
    } else {
        result.checks.push_back(skipped("a_priori_bound", 1e-8));
    }
    if (last_positive) {
        Check stable = above("stability_eig_min", min_eig, 0.0);
        stable.exploratory = config.p < 3.0;
        result.checks.push_back(stable);
        result.checks.push_back(at_most("potential_mismatch", mismatch, 1e-12));
    } else {
        result.checks.push_back(skipped("stability_eig_min", 0.0));
        result.checks.push_back(skipped("potential_mismatch", 1e-12));
    }
    result.checks.push_back(sandwich_built ? at_most("sandwich_violations", sandwich, 0.0)
                                           : skipped("sandwich_violations", 0.0));

    std::ostringstream csv;
    csv << "lambda,kappa,sup_norm,l2_norm,stability_eig,newton_iters,converged_to_zero,solved,note\n";
    for (const BranchPoint& pt : branch.points) {
        std::string note = pt.note;
        std::replace(note.begin(), note.end(), ',', ';');
        csv << num(pt.lambda) << ',' << num(pt.kappa) << ',' << num(pt.sup_norm) << ',' << num(pt.l2_norm) << ','
            << num(pt.stability_eig) << ',' << pt.newton_iters << ',' << (pt.converged_to_zero ? 1 : 0) << ','
            << (pt.solved ? 1 : 0) << ',' << note << '\n';
    }
    result.artifacts.push_back({"branch.csv", csv.str()});
    return result;
}

ExperimentResult run_stability(const ExperimentConfig& config) {
    const WeightField weight = config.weight_field();
    const DualProblem problem(weight, config.transform());
    const Spectrum spectrum = analyze_spectrum(weight, config.solver.eigen);
    const double lambda = config.absolute_lambda(config.lambda, spectrum);
    const Solution sol = solve_positive(problem, spectrum, lambda, config.solver);
    const double mu = stability_eigen(problem, lambda, sol.value, config.solver.eigen);
    const bool trivial = sol.is_zero(config.solver.zero_threshold);

    ExperimentResult result;
    if (trivial) {
        result.checks.push_back(skipped("stability_eig", 0.0));
        result.checks.push_back(
            at_most("trivial_eig_shift", std::abs(mu - (spectrum.lambda1 - lambda)) / std::max(1.0, lambda), 1e-8));
    } else {
        Check stable = above("stability_eig", mu, 0.0);
        stable.exploratory = config.p < 3.0;
        result.checks.push_back(stable);
        result.checks.push_back(skipped("trivial_eig_shift", 1e-8));
    }
    result.checks.push_back(at_most("potential_mismatch", potential_mismatch(problem, lambda, sol.value), 1e-12));

    std::ostringstream table;
    table << "quantity,value\n";
    table << "lambda," << num(lambda) << '\n';
    table << "lambda1," << num(spectrum.lambda1) << '\n';
    table << "sup_norm," << num(sol.value.sup_norm()) << '\n';
    table << "stability_eig," << num(mu) << '\n';
    result.artifacts.push_back({"stability.csv", table.str()});

    const Grid& grid = problem.grid();
    const std::vector<double> v = stability_potential(problem, lambda, sol.value);
    const std::vector<double> d = problem.reaction_derivative(lambda, sol.value.values());
    std::ostringstream field;
    field << node_header(grid) << "theta,potential,minus_reaction_derivative\n";
    for (std::size_t k = 0; k < grid.size(); ++k) {
        node_prefix(field, grid, k);
        field << num(sol.value[k]) << ',' << num(v[k]) << ',' << num(-d[k]) << '\n';
    }
    result.artifacts.push_back({"potential.csv", field.str()});
    return result;
}

ExperimentResult run_lambda_sweep(const ExperimentConfig& config) {
    const WeightField weight = config.weight_field();
    const Spectrum spectrum = analyze_spectrum(weight, config.solver.eigen);
    std::vector<double> grid_values = config.lambda_grid;
    if (grid_values.empty()) grid_values = {1.5, 1.25, 1.1, 1.01, 1.001};
    std::vector<double> lambdas;
    for (double v : grid_values) lambdas.push_back(config.absolute_lambda(v, spectrum));
    const SweepReport report =
        config.control
            ? refuge_blowup_control(weight, config.transform(), lambdas, config.solver, config.mode)
            : lambda_limits(weight, config.transform(), lambdas, make_compacts(config, weight), config.solver,
                            config.mode);
    ExperimentResult result;
    for (const SweepCheck& c : report.checks) result.checks.push_back(from_sweep(c));
    result.artifacts.push_back({"sweep.csv", sweep_csv(report)});
    return result;
}

ExperimentResult run_kappa_sweep(const ExperimentConfig& config) {
    const WeightField weight = config.weight_field();
    const Spectrum spectrum = analyze_spectrum(weight, config.solver.eigen);
    std::vector<double> kappas = config.kappa_grid;
    if (kappas.empty()) kappas = {1e-1, 3e-2, 1e-2, 3e-3, 1e-3};
    KappaSweepOptions options;
    options.regime = config.regime;
    options.mode = config.mode;
    options.large = config.large;
    const SweepReport report = kappa_to_zero(weight, config.p, config.absolute_lambda(config.lambda, spectrum), kappas,
                                             make_compacts(config, weight), config.solver, options);
    ExperimentResult result;
    for (const SweepCheck& c : report.checks) result.checks.push_back(from_sweep(c));
    result.artifacts.push_back({"sweep.csv", sweep_csv(report)});
    return result;
}

ExperimentResult run_large(const ExperimentConfig& config) {
    ExperimentResult result;

    const KellerOssermanReport ko = keller_osserman_margin(config.p, config.ko_t);
    result.checks.push_back(above("ko_tail_exponent", ko.tail_exponent, 1.0));
    result.checks.push_back(at_most("ko_increment_1e3_1e4", ko.increment_1e3_1e4, 1e-3));
    std::ostringstream ko_csv;
    ko_csv << "decade_start,decade_end,increment\n";
    for (std::size_t k = 0; k < ko.decade_increments.size(); ++k) {
        ko_csv << num(std::pow(10.0, static_cast<double>(k))) << ',' << num(std::pow(10.0, k + 1.0)) << ','
               << num(ko.decade_increments[k]) << '\n';
    }
    ko_csv << "# partial_integral=" << num(ko.partial_integral) << " analytic_tail=" << num(ko.analytic_tail)
           << " cauchy_threshold=" << num(ko.cauchy_threshold) << '\n';
    result.artifacts.push_back({"keller_osserman.csv", ko_csv.str()});

    RadialProblem radial;
    radial.dimension = config.ball_dimension;
    radial.radius = config.ball_radius;
    radial.lambda = config.ball_lambda;
    radial.p = config.p;
    radial.b0 = config.ball_b0;
    try {
        const LargeSolution large = minimal_large_solution(radial, config.large);
        result.checks.push_back(above("large_differences_monotone", large.differences_monotone ? 1.0 : 0.0, 0.0));
        result.checks.push_back(
            at_most("large_final_difference", large.interior_differences.back(), config.large.tolerance));
        std::ostringstream profile;
        write_profile_csv(profile, large.profile);
        result.artifacts.push_back({"large_profile.csv", profile.str()});
        std::ostringstream schedule;
        schedule << "k,boundary_value,interior_difference\n";
        for (std::size_t k = 0; k < large.schedule.size(); ++k) {
            schedule << k << ',' << num(large.schedule[k]) << ','
                     << num(k == 0 ? nan : large.interior_differences[k - 1]) << '\n';
        }
        result.artifacts.push_back({"large_schedule.csv", schedule.str()});
    } catch (const ConvergenceError& err) {
        result.checks.push_back({"large_differences_monotone", CheckStatus::fail, nan, 0.0});
        result.checks.push_back({"large_final_difference", CheckStatus::fail, err.last_residual(),
                                 config.large.tolerance});
    }

    if (config.compact == "support") {
        const WeightField weight = config.weight_field();
        const Spectrum spectrum = analyze_spectrum(weight, config.solver.eigen);
        std::vector<double> kappas = config.kappa_grid;
        if (kappas.empty()) kappas = {0.5, 0.1, 0.02};
        const CompactBoundReport bound =
            compact_bound_check(weight, config.p, kappas, config.absolute_lambda(config.lambda, spectrum),
                                config.compact_radius, config.solver, config.large);
        double worst = 0.0;
        for (const CompactBoundRow& row : bound.rows) worst = std::max(worst, row.compact_max / bound.cap);
        result.checks.push_back(at_most("compact_bound_ratio", worst, 1.0));
        std::ostringstream csv;
        csv << "kappa,compact_max,cap\n";
        for (const CompactBoundRow& row : bound.rows) {
            csv << num(row.kappa) << ',' << num(row.compact_max) << ',' << num(bound.cap) << '\n';
        }
        csv << "# effective_b=" << num(bound.effective_b) << " ball_radius=" << num(bound.ball_radius) << '\n';
        result.artifacts.push_back({"compact_bound.csv", csv.str()});
    } else {
        result.checks.push_back(skipped("compact_bound_ratio", 1.0));
    }
    return result;
}

}  // namespace

std::string to_string(CheckStatus status) {
    switch (status) {
        case CheckStatus::pass: return "PASS";
        case CheckStatus::fail: return "FAIL";
        case CheckStatus::skipped: return "SKIPPED";
    }
    return "UNKNOWN";
}

bool ExperimentResult::passed() const {
    return std::none_of(checks.begin(), checks.end(),
                        [](const Check& c) { return !c.exploratory && c.status == CheckStatus::fail; });
}

const Check* ExperimentResult::find(const std::string& id) const {
    for (const Check& c : checks) {
        if (c.id == id) return &c;
    }
    return nullptr;
}

ExperimentResult verify_transform(const std::vector<double>& kappas, double p, int samples, double t_min,
                                  double t_max, std::uint64_t seed) {
    if (kappas.empty()) throw DomainError("verify_transform needs at least one kappa");
    if (samples < 2 || !(t_min > 0.0) || !(t_max > t_min)) throw DomainError("invalid sample range");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> ts(samples);
    const double span = std::log(t_max / t_min);
    for (double& t : ts) t = t_min * std::exp(span * unit(rng));
    std::sort(ts.begin(), ts.end());
    std::vector<double> sorted = kappas;
    std::sort(sorted.begin(), sorted.end());

    double worst_f = 0.0, worst_fp = 0.0, worst_ffp = 0.0, worst_forms = 0.0, worst_bracket = 0.0;
    double worst_sqrt = 0.0, worst_round = 0.0;
    int h_violations = 0, q_violations = 0, g_violations = 0, kappa_violations = 0;
    std::ostringstream csv;
    csv << "kappa,t,f,fprime,f_second,f_second_alt,h,round_trip_rel\n";
    for (double kappa : sorted) {
        const DualTransform tr(kappa, p);
        double prev_sqrt = 0.0, prev_h = 0.0, prev_q = 0.0, prev_g = 0.0;
        for (std::size_t k = 0; k < ts.size(); ++k) {
            const double t = ts[k];
            const TransformValue v = tr.evaluate(t);
            const double f2 = tr.second_derivative(t);
            const double f2_alt = tr.second_derivative_alt(t);
            const double hv = tr.h(t);
            const double round = std::abs(tr.inverse(v.f) - t) / t;
            worst_f = std::max({worst_f, -v.f, v.f - t});
            worst_fp = std::max({worst_fp, v.fp > 0.0 ? 0.0 : 1.0 - v.fp, v.fp - 1.0});
            if (kappa > 0.0) worst_ffp = std::max(worst_ffp, v.f * v.fp - 1.0 / std::sqrt(2.0 * kappa));
            worst_forms = std::max(worst_forms, std::abs(f2 - f2_alt) / std::max(std::abs(f2), 1e-300));
            worst_bracket = std::max({worst_bracket, 0.5 * v.f - t * v.fp, t * v.fp - v.f});
            worst_round = std::max(worst_round, round);
            const double sq = v.f / std::sqrt(t);
            const double q = std::pow(v.f, p) * v.fp / t;
            const double gt = g(p, t) / t;
            if (k > 0) {
                worst_sqrt = std::max(worst_sqrt, (prev_sqrt - sq) / prev_sqrt);
                if (ts[k] > ts[k - 1]) {
                    if (hv > prev_h * (1.0 + 1e-14)) ++h_violations;
                    if (!(q > prev_q)) ++q_violations;
                    if (!(gt > prev_g)) ++g_violations;
                }
            }
            prev_sqrt = sq;
            prev_h = hv;
            prev_q = q;
            prev_g = gt;
            csv << num(kappa) << ',' << num(t) << ',' << num(v.f) << ',' << num(v.fp) << ',' << num(f2) << ','
                << num(f2_alt) << ',' << num(hv) << ',' << num(round) << '\n';
        }
    }
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
        for (std::size_t j = i + 1; j < sorted.size(); ++j) {
            if (!(sorted[j] > sorted[i])) continue;
            for (double t : ts) {
                if (!(f(sorted[j], t) < f(sorted[i], t))) ++kappa_violations;
            }
        }
    }
    double worst_fd = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const double kappa = sorted[static_cast<std::size_t>(unit(rng) * sorted.size()) % sorted.size()];
        const double t = 1e-3 * std::exp(std::log(1e4) * unit(rng));
        const double lambda = 20.0 * unit(rng);
        const double b = 5.0 * unit(rng);
        const double step = 1e-5 * std::max(1.0, t);
        const double fd = (reaction(kappa, p, lambda, b, t + step) - reaction(kappa, p, lambda, b, t - step)) /
                          (2.0 * step);
        const double exact = reaction_derivative(kappa, p, lambda, b, t);
        worst_fd = std::max(worst_fd, std::abs(fd - exact) / std::max(1.0, std::abs(exact)));
    }

    ExperimentResult result;
    result.kind = ExperimentKind::verify_f;
    constexpr double slack = 1e-10;
    result.checks.push_back(at_most("f_between_zero_and_t", worst_f, slack));
    result.checks.push_back(at_most("fprime_in_unit_interval", worst_fp, slack));
    result.checks.push_back(at_most("f_fprime_bounded", worst_ffp, slack));
    result.checks.push_back(at_most("second_derivative_forms_rel", worst_forms, 1e-10));
    result.checks.push_back(at_most("t_fprime_bracket", worst_bracket, slack));
    result.checks.push_back(at_most("f_over_sqrt_t_nondecreasing", worst_sqrt, slack));
    result.checks.push_back(at_most("round_trip_rel", worst_round, 1e-12));
    result.checks.push_back(at_most("kappa_decreasing_violations", kappa_violations, 0.0));
    result.checks.push_back(at_most("h_decreasing_violations", h_violations, 0.0));
    result.checks.push_back(p >= 3.0 ? at_most("fpfp_over_t_increasing_violations", q_violations, 0.0)
                                     : skipped("fpfp_over_t_increasing_violations", 0.0));
    result.checks.push_back(p > 3.0 ? at_most("g_over_t_increasing_violations", g_violations, 0.0)
                                    : skipped("g_over_t_increasing_violations", 0.0));
    result.checks.push_back(at_most("reaction_derivative_fd", worst_fd, 1e-6));
    result.artifacts.push_back({"transform.csv", csv.str()});
    return result;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
    ExperimentResult result;
    switch (config.kind) {
        case ExperimentKind::verify_f: {
            std::vector<double> kappas = config.kappa_grid;
            if (kappas.empty()) kappas = {1e-3, 1e-1, 1.0, 10.0};
            result = verify_transform(kappas, config.p, config.samples, config.t_min, config.t_max, config.seed);
            break;
        }
        case ExperimentKind::eig: result = run_eig(config); break;
        case ExperimentKind::solve: result = run_solve(config); break;
        case ExperimentKind::branch: result = run_branch(config); break;
        case ExperimentKind::lambda_sweep: result = run_lambda_sweep(config); break;
        case ExperimentKind::kappa_sweep: result = run_kappa_sweep(config); break;
        case ExperimentKind::large: result = run_large(config); break;
        case ExperimentKind::stability: result = run_stability(config); break;
    }
    result.kind = config.kind;
    return result;
}

std::string verdict_text(const ExperimentResult& result) {
    std::ostringstream out;
    for (const Check& c : result.checks) {
        out << (c.exploratory ? "info." : "") << c.id << ' ' << to_string(c.status) << ' ' << num(c.measured) << ' '
            << num(c.threshold) << '\n';
    }
    return out.str();
}

void write_artifacts(const ExperimentResult& result, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const auto put = [&](const std::string& name, const std::string& content) {
        std::ofstream out(dir / name, std::ios::binary);
        out << content;
        if (!out) throw Error("cannot write " + (dir / name).string());
    };
    for (const Artifact& a : result.artifacts) put(a.name, a.content);
    put("verdict.txt", verdict_text(result));
}

}  // namespace quasilog
