#include "quasilog/asymptotics.hpp"

#include "quasilog/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <ostream>
#include <thread>

namespace quasilog {

namespace {

constexpr double lambda_down_ratio = 0.1;
constexpr double lambda_up_ratio = 10.0;
constexpr double regime_a_ratio = 0.2;
constexpr double regime_b_growth = 5.0;

struct PointResult {
    std::optional<Solution> solution;
    std::string failure;
};

// Runs `solve(k)` for k = 0..count-1. Warm mode is sequential so each point can see its predecessor.
std::vector<PointResult> run_points(std::size_t count, SweepMode mode,
                                    const std::function<Solution(std::size_t, const GridFunction*)>& solve) {
    std::vector<PointResult> out(count);
    const auto one = [&](std::size_t k, const GridFunction* warm) {
        try {
            out[k].solution = solve(k, warm);
        } catch (const Error& err) {
            out[k].failure = err.what();
        }
    };
    if (mode == SweepMode::warm) {
        const GridFunction* warm = nullptr;
        for (std::size_t k = 0; k < count; ++k) {
            one(k, warm);
            if (out[k].solution) warm = &out[k].solution->value;
        }
        return out;
    }
    const int workers = sweep_workers(count);
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t k = next++; k < count; k = next++) one(k, nullptr);
    };
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    for (std::thread& t : pool) t.join();
    return out;
}

void validate_compacts(const Grid& grid, const std::vector<Compact>& compacts) {
    for (const Compact& c : compacts) {
        if (c.nodes.empty()) {
            throw ConfigurationError("compact '" + c.name + "' has no nodes");
        }
        for (std::size_t node : c.nodes) {
            if (node >= grid.size()) throw ConfigurationError("compact '" + c.name + "' references a node off the grid");
        }
    }
}

void validate_grid(const std::vector<double>& values, const char* name) {
    if (values.size() < 2) {
        throw DomainError(std::string(name) + " grid needs at least two values");
    }
    for (double v : values) {
        if (!std::isfinite(v) || !(v > 0.0)) throw DomainError(std::string(name) + " grid values must be positive");
    }
}

// Fills sup-norm, compact metrics and min_step from Ψ; `previous` is the prior row's Ψ.
void record(SweepRow& row, const GridFunction& psi, const std::vector<Compact>& compacts,
            const std::optional<GridFunction>& previous) {
    row.sup_norm = psi.sup_norm();
    for (const Compact& c : compacts) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (std::size_t node : c.nodes) {
            lo = std::min(lo, psi[node]);
            hi = std::max(hi, psi[node]);
        }
        row.compact_min.push_back(lo);
        row.compact_max.push_back(hi);
    }
    if (previous) {
        double step = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < psi.size(); ++k) step = std::min(step, psi[k] - (*previous)[k]);
        row.min_step = step;
    }
}

void mark_failed(SweepRow& row, std::size_t compacts, const std::string& failure) {
    row.solved = false;
    row.note = failure.empty() ? "solve failed" : failure;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    row.compact_min.assign(compacts, nan);
    row.compact_max.assign(compacts, nan);
}

// Number of consecutive pairs that break strict monotonicity.
int order_violations(const std::vector<double>& seq, bool increasing) {
    int bad = 0;
    for (std::size_t k = 1; k < seq.size(); ++k) {
        const bool ok = increasing ? seq[k] > seq[k - 1] : seq[k] < seq[k - 1];
        if (!ok) ++bad;
    }
    return bad;
}

SweepCheck order_check(const std::string& id, const std::vector<double>& seq, bool increasing) {
    const int bad = order_violations(seq, increasing);
    return {id, bad == 0, static_cast<double>(bad), 0.0, false};
}

SweepCheck ratio_check(const std::string& id, const std::vector<double>& seq, double threshold, bool below) {
    const double ratio = seq.back() / seq.front();
    const bool pass = std::isfinite(ratio) && (below ? ratio <= threshold : ratio >= threshold);
    return {id, pass, ratio, threshold, false};
}

std::string csv_text(double value) {
    return std::isnan(value) ? "nan" : format_number(value);
}

}  // namespace

std::string to_string(SweepMode mode) { return mode == SweepMode::warm ? "warm" : "cold"; }

SweepMode sweep_mode_from_string(const std::string& name) {
    if (name == "warm") return SweepMode::warm;
    if (name == "cold") return SweepMode::cold;
    throw DomainError("unknown sweep mode '" + name + "'");
}

std::string to_string(KappaRegime regime) {
    switch (regime) {
        case KappaRegime::automatic: return "auto";
        case KappaRegime::a: return "a";
        case KappaRegime::b: return "b";
        case KappaRegime::c: return "c";
    }
    return "auto";
}

KappaRegime kappa_regime_from_string(const std::string& name) {
    if (name == "auto") return KappaRegime::automatic;
    if (name == "a") return KappaRegime::a;
    if (name == "b") return KappaRegime::b;
    if (name == "c") return KappaRegime::c;
    throw DomainError("unknown kappa regime '" + name + "'");
}

int sweep_workers(std::size_t tasks) {
    int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    if (const char* cap = std::getenv("QUASILOG_THREADS")) {
        char* end = nullptr;
        const long value = std::strtol(cap, &end, 10);
        if (end != cap && *end == '\0' && value >= 1) workers = std::min<long>(workers, value);
    }
    return std::max(1, std::min(workers, static_cast<int>(std::max<std::size_t>(tasks, 1))));
}

Compact refuge_compact(const WeightField& weight, double margin_cells) {
    const Grid& grid = weight.grid();
    const WeightShape& shape = weight.shape();
    if (shape.mode != WeightMode::bump) {
        throw ConfigurationError("refuge compact needs a bump weight");
    }
    const double margin = margin_cells * grid.h();
    Compact out{"refuge", {}};
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double gap = shape.center_distance(grid.x(k), grid.y(k), grid.dimension()) - shape.radius;
        if (gap >= margin && grid.boundary_distance(k) >= margin) out.nodes.push_back(k);
    }
    if (out.nodes.empty()) {
        throw ConfigurationError("refuge compact is empty at this resolution");
    }
    return out;
}

Compact support_compact(const WeightField& weight, double radius) {
    const Grid& grid = weight.grid();
    const WeightShape& shape = weight.shape();
    if (shape.mode != WeightMode::bump) {
        throw ConfigurationError("support compact needs a bump weight");
    }
    if (!(radius > 0.0) || !(radius < shape.radius)) {
        throw ConfigurationError("support compact must be a disk strictly inside the bump support");
    }
    Compact out{"support", {}};
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (shape.center_distance(grid.x(k), grid.y(k), grid.dimension()) <= radius) out.nodes.push_back(k);
    }
    if (out.nodes.empty()) {
        throw ConfigurationError("support compact is empty at this resolution");
    }
    return out;
}

bool SweepReport::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const SweepCheck& c) { return c.exploratory || c.pass; });
}

std::vector<SweepCheck> evaluate_checks(const SweepReport& report) {
    std::vector<SweepCheck> checks;
    const auto& rows = report.rows;
    int failed = 0;
    for (const SweepRow& row : rows) failed += row.solved ? 0 : 1;
    checks.push_back({"all_solved", failed == 0, static_cast<double>(failed), 0.0, false});
    if (rows.size() < 2) {
        return checks;
    }
    const auto column = [&](auto field) {
        std::vector<double> out;
        for (const SweepRow& row : rows) out.push_back(field(row));
        return out;
    };
    const auto compact_column = [&](std::size_t c, bool minimum) {
        return column([&](const SweepRow& row) {
            const auto& values = minimum ? row.compact_min : row.compact_max;
            return c < values.size() ? values[c] : std::numeric_limits<double>::quiet_NaN();
        });
    };
    const std::vector<double> sup = column([](const SweepRow& r) { return r.sup_norm; });
    const std::vector<double> distance = column([](const SweepRow& r) { return r.distance; });

    if (report.regime == "lambda-down") {
        checks.push_back(order_check("sup_decreasing", sup, false));
        checks.push_back(ratio_check("sup_ratio", sup, lambda_down_ratio, true));
    } else if (report.regime == "lambda-up" || report.regime == "b") {
        for (std::size_t c = 0; c < report.compacts.size(); ++c) {
            const std::vector<double> mins = compact_column(c, true);
            const std::string& name = report.compacts[c];
            checks.push_back(order_check("min_increasing:" + name, mins, true));
            if (report.regime == "b") {
                checks.push_back(ratio_check("min_growth:" + name, mins, regime_b_growth, false));
            } else {
                checks.push_back(ratio_check("min_ratio:" + name, mins, lambda_up_ratio, false));
            }
        }
    } else if (report.regime == "control") {
        const std::vector<double> control = column([](const SweepRow& r) { return r.control; });
        checks.push_back(order_check("control_increasing", control, true));
        const bool finite = std::all_of(sup.begin(), sup.end(), [](double v) { return std::isfinite(v); });
        checks.push_back({"dual_finite", finite, sup.back(), std::numeric_limits<double>::infinity(), false});
        const double relative = (control.back() / control.front()) / (sup.back() / sup.front());
        checks.push_back({"control_outgrows_dual", std::isfinite(relative) && relative > 1.0, relative, 1.0, false});
    } else if (report.regime == "a") {
        checks.push_back(order_check("distance_decreasing", distance, false));
        checks.push_back(ratio_check("distance_ratio", distance, regime_a_ratio, true));
        const std::vector<double> steps = column([](const SweepRow& r) { return r.min_step; });
        double worst = std::numeric_limits<double>::infinity();
        for (std::size_t k = 1; k < steps.size(); ++k) worst = std::min(worst, steps[k]);
        checks.push_back({"psi_increases_as_kappa_decreases", worst > 0.0, worst, 0.0, false});
    } else if (report.regime == "c") {
        checks.push_back(order_check("distance_decreasing", distance, false));
    }
    return checks;
}

void write_sweep_csv(std::ostream& out, const SweepReport& report) {
    out << "# " << report.parameter << ": swept value; sup_norm: max of Psi = f_kappa(Theta)";
    for (const std::string& name : report.compacts) {
        out << "; min_" << name << ", max_" << name << ": Psi restricted to compact " << name;
    }
    out << "; distance: sup distance to the reference solution; min_step: min over nodes of Psi minus the previous "
           "row's Psi; control: sup-norm of the kappa=0 problem; newton_iterations; solved; note"
        << " | regime=" << report.regime << " mode=" << to_string(report.mode) << " fixed=" << csv_text(report.fixed)
        << " p=" << csv_text(report.p) << '\n';
    out << report.parameter << ",sup_norm";
    for (const std::string& name : report.compacts) out << ",min_" << name << ",max_" << name;
    out << ",distance,min_step,control,newton_iterations,solved,note\n";
    for (const SweepRow& row : report.rows) {
        out << csv_text(row.parameter) << ',' << csv_text(row.sup_norm);
        for (std::size_t c = 0; c < report.compacts.size(); ++c) {
            out << ',' << csv_text(row.compact_min[c]) << ',' << csv_text(row.compact_max[c]);
        }
        std::string note = row.note;
        std::replace(note.begin(), note.end(), ',', ';');
        std::replace(note.begin(), note.end(), '\n', ' ');
        out << ',' << csv_text(row.distance) << ',' << csv_text(row.min_step) << ',' << csv_text(row.control) << ','
            << row.newton_iterations << ',' << (row.solved ? 1 : 0) << ',' << note << '\n';
    }
}

SweepReport lambda_limits(const WeightField& weight, const DualTransform& transform,
                          const std::vector<double>& lambda_grid, const std::vector<Compact>& compacts,
                          const SolverConfig& config, SweepMode mode) {
    config.validate();
    validate_grid(lambda_grid, "lambda");
    validate_compacts(weight.grid(), compacts);
    const bool up = std::is_sorted(lambda_grid.begin(), lambda_grid.end(), std::less_equal<>());
    const bool down = std::is_sorted(lambda_grid.begin(), lambda_grid.end(), std::greater_equal<>());
    if (!up && !down) {
        throw DomainError("lambda grid must be strictly monotone");
    }

    SweepReport report;
    report.parameter = "lambda";
    report.regime = up ? "lambda-up" : "lambda-down";
    report.mode = mode;
    report.fixed = transform.kappa();
    report.p = transform.p();
    for (const Compact& c : compacts) report.compacts.push_back(c.name);

    const DualProblem problem(weight, transform);
    const Spectrum spectrum = analyze_spectrum(weight, config.eigen);
    const std::vector<PointResult> results =
        run_points(lambda_grid.size(), mode, [&](std::size_t k, const GridFunction* warm) {
            return solve_positive(problem, spectrum, lambda_grid[k], config, warm);
        });

    std::optional<GridFunction> previous;
    for (std::size_t k = 0; k < lambda_grid.size(); ++k) {
        SweepRow row;
        row.parameter = lambda_grid[k];
        if (!results[k].solution) {
            mark_failed(row, compacts.size(), results[k].failure);
            previous.reset();
        } else {
            const GridFunction psi = recover_primal(transform, results[k].solution->value);
            row.newton_iterations = results[k].solution->newton_iterations;
            record(row, psi, compacts, previous);
            previous = psi;
        }
        report.rows.push_back(std::move(row));
    }
    report.checks = evaluate_checks(report);
    return report;
}

SweepReport refuge_blowup_control(const WeightField& weight, const DualTransform& transform,
                                  const std::vector<double>& lambda_grid, const SolverConfig& config, SweepMode mode) {
    config.validate();
    validate_grid(lambda_grid, "lambda");
    if (!std::is_sorted(lambda_grid.begin(), lambda_grid.end(), std::less_equal<>())) {
        throw DomainError("control lambda grid must increase strictly");
    }
    const Spectrum spectrum = analyze_spectrum(weight, config.eigen);
    if (!spectrum.refuge) {
        throw ConfigurationError("blow-up control needs a refuge");
    }
    if (!(lambda_grid.front() > spectrum.lambda1) || !(lambda_grid.back() < spectrum.lambda_b0())) {
        throw PreconditionError("control lambdas must lie in (lambda1, lambda_b0)");
    }

    SweepReport report;
    report.parameter = "lambda";
    report.regime = "control";
    report.mode = mode;
    report.fixed = transform.kappa();
    report.p = transform.p();

    const DualProblem problem(weight, transform);
    const std::vector<PointResult> results =
        run_points(lambda_grid.size(), mode, [&](std::size_t k, const GridFunction* warm) {
            return solve_positive(problem, spectrum, lambda_grid[k], config, warm);
        });
    const std::vector<PointResult> controls =
        run_points(lambda_grid.size(), SweepMode::cold, [&](std::size_t k, const GridFunction*) {
            return solve_logistic(weight, transform.p(), lambda_grid[k], config, spectrum);
        });

    std::optional<GridFunction> previous;
    for (std::size_t k = 0; k < lambda_grid.size(); ++k) {
        SweepRow row;
        row.parameter = lambda_grid[k];
        if (controls[k].solution) row.control = controls[k].solution->value.sup_norm();
        if (!results[k].solution || !controls[k].solution) {
            mark_failed(row, 0, results[k].solution ? controls[k].failure : results[k].failure);
            previous.reset();
        } else {
            const GridFunction psi = recover_primal(transform, results[k].solution->value);
            row.newton_iterations = results[k].solution->newton_iterations;
            record(row, psi, {}, previous);
            previous = psi;
        }
        report.rows.push_back(std::move(row));
    }
    report.checks = evaluate_checks(report);
    return report;
}

LargeSolution support_large_solution(const WeightShape& shape, double p, double lambda,
                                     const LargeSolutionOptions& options) {
    if (shape.mode != WeightMode::bump) {
        throw ConfigurationError("the support large solution needs a bump weight");
    }
    RadialProblem radial;
    radial.dimension = 2;
    radial.radius = shape.radius;
    radial.lambda = lambda;
    radial.p = p;
    radial.absorption = Absorption::power;
    radial.b0 = shape.b0;
    const double b0 = shape.b0;
    const double rho = shape.radius;
    radial.weight = [b0, rho](double r) {
        const double s = std::max(0.0, 1.0 - r * r / (rho * rho));
        return b0 * s * s;
    };
    return minimal_large_solution(radial, options);
}

SweepReport kappa_to_zero(const WeightField& weight, double p, double lambda, const std::vector<double>& kappa_grid,
                          const std::vector<Compact>& compacts, const SolverConfig& config,
                          const KappaSweepOptions& options) {
    config.validate();
    validate_grid(kappa_grid, "kappa");
    if (!std::is_sorted(kappa_grid.begin(), kappa_grid.end(), std::greater_equal<>())) {
        throw DomainError("kappa grid must decrease strictly toward 0");
    }
    validate_compacts(weight.grid(), compacts);
    const Spectrum spectrum = analyze_spectrum(weight, config.eigen);
    if (!(lambda > spectrum.lambda1)) {
        throw PreconditionError("kappa sweeps need lambda above lambda1");
    }

    KappaRegime regime = options.regime;
    if (regime == KappaRegime::automatic) {
        regime = lambda < spectrum.lambda_b0() ? KappaRegime::a : KappaRegime::b;
    }
    if (regime == KappaRegime::a && !(lambda < spectrum.lambda_b0())) {
        throw PreconditionError("regime (a) needs lambda below lambda_b0");
    }
    if (regime != KappaRegime::a && !(lambda >= spectrum.lambda_b0())) {
        throw PreconditionError("regimes (b) and (c) need lambda at or above lambda_b0");
    }
    if (regime == KappaRegime::b && compacts.empty()) {
        throw ConfigurationError("regime (b) needs at least one refuge compact");
    }
    if (regime == KappaRegime::c) {
        if (!(p > 3.0)) throw PreconditionError("regime (c) requires p > 3");
        if (compacts.empty()) throw ConfigurationError("regime (c) needs a compact inside the support");
        if (weight.grid().dimension() != 2) throw ConfigurationError("regime (c) is implemented in 2D");
    }

    SweepReport report;
    report.parameter = "kappa";
    report.regime = to_string(regime);
    report.mode = options.mode;
    report.fixed = lambda;
    report.p = p;
    for (const Compact& c : compacts) report.compacts.push_back(c.name);

    std::optional<GridFunction> reference;
    std::optional<RadialProfile> large;
    if (regime == KappaRegime::a) {
        reference = solve_logistic(weight, p, lambda, config, spectrum).value;
    } else if (regime == KappaRegime::c) {
        large = support_large_solution(weight.shape(), p, lambda, options.large).profile;
    }

    const std::vector<PointResult> results =
        run_points(kappa_grid.size(), options.mode, [&](std::size_t k, const GridFunction* warm) {
            const DualProblem problem(weight, DualTransform(kappa_grid[k], p));
            return solve_positive(problem, spectrum, lambda, config, warm);
        });

    const Grid& grid = weight.grid();
    const WeightShape& shape = weight.shape();
    std::optional<GridFunction> previous;
    for (std::size_t k = 0; k < kappa_grid.size(); ++k) {
        SweepRow row;
        row.parameter = kappa_grid[k];
        if (!results[k].solution) {
            mark_failed(row, compacts.size(), results[k].failure);
            previous.reset();
            report.rows.push_back(std::move(row));
            continue;
        }
        const DualTransform transform(kappa_grid[k], p);
        const GridFunction psi = recover_primal(transform, results[k].solution->value);
        row.newton_iterations = results[k].solution->newton_iterations;
        record(row, psi, compacts, previous);
        if (reference) {
            row.distance = sup_distance(psi, *reference);
        } else if (large) {
            double worst = 0.0;
            for (std::size_t node : compacts.front().nodes) {
                const double r = shape.center_distance(grid.x(node), grid.y(node), 2);
                worst = std::max(worst, std::abs(psi[node] - large->at(r)));
            }
            row.distance = worst;
        }
        previous = psi;
        report.rows.push_back(std::move(row));
    }
    report.checks = evaluate_checks(report);
    return report;
}

}  // namespace quasilog
