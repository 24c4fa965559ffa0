#include "oracles.hpp"

#include "quasilog/asymptotics.hpp"
#include "quasilog/errors.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <sstream>
#include <string>

using namespace quasilog;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

WeightField refuge_setup(int n) {
    WeightShape shape;
    shape.mode = WeightMode::bump;
    shape.b0 = 1000.0;
    shape.radius = 0.25;
    return build_weight(Grid::rectangle({0.0, 1.0}, {0.0, 1.0}, n, n), shape);
}

WeightField constant_setup(const Grid& grid) {
    WeightShape shape;
    shape.mode = WeightMode::constant;
    shape.b0 = 1.0;
    return build_weight(grid, shape);
}

const std::vector<double> kappas{1e-1, 3e-2, 1e-2, 3e-3, 1e-3};

const SweepCheck& find_check(const SweepReport& report, const std::string& id) {
    for (const SweepCheck& c : report.checks) {
        if (c.id == id) return c;
    }
    FAIL("missing check " << id);
    return report.checks.front();
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream in(line);
    std::string cell;
    while (std::getline(in, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

// Rebuilds the rows of a sweep from its CSV text.
SweepReport reparse(const std::string& csv, const SweepReport& like) {
    SweepReport out;
    out.parameter = like.parameter;
    out.regime = like.regime;
    out.compacts = like.compacts;
    std::stringstream in(csv);
    std::string line;
    std::getline(in, line);
    REQUIRE(line.rfind("# ", 0) == 0);
    std::getline(in, line);
    const std::size_t nc = like.compacts.size();
    while (std::getline(in, line)) {
        const std::vector<std::string> cells = split(line);
        REQUIRE(cells.size() == 8 + 2 * nc);
        SweepRow row;
        row.parameter = std::stod(cells[0]);
        row.sup_norm = std::stod(cells[1]);
        for (std::size_t c = 0; c < nc; ++c) {
            row.compact_min.push_back(std::stod(cells[2 + 2 * c]));
            row.compact_max.push_back(std::stod(cells[3 + 2 * c]));
        }
        row.distance = std::stod(cells[2 + 2 * nc]);
        row.min_step = std::stod(cells[3 + 2 * nc]);
        row.control = std::stod(cells[4 + 2 * nc]);
        row.solved = cells[6 + 2 * nc] == "1";
        out.rows.push_back(row);
    }
    return out;
}

}  // namespace

TEST_CASE("compacts", "[asymptotics]") {
    const WeightField weight = refuge_setup(31);
    const Grid& grid = weight.grid();
    const Compact refuge = refuge_compact(weight);
    const double h = grid.h();
    for (std::size_t node : refuge.nodes) {
        CHECK(std::hypot(grid.x(node) - 0.5, grid.y(node) - 0.5) >= 0.25 + 3.0 * h - 1e-12);
        CHECK(grid.boundary_distance(node) >= 3.0 * h - 1e-12);
        CHECK(weight[node] == 0.0);
    }
    const Compact support = support_compact(weight, 0.125);
    for (std::size_t node : support.nodes) CHECK(weight[node] > 0.0);
    CHECK_THROWS_AS(support_compact(weight, 0.3), ConfigurationError);
    CHECK_THROWS_AS(refuge_compact(constant_setup(grid)), ConfigurationError);
}

TEST_CASE("worker count follows the thread cap", "[asymptotics]") {
    ::setenv("QUASILOG_THREADS", "2", 1);
    CHECK(sweep_workers(10) <= 2);
    CHECK(sweep_workers(1) == 1);
    ::setenv("QUASILOG_THREADS", "1", 1);
    CHECK(sweep_workers(10) == 1);
    ::setenv("QUASILOG_THREADS", "junk", 1);
    CHECK(sweep_workers(10) >= 1);
    ::unsetenv("QUASILOG_THREADS");
}

TEST_CASE("approach to the principal eigenvalue", "[asymptotics]") {
    const Grid g = Grid::interval({0.0, 1.0}, 63);
    const WeightField weight = constant_setup(g);
    const double kappa = 1.0;
    const Spectrum spec = analyze_spectrum(weight);
    std::vector<double> lambdas;
    for (double factor : {1.5, 1.25, 1.1, 1.01, 1.001}) lambdas.push_back(factor * spec.lambda1);
    const SweepReport report = lambda_limits(weight, DualTransform(kappa, 3.0), lambdas, {}, SolverConfig{});
    CHECK(report.regime == "lambda-down");
    CHECK(report.passed());
    CHECK(find_check(report, "sup_decreasing").pass);
    CHECK(find_check(report, "sup_ratio").measured < 0.1);

    // Small amplitude: f f' ≈ t - (4κ/3)t³, so one Galerkin mode gives
    // δ² = (λ - λ₁) Σφ² / ((4κλ/3 + b) Σφ⁴).
    const double lambda = lambdas.back();
    double s2 = 0.0;
    double s4 = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double phi = spec.phi1[k];
        s2 += phi * phi;
        s4 += phi * phi * phi * phi;
    }
    const double delta = std::sqrt((lambda - spec.lambda1) * s2 / ((4.0 * kappa * lambda / 3.0 + 1.0) * s4));
    CHECK_THAT(report.rows.back().sup_norm, WithinRel(delta / spec.phi1.max(), 0.01));
}

TEST_CASE("growth on the refuge as lambda increases", "[asymptotics]") {
    const WeightField weight = refuge_setup(31);
    const Spectrum spec = analyze_spectrum(weight);
    std::vector<double> lambdas;
    for (double factor : {2.0, 5.0, 10.0, 20.0, 50.0}) lambdas.push_back(factor * spec.lambda1);
    const SweepReport report =
        lambda_limits(weight, DualTransform(0.1, 3.0), lambdas, {refuge_compact(weight)}, SolverConfig{});
    CHECK(report.regime == "lambda-up");
    CHECK(report.passed());
    CHECK(find_check(report, "min_ratio:refuge").measured >= 10.0);
}

TEST_CASE("blow-up control below the refuge eigenvalue", "[asymptotics]") {
    const WeightField weight = refuge_setup(31);
    const Spectrum spec = analyze_spectrum(weight);
    std::vector<double> lambdas;
    for (double factor : {0.9, 0.95, 0.99, 0.999}) lambdas.push_back(factor * spec.lambda_b0());
    const SweepReport report = refuge_blowup_control(weight, DualTransform(0.1, 3.0), lambdas, SolverConfig{});
    CHECK(report.passed());
    // κ = 0: u grows without bound as λ ↑ λ_{b,0}.
    CHECK(report.rows.back().control > 10.0 * report.rows.front().control);
    CHECK_THROWS_AS(refuge_blowup_control(weight, DualTransform(0.1, 3.0), {50.0, 1.01 * spec.lambda_b0()},
                                          SolverConfig{}),
                    PreconditionError);
}

TEST_CASE("kappa to zero below the refuge eigenvalue", "[asymptotics]") {
    const WeightField weight = refuge_setup(31);
    const Spectrum spec = analyze_spectrum(weight);
    const double lambda = 0.5 * (spec.lambda1 + spec.lambda_b0());
    const SweepReport report = kappa_to_zero(weight, 3.0, lambda, kappas, {refuge_compact(weight)}, SolverConfig{});
    CHECK(report.regime == "a");
    CHECK(report.passed());
    CHECK(find_check(report, "distance_ratio").measured <= 0.2);
    CHECK(find_check(report, "psi_increases_as_kappa_decreases").pass);
}

TEST_CASE("kappa to zero above the refuge eigenvalue", "[asymptotics]") {
    const WeightField weight = refuge_setup(31);
    const Spectrum spec = analyze_spectrum(weight);
    const double lambda = 1.2 * spec.lambda_b0();
    const SweepReport b = kappa_to_zero(weight, 3.0, lambda, kappas, {refuge_compact(weight)}, SolverConfig{});
    CHECK(b.regime == "b");
    CHECK(b.passed());
    CHECK(find_check(b, "min_growth:refuge").measured >= 5.0);

    KappaSweepOptions options;
    options.regime = KappaRegime::c;
    const SweepReport c = kappa_to_zero(weight, 4.0, lambda, kappas, {support_compact(weight, 0.125)},
                                        SolverConfig{}, options);
    CHECK(c.regime == "c");
    CHECK(c.passed());

    CHECK_THROWS_AS(kappa_to_zero(weight, 3.0, lambda, kappas, {support_compact(weight, 0.125)}, SolverConfig{},
                                  options),
                    PreconditionError);
    options.regime = KappaRegime::a;
    CHECK_THROWS_AS(kappa_to_zero(weight, 3.0, lambda, kappas, {}, SolverConfig{}, options), PreconditionError);
    CHECK_THROWS_AS(kappa_to_zero(weight, 3.0, lambda, {1e-3, 1e-1}, {}, SolverConfig{}), DomainError);
}

TEST_CASE("checks are re-derivable from the csv", "[asymptotics][property]") {
    const WeightField weight = refuge_setup(23);
    const Spectrum spec = analyze_spectrum(weight);
    for (double factor : {0.6, 1.3}) {
        const SweepReport report = kappa_to_zero(weight, 3.0, factor * spec.lambda_b0(), {0.1, 0.01, 0.001},
                                                 {refuge_compact(weight, 2.0)}, SolverConfig{});
        std::ostringstream csv;
        write_sweep_csv(csv, report);
        const std::vector<SweepCheck> again = evaluate_checks(reparse(csv.str(), report));
        REQUIRE(again.size() == report.checks.size());
        for (std::size_t k = 0; k < again.size(); ++k) {
            CHECK(again[k].id == report.checks[k].id);
            CHECK(again[k].pass == report.checks[k].pass);
            CHECK_THAT(again[k].measured, WithinRel(report.checks[k].measured, 1e-12));
        }
    }
}

TEST_CASE("cold sweeps agree with warm sweeps", "[asymptotics]") {
    const WeightField weight = refuge_setup(23);
    const Spectrum spec = analyze_spectrum(weight);
    const double lambda = 0.5 * (spec.lambda1 + spec.lambda_b0());
    KappaSweepOptions options;
    const SweepReport warm = kappa_to_zero(weight, 3.0, lambda, kappas, {}, SolverConfig{}, options);
    options.mode = SweepMode::cold;
    ::setenv("QUASILOG_THREADS", "3", 1);
    const SweepReport cold = kappa_to_zero(weight, 3.0, lambda, kappas, {}, SolverConfig{}, options);
    ::setenv("QUASILOG_THREADS", "1", 1);
    const SweepReport serial = kappa_to_zero(weight, 3.0, lambda, kappas, {}, SolverConfig{}, options);
    ::unsetenv("QUASILOG_THREADS");
    std::ostringstream a;
    std::ostringstream b;
    write_sweep_csv(a, cold);
    write_sweep_csv(b, serial);
    CHECK(a.str() == b.str());
    for (std::size_t k = 0; k < kappas.size(); ++k) {
        CHECK_THAT(cold.rows[k].distance, WithinAbs(warm.rows[k].distance, 1e-7));
    }
}
