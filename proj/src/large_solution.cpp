#include "quasilog/large_solution.hpp"

#include "quasilog/dual_transform.hpp"
#include "quasilog/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

namespace quasilog {

namespace {

constexpr double layer_ratio = 0.9;
constexpr double finest_fraction = 1e-12;

struct Tridiagonal {
    std::vector<double> lower;
    std::vector<double> diag;
    std::vector<double> upper;
};

// Thomas algorithm; the radial Jacobians are M-matrices in all regimes we solve.
std::vector<double> solve_tridiagonal(Tridiagonal m, std::vector<double> rhs) {
    const std::size_t n = rhs.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double w = m.lower[i] / m.diag[i - 1];
        m.diag[i] -= w * m.upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    std::vector<double> x(n);
    x[n - 1] = rhs[n - 1] / m.diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) {
        x[i] = (rhs[i] - m.upper[i] * x[i + 1]) / m.diag[i];
    }
    return x;
}

// Geometry of the finite-volume cells around each unknown node.
struct Cells {
    std::vector<double> inner;  // r^{N-1}/(r_i - r_{i-1}) at the left face, 0 at the center
    std::vector<double> outer;  // r^{N-1}/(r_{i+1} - r_i) at the right face
    std::vector<double> volume;
};

Cells cell_geometry(const std::vector<double>& r, int dimension) {
    const std::size_t m = r.size() - 1;
    Cells c{std::vector<double>(m), std::vector<double>(m), std::vector<double>(m)};
    for (std::size_t i = 0; i < m; ++i) {
        const double right = 0.5 * (r[i] + r[i + 1]);
        const double left = i == 0 ? 0.0 : 0.5 * (r[i - 1] + r[i]);
        c.outer[i] = std::pow(right, dimension - 1) / (r[i + 1] - r[i]);
        c.inner[i] = i == 0 ? 0.0 : std::pow(left, dimension - 1) / (r[i] - r[i - 1]);
        c.volume[i] = (std::pow(right, dimension) - std::pow(left, dimension)) / dimension;
    }
    return c;
}

struct RadialResidual {
    std::vector<double> value;
    double scaled = 0.0;
};

RadialResidual radial_residual(const RadialProblem& problem, const Cells& cells, const std::vector<double>& weight,
                               const std::vector<double>& v, double boundary_value) {
    const std::size_t m = v.size();
    RadialResidual out{std::vector<double>(m), 0.0};
    for (std::size_t i = 0; i < m; ++i) {
        const double next = i + 1 < m ? v[i + 1] : boundary_value;
        const double flux_out = cells.outer[i] * (next - v[i]);
        const double flux_in = i == 0 ? 0.0 : cells.inner[i] * (v[i] - v[i - 1]);
        const double growth = cells.volume[i] * problem.lambda * v[i];
        const double loss = cells.volume[i] * weight[i] * problem.absorb(v[i]);
        out.value[i] = -flux_out + flux_in - growth + loss;
        // Componentwise backward error: each flux is measured against its operands, since
        // neighbour values agree to many digits inside the boundary layer.
        const double prev = i == 0 ? 0.0 : std::abs(v[i - 1]);
        const double size = cells.volume[i] + cells.outer[i] * (std::abs(next) + std::abs(v[i])) +
                            cells.inner[i] * (std::abs(v[i]) + prev) + std::abs(growth) + std::abs(loss);
        out.scaled = std::max(out.scaled, std::abs(out.value[i]) / size);
    }
    return out;
}

}  // namespace

double RadialProblem::absorb(double v) const {
    if (v <= 0.0) {
        return 0.0;
    }
    return absorption == Absorption::power ? std::pow(v, p) : g(p, v);
}

double RadialProblem::absorb_derivative(double v) const {
    v = std::max(v, 0.0);
    if (absorption == Absorption::power) {
        return p * std::pow(v, p - 1.0);
    }
    if (v == 0.0) {
        return 0.0;
    }
    // g = f^{p+1}/t with f = f_1: g' = (p+1) f^p f'/t - f^{p+1}/t².
    const DualTransform unit(1.0, p);
    const TransformValue tv = unit.evaluate(v);
    return (p + 1.0) * std::pow(tv.f, p) * tv.fp / v - std::pow(tv.f, p + 1.0) / (v * v);
}

double RadialProfile::at(double radius) const {
    if (radius <= r.front()) {
        return values.front();
    }
    if (radius >= r.back()) {
        return values.back();
    }
    const auto hi = static_cast<std::size_t>(std::upper_bound(r.begin(), r.end(), radius) - r.begin());
    const std::size_t lo = hi - 1;
    const double w = (radius - r[lo]) / (r[hi] - r[lo]);
    return (1.0 - w) * values[lo] + w * values[hi];
}

double RadialProfile::max_within(double limit) const {
    double best = 0.0;
    for (std::size_t i = 0; i < r.size() && r[i] <= limit; ++i) {
        best = std::max(best, values[i]);
    }
    return best;
}

std::vector<double> graded_radial_mesh(double radius, int mesh_n) {
    if (!(radius > 0.0)) {
        throw DomainError("ball radius must be positive");
    }
    if (mesh_n < 4) {
        throw DomainError("radial mesh needs at least 4 cells");
    }
    const double h = radius / mesh_n;
    std::vector<double> layer;
    double width = h * layer_ratio;
    double depth = 0.0;
    while (width > finest_fraction * radius) {
        layer.push_back(width);
        depth += width;
        width *= layer_ratio;
    }
    const double core = radius - depth;
    const int core_cells = std::max(2, static_cast<int>(std::ceil(core / h - 1e-9)));
    std::vector<double> r;
    r.reserve(static_cast<std::size_t>(core_cells) + layer.size() + 1);
    for (int i = 0; i <= core_cells; ++i) {
        r.push_back(core * i / core_cells);
    }
    double pos = core;
    for (double w : layer) {
        pos += w;
        r.push_back(pos);
    }
    r.back() = radius;
    return r;
}

RadialProfile solve_radial(const RadialProblem& problem, double boundary_value, int mesh_n,
                           const RadialProfile* warm_start) {
    if (problem.dimension < 1) throw DomainError("dimension must be at least 1");
    if (!(problem.p > 1.0)) throw DomainError("exponent p must exceed 1");
    if (!(boundary_value > 0.0) || !std::isfinite(boundary_value)) {
        throw DomainError("boundary value M must be positive and finite");
    }
    if (!problem.weight && !(problem.b0 > 0.0)) throw DomainError("b0 must be positive");

    RadialProfile profile;
    profile.dimension = problem.dimension;
    profile.boundary_value = boundary_value;
    profile.r = graded_radial_mesh(problem.radius, mesh_n);
    const std::size_t m = profile.r.size() - 1;
    const Cells cells = cell_geometry(profile.r, problem.dimension);
    std::vector<double> weight(m);
    for (std::size_t i = 0; i < m; ++i) {
        weight[i] = problem.weight_at(profile.r[i]);
        if (!(weight[i] >= 0.0)) throw DomainError("radial weight must be nonnegative");
    }

    // With a convex absorption, one Newton step from any point where the Jacobian is
    // inverse-positive lands above the solution, and the iterates then decrease monotonically.
    // The previous profile of the M-schedule qualifies; otherwise start from a constant large
    // enough that B a'(v) ≥ 2λ at every unknown node.
    std::vector<double> v;
    if (warm_start != nullptr && warm_start->r == profile.r && warm_start->boundary_value <= boundary_value) {
        v.assign(warm_start->values.begin(), warm_start->values.end() - 1);
    } else {
        const double b_min = *std::min_element(weight.begin(), weight.end());
        if (!(b_min > 0.0)) {
            throw DomainError("radial weight must be positive inside the ball");
        }
        double level = boundary_value;
        while (b_min * problem.absorb_derivative(level) < 2.0 * std::max(problem.lambda, 0.0) && level < 1e150) {
            level *= 2.0;
        }
        v.assign(m, level);
    }

    RadialResidual res = radial_residual(problem, cells, weight, v, boundary_value);
    const int max_iter = 400;
    int it = 0;
    for (; it < max_iter; ++it) {
        Tridiagonal jac{std::vector<double>(m, 0.0), std::vector<double>(m), std::vector<double>(m, 0.0)};
        for (std::size_t i = 0; i < m; ++i) {
            jac.diag[i] = cells.outer[i] + cells.inner[i] -
                          cells.volume[i] * (problem.lambda - weight[i] * problem.absorb_derivative(v[i]));
            if (i > 0) jac.lower[i] = -cells.inner[i];
            if (i + 1 < m) jac.upper[i] = -cells.outer[i];
        }
        std::vector<double> rhs(m);
        for (std::size_t i = 0; i < m; ++i) rhs[i] = -res.value[i];
        const std::vector<double> delta = solve_tridiagonal(std::move(jac), std::move(rhs));

        double step = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            // Guard against rounding pushing a node below zero; the exact iterates stay positive.
            const double next = std::max(v[i] + delta[i], 0.1 * v[i]);
            step = std::max(step, std::abs(next - v[i]) / (1.0 + std::abs(next)));
            v[i] = next;
        }
        res = radial_residual(problem, cells, weight, v, boundary_value);
        if (!std::isfinite(res.scaled)) {
            throw ConvergenceError("radial Newton produced non-finite values", res.scaled);
        }
        if (step <= 1e-14 || (res.scaled <= 1e-13 && step <= 1e-12)) {
            ++it;
            break;
        }
    }
    if (!(res.scaled <= 1e-9)) {
        throw ConvergenceError("radial Newton did not reach the residual target", res.scaled);
    }
    v.push_back(boundary_value);
    profile.values = std::move(v);
    profile.newton_iterations = it;
    profile.residual = res.scaled;
    return profile;
}

RadialProfile solve_dirichlet_ball(int dimension, double radius, double lambda, double b0, double p,
                                   double boundary_value, int mesh_n) {
    RadialProblem problem;
    problem.dimension = dimension;
    problem.radius = radius;
    problem.lambda = lambda;
    problem.b0 = b0;
    problem.p = p;
    return solve_radial(problem, boundary_value, mesh_n);
}

LargeSolution minimal_large_solution(const RadialProblem& problem, const LargeSolutionOptions& options) {
    if (problem.absorption == Absorption::dual_g && !(problem.p > 3.0)) {
        throw PreconditionError("large solutions with the dual absorption need p > 3");
    }
    if (!(options.first_value > 0.0) || options.max_doublings < 1 || !(options.tolerance > 0.0)) {
        throw DomainError("invalid large-solution schedule");
    }
    LargeSolution out{solve_radial(problem, options.first_value, options.mesh_n), {options.first_value}, {}, true};
    const double window = 0.5 * problem.radius;
    for (int k = 1; k <= options.max_doublings; ++k) {
        const double value = options.first_value * std::ldexp(1.0, k);
        RadialProfile next = solve_radial(problem, value, options.mesh_n, &out.profile);
        double diff = 0.0;
        for (std::size_t i = 0; i < next.r.size() && next.r[i] <= window; ++i) {
            diff = std::max(diff, std::abs(next.values[i] - out.profile.values[i]));
        }
        if (!out.interior_differences.empty() && !(diff < out.interior_differences.back())) {
            out.differences_monotone = false;
        }
        out.interior_differences.push_back(diff);
        out.schedule.push_back(value);
        out.profile = std::move(next);
        if (diff <= options.tolerance) {
            out.profile.boundary_value = std::numeric_limits<double>::infinity();
            return out;
        }
    }
    throw ConvergenceError("interior profile did not stabilize along the boundary-value schedule",
                           out.interior_differences.back());
}

LargeSolution minimal_large_solution(int dimension, double radius, double lambda, double b0, double p,
                                     const LargeSolutionOptions& options) {
    RadialProblem problem;
    problem.dimension = dimension;
    problem.radius = radius;
    problem.lambda = lambda;
    problem.b0 = b0;
    problem.p = p;
    return minimal_large_solution(problem, options);
}

void write_profile_csv(std::ostream& out, const RadialProfile& profile) {
    const std::string tag = std::isinf(profile.boundary_value) ? "inf" : format_number(profile.boundary_value);
    out << "r,value,M_tag\n";
    for (std::size_t i = 0; i < profile.r.size(); ++i) {
        out << format_number(profile.r[i]) << ',' << format_number(profile.values[i]) << ',' << tag << '\n';
    }
}

double absorption_primitive(double p, double t) {
    if (!(t >= 0.0)) throw DomainError("G is defined for t >= 0");
    if (t == 0.0) return 0.0;
    // Substituting s = F_1(u): ds = sqrt(1+2u²) du and g(s) = u^{p+1}/F_1(u).
    const DualTransform unit(1.0, p);
    const auto integrand = [&](double u) {
        if (u <= 0.0) return 0.0;
        return std::pow(u, p + 1.0) * std::sqrt(1.0 + 2.0 * u * u) / unit.inverse(u);
    };
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.0, unit.value(t), 15, 1e-14);
}

KellerOssermanReport keller_osserman_margin(double p, double T) {
    if (!(p > 3.0)) throw PreconditionError("Keller-Osserman check requires p > 3");
    if (!(T > 1.0)) throw DomainError("upper limit T must exceed 1");
    const auto between = [p](double a, double b) {
        // t = e^x flattens the algebraic decay of 1/sqrt(G).
        const auto integrand = [p](double x) {
            const double t = std::exp(x);
            return t / std::sqrt(absorption_primitive(p, t));
        };
        return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, std::log(a), std::log(b),
                                                                             10, 1e-12);
    };

    KellerOssermanReport report;
    report.p = p;
    report.T = T;
    report.tail_exponent = (p + 1.0) / 4.0;
    double lo = 1.0;
    while (lo < T) {
        const double hi = std::min(10.0 * lo, T);
        report.partial_integral += between(lo, hi);
        lo = hi;
    }
    for (int k = 0; k < 60 && std::isinf(report.cauchy_threshold); ++k) {
        const double a = std::pow(10.0, k);
        const double inc = between(a, 10.0 * a);
        report.decade_increments.push_back(inc);
        if (inc < 1e-6) report.cauchy_threshold = a;
    }
    report.increment_1e3_1e4 = report.decade_increments[3];

    const double c = g(p, 1.0);
    const double a = 2.0 * c / (p + 1.0);
    const double q = (p + 1.0) / 2.0;
    report.analytic_tail = std::pow(1.0 - std::pow(T, -q), -0.5) / std::sqrt(a) * std::pow(T, 1.0 - q / 2.0) /
                           (q / 2.0 - 1.0);
    return report;
}

CompactBoundReport compact_bound_check(const WeightField& weight, double p, const std::vector<double>& kappas,
                                       double lambda, double compact_radius, const SolverConfig& config,
                                       const LargeSolutionOptions& options) {
    const WeightShape& shape = weight.shape();
    const Grid& grid = weight.grid();
    if (shape.mode != WeightMode::bump || grid.dimension() != 2) {
        throw ConfigurationError("compact bound check needs a 2D bump weight");
    }
    const double ball = 2.0 * compact_radius;
    if (!(compact_radius > 0.0) || !(ball < shape.radius)) {
        throw ConfigurationError("comparison ball of radius 2*compact_radius must lie inside the bump support");
    }
    for (double kappa : kappas) {
        if (!(kappa > 0.0 && kappa < 1.0)) {
            throw PreconditionError("compact bound check needs kappa in (0,1)");
        }
    }

    CompactBoundReport report;
    report.ball_radius = ball;
    // b is radially decreasing, so its minimum over the ball sits on the rim. For κ < 1 the
    // dual absorption dominates g/2, which makes Θ a subsolution of the radial problem.
    const double rim = shape.b0 * std::pow(1.0 - ball * ball / (shape.radius * shape.radius), 2.0);
    report.effective_b = 0.5 * rim;

    RadialProblem radial;
    radial.dimension = 2;
    radial.radius = ball;
    radial.lambda = lambda;
    radial.b0 = report.effective_b;
    radial.p = p;
    report.cap = minimal_large_solution(radial, options).profile.max_within(0.5 * ball);

    const Spectrum spectrum = analyze_spectrum(weight, config.eigen);
    report.all_below = true;
    for (double kappa : kappas) {
        const DualProblem problem(weight, DualTransform(kappa, p));
        const GridFunction start = lambda > spectrum.lambda1 ? supersolution(problem, lambda).field
                                                             : bifurcation_seed(problem, spectrum, lambda);
        const Solution sol = solve_dual(problem, lambda, config, start);
        double best = 0.0;
        for (std::size_t k = 0; k < grid.size(); ++k) {
            if (shape.center_distance(grid.x(k), grid.y(k), 2) <= compact_radius) {
                best = std::max(best, sol.value[k]);
            }
        }
        report.rows.push_back({kappa, best});
        report.all_below = report.all_below && best <= report.cap;
    }
    return report;
}

}  // namespace quasilog
