// Python bindings: scalar maps of the transform (vectorized over numpy arrays), the experiment
// runner, and direct access to stationary and large solutions.
#include "quasilog/config.hpp"
#include "quasilog/dual_transform.hpp"
#include "quasilog/errors.hpp"
#include "quasilog/experiment.hpp"
#include "quasilog/large_solution.hpp"
#include "quasilog/stationary.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>

namespace py = pybind11;
using namespace quasilog;

namespace {

py::array_t<double> to_array(const std::vector<double>& values) {
    return py::array_t<double>(static_cast<py::ssize_t>(values.size()), values.data());
}

// Values of a Python dict rendered the way a config file would spell them.
std::string config_value(const py::handle& value) {
    if (py::isinstance<py::bool_>(value)) return value.cast<bool>() ? "true" : "false";
    if (py::isinstance<py::int_>(value)) return std::to_string(value.cast<long long>());
    if (py::isinstance<py::float_>(value)) return format_number(value.cast<double>());
    if (py::isinstance<py::str>(value)) return value.cast<std::string>();
    std::string out;
    for (const py::handle item : value) {
        if (!out.empty()) out += ',';
        out += config_value(item);
    }
    return out;
}

ExperimentConfig make_config(const std::optional<std::string>& path, const py::dict& overrides,
                             const std::optional<std::string>& kind) {
    ConfigSource source = path ? ConfigSource::from_file(*path) : ConfigSource{};
    if (kind) source.set("kind", *kind, 0, "argument");
    for (const auto& [key, value] : overrides) source.set(key.cast<std::string>(), config_value(value), 0, "argument");
    return source.build();
}

py::dict result_dict(const ExperimentResult& result) {
    py::list checks;
    for (const Check& c : result.checks) {
        py::dict d;
        d["id"] = c.id;
        d["status"] = to_string(c.status);
        d["measured"] = c.measured;
        d["threshold"] = c.threshold;
        d["exploratory"] = c.exploratory;
        checks.append(d);
    }
    py::dict artifacts;
    for (const Artifact& a : result.artifacts) artifacts[py::str(a.name)] = a.content;
    py::dict out;
    out["kind"] = to_string(result.kind);
    out["passed"] = result.passed();
    out["checks"] = checks;
    out["artifacts"] = artifacts;
    out["verdict"] = verdict_text(result);
    return out;
}

}  // namespace

PYBIND11_MODULE(_quasilog, m) {
    m.doc() = "Quasilinear logistic problem through the dual transform f_kappa.";

    auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<DomainError>(m, "DomainError", error.ptr());
    py::register_exception<PreconditionError>(m, "PreconditionError", error.ptr());
    py::register_exception<ConfigurationError>(m, "ConfigurationError", error.ptr());
    py::register_exception<NumericError>(m, "NumericError", error.ptr());
    py::register_exception<ConvergenceError>(m, "ConvergenceError", error.ptr());
    py::register_exception<ParseError>(m, "ParseError", error.ptr());

    m.def("f", py::vectorize(&quasilog::f), py::arg("kappa"), py::arg("t"), "f_kappa(t)");
    m.def("f_prime", py::vectorize(&f_prime), py::arg("kappa"), py::arg("t"));
    m.def("f_second", py::vectorize(&f_second), py::arg("kappa"), py::arg("t"));
    m.def("inverse_transform", py::vectorize(&inverse_transform), py::arg("kappa"), py::arg("u"),
          "closed-form F(u) = integral of sqrt(1 + 2 kappa s^2) over [0, u]");
    m.def("h", py::vectorize(&quasilog::h), py::arg("kappa"), py::arg("t"), "f f' / t with h(0) = 1");
    m.def("h_inverse", py::vectorize(&h_inverse), py::arg("kappa"), py::arg("y"));
    m.def("g", py::vectorize(&quasilog::g), py::arg("p"), py::arg("t"), "f_1(t)^(p+1) / t");
    m.def("reaction", py::vectorize(&reaction), py::arg("kappa"), py::arg("p"), py::arg("lam"), py::arg("b"),
          py::arg("t"));
    m.def("reaction_derivative", py::vectorize(&reaction_derivative), py::arg("kappa"), py::arg("p"),
          py::arg("lam"), py::arg("b"), py::arg("t"));

    m.def(
        "config_keys",
        [] {
            py::list out;
            for (const ConfigKey& k : config_keys()) {
                py::dict d;
                d["section"] = k.section;
                d["name"] = k.name;
                d["help"] = k.help;
                d["default"] = k.default_value;
                out.append(d);
            }
            return out;
        },
        "accepted config keys with their sections, help and defaults");

    m.def(
        "run",
        [](const std::optional<std::string>& kind, const std::optional<std::string>& config, const py::dict& overrides,
           const std::optional<std::string>& out) {
            const ExperimentConfig c = make_config(config, overrides, kind);
            ExperimentResult result;
            {
                py::gil_scoped_release release;
                result = run_experiment(c);
                if (out) write_artifacts(result, *out);
            }
            return result_dict(result);
        },
        py::arg("kind") = py::none(), py::arg("config") = py::none(), py::arg("overrides") = py::dict(),
        py::arg("out") = py::none(),
        "Run an experiment. `overrides` maps config keys to values and wins over the file. Returns a dict "
        "with passed, checks, artifacts (CSV text by file name) and verdict.");

    m.def(
        "solve",
        [](const py::dict& overrides, const std::optional<std::string>& config) {
            const ExperimentConfig c = make_config(config, overrides, std::nullopt);
            const WeightField weight = c.weight_field();
            const DualProblem problem(weight, c.transform());
            std::optional<Spectrum> spectrum;
            std::optional<Solution> sol;
            double lambda = 0.0;
            {
                py::gil_scoped_release release;
                spectrum = analyze_spectrum(weight, c.solver.eigen);
                lambda = c.absolute_lambda(c.lambda, *spectrum);
                sol = solve_positive(problem, *spectrum, lambda, c.solver);
            }
            const Grid& grid = problem.grid();
            std::vector<double> x(grid.size()), y(grid.size());
            for (std::size_t k = 0; k < grid.size(); ++k) {
                x[k] = grid.x(k);
                y[k] = grid.y(k);
            }
            py::dict out;
            out["lambda"] = lambda;
            out["lambda1"] = spectrum->lambda1;
            out["lambda_b0"] = spectrum->lambda_b0();
            out["x"] = to_array(x);
            if (grid.dimension() == 2) out["y"] = to_array(y);
            out["theta"] = to_array(sol->value.data());
            out["psi"] = to_array(recover_primal(problem.transform(), sol->value).data());
            out["residual"] = sol->residual;
            out["newton_iterations"] = sol->newton_iterations;
            return out;
        },
        py::arg("overrides") = py::dict(), py::arg("config") = py::none(),
        "Positive solution (or zero) of the dual problem for a config; Theta and Psi = f_kappa(Theta) per node.");

    m.def(
        "minimal_large_solution",
        [](int dimension, double radius, double lam, double b0, double p, int mesh_n) {
            LargeSolutionOptions options;
            options.mesh_n = mesh_n;
            std::optional<LargeSolution> large;
            {
                py::gil_scoped_release release;
                large = minimal_large_solution(dimension, radius, lam, b0, p, options);
            }
            py::dict out;
            out["r"] = to_array(large->profile.r);
            out["values"] = to_array(large->profile.values);
            out["schedule"] = large->schedule;
            out["interior_differences"] = large->interior_differences;
            out["monotone"] = large->differences_monotone;
            return out;
        },
        py::arg("dimension"), py::arg("radius"), py::arg("lam"), py::arg("b0"), py::arg("p"), py::arg("mesh_n") = 400);

    m.def(
        "keller_osserman",
        [](double p, double T) {
            const KellerOssermanReport r = keller_osserman_margin(p, T);
            py::dict out;
            out["partial_integral"] = r.partial_integral;
            out["decade_increments"] = r.decade_increments;
            out["increment_1e3_1e4"] = r.increment_1e3_1e4;
            out["cauchy_threshold"] = r.cauchy_threshold;
            out["tail_exponent"] = r.tail_exponent;
            out["analytic_tail"] = r.analytic_tail;
            return out;
        },
        py::arg("p"), py::arg("T"));
}
