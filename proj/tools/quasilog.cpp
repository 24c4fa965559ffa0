// quasilog <command> [--config path] [--out dir] [--key value ...]
//
// Exit codes: 0 all checks pass, 1 a check failed, 2 usage or configuration error,
// 3 numeric or convergence failure.
#include "quasilog/config.hpp"
#include "quasilog/errors.hpp"
#include "quasilog/experiment.hpp"

#include "CLI11.hpp"

#include <iostream>
#include <map>
#include <string>

namespace {

constexpr int exit_check_failed = 1;
constexpr int exit_usage = 2;
constexpr int exit_numeric = 3;

}  // namespace

int main(int argc, char** argv) {
    using namespace quasilog;

    CLI::App app{"Numerical laboratory for the quasilinear logistic problem."};
    std::string command;
    std::string config_path;
    std::string out_dir = "quasilog-out";
    app.add_option("command", command, "verify-f|eig|solve|branch|lambda-sweep|kappa-sweep|large|stability")
        ->required()
        ->check(CLI::IsMember({"verify-f", "eig", "solve", "branch", "lambda-sweep", "kappa-sweep", "large",
                               "stability"}));
    app.add_option("--config", config_path, "config file of key = value lines with [section] headers");
    app.add_option("--out", out_dir, "output directory for CSVs and verdict.txt")->capture_default_str();

    std::map<std::string, std::string> overrides;
    for (const ConfigKey& key : config_keys()) {
        if (key.name == "kind") continue;
        std::string help = "[" + key.section + "] " + key.help;
        if (!key.default_value.empty()) help += " (default " + key.default_value + ")";
        app.add_option("--" + key.name, overrides[key.name], help)->group(key.section);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_usage;
    }

    ExperimentConfig config;
    try {
        ConfigSource source = config_path.empty() ? ConfigSource{} : ConfigSource::from_file(config_path);
        source.set("kind", command);
        for (const ConfigKey& key : config_keys()) {
            if (key.name != "kind" && app.count("--" + key.name) > 0) source.set(key.name, overrides[key.name]);
        }
        config = source.build();
    } catch (const ParseError& e) {
        std::cerr << "quasilog: " << e.what() << '\n';
        return exit_usage;
    }

    try {
        const ExperimentResult result = run_experiment(config);
        write_artifacts(result, out_dir);
        std::cout << verdict_text(result);
        std::cout << (result.passed() ? "all checks passed" : "check failures") << "; artifacts in " << out_dir
                  << '\n';
        return result.passed() ? 0 : exit_check_failed;
    } catch (const ParseError& e) {
        std::cerr << "quasilog: " << e.what() << '\n';
        return exit_usage;
    } catch (const ConfigurationError& e) {
        std::cerr << "quasilog: configuration error: " << e.what() << '\n';
        return exit_usage;
    } catch (const PreconditionError& e) {
        std::cerr << "quasilog: precondition violated: " << e.what() << '\n';
        return exit_usage;
    } catch (const DomainError& e) {
        std::cerr << "quasilog: domain error: " << e.what() << '\n';
        return exit_usage;
    } catch (const ConvergenceError& e) {
        std::cerr << "quasilog: convergence failure: " << e.what() << '\n';
        return exit_numeric;
    } catch (const std::exception& e) {
        std::cerr << "quasilog: numeric failure: " << e.what() << '\n';
        return exit_numeric;
    }
}
