#pragma once

#include "quasilog/asymptotics.hpp"
#include "quasilog/large_solution.hpp"
#include "quasilog/stationary.hpp"
#include "quasilog/weight.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace quasilog {

enum class ExperimentKind { verify_f, eig, solve, branch, lambda_sweep, kappa_sweep, large, stability };

std::string to_string(ExperimentKind kind);
/// Command spelling, e.g. "verify-f" or "kappa-sweep".
ExperimentKind experiment_kind_from_string(const std::string& name);

/// Scale applied to every λ given in the config; refuge_gap maps v to λ₁ + v (λ_{b,0} - λ₁).
enum class LambdaUnit { absolute, lambda1, lambda_b0, refuge_gap };

std::string to_string(LambdaUnit unit);

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::solve;
    std::uint64_t seed = 0;
    SweepMode mode = SweepMode::warm;
    /// Random starts of the multi-start probe in `solve`.
    int starts = 3;

    int dimension = 1;
    Interval x{0.0, 1.0};
    Interval y{0.0, 1.0};
    int n = 63;

    WeightShape weight{WeightMode::constant, 1.0, {0.5, 0.5}, 0.25};

    double kappa = 1.0;
    double p = 3.0;

    SolverConfig solver{};

    LambdaUnit lambda_unit = LambdaUnit::lambda1;
    double lambda = 2.0;
    double lambda_from = 1.001;
    double lambda_to = 3.0;
    int steps = 40;
    /// Empty lists select the defaults of the experiment.
    std::vector<double> lambda_grid;
    std::vector<double> kappa_grid;
    KappaRegime regime = KappaRegime::automatic;
    /// λ sweep next to the κ = 0 control problem instead of the plain limits.
    bool control = false;
    /// none, refuge or support.
    std::string compact = "none";
    double compact_radius = 0.0625;
    double compact_margin = 3.0;
    double continuum_tol = 1e-3;

    int ball_dimension = 2;
    double ball_radius = 0.3;
    double ball_lambda = 99.3;
    double ball_b0 = 1000.0;
    LargeSolutionOptions large{};
    double ko_t = 1e4;

    double t_min = 1e-6;
    double t_max = 1e3;
    int samples = 200;

    Grid grid() const;
    WeightField weight_field() const;
    DualTransform transform() const { return DualTransform(kappa, p); }
    /// Absolute λ for a value given in `lambda_unit`.
    double absolute_lambda(double value, const Spectrum& spectrum) const;
};

/// Documentation of one accepted key; every key may also be given as a `--key` flag.
struct ConfigKey {
    std::string section;
    std::string name;
    std::string help;
    std::string default_value;
};

const std::vector<ConfigKey>& config_keys();

/// Raw `key = value` assignments keyed by name, remembering where each came from.
class ConfigSource {
public:
    /// Reads `path`; a missing or unreadable file raises ParseError naming the path.
    static ConfigSource from_file(const std::filesystem::path& path);
    /// `origin` names the text in messages.
    static ConfigSource from_text(const std::string& text, const std::string& origin = "<config>");

    /// Later assignments win. Flags carry line 0.
    void set(const std::string& key, const std::string& value, int line = 0,
             const std::string& origin = "command line");
    bool contains(const std::string& key) const { return entries_.count(key) != 0; }

    /// Typed, range-checked config; errors are ParseError naming the line and key.
    ExperimentConfig build() const;

private:
    struct Entry {
        std::string value;
        int line = 0;
        std::string origin;
    };
    std::map<std::string, Entry> entries_;
};

ExperimentConfig parse_config(const std::filesystem::path& path);

}  // namespace quasilog
