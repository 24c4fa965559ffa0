#pragma once

#include "quasilog/config.hpp"

#include <filesystem>
#include <limits>
#include <string>
#include <vector>

namespace quasilog {

enum class CheckStatus { pass, fail, skipped };

std::string to_string(CheckStatus status);

struct Check {
    std::string id;
    CheckStatus status = CheckStatus::skipped;
    double measured = std::numeric_limits<double>::quiet_NaN();
    double threshold = std::numeric_limits<double>::quiet_NaN();
    /// Reported but not part of the exit status; written with an `info.` id prefix.
    bool exploratory = false;
};

/// A CSV produced by an experiment, kept in memory until the run ends.
struct Artifact {
    std::string name;
    std::string content;
};

struct ExperimentResult {
    ExperimentKind kind = ExperimentKind::solve;
    std::vector<Check> checks;
    std::vector<Artifact> artifacts;

    /// No non-exploratory check failed.
    bool passed() const;
    const Check* find(const std::string& id) const;
};

/// Runs the experiment named by config.kind. Solver failures propagate as exceptions.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// One line per check: `check_id status measured threshold`.
std::string verdict_text(const ExperimentResult& result);

/// Writes every artifact and verdict.txt into `dir`, creating it if needed.
void write_artifacts(const ExperimentResult& result, const std::filesystem::path& dir);

/// Properties of f_κ on `samples` log-uniform points of [t_min, t_max] per κ.
ExperimentResult verify_transform(const std::vector<double>& kappas, double p, int samples, double t_min,
                                  double t_max, std::uint64_t seed);

}  // namespace quasilog
