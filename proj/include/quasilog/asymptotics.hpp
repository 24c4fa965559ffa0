#pragma once

#include "quasilog/large_solution.hpp"
#include "quasilog/stationary.hpp"

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace quasilog {

/// Warm sweeps run sequentially and seed each point with the previous solution; cold sweeps
/// seed every point independently and may run in parallel.
enum class SweepMode { warm, cold };

std::string to_string(SweepMode mode);
SweepMode sweep_mode_from_string(const std::string& name);

/// Worker count for `tasks` independent jobs: hardware concurrency capped by QUASILOG_THREADS.
int sweep_workers(std::size_t tasks);

/// A named set of grid nodes on which restricted min/max are reported.
struct Compact {
    std::string name;
    std::vector<std::size_t> nodes;
};

/// Refuge nodes at distance ≥ margin_cells·h from ∂Ω and from the bump support.
Compact refuge_compact(const WeightField& weight, double margin_cells = 3.0);
/// Nodes within `radius` of the bump center; the radius must be below the support radius.
Compact support_compact(const WeightField& weight, double radius);

struct SweepRow {
    double parameter = 0.0;
    /// ‖Ψ‖_∞ with Ψ = f_κ(Θ).
    double sup_norm = std::numeric_limits<double>::quiet_NaN();
    /// min and max of Ψ over each compact, in the order of SweepReport::compacts.
    std::vector<double> compact_min;
    std::vector<double> compact_max;
    /// Distance to the reference solution of the sweep (Θ_λ or M_λ), NaN if none.
    double distance = std::numeric_limits<double>::quiet_NaN();
    /// min over nodes of Ψ - Ψ_previous; NaN on the first row.
    double min_step = std::numeric_limits<double>::quiet_NaN();
    /// ‖u‖_∞ of the κ = 0 control problem at the same λ, NaN if not run.
    double control = std::numeric_limits<double>::quiet_NaN();
    int newton_iterations = 0;
    bool solved = true;
    std::string note;
};

struct SweepCheck {
    std::string id;
    bool pass = false;
    double measured = std::numeric_limits<double>::quiet_NaN();
    double threshold = std::numeric_limits<double>::quiet_NaN();
    /// Reported but not part of the pass/fail decision.
    bool exploratory = false;
};

struct SweepReport {
    /// "lambda" or "kappa".
    std::string parameter;
    /// lambda-down, lambda-up, control, a, b or c.
    std::string regime;
    SweepMode mode = SweepMode::warm;
    /// The parameter held fixed: κ for λ sweeps, λ for κ sweeps.
    double fixed = 0.0;
    double p = 0.0;
    std::vector<std::string> compacts;
    std::vector<SweepRow> rows;
    std::vector<SweepCheck> checks;

    bool passed() const;
};

/// Recomputes the checks of a report from its rows alone.
std::vector<SweepCheck> evaluate_checks(const SweepReport& report);

/// One '#' line documenting the columns, a header row, then one row per parameter value.
void write_sweep_csv(std::ostream& out, const SweepReport& report);

/// λ sweep at fixed κ. A decreasing grid approaches λ₁ (sup-norm to zero); an increasing grid
/// tracks the compact minima as λ grows.
SweepReport lambda_limits(const WeightField& weight, const DualTransform& transform,
                          const std::vector<double>& lambda_grid, const std::vector<Compact>& compacts,
                          const SolverConfig& config, SweepMode mode = SweepMode::warm);

/// λ ↑ λ_{b,0} at κ > 0 next to the κ = 0 problem, whose solutions blow up there.
SweepReport refuge_blowup_control(const WeightField& weight, const DualTransform& transform,
                                  const std::vector<double>& lambda_grid, const SolverConfig& config,
                                  SweepMode mode = SweepMode::warm);

enum class KappaRegime { automatic, a, b, c };

std::string to_string(KappaRegime regime);
KappaRegime kappa_regime_from_string(const std::string& name);

struct KappaSweepOptions {
    KappaRegime regime = KappaRegime::automatic;
    SweepMode mode = SweepMode::warm;
    /// Radial mesh and schedule for the large solution of regime (c).
    LargeSolutionOptions large{};
};

/// κ ↓ 0 at fixed λ. Regime (a) compares with Θ_λ, (b) tracks refuge-compact minima and (c)
/// compares with the radial large solution M_λ on the first compact. `automatic` picks (a) for
/// λ < λ_{b,0} and (b) otherwise.
SweepReport kappa_to_zero(const WeightField& weight, double p, double lambda, const std::vector<double>& kappa_grid,
                          const std::vector<Compact>& compacts, const SolverConfig& config,
                          const KappaSweepOptions& options = {});

/// M_λ for -Δu = λu - b(r)u^p on the support disk, b(r) = b0(1 - r²/ρ²)².
LargeSolution support_large_solution(const WeightShape& shape, double p, double lambda,
                                     const LargeSolutionOptions& options = {});

}  // namespace quasilog
