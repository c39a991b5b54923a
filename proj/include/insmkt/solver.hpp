#pragma once

// Free-boundary solver for the market-to-book ratio u(M).
//
// u solves a second-order ODE on [M_low, M_high] with four boundary
// conditions: u(M_low) = 1 + gamma, u(M_high) = 1, u'(M_low) = u'(M_high) = 0.
// We shoot on M_low: starting from (1 + gamma, 0) the trajectory is integrated
// forward until u' returns to zero from below, which defines M_high, and M_low
// is adjusted until u(M_high) = 1.

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "insmkt/model.hpp"

namespace insmkt {

struct SolverConfig {
    double boundary_tol = 1e-8;
    double interior_tol = 1e-6;
    std::size_t grid_size = 2001;
    std::size_t max_iters = 200;
    std::pair<double, double> bracket{1e-3, 1.0};
    /// Trajectories that pass this capacity without forming a payout barrier
    /// are classified by their terminal deviation u - 1.
    double capacity_cap = 100.0;
    /// Event location accuracy for M_high.
    double event_tol = 1e-12;
    double ode_rtol = 1e-11;
    double ode_atol = 1e-13;
    /// Times the uniform output grid may be doubled when the three-point
    /// residual exceeds interior_tol. grid_size is therefore a minimum.
    std::size_t max_refinements = 4;

    void validate() const;
    bool operator==(const SolverConfig&) const = default;
};

struct SolverDiagnostics {
    double u_low_residual = 0.0;    // |u(M_low) - (1 + gamma)|
    double u_high_residual = 0.0;   // |u(M_high) - 1|
    double du_low_residual = 0.0;   // |u'(M_low)|
    double du_high_residual = 0.0;  // |u'(M_high)|
    double max_ode_residual = 0.0;  // interior, central differences
    std::size_t shooting_iterations = 0;
    std::size_t ode_steps = 0;
    std::size_t grid_refinements = 0;
    // Smallest worst-case expected profits eta (p + hI) and sigma (q + hS).
    // Negative values are reported, not rejected.
    double min_underwriting_profit = 0.0;
    double min_investment_profit = 0.0;

    bool operator==(const SolverDiagnostics&) const = default;
};

struct EquilibriumSolution {
    MarketParams params;
    SolverConfig config;
    double M_low = 0.0;
    double M_high = 0.0;
    std::vector<double> M;
    std::vector<double> u;
    std::vector<double> du;
    std::vector<double> p;
    std::vector<double> D;
    std::vector<double> Y;
    std::vector<double> hI;
    std::vector<double> hS;
    SolverDiagnostics diagnostics;

    std::size_t size() const { return M.size(); }
    LocalState state(std::size_t i) const { return {M[i], u[i], du[i]}; }

    bool operator==(const EquilibriumSolution&) const = default;
};

/// u'' solved from the market-to-book ODE at one state. Throws
/// VanishingDiffusion when Sigma^2 is (numerically) zero.
double u_curvature(const LocalState& s, const MarketParams& params);

/// Residual of the market-to-book ODE at one state for a supplied u''.
double ode_residual(const LocalState& s, double d2u, const MarketParams& params);

/// Interior residuals of the solved u with u'' from three-point central
/// differences on the solution grid. Entry i corresponds to grid point i + 1.
std::vector<double> interior_ode_residuals(const EquilibriumSolution& sol);

enum class ShotOutcome {
    payout_barrier,      // u' returned to zero from below
    fell_below_payout,   // u dropped below 1 while still decreasing
    rose_above_financing,// u' became positive before ever turning negative
    capacity_cap,        // reached the capacity cap
    breakdown,           // the ODE right-hand side became singular
};

const char* to_string(ShotOutcome o);

struct ShotResult {
    double M_low = 0.0;
    double M_end = 0.0;      // M_high when outcome == payout_barrier
    double u_end = 0.0;
    double objective = 0.0;  // u_end - 1
    ShotOutcome outcome = ShotOutcome::breakdown;
    std::size_t steps = 0;
};

/// Integrates one trial trajectory from (M_low, 1 + gamma, 0).
ShotResult shoot(const MarketParams& params, double M_low, const SolverConfig& cfg);

/// Solves the free-boundary problem and assembles the equilibrium on a
/// uniform grid. Throws NoBracket or NoEquilibrium (naming the failing
/// invariant) when no valid equilibrium is found.
EquilibriumSolution solve_equilibrium(const MarketParams& params, const SolverConfig& cfg = {});

/// Populates p, D, Y, hI, hS from (M, u, du).
void fill_pointwise(EquilibriumSolution& sol);

struct CheckResult {
    std::string name;
    bool passed = true;
    double margin = 0.0;          // signed; negative when violated
    std::size_t worst_index = 0;  // grid index of the worst offender
    double worst_M = 0.0;
    /// Advisory checks are reported but never make the solver reject a solution.
    bool advisory = false;
};

struct ValidationReport {
    std::vector<CheckResult> checks;

    bool passed() const;
    /// First failing check, or nullptr.
    const CheckResult* first_failure() const;
    /// First failing non-advisory check, or nullptr.
    const CheckResult* first_blocking_failure() const;
    const CheckResult* find(const std::string& name) const;
};

ValidationReport check_assumptions(const EquilibriumSolution& sol, const MarketParams& params);

struct SweepRow {
    double value = 0.0;
    double M_low = 0.0;
    double M_high = 0.0;
    double range = 0.0;
    std::string status;     // "ok", "NoEquilibrium", "InvalidParameters"
    std::string invariant;  // failing invariant when status != "ok"
};

const std::vector<std::string>& sweep_axes();

/// One solve per value with every other parameter fixed at `base`. Failures
/// are recorded, never thrown. Brackets are warm-started from the previous
/// successful row.
std::vector<SweepRow> sweep(const MarketParams& base, const std::string& axis,
                            const std::vector<double>& values, const SolverConfig& cfg = {});

}  // namespace insmkt
