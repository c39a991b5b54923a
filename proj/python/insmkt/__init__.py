"""Robust insurance-market equilibrium with financial investment."""

from ._insmkt import (
    ConfigError,
    EquilibriumSolution,
    Error,
    InvalidParameters,
    MarketParams,
    NoEquilibrium,
    SolverConfig,
    cycle_durations,
    read_solution,
    run_acceptance,
    simulate_path,
    solve_equilibrium,
    stationary_density,
    sweep,
    write_solution,
)

__all__ = [
    "ConfigError",
    "EquilibriumSolution",
    "Error",
    "InvalidParameters",
    "MarketParams",
    "NoEquilibrium",
    "SolverConfig",
    "cycle_durations",
    "read_solution",
    "run_acceptance",
    "simulate_path",
    "solve_equilibrium",
    "stationary_density",
    "sweep",
    "write_solution",
]
