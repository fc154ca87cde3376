"""Euler-Riesz solvers, Riesz convolutions and relative-energy diagnostics."""

from ._rflab import (
    ConfigError,
    GridMismatch,
    KernelTable,
    ModelParams,
    ParameterError,
    PeriodicGrid,
    SolverAbort,
    convolve,
    grad_convolve,
    gronwall_fit,
    h_energy,
    h_relative,
    hls_check,
    p_relative,
    pressure,
    relative_energy,
    riesz_potential,
    run_euler,
    run_experiment,
    run_gflow,
)

__all__ = [
    "ConfigError",
    "GridMismatch",
    "KernelTable",
    "ModelParams",
    "ParameterError",
    "PeriodicGrid",
    "SolverAbort",
    "convolve",
    "grad_convolve",
    "gronwall_fit",
    "h_energy",
    "h_relative",
    "hls_check",
    "p_relative",
    "pressure",
    "relative_energy",
    "riesz_potential",
    "run_euler",
    "run_experiment",
    "run_gflow",
]
