"""Simulated coherent Ising machine (SimCIM), noisy mean-field annealing and
a two-quadrature CIM map for Ising / max-cut problems."""

from .analysis import (
    RunBatchResult,
    SpectralInfo,
    brute_force_optimum,
    build_histogram,
    eig_proximity,
    power_iteration,
)
from .cim_physics import CimPhysicsParams, CimState, cim_run, cim_run_batch, cim_step
from .estimators import NMFA, CIMPhysics, SimCIM
from .exceptions import ConfigError, DivergenceError, GSetParseError
from .graph import (
    GraphGenSpec,
    IsingProblem,
    batch_energy_cut,
    cut_value,
    energy,
    generate_random,
    parse_gset,
    read_gset,
    spins_from_amplitudes,
    write_gset,
)
from .nmfa import NmfaParams, nmfa_run, nmfa_run_batch, nmfa_step
from .simcim import PumpSchedule, SimCimParams, SolverState, activation, pump_value, run, run_batch, step

__version__ = "0.1.0"

__all__ = [
    "CIMPhysics",
    "CimPhysicsParams",
    "CimState",
    "ConfigError",
    "DivergenceError",
    "GSetParseError",
    "GraphGenSpec",
    "IsingProblem",
    "NMFA",
    "NmfaParams",
    "PumpSchedule",
    "RunBatchResult",
    "SimCIM",
    "SimCimParams",
    "SolverState",
    "SpectralInfo",
    "activation",
    "batch_energy_cut",
    "brute_force_optimum",
    "build_histogram",
    "cim_run",
    "cim_run_batch",
    "cim_step",
    "cut_value",
    "eig_proximity",
    "energy",
    "generate_random",
    "nmfa_run",
    "nmfa_run_batch",
    "nmfa_step",
    "parse_gset",
    "power_iteration",
    "pump_value",
    "read_gset",
    "run",
    "run_batch",
    "spins_from_amplitudes",
    "step",
    "write_gset",
]
