"""Finite difference solver for the 1D Zakharov system that stays accurate
uniformly as the acoustic speed parameter ``epsilon`` goes to zero."""

from .errors import BlowUp, ConfigurationError, SolverFailure, StepFailure
from .grid import Grid1D, norm_h1_semi, norm_l2
from .harness import (
    ErrorRecord, ReferencePolicy, SweepSpec, emit_csv, emit_table, limit_consistency_check,
    reference_solution, run_sweep,
)
from .limit import solve_nlse_op, soliton_benchmark, strang_step
from .oscillatory import AveragedPotential, averaged_potential, decompose_waves, evaluate_G
from .problem import PhysicalCase, builtin_profiles, make_case
from .scheme import StepConfig, initial_state, recover_N, run, step

__all__ = [
    "BlowUp", "ConfigurationError", "SolverFailure", "StepFailure",
    "Grid1D", "norm_h1_semi", "norm_l2",
    "ErrorRecord", "ReferencePolicy", "SweepSpec", "emit_csv", "emit_table",
    "limit_consistency_check", "reference_solution", "run_sweep",
    "solve_nlse_op", "soliton_benchmark", "strang_step",
    "AveragedPotential", "averaged_potential", "decompose_waves", "evaluate_G",
    "PhysicalCase", "builtin_profiles", "make_case",
    "StepConfig", "initial_state", "recover_N", "run", "step",
]
