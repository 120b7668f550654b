# SPDX-License-Identifier: GPL-3.0-or-later
"""
cubictele Core Modules

Parameter records, the Heisenberg error budget, the grid wavefunction engine,
the teleportation engine, the three-mode reference and the exporters.

Copyright (C) 2024 cubictele Contributors
Licensed under GPL-3.0-or-later
"""

__version__ = "1.0.0"
__license__ = "GPL-3.0-or-later"

# Import main functionality for easy access
from .errors import (
    BranchError,
    CubicTeleError,
    DegenerateOutcomeError,
    DomainError,
    GridError,
    ValidationFailure,
)
from .heisenberg import (
    ErrorBudget,
    McReport,
    balanced_weight,
    crossover_alpha,
    error_budget,
    error_curve,
    error_x,
    error_y_estimate,
    error_y_exact,
    mean_y1,
    monte_carlo,
    original_scheme_error,
    pulse_energy,
)
from .params import (
    CONVENTIONS,
    Conventions,
    EnergyParams,
    GridSet,
    GridSpec,
    InputState,
    ProtocolParams,
    squeezing_db_to_r,
    suggest_grids,
    teleport_params,
    validate_grid,
)
from .qstate import (
    Representation,
    WaveFunction1D,
    cubic_phase,
    displace,
    gaussian_convolve,
    input_wavefunction,
    overlap,
    quadrature_moments,
    squeezed_state,
    to_momentum,
    to_position,
)
from .teleport import (
    ConditionedState,
    LatticeSpec,
    MeasurementOutcome,
    SweepResult,
    TeleportEngine,
    conditioned_state,
    default_lattice,
    default_weight,
    fidelity,
    output_state,
    resource_state,
    sweep,
)

__all__ = [
    "BranchError",
    "CONVENTIONS",
    "ConditionedState",
    "Conventions",
    "CubicTeleError",
    "DegenerateOutcomeError",
    "DomainError",
    "EnergyParams",
    "ErrorBudget",
    "GridError",
    "GridSet",
    "GridSpec",
    "InputState",
    "LatticeSpec",
    "McReport",
    "MeasurementOutcome",
    "ProtocolParams",
    "Representation",
    "SweepResult",
    "TeleportEngine",
    "ValidationFailure",
    "WaveFunction1D",
    "balanced_weight",
    "conditioned_state",
    "crossover_alpha",
    "cubic_phase",
    "default_lattice",
    "default_weight",
    "displace",
    "error_budget",
    "error_curve",
    "error_x",
    "error_y_estimate",
    "error_y_exact",
    "fidelity",
    "gaussian_convolve",
    "input_wavefunction",
    "mean_y1",
    "monte_carlo",
    "original_scheme_error",
    "output_state",
    "overlap",
    "pulse_energy",
    "quadrature_moments",
    "resource_state",
    "squeezed_state",
    "squeezing_db_to_r",
    "suggest_grids",
    "sweep",
    "teleport_params",
    "to_momentum",
    "to_position",
    "validate_grid",
]
