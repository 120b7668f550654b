# SPDX-License-Identifier: GPL-3.0-or-later
"""
Brute-force three-mode reference for the teleportation engine.

Builds psi_in (x) psi_s(x1; -r) (x) psi''(x) on a tensor grid, applies both CZ
gates as explicit phases e^{i x1 (g1 x + g2 x_in)} and contracts modes in and 1
against the homodyne kernels (2pi)^(-1/2) e^{-i q y_m}. Only coarse grids fit
in memory, so the reference runs at reduced squeezing.

Copyright (C) 2024 cubictele Contributors
Licensed under GPL-3.0-or-later
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np
from tqdm import tqdm

from .errors import BranchError, DegenerateOutcomeError, DomainError, GridError
from .heisenberg import balanced_weight, mean_y1
from .params import GridSet, GridSpec, InputState, ProtocolParams, suggest_grids, teleport_params
from .qstate import (
    SQRT_2PI,
    Representation,
    WaveFunction1D,
    displace,
    input_wavefunction,
    squeezed_state,
    state_fidelity,
    trapezoid_weights,
)
from .teleport import (
    UNDERFLOW_WEIGHT,
    ConditionedState,
    MeasurementOutcome,
    TeleportEngine,
    resource_state,
)

logger = logging.getLogger(__name__)

MAX_TENSOR_POINTS = 1 << 27

VALIDATION_R = 0.8
VALIDATION_ALPHA = 10.0
VALIDATION_GAMMA = 0.1

TOLERANCES = {"fidelity_abs": 1e-3, "weight_rel": 1e-2, "state_rel_l2": 1e-3}


@dataclass(frozen=True)
class OracleGrids:
    """Position grids of the input, mode 1 and mode 2, plus the resource momentum grid."""

    input: GridSpec
    mode1: GridSpec
    mode2: GridSpec
    resource: GridSpec

    @property
    def points(self) -> int:
        return self.input.n * self.mode1.n * self.mode2.n

    def pipeline_grids(self) -> GridSet:
        return GridSet(self.input, self.resource)

    def to_dict(self) -> Dict[str, Dict]:
        return {name: getattr(self, name).to_dict() for name in ("input", "mode1", "mode2", "resource")}


@dataclass(frozen=True, eq=False)
class WaveFunction3D:
    """Amplitudes on the (input, mode 1, mode 2) tensor grid, input slowest."""

    grids: OracleGrids
    amps: np.ndarray

    def norm(self) -> float:
        h = self.grids.input.spacing * self.grids.mode1.spacing * self.grids.mode2.spacing
        return float(np.sum(np.abs(self.amps) ** 2) * h)


def validation_params(input_state: Optional[InputState] = None) -> ProtocolParams:
    """Reduced-squeezing point at which the brute-force reference is affordable."""
    g = balanced_weight(VALIDATION_GAMMA, VALIDATION_ALPHA, VALIDATION_R)
    return teleport_params(VALIDATION_R, VALIDATION_GAMMA, VALIDATION_ALPHA, g, input_state)


def oracle_lattice(params: ProtocolParams, n: int = 5, spread: float = 0.3) -> Tuple[np.ndarray, np.ndarray]:
    """
    Small outcome lattice around the photocurrent mean.

    y1m spans mean +- ``spread`` standard deviations, yinm spans [-2, 2].
    """
    g, gamma, alpha, r = params.g, params.gamma, params.alpha, params.r
    var_res_y = math.exp(2 * r) / 2
    mu = mean_y1(g, gamma, alpha, var_res_y)
    sigma = abs(g) * 6 * gamma * abs(alpha) * math.exp(r) / math.sqrt(2)
    return np.linspace(mu - spread * sigma, mu + spread * sigma, n), np.linspace(-2.0, 2.0, n)


def _count(span: float, spacing: float) -> int:
    return max(16, int(math.ceil(span / spacing)) + 1)


def oracle_grids(
    params: ProtocolParams,
    y1m_axis: np.ndarray,
    yinm_axis: np.ndarray,
    input_half_width: float = 6.0,
) -> OracleGrids:
    """
    Coarse grids sized for a given outcome lattice.

    Mode 2 covers every output frame y1m/g +- 6 plus the input half-width; mode 1
    is resolved up to the fastest momentum its homodyne kernel samples; the input
    resolves both the projection kernel width and the yinm phase.
    """
    g, r, gamma = params.g, params.r, params.gamma
    shifts = np.asarray(y1m_axis) / g
    yin_max = float(np.max(np.abs(yinm_axis)))

    kernel_width = math.exp(-r) / abs(g)
    h_in = min(kernel_width / 1.5, math.pi / (2 * (yin_max + 6.0)))
    n_in = 1 << math.ceil(math.log2(2 * input_half_width / h_in + 1))
    grid_in = GridSpec(-input_half_width, input_half_width, n_in)

    x2_lo, x2_hi = float(shifts.min()) - input_half_width, float(shifts.max()) + input_half_width
    freq2 = math.sqrt(max(abs(x2_lo), abs(x2_hi)) / (3 * gamma)) + yin_max + 6.0
    mode2 = GridSpec(x2_lo, x2_hi, _count(x2_hi - x2_lo, math.pi / (2 * freq2)))

    half1 = 6.5 * math.exp(r)
    dx_lo = g * (x2_lo - grid_in.max)
    dx_hi = g * (x2_hi - grid_in.min)
    lo, hi = sorted((dx_lo, dx_hi))
    k_max = max(abs(hi - float(np.min(y1m_axis))), abs(float(np.max(y1m_axis)) - lo))
    k_max += 8 * math.exp(-r)
    mode1 = GridSpec(-half1, half1, _count(2 * half1, 2 * math.pi / k_max))

    resource = suggest_grids(params).resource
    grids = OracleGrids(grid_in, mode1, mode2, resource)
    logger.debug("oracle grids %s (%d points)", grids, grids.points)
    return grids


def build_entangled(params: ProtocolParams, grids: OracleGrids) -> WaveFunction3D:
    """Product state of the three modes with both CZ phases applied."""
    if grids.points > MAX_TENSOR_POINTS:
        raise GridError(f"three-mode grid of {grids.points} points exceeds the bound of {MAX_TENSOR_POINTS}")
    psi_in = input_wavefunction(params.input_state, grids.input).amps
    psi_1 = squeezed_state(grids.mode1, -params.r).amps
    psi_2 = resource_state(params, grids.resource, target=grids.mode2).amps

    x_in, x1, x2 = grids.input.points(), grids.mode1.points(), grids.mode2.points()
    pair = np.outer(psi_1, psi_2)
    cz1 = np.exp(1j * params.g1 * np.outer(x1, x2))
    amps = np.empty((x_in.size, x1.size, x2.size), dtype=complex)
    for i, xi in enumerate(x_in):
        cz2 = np.exp(1j * params.g2 * xi * x1)
        amps[i] = psi_in[i] * pair * cz1 * cz2[:, None]
    return WaveFunction3D(grids, amps)


def _homodyne_kernel(grid: GridSpec, ym: float) -> np.ndarray:
    return trapezoid_weights(grid) * np.exp(-1j * grid.points() * ym) / SQRT_2PI


def project_homodyne(psi3: WaveFunction3D, outcome: MeasurementOutcome) -> ConditionedState:
    """Project the input and mode 1 onto y-eigenstates; returns the mode-2 state."""
    grids = psi3.grids
    k1 = _homodyne_kernel(grids.mode1, outcome.y1m)
    k_in = _homodyne_kernel(grids.input, outcome.yinm)
    partial = np.einsum("ijk,j->ik", psi3.amps, k1)
    amps = k_in @ partial
    psi = WaveFunction1D(grids.mode2, amps, Representation.POSITION, normalized=False)
    return ConditionedState(psi=psi, weight=psi.norm(), outcome=outcome)


def oracle_fidelity(
    params: ProtocolParams,
    outcome: MeasurementOutcome,
    grids: OracleGrids,
    psi3: Optional[WaveFunction3D] = None,
) -> float:
    """End-to-end fidelity through the brute-force projection and the same feed-forward."""
    if not params.teleport_mode:
        raise DomainError("oracle fidelity needs teleport-mode parameters")
    ratio = outcome.y1m / (3 * params.gamma * params.g)
    if not ratio > 0:
        raise BranchError(f"feed-forward needs y1m/g > 0, got y1m={outcome.y1m}")
    conditioned = project_homodyne(psi3 or build_entangled(params, grids), outcome)
    if conditioned.weight < UNDERFLOW_WEIGHT:
        raise DegenerateOutcomeError(f"oracle weight {conditioned.weight:.3g} underflows")
    psi = conditioned.psi.normalize()
    psi = displace(psi, "y", outcome.yinm - math.sqrt(ratio))
    psi = displace(psi, "x", -outcome.y1m / params.g, move_grid=True)
    reference = input_wavefunction(params.input_state, psi.grid)
    return state_fidelity(reference, psi)


@dataclass
class OracleComparison:
    """Node-by-node agreement between the engine and the brute-force reference."""

    params: ProtocolParams
    grids: OracleGrids
    nodes: List[Dict[str, float]]

    def worst(self, key: str) -> float:
        return max(node[key] for node in self.nodes)

    @property
    def passed(self) -> bool:
        return all(self.worst(key) < tol for key, tol in TOLERANCES.items())

    def to_dict(self) -> Dict:
        return {
            "params": self.params.to_dict(),
            "grids": self.grids.to_dict(),
            "tolerances": dict(TOLERANCES),
            "worst": {key: self.worst(key) for key in TOLERANCES},
            "passed": self.passed,
            "nodes": self.nodes,
        }


def compare_with_engine(
    params: Optional[ProtocolParams] = None,
    n: int = 5,
    progress: bool = False,
) -> OracleComparison:
    """Compare conditioned states, weights and fidelities on the oracle lattice."""
    params = params or validation_params()
    y1m_axis, yinm_axis = oracle_lattice(params, n)
    grids = oracle_grids(params, y1m_axis, yinm_axis)
    engine = TeleportEngine(params, grids.pipeline_grids())
    psi3 = build_entangled(params, grids)

    nodes = []
    outcomes = [MeasurementOutcome(float(a), float(b)) for a in y1m_axis for b in yinm_axis]
    for outcome in tqdm(outcomes, desc="Oracle lattice", unit="node", disable=not progress):
        reference = project_homodyne(psi3, outcome)
        pipeline = engine.conditioned_state(outcome, window=grids.mode2)
        diff = np.sqrt(np.sum(np.abs(reference.psi.amps - pipeline.psi.amps) ** 2))
        scale = np.sqrt(np.sum(np.abs(reference.psi.amps) ** 2))
        f_oracle = oracle_fidelity(params, outcome, grids, psi3)
        f_engine = engine.fidelity(outcome)
        nodes.append(
            {
                "y1m": outcome.y1m,
                "yinm": outcome.yinm,
                "weight_oracle": reference.weight,
                "weight_engine": pipeline.weight,
                "F_oracle": f_oracle,
                "F_engine": f_engine,
                "fidelity_abs": abs(f_oracle - f_engine),
                "weight_rel": abs(pipeline.weight / reference.weight - 1.0),
                "state_rel_l2": float(diff / scale),
            }
        )
    return OracleComparison(params, grids, nodes)
