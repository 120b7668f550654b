# SPDX-License-Identifier: GPL-3.0-or-later
"""
Wavefunction-picture teleportation through a cubic-phase resource.

The three-mode state is never built here. Projecting mode 1 onto y1m and the
input onto yinm leaves mode 2 in

    psi'''(x) = (2pi)^(-1/2) psi''(x) int dx_in e^{-i x_in yinm} psi_in(x_in) psi_s(g(x - x_in) - y1m; r)

where psi'' is the resource after the displacement and cubic gate, so P is an
absolute density over (y1m, yinm). The feed-forward moves x by -y1m/g and y by
yinm - sqrt(y1m/(3 gamma g)).

Working in the output frame u = x - y1m/g, the resource factor depends only on
y1m and the kernel integral only on yinm, which lets a sweep evaluate every
lattice node with two matrix products.

Copyright (C) 2024 cubictele Contributors
Licensed under GPL-3.0-or-later
"""

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid
from tqdm import tqdm

from .errors import BranchError, DegenerateOutcomeError, DomainError, GridError
from .heisenberg import balanced_weight, mean_y1
from .params import GridSet, GridSpec, ProtocolParams, suggest_grids
from .qstate import (
    SQRT_2PI,
    Representation,
    WaveFunction1D,
    cubic_phase,
    displace,
    gaussian_convolve,
    input_wavefunction,
    squeezed_state,
    state_fidelity,
    to_momentum,
    to_position,
    trapezoid_weights,
)

logger = logging.getLogger(__name__)

UNDERFLOW_WEIGHT = 1e-300
FIDELITY_SLACK = 1e-6
HIGH_FIDELITY = 0.99
LOW_SUCCESS_MASS = 0.5


@dataclass(frozen=True)
class MeasurementOutcome:
    y1m: float
    yinm: float

    def __post_init__(self):
        if not (math.isfinite(self.y1m) and math.isfinite(self.yinm)):
            raise DomainError(f"outcome must be finite, got ({self.y1m}, {self.yinm})")


@dataclass(frozen=True, eq=False)
class ConditionedState:
    """Unnormalized mode-2 state after both homodyne projections."""

    psi: WaveFunction1D
    weight: float
    outcome: Optional[MeasurementOutcome] = None


@dataclass(frozen=True)
class LatticeSpec:
    """Outcome lattice: y1m and yinm axes as uniform ranges."""

    y1m_min: float
    y1m_max: float
    n_y1m: int
    yinm_min: float
    yinm_max: float
    n_yinm: int

    def __post_init__(self):
        for lo, hi, n, name in (
            (self.y1m_min, self.y1m_max, self.n_y1m, "y1m"),
            (self.yinm_min, self.yinm_max, self.n_yinm, "yinm"),
        ):
            if n < 1 or (n > 1 and not hi > lo):
                raise DomainError(f"{name} axis needs n >= 1 and max > min, got [{lo}, {hi}] x {n}")

    def axes(self) -> Tuple[np.ndarray, np.ndarray]:
        return (
            np.linspace(self.y1m_min, self.y1m_max, self.n_y1m),
            np.linspace(self.yinm_min, self.yinm_max, self.n_yinm),
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "y1m": {"min": self.y1m_min, "max": self.y1m_max, "n": self.n_y1m},
            "yinm": {"min": self.yinm_min, "max": self.yinm_max, "n": self.n_yinm},
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "LatticeSpec":
        try:
            y1, yin = data["y1m"], data["yinm"]
            return cls(
                float(y1["min"]), float(y1["max"]), int(y1["n"]),
                float(yin["min"]), float(yin["max"]), int(yin["n"]),
            )
        except KeyError as e:
            raise DomainError(f"lattice record is missing field {e}") from e
        except (TypeError, ValueError) as e:
            raise DomainError(f"malformed lattice {data!r}: {e}") from e


@dataclass
class SweepResult:
    """P and F over an outcome lattice; rows follow y1m, columns follow yinm."""

    y1m_axis: np.ndarray
    yinm_axis: np.ndarray
    P: np.ndarray
    F: np.ndarray
    total_probability: float
    postselect_stats: Dict[float, float] = field(default_factory=dict)

    def _mass(self, density: np.ndarray) -> float:
        return _integrate_2d(density, self.y1m_axis, self.yinm_axis)

    def high_fidelity_mass(self, threshold: float = HIGH_FIDELITY) -> float:
        """Probability mass of outcomes whose fidelity exceeds ``threshold``."""
        with np.errstate(invalid="ignore"):
            mask = np.nan_to_num(self.F, nan=0.0) > threshold
        return self._mass(np.where(mask, self.P, 0.0))

    def modal_index(self) -> Tuple[int, int]:
        i, j = np.unravel_index(int(np.argmax(self.P)), self.P.shape)
        return int(i), int(j)

    def summary(
        self,
        fidelity_threshold: float = HIGH_FIDELITY,
        low_success_mass: float = LOW_SUCCESS_MASS,
    ) -> Dict[str, Any]:
        i, j = self.modal_index()
        f_mode = self.F[i, j]
        hf_mass = self.high_fidelity_mass(fidelity_threshold)
        return {
            "modal_outcome": {"y1m": float(self.y1m_axis[i]), "yinm": float(self.yinm_axis[j])},
            "P_at_mode": float(self.P[i, j]),
            "F_at_mode": None if np.isnan(f_mode) else float(f_mode),
            "total_probability": self.total_probability,
            "fidelity_threshold": fidelity_threshold,
            "high_fidelity_mass": hf_mass,
            "low_success": hf_mass < low_success_mass,
            "postselect_stats": {str(k): v for k, v in self.postselect_stats.items()},
        }


def _integrate_2d(density: np.ndarray, y1m_axis: np.ndarray, yinm_axis: np.ndarray) -> float:
    inner = trapezoid(density, yinm_axis, axis=1) if len(yinm_axis) > 1 else density[:, 0]
    return float(trapezoid(inner, y1m_axis)) if len(y1m_axis) > 1 else float(inner[0])


def postselection_mass(
    P: np.ndarray,
    y1m_axis: np.ndarray,
    yinm_axis: np.ndarray,
    threshold: float,
) -> float:
    """
    Swept probability mass with y1m below ``threshold``.

    Integrates P over the lattice rows below the threshold, interpolating inside
    the cell that contains it. Thresholds outside the y1m axis give 0 or the total.
    """
    if len(y1m_axis) < 2:
        return float("nan")
    marginal = trapezoid(P, yinm_axis, axis=1) if len(yinm_axis) > 1 else P[:, 0]
    cumulative = cumulative_trapezoid(marginal, y1m_axis, initial=0.0)
    return float(np.interp(threshold, y1m_axis, cumulative))


def default_weight(params: ProtocolParams) -> ProtocolParams:
    """Return params with the balanced CZ weight g = 6 gamma alpha e^{-r}."""
    return params.with_weight(balanced_weight(params.gamma, params.alpha, params.r))


def _require_teleport(params: ProtocolParams) -> None:
    if not params.teleport_mode:
        raise DomainError(f"teleportation needs g1 = -g2, got g1={params.g1}, g2={params.g2}")
    if params.g == 0:
        raise DomainError("teleportation needs a nonzero CZ weight")


def resource_momentum(params: ProtocolParams, grid: GridSpec) -> WaveFunction1D:
    """
    Mode-2 resource on the momentum grid ``grid``, after the displacement and cubic gate.

    Built in position rep on the reciprocal grid as psi_s(x; r), displaced in y
    by alpha, taken to ``grid`` and passed through the cubic gate.
    """
    psi = squeezed_state(grid.reciprocal(), params.r)
    psi = displace(psi, "y", params.alpha)
    psi = to_momentum(psi, target=grid)
    return cubic_phase(psi, params.gamma)


def resource_state(
    params: ProtocolParams,
    grid: GridSpec,
    target: Optional[GridSpec] = None,
) -> WaveFunction1D:
    """Position-representation resource psi''(x); ``target`` picks the x grid."""
    return to_position(resource_momentum(params, grid), target)


def default_lattice(
    params: ProtocolParams,
    n_y1m: int = 64,
    n_yinm: int = 64,
) -> LatticeSpec:
    """
    Outcome lattice covering the bulk of P.

    y1m spans mu +- 4 sigma, with the end nearest zero widened to 4 noise widths
    past the photocurrent's zero-signal offset so the low-y1m tail is swept too.
    yinm spans +-5 sigma_in around the input's mean y. Means and spreads of both
    photocurrents are their exact Heisenberg-picture moments.
    """
    _require_teleport(params)
    g, gamma, alpha, r = params.g, params.gamma, params.alpha, params.r
    mean_x, mean_y, var_x, var_y = params.input_state.moments()
    var_res_y = math.exp(2 * r) / 2
    mu = mean_y1(g, gamma, alpha, var_res_y) - g * mean_x
    var_x2 = math.exp(-2 * r) / 2 + 9 * gamma**2 * (4 * alpha**2 * var_res_y + 2 * var_res_y**2)
    sigma = math.sqrt(math.exp(-2 * r) / 2 + g * g * (var_x2 + var_x))
    sigma_in = math.sqrt(var_y + g * g * math.exp(2 * r) / 2)
    # y1m with the cubic-gate signal removed: y_s1 + g x_s2 - g x_in
    offset = -g * mean_x
    noise = math.sqrt(math.exp(-2 * r) / 2 + g * g * (math.exp(-2 * r) / 2 + var_x))
    if g > 0:
        y1_lo, y1_hi = max(mu - 4 * sigma, offset - 4 * noise), mu + 4 * sigma
    else:
        y1_lo, y1_hi = mu - 4 * sigma, min(mu + 4 * sigma, offset + 4 * noise)
    return LatticeSpec(y1_lo, y1_hi, n_y1m, mean_y - 5 * sigma_in, mean_y + 5 * sigma_in, n_yinm)


class TeleportEngine:
    """
    Evaluates conditioned states, outputs and fidelities for one parameter set.

    The resource is built once on the momentum grid and shared read-only by
    every outcome and worker.
    """

    def __init__(self, params: ProtocolParams, grids: Optional[GridSet] = None):
        _require_teleport(params)
        self.params = params
        self.grids = grids or suggest_grids(params)
        self.psi_in = input_wavefunction(params.input_state, self.grids.input)
        self.resource = resource_momentum(params, self.grids.resource)
        logger.debug("teleport engine ready: g=%.6g, grids=%s", params.g, self.grids)

    @property
    def g(self) -> float:
        return self.params.g

    def output_frame(self, y1m: float) -> GridSpec:
        """Lab-frame x grid that the feed-forward maps onto the input grid."""
        return self.grids.input.shifted(y1m / self.g)

    def resource_on(self, window: GridSpec) -> np.ndarray:
        return to_position(self.resource, target=window).amps

    def kernel_integral(self, outcome: MeasurementOutcome, window: GridSpec) -> np.ndarray:
        """int dx_in e^{-i x_in yinm} psi_in(x_in) psi_s(g(x - x_in) - y1m; r) on ``window``."""
        frame = self.output_frame(outcome.y1m)
        if window.matches(frame):
            # same nodes as the input grid up to a shift, so the spectral path applies
            offset = window.min - self.grids.input.min
            phi = gaussian_convolve(
                self.psi_in, self.g, self.params.r,
                shift=outcome.y1m - self.g * offset, phase=outcome.yinm,
            )
            return phi.amps
        phi = gaussian_convolve(
            self.psi_in, self.g, self.params.r,
            shift=outcome.y1m, phase=outcome.yinm, target=window,
        )
        return phi.amps

    def conditioned_state(
        self,
        outcome: MeasurementOutcome,
        window: Optional[GridSpec] = None,
    ) -> ConditionedState:
        """Unnormalized psi''' on ``window`` (default: the output-frame grid)."""
        window = window or self.output_frame(outcome.y1m)
        amps = self.resource_on(window) * self.kernel_integral(outcome, window) / SQRT_2PI
        psi = WaveFunction1D(window, amps, Representation.POSITION, normalized=False)
        return ConditionedState(psi=psi, weight=psi.norm(), outcome=outcome)

    def _feed_forward_root(self, y1m: float) -> float:
        ratio = y1m / (3.0 * self.params.gamma * self.g)
        if not ratio > 0:
            raise BranchError(f"feed-forward needs y1m/g > 0, got y1m={y1m}, g={self.g}")
        return math.sqrt(ratio)

    def output_state(self, outcome: MeasurementOutcome) -> WaveFunction1D:
        """Normalized mode-2 state after the feed-forward, on the input grid."""
        root = self._feed_forward_root(outcome.y1m)
        conditioned = self.conditioned_state(outcome)
        if conditioned.weight < UNDERFLOW_WEIGHT:
            raise DegenerateOutcomeError(
                f"outcome ({outcome.y1m:g}, {outcome.yinm:g}) has weight {conditioned.weight:.3g}"
            )
        psi = conditioned.psi.normalize()
        psi = displace(psi, "y", outcome.yinm - root)
        psi = displace(psi, "x", -outcome.y1m / self.g, move_grid=True)
        return psi

    def fidelity(self, outcome: MeasurementOutcome) -> float:
        return state_fidelity(self.psi_in, self.output_state(outcome))

    def sweep(
        self,
        y1m_axis: Sequence[float],
        yinm_axis: Sequence[float],
        thresholds: Iterable[float] = (),
        jobs: Optional[int] = None,
        progress: bool = False,
    ) -> SweepResult:
        """
        Evaluate P and F on every node of the outcome lattice.

        Nodes with y1m/g <= 0 or an underflowing weight get F = NaN.
        """
        y1m_axis = np.asarray(y1m_axis, dtype=float)
        yinm_axis = np.asarray(yinm_axis, dtype=float)
        for name, axis in (("y1m", y1m_axis), ("yinm", yinm_axis)):
            if axis.ndim != 1 or axis.size == 0 or np.any(np.diff(axis) <= 0):
                raise DomainError(f"{name} axis must be strictly increasing")
            if not np.all(np.isfinite(axis)):
                raise DomainError(f"{name} axis must be finite")

        grid = self.grids.input
        u = grid.points()
        weights = trapezoid_weights(grid)
        g, gamma = self.g, self.params.gamma

        # yinm factor on the input grid, already carrying e^{i yinm u}
        phi = np.empty((yinm_axis.size, grid.n), dtype=complex)
        for j, yinm in enumerate(yinm_axis):
            phi[j] = gaussian_convolve(self.psi_in, g, self.params.r, phase=yinm).amps
        twisted = phi * np.exp(1j * np.outer(yinm_axis, u))

        def row(y1m: float) -> np.ndarray:
            return self.resource_on(grid.shifted(y1m / g))

        workers = jobs or os.cpu_count() or 1
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(
                tqdm(
                    pool.map(row, y1m_axis),
                    total=y1m_axis.size,
                    desc="Sweeping y1m",
                    unit="row",
                    disable=not progress,
                )
            )
        resource = np.array(rows)

        P = ((np.abs(resource) ** 2) * weights) @ (np.abs(phi) ** 2).T / (2.0 * math.pi)

        valid = y1m_axis / g > 0
        roots = np.sqrt(np.where(valid, y1m_axis / (3.0 * gamma * g), 0.0))
        shifts = y1m_axis / g
        left = weights * np.conj(self.psi_in.amps) * resource
        left = left * np.exp(-1j * roots[:, None] * (u[None, :] + shifts[:, None]))
        amplitude = left @ twisted.T

        with np.errstate(divide="ignore", invalid="ignore"):
            F = np.abs(amplitude) ** 2 / (2.0 * math.pi * P)
        F[(P < UNDERFLOW_WEIGHT) | ~valid[:, None]] = np.nan
        checked = np.where(P > 1e-200, F, np.nan)
        worst = np.nanmax(checked) if np.any(np.isfinite(checked)) else 0.0
        if worst > 1.0 + FIDELITY_SLACK:
            raise GridError(f"fidelity {worst:.8f} exceeds 1: the grids are too coarse for these outcomes")
        F = np.clip(F, 0.0, 1.0)

        total = _integrate_2d(P, y1m_axis, yinm_axis)
        stats = {float(t): postselection_mass(P, y1m_axis, yinm_axis, float(t)) for t in thresholds}
        logger.debug("sweep %dx%d: total probability %.6f", y1m_axis.size, yinm_axis.size, total)
        return SweepResult(y1m_axis, yinm_axis, P, F, total, stats)


def _engine(params: ProtocolParams, grids: Optional[GridSet]) -> TeleportEngine:
    return TeleportEngine(params, grids)


def conditioned_state(
    params: ProtocolParams,
    outcome: MeasurementOutcome,
    grids: Optional[GridSet] = None,
    window: Optional[GridSpec] = None,
) -> ConditionedState:
    return _engine(params, grids).conditioned_state(outcome, window)


def output_state(
    params: ProtocolParams,
    outcome: MeasurementOutcome,
    grids: Optional[GridSet] = None,
) -> WaveFunction1D:
    return _engine(params, grids).output_state(outcome)


def fidelity(
    params: ProtocolParams,
    outcome: MeasurementOutcome,
    grids: Optional[GridSet] = None,
) -> float:
    return _engine(params, grids).fidelity(outcome)


def sweep(
    params: ProtocolParams,
    lattice: Optional[LatticeSpec] = None,
    grids: Optional[GridSet] = None,
    thresholds: Iterable[float] = (),
    jobs: Optional[int] = None,
    progress: bool = False,
) -> SweepResult:
    lattice = lattice or default_lattice(params)
    y1m_axis, yinm_axis = lattice.axes()
    return _engine(params, grids).sweep(y1m_axis, yinm_axis, thresholds, jobs, progress)
