# SPDX-License-Identifier: GPL-3.0-or-later
"""
Physical conventions and shared parameter records for cubictele.

Quadratures obey [x, y] = i, so the vacuum variance of either quadrature is
1/2, and the position/momentum kernel is |y> = (2pi)^(-1/2) int dx e^{ixy} |x>.
The records defined here are immutable values and serialize to JSON with their
field names unchanged.

Copyright (C) 2024 cubictele Contributors
Licensed under GPL-3.0-or-later
"""

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from scipy.integrate import trapezoid

from .errors import DomainError, GridError

logger = logging.getLogger(__name__)

VACUUM_VARIANCE = 0.5
FOURIER_SIGN = 1

INPUT_KINDS = ("vacuum", "squeezed", "displaced", "custom")


@dataclass(frozen=True)
class Conventions:
    """Fixed physical conventions shared by every module."""

    vacuum_quadrature_variance: float = VACUUM_VARIANCE
    fourier_sign: int = FOURIER_SIGN


CONVENTIONS = Conventions()


def squeezing_db_to_r(db: float) -> float:
    """
    Convert a squeezing level in decibels to the squeezing parameter r.

    Args:
        db: Squeezing in dB, zero or negative (e.g. -15 for 15 dB squeezing)

    Returns:
        r >= 0 with e^{-2r} = 10^{db/10}
    """
    if not math.isfinite(db) or db > 0:
        raise DomainError(f"squeezing must be given as a non-positive dB value, got {db}")
    return -db * math.log(10.0) / 20.0


def r_to_squeezing_db(r: float) -> float:
    """Inverse of squeezing_db_to_r."""
    if not math.isfinite(r) or r < 0:
        raise DomainError(f"squeezing parameter must be >= 0, got {r}")
    return -20.0 * r / math.log(10.0)


def next_power_of_two(value: float) -> int:
    """Smallest power of two that is >= value (at least 1)."""
    return 1 << max(0, math.ceil(math.log2(max(value, 1.0))))


@dataclass(frozen=True)
class GridSpec:
    """Uniform quadrature grid of ``n`` points from ``min`` to ``max`` inclusive."""

    min: float
    max: float
    n: int

    def __post_init__(self):
        if not (math.isfinite(self.min) and math.isfinite(self.max)):
            raise GridError(f"grid bounds must be finite, got [{self.min}, {self.max}]")
        if self.max <= self.min:
            raise GridError(f"grid needs max > min, got [{self.min}, {self.max}]")
        if int(self.n) != self.n or self.n < 16:
            raise GridError(f"grid needs at least 16 points, got n={self.n}")
        object.__setattr__(self, "n", int(self.n))

    @property
    def spacing(self) -> float:
        return (self.max - self.min) / (self.n - 1)

    @property
    def span(self) -> float:
        return self.max - self.min

    def points(self) -> np.ndarray:
        return self.min + self.spacing * np.arange(self.n)

    def shifted(self, amount: float) -> "GridSpec":
        return GridSpec(self.min + amount, self.max + amount, self.n)

    def contains(self, low: float, high: float) -> bool:
        return self.min <= low and high <= self.max

    def matches(self, other: "GridSpec", tol: float = 1e-6) -> bool:
        """Same point count and nodes equal to within ``tol`` grid spacings."""
        if self.n != other.n:
            return False
        slack = tol * self.spacing
        return abs(self.min - other.min) <= slack and abs(self.max - other.max) <= slack

    def reciprocal(self) -> "GridSpec":
        """Conjugate grid of the discrete Fourier transform, centred on zero."""
        step = 2.0 * math.pi / (self.n * self.spacing)
        half = 0.5 * (self.n - 1) * step
        return GridSpec(-half, half, self.n)

    def is_reciprocal_of(self, other: "GridSpec", rtol: float = 1e-9) -> bool:
        if self.n != other.n:
            return False
        product = self.n * self.spacing * other.spacing
        return abs(product - 2.0 * math.pi) <= rtol * 2.0 * math.pi

    @classmethod
    def centered(cls, center: float, half_width: float, n: int) -> "GridSpec":
        return cls(center - half_width, center + half_width, n)

    def to_dict(self) -> Dict[str, Any]:
        return {"min": self.min, "max": self.max, "n": self.n}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "GridSpec":
        try:
            return cls(float(data["min"]), float(data["max"]), int(data["n"]))
        except KeyError as e:
            raise DomainError(f"grid record is missing field {e}") from e


@dataclass(frozen=True)
class InputState:
    """
    Tagged description of the state to teleport.

    ``kind`` is one of vacuum, squeezed (uses ``r_in``), displaced (uses ``x0``
    and ``y0``) or custom (``grid`` with position amplitudes ``amps``).
    """

    kind: str = "vacuum"
    r_in: float = 0.0
    x0: float = 0.0
    y0: float = 0.0
    grid: Optional[GridSpec] = None
    amps: Optional[Tuple[complex, ...]] = None

    def __post_init__(self):
        if self.kind not in INPUT_KINDS:
            raise DomainError(f"unknown input state kind '{self.kind}', expected one of {INPUT_KINDS}")
        if self.kind == "custom":
            if self.grid is None or self.amps is None:
                raise DomainError("custom input state needs a grid and amplitudes")
            if len(self.amps) != self.grid.n:
                raise DomainError(
                    f"custom input has {len(self.amps)} amplitudes for a grid of {self.grid.n} points"
                )
            object.__setattr__(self, "amps", tuple(complex(a) for a in self.amps))
        for name in ("r_in", "x0", "y0"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"input state field {name} must be finite")

    def moments(self) -> Tuple[float, float, float, float]:
        """Return (mean_x, mean_y, var_x, var_y) of the input state."""
        if self.kind == "vacuum":
            return 0.0, 0.0, VACUUM_VARIANCE, VACUUM_VARIANCE
        if self.kind == "squeezed":
            return 0.0, 0.0, math.exp(-2 * self.r_in) / 2, math.exp(2 * self.r_in) / 2
        if self.kind == "displaced":
            return self.x0, self.y0, VACUUM_VARIANCE, VACUUM_VARIANCE

        x = self.grid.points()
        psi = np.asarray(self.amps, dtype=complex)
        h = self.grid.spacing
        density = np.abs(psi) ** 2
        norm = trapezoid(density, dx=h)
        density = density / norm
        mean_x = float(np.sum(x * density) * h)
        var_x = float(np.sum((x - mean_x) ** 2 * density) * h)
        # <y> = Im int psi* psi', <y^2> = int |psi'|^2 for the x-representation
        dpsi = np.gradient(psi, h) / math.sqrt(norm)
        psi_n = psi / math.sqrt(norm)
        mean_y = float(np.imag(np.sum(np.conj(psi_n) * dpsi)) * h)
        var_y = float(np.sum(np.abs(dpsi) ** 2) * h) - mean_y**2
        return mean_x, mean_y, var_x, max(var_y, 0.0)

    def to_dict(self) -> Dict[str, Any]:
        if self.kind == "vacuum":
            return {"kind": "vacuum"}
        if self.kind == "squeezed":
            return {"kind": "squeezed", "r_in": self.r_in}
        if self.kind == "displaced":
            return {"kind": "displaced", "x0": self.x0, "y0": self.y0}
        return {
            "kind": "custom",
            "grid": self.grid.to_dict(),
            "re": [a.real for a in self.amps],
            "im": [a.imag for a in self.amps],
        }

    @classmethod
    def from_dict(cls, data: Optional[Dict[str, Any]]) -> "InputState":
        if not data:
            return cls()
        kind = data.get("kind", "vacuum")
        if kind == "squeezed":
            return cls(kind, r_in=float(data.get("r_in", 0.0)))
        if kind == "displaced":
            return cls(kind, x0=float(data.get("x0", 0.0)), y0=float(data.get("y0", 0.0)))
        if kind == "custom":
            re = data.get("re", [])
            im = data.get("im", [0.0] * len(re))
            if len(re) != len(im):
                raise DomainError("custom input needs 're' and 'im' lists of equal length")
            grid = GridSpec.from_dict(data.get("grid", {}))
            return cls(kind, grid=grid, amps=tuple(complex(a, b) for a, b in zip(re, im)))
        return cls(kind)


@dataclass(frozen=True)
class ProtocolParams:
    """
    Physical parameters of one teleportation run.

    ``allow_degenerate`` admits the diagnostic limits gamma = 0 and g = 0 used
    to check the engines against separable or Gaussian cases; ordinary runs
    keep the strict checks.
    """

    r: float
    gamma: float
    alpha: float
    g1: float
    g2: float
    input_state: InputState = field(default_factory=InputState)
    allow_degenerate: bool = field(default=False, repr=False, compare=False)

    def __post_init__(self):
        for name in ("r", "gamma", "alpha", "g1", "g2"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"parameter {name} must be finite, got {getattr(self, name)}")
        if self.r < 0:
            raise DomainError(f"squeezing parameter r must be >= 0, got {self.r}")
        if self.allow_degenerate:
            if self.gamma < 0:
                raise DomainError(f"gamma must be >= 0, got {self.gamma}")
            return
        if self.gamma <= 0:
            raise DomainError(f"gamma must be > 0, got {self.gamma}")
        if self.g1 == 0 or self.g2 == 0:
            raise DomainError(f"CZ weights must be nonzero, got g1={self.g1}, g2={self.g2}")

    @property
    def teleport_mode(self) -> bool:
        return self.g1 + self.g2 == 0

    @property
    def g(self) -> float:
        """Single CZ weight of teleport mode (g1 = g, g2 = -g)."""
        if not self.teleport_mode:
            raise DomainError(f"teleport mode needs g1 = -g2, got g1={self.g1}, g2={self.g2}")
        return self.g1

    def with_weight(self, g: float) -> "ProtocolParams":
        return replace(self, g1=g, g2=-g)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "r": self.r,
            "gamma": self.gamma,
            "alpha": self.alpha,
            "g1": self.g1,
            "g2": self.g2,
            "input_state": self.input_state.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ProtocolParams":
        """
        Build parameters from a JSON record.

        Besides the field names, ``squeeze_db`` may replace ``r`` and
        ``g`` (a number or "balanced") may replace the ``g1``/``g2`` pair.
        """
        data = dict(data)
        if "r" not in data:
            if "squeeze_db" not in data:
                raise DomainError("parameters need 'r' or 'squeeze_db'")
            data["r"] = squeezing_db_to_r(float(data["squeeze_db"]))
        for key in ("gamma", "alpha"):
            if key not in data:
                raise DomainError(f"parameters are missing '{key}'")
        r, gamma, alpha = float(data["r"]), float(data["gamma"]), float(data["alpha"])
        input_state = InputState.from_dict(data.get("input_state"))

        g = data.get("g")
        if g is not None:
            if g == "balanced":
                g = 6.0 * gamma * alpha * math.exp(-r)
            return teleport_params(r, gamma, alpha, float(g), input_state)
        if "g1" not in data or "g2" not in data:
            raise DomainError("parameters need 'g' or both 'g1' and 'g2'")
        return cls(r, gamma, alpha, float(data["g1"]), float(data["g2"]), input_state)


def teleport_params(
    r: float,
    gamma: float,
    alpha: float,
    g: float,
    input_state: Optional[InputState] = None,
) -> ProtocolParams:
    """Parameters in teleport mode, g1 = g and g2 = -g."""
    return ProtocolParams(r, gamma, alpha, g, -g, input_state or InputState())


@dataclass(frozen=True)
class EnergyParams:
    """Optical parameters of the displacement pulse."""

    wavelength: float
    tau: float
    alpha: float

    def __post_init__(self):
        if not (math.isfinite(self.wavelength) and self.wavelength > 0):
            raise DomainError(f"wavelength must be > 0, got {self.wavelength}")
        if not (0 < self.tau <= 1):
            raise DomainError(f"transmittance tau must be in (0, 1], got {self.tau}")
        if not math.isfinite(self.alpha):
            raise DomainError(f"alpha must be finite, got {self.alpha}")


@dataclass(frozen=True)
class GridSet:
    """Input-mode position grid and resource-mode momentum grid."""

    input: GridSpec
    resource: GridSpec

    def to_dict(self) -> Dict[str, Any]:
        return {"input": self.input.to_dict(), "resource": self.resource.to_dict()}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "GridSet":
        return cls(GridSpec.from_dict(data["input"]), GridSpec.from_dict(data["resource"]))


def resource_sigma(r: float) -> float:
    """Standard deviation of the resource y-distribution, e^{r}/sqrt(2)."""
    return math.exp(r) / math.sqrt(2.0)


def _phase_rate(spec: GridSpec, gamma: float, x_window: Tuple[float, float]) -> float:
    """Largest |3 gamma y^2 - x| over the grid and the position window."""
    lo, hi = spec.min, spec.max
    max_y2 = max(lo * lo, hi * hi)
    min_y2 = 0.0 if lo <= 0 <= hi else min(lo * lo, hi * hi)
    x_lo, x_hi = x_window
    return max(abs(3 * gamma * max_y2 - x_lo), abs(x_hi - 3 * gamma * min_y2))


def validate_grid(
    spec: GridSpec,
    params: ProtocolParams,
    x_window: Optional[Tuple[float, float]] = None,
) -> List[str]:
    """
    Check a resource momentum grid against the protocol parameters.

    The grid must cover alpha +- 6 e^{r}/sqrt(2) and resolve the phase of the
    integrand xy - gamma y^3, i.e. h * max|3 gamma y^2 - x| < pi, with x over
    ``x_window`` (default x = 0).

    Returns:
        List of warning strings, empty when the grid is adequate
    """
    warnings = []
    sigma = resource_sigma(params.r)
    low, high = params.alpha - 6 * sigma, params.alpha + 6 * sigma
    if not spec.contains(low, high):
        warnings.append(
            f"grid [{spec.min:g}, {spec.max:g}] does not cover the resource support "
            f"[{low:g}, {high:g}]"
        )

    rate = _phase_rate(spec, params.gamma, x_window or (0.0, 0.0))
    step = spec.spacing * rate
    if step >= math.pi:
        warnings.append(
            f"undersampled phase: h*max|3*gamma*y^2 - x| = {step:.3g} >= pi (n={spec.n})"
        )
    for warning in warnings:
        logger.debug("grid check: %s", warning)
    return warnings


def suggest_grids(
    params: ProtocolParams,
    yinm_extent: Optional[float] = None,
    phase_step: float = 0.75 * math.pi,
) -> GridSet:
    """
    Suggest grids that resolve a run with the given parameters.

    The resource y-grid is centred at alpha with half-width 1.25 * 6 e^{r}/sqrt(2)
    and a power-of-two size keeping h * 3 gamma y_max^2 below ``phase_step``.
    The input x-grid covers the input state and resolves the fastest
    oscillation among the resource momenta and the y_in,m outcomes.
    """
    sigma = resource_sigma(params.r)
    half = 1.25 * 6 * sigma
    y_lo, y_hi = params.alpha - half, params.alpha + half
    y_max = max(abs(y_lo), abs(y_hi))
    rate = max(3 * params.gamma * y_max**2, 1.0)
    n_res = min(max(next_power_of_two(2 * half * rate / phase_step + 1), 1024), 1 << 17)
    resource = GridSpec(y_lo, y_hi, n_res)

    mean_x, mean_y, var_x, var_y = params.input_state.moments()
    half_in = max(8.0, 8.0 * math.sqrt(2 * var_x))
    if yinm_extent is None:
        yinm_extent = 5.0 * math.sqrt(var_y + params.g1**2 * math.exp(2 * params.r) / 2)
    freq = max(y_max, yinm_extent + abs(mean_y) + 8 * math.sqrt(var_y), abs(mean_y) + 8 * math.sqrt(var_y))
    n_in = min(max(next_power_of_two(2 * half_in * freq / (math.pi / 2) + 1), 256), 1 << 14)
    grids = GridSet(GridSpec.centered(mean_x, half_in, n_in), resource)
    logger.debug("suggested grids: %s", grids)
    return grids
