# SPDX-License-Identifier: GPL-3.0-or-later
"""
Heisenberg-picture error budget for cubic-phase teleportation.

Closed-form mean-square errors of the teleported quadratures, the balanced CZ
weight, the crossover with standard teleportation, the displacement pulse
energy and a semiclassical Monte-Carlo that propagates the exact square-root
feed-forward to check the first-order expansion behind the closed forms.

Copyright (C) 2024 cubictele Contributors
Licensed under GPL-3.0-or-later
"""

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Any, Dict, List, Optional, Union

import numpy as np
from scipy import constants
from tqdm import tqdm

from .errors import DomainError
from .params import VACUUM_VARIANCE, EnergyParams, ProtocolParams

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

LINEAR_REGIME_CLIP = 0.01
MIN_RELIABLE_SAMPLES = 10_000
DEFAULT_SHARD_SIZE = 131_072


@dataclass(frozen=True)
class ErrorBudget:
    err_x: float
    err_y: float
    baseline: float

    def __post_init__(self):
        for name in ("err_x", "err_y", "baseline"):
            if getattr(self, name) < 0:
                raise DomainError(f"{name} must be >= 0")

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


@dataclass(frozen=True)
class McReport:
    """Outcome of the Monte-Carlo check of the linearized error formulas."""

    n_samples: int
    emp_var_x: float
    emp_var_y: float
    lin_var_x: float
    lin_var_y: float
    rel_dev_x: float
    rel_dev_y: float
    clip_fraction: float
    est_var_y: float = float("nan")
    rel_dev_est_y: float = float("nan")
    mean_y1m: float = float("nan")
    sem_y1m: float = float("nan")
    expected_mean_y1m: float = float("nan")
    seed: Optional[int] = None

    @property
    def linear_regime(self) -> bool:
        return self.clip_fraction <= LINEAR_REGIME_CLIP

    @property
    def low_power(self) -> bool:
        return self.n_samples < MIN_RELIABLE_SAMPLES

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["linear_regime"] = self.linear_regime
        data["low_power"] = self.low_power
        return data


def error_x(g: float, r: float) -> float:
    """Mean-square x error, e^{-2r}/(2 g^2)."""
    if g == 0:
        raise DomainError("error_x needs a nonzero CZ weight")
    return math.exp(-2.0 * r) / (2.0 * g * g)


def error_y_exact(g: float, gamma: float, y1m: ArrayLike, r: float, var_x_in: float) -> ArrayLike:
    """
    Mean-square y error at a given measured photocurrent y1m.

    (1/(12 gamma y1m)) (g var_x_in + e^{-2r}/(2g) + g e^{-2r}/2); accepts arrays of y1m.
    """
    if gamma <= 0 or g <= 0:
        raise DomainError(f"error_y_exact needs gamma > 0 and g > 0, got gamma={gamma}, g={g}")
    y1m = np.asarray(y1m, dtype=float)
    if np.any(y1m <= 0):
        raise DomainError("error_y_exact needs y1m > 0 (square-root branch)")
    squeeze = math.exp(-2.0 * r)
    value = (g * var_x_in + squeeze / (2.0 * g) + g * squeeze / 2.0) / (12.0 * gamma * y1m)
    return float(value) if value.ndim == 0 else value


def error_y_estimate(gamma: float, alpha: float, var_x_in: float) -> float:
    """Mean-square y error with y1m replaced by its mean, var_x_in/(36 gamma^2 alpha^2)."""
    if gamma <= 0 or alpha <= 0:
        raise DomainError(f"error_y_estimate needs gamma > 0 and alpha > 0, got {gamma}, {alpha}")
    return var_x_in / (36.0 * gamma * gamma * alpha * alpha)


def original_scheme_error(r: float) -> float:
    """Standard-teleportation error 2 e^{-2r} times the vacuum variance."""
    if r < 0:
        raise DomainError(f"r must be >= 0, got {r}")
    return 2.0 * math.exp(-2.0 * r) * VACUUM_VARIANCE


def balanced_weight(gamma: float, alpha: float, r: float) -> float:
    """CZ weight g = 6 gamma alpha e^{-r} equalizing the x and y errors."""
    if gamma <= 0 or alpha <= 0:
        raise DomainError(f"balanced_weight needs gamma > 0 and alpha > 0, got {gamma}, {alpha}")
    return 6.0 * gamma * alpha * math.exp(-r)


def crossover_alpha(gamma: float, r: float, var_x_in: float = VACUUM_VARIANCE) -> float:
    """Smallest alpha whose estimated y error does not exceed the standard-teleportation error."""
    if gamma <= 0:
        raise DomainError(f"crossover_alpha needs gamma > 0, got {gamma}")
    return math.sqrt(var_x_in / (36.0 * gamma * gamma * math.exp(-2.0 * r)))


def mean_y1(g: float, gamma: float, alpha: float, var_y: float = 0.0) -> float:
    """
    Mean photocurrent of mode 1, 3 g gamma (alpha^2 + var_y).

    ``var_y`` is the y-variance of the resource mode; the default 0 gives the
    leading-order 3 g gamma alpha^2.
    """
    return 3.0 * g * gamma * (alpha * alpha + var_y)


def pulse_energy(p: EnergyParams) -> float:
    """Displacement pulse energy h c alpha^2 / (2 lambda tau) in joules."""
    return constants.h * constants.c * p.alpha**2 / (2.0 * p.wavelength * p.tau)


def error_budget(params: ProtocolParams, var_x_in: Optional[float] = None) -> ErrorBudget:
    """Closed-form error budget of a teleport-mode parameter set."""
    if var_x_in is None:
        var_x_in = params.input_state.moments()[2]
    return ErrorBudget(
        err_x=error_x(params.g, params.r),
        err_y=error_y_estimate(params.gamma, params.alpha, var_x_in),
        baseline=original_scheme_error(params.r),
    )


def error_curve(
    alpha_min: float,
    alpha_max: float,
    steps: int,
    gamma: float,
    r: float,
    var_x_in: float = VACUUM_VARIANCE,
) -> List[Dict[str, float]]:
    """Rows of (alpha, err_y_estimate, baseline) over a uniform alpha range."""
    if alpha_min <= 0 or alpha_max < alpha_min or steps < 1:
        raise DomainError(
            f"bad alpha range [{alpha_min}, {alpha_max}] with {steps} steps"
        )
    baseline = original_scheme_error(r)
    alphas = np.linspace(alpha_min, alpha_max, steps) if steps > 1 else np.array([alpha_min])
    return [
        {
            "alpha": float(a),
            "err_y_estimate": error_y_estimate(gamma, float(a), var_x_in),
            "baseline": baseline,
        }
        for a in alphas
    ]


@dataclass
class _Moments:
    """Streaming count/mean/M2 accumulator merged with Chan's formula."""

    count: int = 0
    mean: float = 0.0
    m2: float = 0.0

    @classmethod
    def of(cls, values: np.ndarray) -> "_Moments":
        if values.size == 0:
            return cls()
        mean = float(np.mean(values))
        return cls(int(values.size), mean, float(np.sum((values - mean) ** 2)))

    def merge(self, other: "_Moments") -> "_Moments":
        if other.count == 0:
            return self
        if self.count == 0:
            return other
        count = self.count + other.count
        delta = other.mean - self.mean
        mean = self.mean + delta * other.count / count
        m2 = self.m2 + other.m2 + delta * delta * self.count * other.count / count
        return _Moments(count, mean, m2)

    @property
    def variance(self) -> float:
        return self.m2 / self.count if self.count else float("nan")


@dataclass
class _ShardResult:
    drawn: int
    clipped: int
    dx: _Moments
    dy: _Moments
    y1m: _Moments
    lin_y_sum: float


def _run_shard(params: ProtocolParams, n: int, seed_seq: np.random.SeedSequence) -> _ShardResult:
    rng = np.random.Generator(np.random.PCG64(seed_seq))
    g, gamma, r, alpha = params.g, params.gamma, params.r, params.alpha
    mean_x, mean_y, var_x, var_y = params.input_state.moments()
    vac = math.sqrt(VACUUM_VARIANCE)

    x_in = mean_x + math.sqrt(var_x) * rng.standard_normal(n)
    y_in = mean_y + math.sqrt(var_y) * rng.standard_normal(n)
    x01, y01, x02, y02 = vac * rng.standard_normal((4, n))
    x_s1, y_s1 = math.exp(r) * x01, math.exp(-r) * y01
    x_s2, y_s2 = math.exp(-r) * x02, math.exp(r) * y02

    # cubic gate on the displaced resource, then both CZ gates and homodyne readout
    x2 = x_s2 + 3.0 * gamma * (alpha + y_s2) ** 2
    yinm = y_in - g * x_s1
    y1m = y_s1 + g * x2 - g * x_in

    root_arg = y1m / g + x_in - y_s1 / g - x_s2
    ff_arg = y1m / (3.0 * gamma * g)
    keep = (root_arg >= 0) & (ff_arg > 0)

    x_out = (x_in - y_s1 / g + y1m / g) - y1m / g
    y_back = y_in - yinm + np.sqrt(np.where(keep, root_arg, 0.0) / (3.0 * gamma))
    y_out = y_back + yinm - np.sqrt(np.where(keep, ff_arg, 0.0))

    lin = error_y_exact(g, gamma, y1m[keep], r, var_x) if keep.any() else np.zeros(0)
    return _ShardResult(
        drawn=n,
        clipped=int(n - np.count_nonzero(keep)),
        dx=_Moments.of((x_out - x_in)[keep]),
        dy=_Moments.of((y_out - y_in)[keep]),
        y1m=_Moments.of(y1m),
        lin_y_sum=float(np.sum(lin)),
    )


def monte_carlo(
    params: ProtocolParams,
    n: int,
    seed: int,
    jobs: Optional[int] = None,
    shard_size: int = DEFAULT_SHARD_SIZE,
    progress: bool = False,
) -> McReport:
    """
    Propagate Gaussian quadrature samples through the exact protocol.

    Samples are split into shards with independent child seeds spawned from
    ``seed``; shard statistics are merged with a streaming variance combination,
    so the report depends on ``seed`` and ``shard_size`` but not on ``jobs``.

    Args:
        params: Teleport-mode parameters with gamma > 0
        n: Number of samples (>= 1)
        seed: Root seed
        jobs: Worker threads (default: available CPUs)
        shard_size: Samples per shard
        progress: Show a tqdm bar over shards
    """
    if not params.teleport_mode:
        raise DomainError("monte_carlo needs teleport-mode parameters (g1 = -g2)")
    if params.gamma <= 0 or params.g <= 0:
        raise DomainError(f"monte_carlo needs gamma > 0 and g > 0, got gamma={params.gamma}, g={params.g}")
    if n < 1:
        raise DomainError(f"monte_carlo needs n >= 1, got {n}")

    sizes = [min(shard_size, n - start) for start in range(0, n, shard_size)]
    children = np.random.SeedSequence(seed).spawn(len(sizes))
    workers = jobs or os.cpu_count() or 1
    logger.debug("monte carlo: %d samples in %d shards on %d workers", n, len(sizes), workers)

    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(
            tqdm(
                pool.map(lambda item: _run_shard(params, *item), zip(sizes, children)),
                total=len(sizes),
                desc="Monte-Carlo shards",
                unit="shard",
                disable=not progress,
            )
        )

    dx, dy, y1m = _Moments(), _Moments(), _Moments()
    clipped = 0
    lin_sum = 0.0
    for shard in results:
        dx, dy, y1m = dx.merge(shard.dx), dy.merge(shard.dy), y1m.merge(shard.y1m)
        clipped += shard.clipped
        lin_sum += shard.lin_y_sum

    var_x_in = params.input_state.moments()[2]
    lin_x = error_x(params.g, params.r)
    lin_y = lin_sum / dy.count if dy.count else float("nan")
    est_y = error_y_estimate(params.gamma, params.alpha, var_x_in) if params.alpha > 0 else float("nan")

    def rel(emp: float, ref: float) -> float:
        return abs(emp - ref) / ref if ref > 0 else float("nan")

    report = McReport(
        n_samples=n,
        emp_var_x=dx.variance,
        emp_var_y=dy.variance,
        lin_var_x=lin_x,
        lin_var_y=lin_y,
        rel_dev_x=rel(dx.variance, lin_x),
        rel_dev_y=rel(dy.variance, lin_y),
        clip_fraction=clipped / n,
        est_var_y=est_y,
        rel_dev_est_y=rel(dy.variance, est_y),
        mean_y1m=y1m.mean,
        sem_y1m=math.sqrt(y1m.variance / n) if n > 1 else float("nan"),
        expected_mean_y1m=mean_y1(params.g, params.gamma, params.alpha, math.exp(2 * params.r) / 2),
        seed=seed,
    )
    if not report.linear_regime:
        logger.warning("clip fraction %.3g is outside the linearization regime", report.clip_fraction)
    if report.low_power:
        logger.warning("only %d samples: statistical power is low", n)
    return report
