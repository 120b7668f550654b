# SPDX-License-Identifier: GPL-3.0-or-later
"""
Single-mode wavefunctions on uniform quadrature grids.

Provides the state constructors and the unitary and measurement primitives the
teleportation engine is composed from: squeezed and input states, displacements,
the cubic phase gate, the position/momentum basis change, overlaps, moments and
the Gaussian-kernel convolution left behind by the mode-1 homodyne projection.

Basis change on a grid x_j = x0 + j*hx paired with y_k = y0 + k*hy, where
hx*hy*n = 2*pi, is a DFT with phase factors for grids not starting at zero:

    phi_k = (2pi)^(-1/2) hx e^{-i x0 y_k} sum_j e^{-2pi i jk/n} e^{-i j hx y0} psi_j

and its inverse with the opposite signs. Any other target grid is reached by a
dense quadrature of the same kernel.

Copyright (C) 2024 cubictele Contributors
Licensed under GPL-3.0-or-later
"""

import csv
import logging
import math
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Optional, Union

import numpy as np
from scipy.integrate import trapezoid

from .errors import DomainError, GridError
from .params import GridSpec, InputState

logger = logging.getLogger(__name__)

SQRT_2PI = math.sqrt(2.0 * math.pi)
NORM_TOL = 1e-6
NORM_DEFICIT_TOL = 1e-4
OFF_GRID_TOL = 1e-6
DENSE_CHUNK = 64


class Representation(str, Enum):
    POSITION = "position"
    MOMENTUM = "momentum"

    @property
    def axis(self) -> str:
        return "x" if self is Representation.POSITION else "y"

    @property
    def other(self) -> "Representation":
        if self is Representation.POSITION:
            return Representation.MOMENTUM
        return Representation.POSITION


@dataclass(frozen=True, eq=False)
class WaveFunction1D:
    """Complex amplitudes on a uniform grid in the position or momentum representation."""

    grid: GridSpec
    amps: np.ndarray
    rep: Representation = Representation.POSITION
    normalized: bool = True

    def __post_init__(self):
        amps = np.array(self.amps, dtype=complex)
        if amps.shape != (self.grid.n,):
            raise GridError(f"{amps.shape[0] if amps.ndim else 0} amplitudes for a grid of {self.grid.n} points")
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)
        object.__setattr__(self, "rep", Representation(self.rep))

    @property
    def axis(self) -> np.ndarray:
        return self.grid.points()

    def norm(self) -> float:
        """Trapezoid-rule integral of |psi|^2."""
        return float(trapezoid(np.abs(self.amps) ** 2, dx=self.grid.spacing))

    def normalize(self) -> "WaveFunction1D":
        norm = self.norm()
        if norm <= 0 or not math.isfinite(norm):
            raise DomainError(f"cannot normalize a state of norm {norm}")
        return replace(self, amps=self.amps / math.sqrt(norm), normalized=True)

    def with_amps(self, amps: np.ndarray, normalized: Optional[bool] = None) -> "WaveFunction1D":
        return replace(self, amps=amps, normalized=self.normalized if normalized is None else normalized)


def trapezoid_weights(grid: GridSpec) -> np.ndarray:
    """Trapezoid-rule quadrature weights on the nodes of ``grid``."""
    weights = np.full(grid.n, grid.spacing)
    weights[0] = weights[-1] = 0.5 * grid.spacing
    return weights


def squeezed_profile(x: np.ndarray, r: float) -> np.ndarray:
    """psi_s(x; r) = (e^{2r}/pi)^{1/4} exp(-e^{2r} x^2 / 2)."""
    scale = math.exp(2.0 * r)
    return (scale / math.pi) ** 0.25 * np.exp(-0.5 * scale * x * x)


def _check_norm_deficit(psi: WaveFunction1D, what: str) -> WaveFunction1D:
    deficit = abs(1.0 - psi.norm())
    if deficit > NORM_DEFICIT_TOL:
        raise GridError(
            f"{what} is not resolved on [{psi.grid.min:g}, {psi.grid.max:g}] "
            f"with n={psi.grid.n}: norm deficit {deficit:.2e}"
        )
    return psi


def squeezed_state(
    grid: GridSpec,
    r: float,
    center: float = 0.0,
    rep: Representation = Representation.POSITION,
) -> WaveFunction1D:
    """
    Squeezed vacuum psi_s(q - center; r) along the axis of ``rep``.

    Negative r gives the anti-squeezed profile. Raises GridError when the grid
    truncates or undersamples the state (norm deficit above 1e-4).
    """
    amps = squeezed_profile(grid.points() - center, r)
    return _check_norm_deficit(WaveFunction1D(grid, amps, rep), f"squeezed state r={r:g}")


def input_wavefunction(state: InputState, grid: GridSpec) -> WaveFunction1D:
    """Position-representation wavefunction of an input state spec on ``grid``."""
    if state.kind == "vacuum":
        return squeezed_state(grid, 0.0)
    if state.kind == "squeezed":
        return squeezed_state(grid, state.r_in)
    if state.kind == "displaced":
        psi = squeezed_state(grid, 0.0, center=state.x0)
        return displace(psi, "y", state.y0)

    source = np.asarray(state.amps, dtype=complex)
    if state.grid.matches(grid):
        amps = source
    else:
        x_src, x_dst = state.grid.points(), grid.points()
        amps = np.interp(x_dst, x_src, source.real, left=0.0, right=0.0) + 1j * np.interp(
            x_dst, x_src, source.imag, left=0.0, right=0.0
        )
    psi = WaveFunction1D(grid, amps, normalized=False)
    if psi.norm() <= 0:
        raise GridError(f"custom input state has no support on [{grid.min:g}, {grid.max:g}]")
    return psi.normalize()


def _fft_transform(amps: np.ndarray, src: GridSpec, dst: GridSpec, sign: int) -> np.ndarray:
    n = src.n
    j = np.arange(n)
    pre = np.exp(sign * 1j * j * src.spacing * dst.min)
    post = np.exp(sign * 1j * src.min * dst.points())
    if sign < 0:
        core = np.fft.fft(amps * pre)
    else:
        core = np.fft.ifft(amps * pre) * n
    return post * core * (src.spacing / SQRT_2PI)


def _dense_transform(amps: np.ndarray, src: GridSpec, dst: GridSpec, sign: int) -> np.ndarray:
    weights = trapezoid_weights(src)
    keep = np.abs(amps) > 1e-16 * np.max(np.abs(amps), initial=0.0)
    q_src = src.points()[keep]
    weighted = (amps * weights)[keep] / SQRT_2PI
    q_dst = dst.points()
    out = np.empty(dst.n, dtype=complex)
    for start in range(0, dst.n, DENSE_CHUNK):
        block = q_dst[start : start + DENSE_CHUNK]
        out[start : start + DENSE_CHUNK] = np.exp(sign * 1j * np.outer(block, q_src)) @ weighted
    return out


def _change_basis(psi: WaveFunction1D, target: Optional[GridSpec], sign: int) -> WaveFunction1D:
    target = target or psi.grid.reciprocal()
    if target.is_reciprocal_of(psi.grid):
        amps = _fft_transform(psi.amps, psi.grid, target, sign)
        return WaveFunction1D(target, amps, psi.rep.other, psi.normalized)
    logger.debug("dense basis change %s -> %s", psi.grid, target)
    amps = _dense_transform(psi.amps, psi.grid, target, sign)
    return WaveFunction1D(target, amps, psi.rep.other, normalized=False)


def to_momentum(psi: WaveFunction1D, target: Optional[GridSpec] = None) -> WaveFunction1D:
    """
    Transform a position-representation state to the momentum representation.

    ``target`` defaults to the zero-centred reciprocal grid; a reciprocal target
    at any offset uses the FFT, any other grid a dense quadrature.
    """
    if psi.rep is not Representation.POSITION:
        raise DomainError("to_momentum needs a position-representation state")
    return _change_basis(psi, target, -1)


def to_position(psi: WaveFunction1D, target: Optional[GridSpec] = None) -> WaveFunction1D:
    """Inverse of to_momentum, with the same choice of target grids."""
    if psi.rep is not Representation.MOMENTUM:
        raise DomainError("to_position needs a momentum-representation state")
    return _change_basis(psi, target, +1)


def _convert(psi: WaveFunction1D, target: Optional[GridSpec] = None) -> WaveFunction1D:
    if psi.rep is Representation.POSITION:
        return to_momentum(psi, target)
    return to_position(psi, target)


def _check_shift_mass(psi: WaveFunction1D, amount: float) -> None:
    q = psi.axis
    density = np.abs(psi.amps) ** 2
    leaving = (q > psi.grid.max - amount) if amount > 0 else (q < psi.grid.min - amount)
    lost = float(np.sum(density[leaving]) * psi.grid.spacing)
    if lost > OFF_GRID_TOL:
        raise GridError(f"shift by {amount:g} pushes probability {lost:.2e} off the grid")


def displace(
    psi: WaveFunction1D,
    axis: str,
    amount: float,
    move_grid: bool = False,
) -> WaveFunction1D:
    """
    Displace a state by ``amount`` along quadrature ``axis`` ("x" or "y").

    Along the conjugate axis this is a plane-wave phase (e^{i amount x} for a
    y-displacement in position rep). Along the representation axis the grid
    itself is moved when ``move_grid`` is set; otherwise the amplitudes are
    shifted in place through the conjugate representation, which is exact for
    band-limited states.
    """
    if axis not in ("x", "y"):
        raise DomainError(f"axis must be 'x' or 'y', got {axis!r}")
    if amount == 0:
        return psi
    q = psi.axis
    if axis != psi.rep.axis:
        # x shift: e^{-i a y} in momentum rep, y shift: e^{+i a x} in position rep
        sign = 1.0 if psi.rep is Representation.POSITION else -1.0
        return psi.with_amps(psi.amps * np.exp(sign * 1j * amount * q))
    if move_grid:
        return WaveFunction1D(psi.grid.shifted(amount), psi.amps, psi.rep, psi.normalized)

    _check_shift_mass(psi, amount)
    moved = displace(_convert(psi), axis, amount)
    return _convert(moved, psi.grid)


def _check_phase_sampling(grid: GridSpec, gamma: float) -> None:
    y_max = max(abs(grid.min), abs(grid.max))
    step = grid.spacing * 3.0 * abs(gamma) * y_max**2
    if step >= math.pi:
        raise GridError(f"undersampled phase: h*3*gamma*y_max^2 = {step:.3g} >= pi (n={grid.n})")


def cubic_phase(psi: WaveFunction1D, gamma: float) -> WaveFunction1D:
    """
    Apply the cubic phase gate e^{-i gamma y^3}.

    Momentum-representation states are multiplied pointwise; position states
    are taken to the reciprocal momentum grid and back.
    """
    if gamma == 0:
        return psi
    if psi.rep is Representation.POSITION:
        return to_position(cubic_phase(to_momentum(psi), gamma), psi.grid)
    _check_phase_sampling(psi.grid, gamma)
    y = psi.axis
    return psi.with_amps(psi.amps * np.exp(-1j * gamma * y**3))


def overlap(a: WaveFunction1D, b: WaveFunction1D) -> complex:
    """Trapezoid-rule <a|b> on a common grid and representation."""
    if a.rep is not b.rep:
        raise GridError(f"overlap of {a.rep.value} and {b.rep.value} states")
    if not a.grid.matches(b.grid):
        raise GridError(f"overlap on mismatched grids {a.grid} and {b.grid}")
    return complex(trapezoid(np.conj(a.amps) * b.amps, dx=a.grid.spacing))


def state_fidelity(a: WaveFunction1D, b: WaveFunction1D) -> float:
    """|<a|b>|^2 clipped into [0, 1]."""
    return float(np.clip(abs(overlap(a, b)) ** 2, 0.0, 1.0))


def quadrature_moments(psi: WaveFunction1D):
    """Return (mean, variance) of the quadrature along the representation axis."""
    norm = psi.norm()
    if not psi.normalized or abs(norm - 1.0) > NORM_TOL:
        raise DomainError(f"moments need a normalized state, norm is {norm:.8f}")
    q = psi.axis
    density = np.abs(psi.amps) ** 2
    mean = float(trapezoid(q * density, dx=psi.grid.spacing))
    variance = float(trapezoid((q - mean) ** 2 * density, dx=psi.grid.spacing))
    return mean, variance


def gaussian_convolve(
    psi: WaveFunction1D,
    g: float,
    r: float,
    shift: float = 0.0,
    phase: float = 0.0,
    target: Optional[GridSpec] = None,
) -> WaveFunction1D:
    """
    Integrate psi against the Gaussian kernel left by a homodyne projection.

    Computes phi(x) = int dx_in psi_s(g(x - x_in) - shift; r) e^{-i x_in phase} psi(x_in).

    Without ``target`` the result lives on psi's grid and is computed spectrally,
    the kernel's transform being (sqrt(2 pi)/|g|) e^{-i p shift/g} psi_s(p/g; -r).
    With ``target`` the integral is a dense quadrature evaluated on that grid.

    Raises:
        GridError: if the kernel is wider than the grid, or (dense path) narrower
            than its spacing
    """
    if psi.rep is not Representation.POSITION:
        raise DomainError("gaussian_convolve needs a position-representation state")
    if g == 0:
        raise DomainError("kernel scale g must be nonzero")
    width = math.exp(-r) / abs(g)
    if 6.0 * width > psi.grid.span:
        raise GridError(f"kernel width {width:.3g} is wider than the grid span {psi.grid.span:.3g}")

    x_in = psi.axis
    source = psi.amps * np.exp(-1j * phase * x_in)
    if target is None:
        offset = shift / g
        if abs(offset) > 0.5 * psi.grid.spacing:
            _check_shift_mass(psi, offset)
        spectrum = to_momentum(psi.with_amps(source))
        p = spectrum.axis
        kernel = (SQRT_2PI / abs(g)) * np.exp(-1j * p * offset) * squeezed_profile(p / g, -r)
        out = to_position(spectrum.with_amps(spectrum.amps * kernel), psi.grid)
        return WaveFunction1D(psi.grid, out.amps, Representation.POSITION, normalized=False)

    if width < psi.grid.spacing:
        raise GridError(
            f"kernel width {width:.3g} is below the input grid spacing {psi.grid.spacing:.3g}"
        )
    weighted = source * trapezoid_weights(psi.grid)
    x = target.points()
    out = np.empty(target.n, dtype=complex)
    for start in range(0, target.n, DENSE_CHUNK):
        block = x[start : start + DENSE_CHUNK]
        kernel = squeezed_profile(g * (block[:, None] - x_in[None, :]) - shift, r)
        out[start : start + DENSE_CHUNK] = kernel @ weighted
    return WaveFunction1D(target, out, Representation.POSITION, normalized=False)


def export_csv(psi: WaveFunction1D, path: Union[str, Path]) -> Path:
    """Write a state as CSV with columns (x or y), re, im."""
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow([psi.rep.axis, "re", "im"])
        for q, a in zip(psi.axis, psi.amps):
            writer.writerow([repr(float(q)), repr(float(a.real)), repr(float(a.imag))])
    return path


def import_csv(path: Union[str, Path]) -> WaveFunction1D:
    """Read a state written by export_csv; the header names the representation."""
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if not header or header[0] not in ("x", "y"):
            raise DomainError(f"{path}: expected a header row starting with x or y")
        rows = [row for row in reader if row]
    if len(rows) < 16:
        raise GridError(f"{path}: {len(rows)} rows is too few for a grid")
    values = np.array([[float(v) for v in row[:3]] for row in rows])
    grid = GridSpec(values[0, 0], values[-1, 0], len(rows))
    rep = Representation.POSITION if header[0] == "x" else Representation.MOMENTUM
    psi = WaveFunction1D(grid, values[:, 1] + 1j * values[:, 2], rep, normalized=False)
    if abs(psi.norm() - 1.0) <= NORM_TOL:
        psi = replace(psi, normalized=True)
    return psi
