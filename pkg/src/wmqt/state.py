"""Spatial grid, wavefunction storage and integral observables.

All quantities live in the normalized units of the dimensionless
Schrodinger equation (unit mass, hbar = 1).  Integrals use the composite
trapezoidal rule on the uniform grid; wavefunctions are treated as
immutable values so states can be handed freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Grid1D",
    "Region",
    "WaveFunction",
    "norm_squared",
    "position_mean",
    "probability_current",
    "renormalize",
]


@dataclass(frozen=True)
class Grid1D:
    """Uniform lattice on [x_min, x_max] with n_points nodes.

    Node i sits at exactly x_min + i*dx; coordinates are always computed
    from the index so no drift accumulates.
    """

    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        if not self.x_min < self.x_max:
            raise ValueError(f"x_min must be < x_max, got [{self.x_min}, {self.x_max}]")
        if self.n_points < 16:
            raise ValueError(f"n_points must be >= 16, got {self.n_points}")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    @property
    def xs(self) -> np.ndarray:
        """Node coordinates x_min + i*dx."""
        return self.x_min + np.arange(self.n_points) * self.dx

    def index_near(self, x: float) -> int:
        """Index of the grid node nearest to x (clamped to the grid)."""
        i = int(round((x - self.x_min) / self.dx))
        return min(max(i, 0), self.n_points - 1)


@dataclass(frozen=True)
class Region:
    """Integration bounds [lo, hi]; clamped to the grid when used."""

    lo: float
    hi: float

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"region lo must be <= hi, got [{self.lo}, {self.hi}]")


@dataclass(frozen=True)
class WaveFunction:
    """Complex amplitudes on a Grid1D.

    Amplitudes are stored read-only; every operation that changes the state
    constructs a fresh instance.
    """

    grid: Grid1D
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=np.complex128)
        if amps.shape != (self.grid.n_points,):
            raise ValueError(
                f"amplitude array has length {amps.shape}, grid has {self.grid.n_points} points"
            )
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)


def _region_slice(grid: Grid1D, region: Region | None) -> slice:
    """Node-aligned slice covering the overlap of region and grid.

    Raises ValueError when the overlap is empty.  Rounding the bounds to
    grid nodes introduces at most a one-cell error at each edge.
    """
    if region is None:
        return slice(0, grid.n_points)
    lo = max(region.lo, grid.x_min)
    hi = min(region.hi, grid.x_max)
    if lo > hi:
        raise ValueError("region outside grid")
    i_lo = max(int(np.ceil((lo - grid.x_min) / grid.dx - 1e-9)), 0)
    i_hi = min(int(np.floor((hi - grid.x_min) / grid.dx + 1e-9)), grid.n_points - 1)
    return slice(i_lo, i_hi + 1)


def norm_squared(psi: WaveFunction, region: Region | None = None) -> float:
    """Integral of |psi|^2 over the region (full grid by default).

    The full-grid value is the survival probability: the probability of
    finding the system anywhere in the computational domain.
    """
    sl = _region_slice(psi.grid, region)
    seg = psi.amplitudes[sl]
    if seg.size < 2:
        return 0.0
    return float(np.trapezoid(np.abs(seg) ** 2, dx=psi.grid.dx))


def position_mean(psi: WaveFunction, region: Region | None = None) -> float:
    """Mean position of |psi|^2 restricted to the region (renormalized)."""
    sl = _region_slice(psi.grid, region)
    seg = np.abs(psi.amplitudes[sl]) ** 2
    if seg.size < 2:
        raise ValueError("region too small for a position mean")
    xs = psi.grid.xs[sl]
    denom = np.trapezoid(seg, dx=psi.grid.dx)
    if denom <= 0.0:
        raise ValueError("zero norm in region")
    return float(np.trapezoid(xs * seg, dx=psi.grid.dx) / denom)


def probability_current(psi: WaveFunction, x_probe: float) -> float:
    """Probability current j = Im(psi* dpsi/dx) at the node nearest x_probe.

    Central finite difference; the probe must lie strictly inside the grid.
    """
    grid = psi.grid
    if not (grid.x_min < x_probe < grid.x_max):
        raise ValueError(f"probe x={x_probe} not strictly inside grid")
    i = grid.index_near(x_probe)
    if i < 1 or i > grid.n_points - 2:
        raise ValueError(f"probe x={x_probe} falls on a grid endpoint")
    a = psi.amplitudes
    deriv = (a[i + 1] - a[i - 1]) / (2.0 * grid.dx)
    return float(np.imag(np.conj(a[i]) * deriv))


def renormalize(psi: WaveFunction) -> WaveFunction:
    """Rescale so the full-grid norm is exactly one."""
    n2 = norm_squared(psi)
    if n2 <= 0.0:
        raise ValueError("cannot renormalize null state")
    return WaveFunction(psi.grid, psi.amplitudes / np.sqrt(n2))
