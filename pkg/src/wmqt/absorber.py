"""Imaginary absorbing layer (quantum analogue of a perfectly matched layer).

The absorber is a negative-imaginary addition -i*W(x) to the potential,

    W(x) = exp((x - x0)/l_ext) * (A*(x - x0))**6     for x in [x0, x0+width],

zero elsewhere.  W and its first six derivatives vanish at the onset x0,
so outgoing waves enter the layer with minimal backscatter and are
dissipated before they reach the hard wall at the end of the grid.  The
printed profile grows again far to the left of x0, so the support is
truncated to the layer; the physical region must stay absorption-free.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import NumericalError
from .potentials import WashboardParams, washboard_eval
from .state import Grid1D, Region, WaveFunction

__all__ = [
    "PmlParams",
    "absorber_profile",
    "build_complex_potential",
    "physical_region",
    "reflection_coefficient",
    "default_reflection_grid",
]

_SIDES = ("right", "left", "both")


@dataclass(frozen=True)
class PmlParams:
    """Absorbing-layer parameters.

    x0 is the layer onset.  A right layer spans [x0, x0+width]; a left
    layer spans [x0-width, x0] and absorbs waves moving toward -x.  With
    sides="both" the layers sit symmetrically at [x0, x0+width] and
    [-x0-width, -x0], matching a domain centered on the origin.
    """

    A: float = 1e-3
    l_ext: float = 1e3
    x0: float = 0.0
    width: float = 1e3
    sides: str = "right"

    def __post_init__(self):
        if self.A < 0:
            raise ValueError(f"absorber amplitude A must be >= 0, got {self.A}")
        if not self.l_ext > 0:
            raise ValueError(f"l_ext must be > 0, got {self.l_ext}")
        if not self.width > 0:
            raise ValueError(f"width must be > 0, got {self.width}")
        if self.sides not in _SIDES:
            raise ValueError(f"sides must be one of {_SIDES}, got {self.sides!r}")


def _one_sided_profile(A: float, l_ext: float, xi) -> np.ndarray:
    """W as a function of the depth xi >= 0 into the layer."""
    xi = np.asarray(xi, dtype=float)
    return np.exp(xi / l_ext) * (A * xi) ** 6


def absorber_profile(p: PmlParams, x):
    """W(x) >= 0 for the configured layer(s); zero outside.  Scalar or array."""
    x = np.asarray(x, dtype=float)
    w = np.zeros_like(x)
    if p.sides in ("right", "both"):
        xi = x - p.x0
        mask = (xi >= 0.0) & (xi <= p.width)
        w[mask] += _one_sided_profile(p.A, p.l_ext, xi[mask])
    if p.sides == "left":
        xi = p.x0 - x
        mask = (xi >= 0.0) & (xi <= p.width)
        w[mask] += _one_sided_profile(p.A, p.l_ext, xi[mask])
    elif p.sides == "both":
        xi = -p.x0 - x
        mask = (xi >= 0.0) & (xi <= p.width)
        w[mask] += _one_sided_profile(p.A, p.l_ext, xi[mask])
    if w.ndim == 0:
        return float(w)
    return w


def _check_layer_inside(p: PmlParams, g: Grid1D):
    tol = 1e-9 * (g.x_max - g.x_min)
    if p.sides in ("right", "both"):
        if p.x0 < g.x_min - tol or p.x0 + p.width > g.x_max + tol:
            raise ValueError(
                f"PML region outside grid: right layer [{p.x0}, {p.x0 + p.width}] "
                f"vs grid [{g.x_min}, {g.x_max}]"
            )
    if p.sides == "left":
        if p.x0 - p.width < g.x_min - tol or p.x0 > g.x_max + tol:
            raise ValueError(
                f"PML region outside grid: left layer [{p.x0 - p.width}, {p.x0}] "
                f"vs grid [{g.x_min}, {g.x_max}]"
            )
    elif p.sides == "both":
        if -p.x0 - p.width < g.x_min - tol:
            raise ValueError(
                f"PML region outside grid: left layer [{-p.x0 - p.width}, {-p.x0}] "
                f"vs grid [{g.x_min}, {g.x_max}]"
            )


def build_complex_potential(w: WashboardParams, p: PmlParams, g: Grid1D) -> np.ndarray:
    """Per-node washboard_eval(x) - i*W(x); the imaginary part is <= 0.

    The sign makes the Cayley step contractive, so the norm can only
    decrease where the layer is active.
    """
    _check_layer_inside(p, g)
    xs = g.xs
    return washboard_eval(w, xs) - 1j * absorber_profile(p, xs)


def physical_region(p: PmlParams, g: Grid1D) -> Region:
    """Grid region not covered by any absorbing layer."""
    lo, hi = g.x_min, g.x_max
    if p.sides in ("right", "both"):
        hi = min(hi, p.x0)
    if p.sides == "left":
        lo = max(lo, p.x0)
    elif p.sides == "both":
        lo = max(lo, -p.x0)
    return Region(lo, hi)


def penetration_depth(p: PmlParams, v: float, attenuation: float = 25.0) -> float:
    """Depth at which a wave of speed v has accumulated e^-attenuation decay.

    Solves integral(W)/v = attenuation on the one-sided profile; returns
    the full width when the layer is too weak to reach that attenuation.
    """
    if v <= 0:
        raise ValueError("speed must be > 0")
    n = 4096
    xi = np.linspace(0.0, p.width, n)
    w = _one_sided_profile(p.A, p.l_ext, xi)
    cum = np.concatenate(([0.0], np.cumsum((w[1:] + w[:-1]) * 0.5 * np.diff(xi))))
    target = attenuation * v
    idx = np.searchsorted(cum, target)
    if idx >= n:
        return p.width
    return float(xi[idx])


def default_reflection_grid(
    p: PmlParams, k: float, sigma: float | None = None, dx: float = 0.05
) -> Grid1D:
    """Grid sized so the reflection diagnostic is clean for momentum k.

    Leaves enough free space left of the onset that the launch packet fits
    and that reflected waves cannot re-enter the layer before the
    measurement time.
    """
    if sigma is None:
        sigma = max(6.0, 10.0 / k)
    depth = min(p.width, penetration_depth(p, k))
    clearance = max(9.0 * sigma, 4.5 * sigma + depth)
    x_min = p.x0 - clearance
    x_max = p.x0 + p.width
    n = int(round((x_max - x_min) / dx)) + 1
    return Grid1D(x_min, x_max, n)


def reflection_coefficient(
    p: PmlParams,
    k: float,
    g: Grid1D,
    sigma: float | None = None,
    dt: float | None = None,
) -> float:
    """Fraction of a free Gaussian packet of momentum k that the layer reflects.

    Launches the packet toward the layer over a zero potential and evolves
    until the absorption transient has completed, including the double
    pass off the hard wall behind the layer.  Whatever the layer has not
    dissipated by then is on its way back into the free region (the grid
    is sized so it cannot re-enter the layer first), so the surviving
    whole-grid norm over the initial norm is the reflected fraction.
    """
    if k <= 0:
        raise ValueError(f"packet momentum must be > 0, got {k}")
    if p.sides != "right":
        raise ValueError("reflection diagnostic supports a right-side layer only")
    _check_layer_inside(p, g)

    if sigma is None:
        sigma = max(6.0, 10.0 / k)
    x_c = p.x0 - 5.0 * sigma
    if x_c + 4.0 * sigma > p.x0:
        raise ValueError("packet initially overlapping the absorber")
    if x_c - 4.0 * sigma < g.x_min:
        raise ValueError("Gaussian packet does not fit in the free region")

    if dt is None:
        e_max = 0.5 * (k + 1.0 / sigma) ** 2
        dt = min(0.1, 0.2 / e_max)

    xs = g.xs
    pot = -1j * absorber_profile(p, xs)
    psi = np.exp(-((xs - x_c) ** 2) / (4.0 * sigma**2)) * np.exp(1j * k * xs)
    psi[0] = 0.0
    psi[-1] = 0.0
    u = psi[1:-1].astype(np.complex128)
    dx = g.dx
    u /= math.sqrt(_kernels.interior_norm_squared(u, dx))

    depth = min(p.width, penetration_depth(p, k))
    t_meas = (10.0 * sigma + 2.0 * depth + 20.0) / k
    n_steps = int(math.ceil(t_meas / dt))

    m = g.n_points - 2
    inv2 = 1.0 / dx**2
    a_off = -0.25j * dt * inv2
    a_diag = 1.0 + 0.5j * dt * (inv2 + pot[1:-1])
    w_arr = np.empty(m, np.complex128)
    inv_denom = np.empty(m, np.complex128)
    bad = _kernels.thomas_factor(a_diag, a_off, w_arr, inv_denom)
    if bad:
        raise NumericalError(f"singular tridiagonal system at row {bad}")
    y = np.empty(m, np.complex128)
    out = np.empty(m, np.complex128)

    sample_every = max(1, n_steps // 64)
    for s in range(1, n_steps + 1):
        _kernels.cn_apply(u, w_arr, inv_denom, a_off, y, out)
        u, out = out, u
        if s % sample_every == 0 or s == n_steps:
            r = _kernels.interior_norm_squared(u, dx)
            if not math.isfinite(r):
                raise NumericalError(f"numerical blow-up at step {s}")
    return min(r, 1.0)
