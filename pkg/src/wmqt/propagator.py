"""Time evolution: Crank-Nicolson stepping and initial-state preparation.

Real-time propagation uses the Cayley form, which is exactly unitary for a
real potential and contractive once the absorbing layer is active.  A
time-dependent bias is sampled at the step midpoint to keep second-order
accuracy.  The initial state is either a Gaussian matched to the well
curvature or the relaxed lowest state of the well region obtained by
imaginary-time propagation.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from . import _kernels
from .absorber import PmlParams, absorber_profile, build_complex_potential, physical_region
from .errors import NumericalError
from .potentials import RampSpec, WashboardParams, plasma_frequency, ramp_gamma, well_extrema
from .state import Grid1D, Region, WaveFunction, norm_squared, probability_current, renormalize

__all__ = [
    "SolverConfig",
    "TimeSeries",
    "EvolveResult",
    "step",
    "evolve",
    "gaussian_ground_state",
    "imaginary_time_relax",
    "rayleigh_quotient",
    "default_domain",
]


@dataclass(frozen=True)
class SolverConfig:
    """Time-stepping parameters (normalized units)."""

    dt: float = 0.005
    t_end: float = 1000.0
    observe_every: int = 200

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if not self.t_end > 0:
            raise ValueError(f"t_end must be > 0, got {self.t_end}")
        if self.observe_every < 1:
            raise ValueError(f"observe_every must be >= 1, got {self.observe_every}")


@dataclass(frozen=True)
class TimeSeries:
    """Sampled observables along one evolution.

    survival is the probability of finding the system anywhere in the
    computational domain (what the absorbing layer drains away is gone
    for good); norm_full is the whole-grid norm kept as an explicit
    cross-check column, identical to survival in this realization.
    x_mean is the mean position of the content still in the physical
    (absorber-free) region and flux_probe the probability current at the
    barrier top.
    """

    times: np.ndarray
    gamma: np.ndarray
    survival: np.ndarray
    norm_full: np.ndarray
    x_mean: np.ndarray
    flux_probe: np.ndarray

    def __post_init__(self):
        n = len(self.times)
        for name in ("gamma", "survival", "norm_full", "x_mean", "flux_probe"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"series column {name} has mismatched length")
        if n > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("sample times must be strictly increasing")
        if np.any(self.survival < -1e-12) or np.any(self.survival > 1.0 + 1e-9):
            raise ValueError("survival samples outside [0, 1]")


@dataclass(frozen=True)
class EvolveResult:
    series: TimeSeries
    final_state: WaveFunction


def step(psi: WaveFunction, potential: np.ndarray, dt: float) -> WaveFunction:
    """Single Crank-Nicolson step under the given per-node complex potential.

    Endpoints are held at zero.  For repeated stepping prefer evolve(),
    which reuses the factorization.
    """
    grid = psi.grid
    potential = np.asarray(potential)
    if potential.shape != (grid.n_points,):
        raise ValueError("potential array does not match grid")
    m = grid.n_points - 2
    inv2 = 1.0 / grid.dx**2
    a_off = -0.25j * dt * inv2
    a_diag = 1.0 + 0.5j * dt * (inv2 + potential[1:-1].astype(np.complex128))
    w = np.empty(m, np.complex128)
    inv_denom = np.empty(m, np.complex128)
    bad = _kernels.thomas_factor(a_diag, a_off, w, inv_denom)
    if bad:
        raise NumericalError(f"singular tridiagonal system at row {bad}")
    y = np.empty(m, np.complex128)
    out = np.empty(m, np.complex128)
    u = psi.amplitudes[1:-1].astype(np.complex128)
    _kernels.cn_apply(u, w, inv_denom, a_off, y, out)
    full = np.zeros(grid.n_points, np.complex128)
    full[1:-1] = out
    return WaveFunction(grid, full)


def _observe(u, grid, phys_slice, x_probe_idx, dx):
    """survival, norm_full, x_mean, flux for the interior amplitude array."""
    p2 = np.abs(u) ** 2
    norm_full = float(np.sum(p2) * dx)
    survival = norm_full
    lo, hi = phys_slice
    seg = p2[lo:hi]
    phys_norm = float(np.sum(seg) * dx)
    if phys_norm > 1e-300:
        xs = grid.x_min + (np.arange(lo, hi) + 1) * grid.dx
        x_mean = float(np.sum(xs * seg) * dx / phys_norm)
    else:
        x_mean = math.nan
    i = x_probe_idx - 1  # interior offset
    flux = float(np.imag(np.conj(u[i]) * (u[i + 1] - u[i - 1]) / (2.0 * dx)))
    return survival, norm_full, x_mean, flux


def evolve(
    psi0: WaveFunction,
    w: WashboardParams,
    pml: PmlParams,
    cfg: SolverConfig,
    ramp: RampSpec | None = None,
) -> EvolveResult:
    """Propagate psi0 under the washboard plus absorbing layer.

    With a ramp, the potential is rebuilt every step with the bias sampled
    at the step midpoint; otherwise the factorization is computed once.
    Observables are recorded every cfg.observe_every steps.
    """
    grid = psi0.grid
    n0 = norm_squared(psi0)
    if abs(n0 - 1.0) > 1e-6:
        raise ValueError(f"initial state must be normalized, norm^2 = {n0}")

    xs = grid.xs
    dx = grid.dx
    dt = cfg.dt
    m = grid.n_points - 2
    inv2 = 1.0 / dx**2
    a_off = -0.25j * dt * inv2

    phys = physical_region(pml, grid)
    i_lo = grid.index_near(phys.lo)
    i_hi = grid.index_near(phys.hi)
    phys_slice = (max(i_lo - 1, 0), i_hi)  # interior-array indices

    gamma0 = w.gamma if ramp is None else ramp_gamma(ramp, 0.0)
    pot0 = build_complex_potential(
        WashboardParams(w.V0, gamma0), pml, grid
    )
    u_max = float(np.max(np.abs(pot0.real[i_lo : i_hi + 1])))
    if dt * u_max > 0.5:
        warnings.warn(
            f"dt*max|U| = {dt * u_max:.2f} > 0.5 over the physical region; "
            "the fastest phase is under-resolved",
            stacklevel=2,
        )

    n_steps = int(math.ceil(cfg.t_end / dt - 1e-9))
    u = psi0.amplitudes[1:-1].astype(np.complex128)
    y = np.empty(m, np.complex128)
    out = np.empty(m, np.complex128)

    if ramp is None:
        w_arr = np.empty(m, np.complex128)
        inv_denom = np.empty(m, np.complex128)
        a_diag = 1.0 + 0.5j * dt * (inv2 + pot0[1:-1])
        bad = _kernels.thomas_factor(a_diag, a_off, w_arr, inv_denom)
        if bad:
            raise NumericalError(f"singular tridiagonal system at row {bad}")
    else:
        wash_base = -w.V0 * np.cos(xs) - 1j * absorber_profile(pml, xs)
        h_base = (inv2 + wash_base[1:-1]).astype(np.complex128)
        h_lin = (-w.V0 * xs[1:-1]).astype(np.float64)
        inv_denom = np.empty(m, np.complex128)
        half_idt = 0.5j * dt

    times, gammas, surv, nf, xm, fx = [], [], [], [], [], []

    def record(s):
        t = s * dt
        g = gamma0 if ramp is None else ramp_gamma(ramp, t)
        if not np.all(np.isfinite(u)):
            raise NumericalError(f"numerical blow-up at step {s}")
        x_top = math.pi - math.asin(min(g, 1.0))
        s_, n_, x_, f_ = _observe(u, grid, phys_slice, grid.index_near(x_top), dx)
        times.append(t)
        gammas.append(g)
        surv.append(min(s_, 1.0 + 1e-10))
        nf.append(n_)
        xm.append(x_)
        fx.append(f_)

    record(0)
    for s in range(1, n_steps + 1):
        if ramp is None:
            _kernels.cn_apply(u, w_arr, inv_denom, a_off, y, out)
        else:
            g_mid = ramp_gamma(ramp, (s - 0.5) * dt)
            _kernels.cn_apply_dynamic(
                u, h_base, h_lin, g_mid, half_idt, a_off, y, inv_denom, out
            )
        u, out = out, u
        if s % cfg.observe_every == 0 or s == n_steps:
            record(s)

    series = TimeSeries(
        times=np.asarray(times),
        gamma=np.asarray(gammas),
        survival=np.asarray(surv),
        norm_full=np.asarray(nf),
        x_mean=np.asarray(xm),
        flux_probe=np.asarray(fx),
    )
    full = np.zeros(grid.n_points, np.complex128)
    full[1:-1] = u
    return EvolveResult(series=series, final_state=WaveFunction(grid, full))


def gaussian_ground_state(w: WashboardParams, g: Grid1D) -> WaveFunction:
    """Gaussian matched to the well curvature, normalized on the grid."""
    omega_p = plasma_frequency(w)
    x_min, _ = well_extrema(w)
    xs = g.xs
    amps = np.exp(-0.5 * omega_p * (xs - x_min) ** 2).astype(np.complex128)
    amps[0] = 0.0
    amps[-1] = 0.0
    return renormalize(WaveFunction(g, amps))


def rayleigh_quotient(psi: WaveFunction, potential: np.ndarray) -> float:
    """<psi|H|psi>/<psi|psi> with H = -d^2/dx^2/2 + diag(potential)."""
    a = psi.amplitudes
    dx = psi.grid.dx
    d2 = np.zeros_like(a)
    d2[1:-1] = (a[2:] - 2.0 * a[1:-1] + a[:-2]) / dx**2
    h_psi = -0.5 * d2 + np.asarray(potential) * a
    num = float(np.trapezoid(np.real(np.conj(a) * h_psi), dx=dx))
    den = float(np.trapezoid(np.abs(a) ** 2, dx=dx))
    return num / den


def imaginary_time_relax(
    w: WashboardParams,
    g: Grid1D,
    region: Region | None = None,
    dtau: float = 0.5,
    tol: float = 1e-10,
    max_steps: int = 100_000,
) -> WaveFunction:
    """Lowest state of the well region via imaginary-time relaxation.

    Evolves d psi/d tau = -H psi with Dirichlet walls at the region edges
    (backward Euler, which damps every mode monotonically once the
    potential is shifted to be non-negative), renormalizing each step,
    until the Rayleigh quotient settles to tol per unit tau.  The result
    is embedded in the full grid with zeros outside the region.
    """
    x_well, x_top = well_extrema(w)
    if region is None:
        region = Region(x_well - math.pi, x_top)
    slack = 0.5 * g.dx
    if region.lo > x_well - math.pi + slack or region.hi < x_top - slack:
        raise ValueError(
            f"relaxation region [{region.lo}, {region.hi}] must contain the well "
            f"[{x_well - math.pi}, {x_top}]"
        )

    i0 = max(g.index_near(region.lo), 0)
    i1 = min(g.index_near(region.hi), g.n_points - 1)
    if i1 - i0 < 8:
        raise ValueError("relaxation region spans too few grid points")
    xs = g.xs[i0 : i1 + 1]
    dx = g.dx
    u_pot = -w.V0 * (np.cos(xs) + w.gamma * xs)
    shift = float(u_pot.min())
    msub = xs.size - 2

    off = -0.5 * dtau / dx**2
    ab = np.zeros((3, msub))
    ab[0, 1:] = off
    ab[1, :] = 1.0 + dtau * (1.0 / dx**2 + (u_pot[1:-1] - shift))
    ab[2, :-1] = off

    omega_p = plasma_frequency(w)
    u = np.exp(-0.5 * omega_p * (xs[1:-1] - x_well) ** 2)
    u /= math.sqrt(np.sum(u**2) * dx)

    def quotient(vec):
        full = np.concatenate(([0.0], vec, [0.0]))
        d2 = (full[2:] - 2.0 * full[1:-1] + full[:-2]) / dx**2
        h = -0.5 * d2 + u_pot[1:-1] * full[1:-1]
        return float(np.sum(full[1:-1] * h) * dx / (np.sum(full[1:-1] ** 2) * dx))

    e_prev = quotient(u)
    converged = False
    for _ in range(max_steps):
        u = solve_banded((1, 1), ab, u, check_finite=False)
        u /= math.sqrt(np.sum(u**2) * dx)
        e = quotient(u)
        if abs(e - e_prev) < tol * dtau:
            converged = True
            break
        e_prev = e
    if not converged:
        raise NumericalError(
            f"imaginary-time relaxation did not converge in {max_steps} steps; "
            f"last residual {abs(e - e_prev) / dtau:.3e}"
        )

    full = np.zeros(g.n_points, np.complex128)
    full[i0 + 1 : i1] = u
    return renormalize(WaveFunction(g, full))


def default_domain(
    w: WashboardParams,
    A: float = 1e-3,
    l_ext: float = 1e3,
    width: float = 1e3,
    dx: float = 0.05,
    sides: str = "right",
    x_min: float | None = None,
    x_max: float | None = None,
    x0: float | None = None,
) -> tuple[Grid1D, PmlParams]:
    """Default computational domain for a washboard run.

    The grid starts six periods left of the well, the absorbing layer
    onset sits eight periods beyond the barrier top, and the grid ends at
    the far edge of the layer.  Any of the geometric choices can be
    overridden.
    """
    x_well, x_top = well_extrema(w)
    if x0 is None:
        x0 = x_top + 8.0 * math.pi
    if x_min is None:
        x_min = x_well - 6.0 * math.pi
    if x_max is None:
        x_max = x0 + width
    n = int(round((x_max - x_min) / dx)) + 1
    grid = Grid1D(x_min, x_max, n)
    pml = PmlParams(A=A, l_ext=l_ext, x0=x0, width=width, sides=sides)
    return grid, pml
