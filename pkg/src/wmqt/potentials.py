"""Washboard and cubic potentials, their critical points and calibrations.

Conventions: the tilted washboard is U(x) = -V0*(cos x + gamma*x), so the
metastable wells sit near x = arcsin(gamma) + 2*pi*k and escape proceeds
toward +x for gamma > 0.  V0 is the barrier-scale energy in units of the
charging energy, gamma the bias current in units of the critical current.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import constants

__all__ = [
    "WashboardParams",
    "CubicParams",
    "RampSpec",
    "PhysicalJunction",
    "washboard_eval",
    "cubic_eval",
    "barrier_height_washboard",
    "barrier_height_cubic",
    "well_extrema",
    "plasma_frequency",
    "cubic_fit_from_washboard",
    "ramp_gamma",
    "physical_to_normalized",
]


@dataclass(frozen=True)
class WashboardParams:
    """Normalized washboard potential: barrier scale V0 > 0, bias gamma in [0, 1]."""

    V0: float
    gamma: float

    def __post_init__(self):
        if not self.V0 > 0:
            raise ValueError(f"V0 must be > 0, got {self.V0}")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in [0,1], got {self.gamma}")


@dataclass(frozen=True)
class CubicParams:
    """Cubic well -g*x^3 + omega_p^2*x^2/2 with minimum at the origin."""

    g: float
    omega_p: float

    def __post_init__(self):
        if not self.g > 0:
            raise ValueError(f"g must be > 0, got {self.g}")
        if not self.omega_p > 0:
            raise ValueError(f"omega_p must be > 0, got {self.omega_p}")


@dataclass(frozen=True)
class RampSpec:
    """Linear bias ramp gamma_start -> gamma_end over duration T."""

    gamma_start: float = 0.0
    gamma_end: float = 1.0
    T: float = 1000.0
    shape: str = "linear"

    def __post_init__(self):
        if not 0.0 <= self.gamma_start <= self.gamma_end <= 1.0:
            raise ValueError(
                f"need 0 <= gamma_start <= gamma_end <= 1, got "
                f"[{self.gamma_start}, {self.gamma_end}]"
            )
        if not self.T > 0:
            raise ValueError(f"ramp duration T must be > 0, got {self.T}")
        if self.shape != "linear":
            raise ValueError(f"unsupported ramp shape {self.shape!r}")


@dataclass(frozen=True)
class PhysicalJunction:
    """Junction in SI units: critical current (A) and capacitance (F)."""

    critical_current_I0: float
    capacitance_C: float

    def __post_init__(self):
        if not self.critical_current_I0 > 0:
            raise ValueError("critical current must be > 0")
        if not self.capacitance_C > 0:
            raise ValueError("capacitance must be > 0")


def washboard_eval(p: WashboardParams, x):
    """U(x) = -V0*(cos x + gamma*x).  Accepts scalars or arrays."""
    return -p.V0 * (np.cos(x) + p.gamma * x)


def cubic_eval(p: CubicParams, x):
    """U_c(x) = -g*x^3 + omega_p^2*x^2/2.  Accepts scalars or arrays."""
    return -p.g * x**3 + 0.5 * p.omega_p**2 * x**2


def barrier_height_washboard(p: WashboardParams) -> float:
    """Barrier height 2*V0*(sqrt(1-gamma^2) - gamma*arccos(gamma)).

    Equals U(x_top) - U(x_min) of the principal well; vanishes at the
    critical bias gamma = 1.
    """
    g = p.gamma
    return 2.0 * p.V0 * (math.sqrt(1.0 - g * g) - g * math.acos(g))


def barrier_height_cubic(p: CubicParams) -> float:
    """Barrier height omega_p^6 / (54 g^2) of the cubic well."""
    return p.omega_p**6 / (54.0 * p.g**2)


def well_extrema(p: WashboardParams) -> tuple[float, float]:
    """(x_min, x_top) of the principal metastable cell.

    x_min = arcsin(gamma) is the well bottom, x_top = pi - arcsin(gamma)
    the barrier top.  Both merge at x = pi/2 as gamma -> 1.
    """
    if p.gamma >= 1.0:
        raise ValueError("no metastable well at gamma >= 1")
    a = math.asin(p.gamma)
    return a, math.pi - a


def plasma_frequency(p: WashboardParams) -> float:
    """Small-oscillation frequency sqrt(V0*sqrt(1-gamma^2)) at the well bottom."""
    if p.gamma >= 1.0:
        raise ValueError("no well curvature at gamma >= 1")
    return math.sqrt(p.V0 * math.sqrt(1.0 - p.gamma**2))


def cubic_fit_from_washboard(p: WashboardParams) -> CubicParams:
    """Cubic parameters matching the washboard curvature and barrier height.

    omega_p is taken from the well curvature and g is fixed by requiring
    equal barrier heights: g = omega_p^3 / sqrt(54*dU).
    """
    if p.gamma >= 1.0:
        raise ValueError("no metastable well at gamma >= 1")
    omega_p = plasma_frequency(p)
    dU = barrier_height_washboard(p)
    if dU < 1e-12:
        raise ValueError(f"barrier too small to calibrate a cubic fit (dU={dU})")
    g = omega_p**3 / math.sqrt(54.0 * dU)
    return CubicParams(g=g, omega_p=omega_p)


def ramp_gamma(r: RampSpec, t: float) -> float:
    """Bias at time t: linear interpolation, clamped to gamma_end past T."""
    if t < 0:
        raise ValueError(f"ramp time must be >= 0, got {t}")
    if t >= r.T:
        return r.gamma_end
    return r.gamma_start + (r.gamma_end - r.gamma_start) * t / r.T


def physical_to_normalized(j: PhysicalJunction) -> tuple[float, float]:
    """(V0, time unit in seconds) for a physical junction.

    E_J = I0*Phi0/(2*pi), E_C = hbar^2/(C*(Phi0/(2*pi))^2), V0 = E_J/E_C,
    and one normalized time unit is hbar/E_C.
    """
    phi0_bar = constants.h / (2.0 * constants.e) / (2.0 * math.pi)
    E_J = j.critical_current_I0 * phi0_bar
    E_C = constants.hbar**2 / (j.capacitance_C * phi0_bar**2)
    return E_J / E_C, constants.hbar / E_C
