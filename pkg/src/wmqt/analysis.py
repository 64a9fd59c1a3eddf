"""Decay-rate extraction, relaxation detection, null measurement and
switching-current statistics."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import AnalysisError
from .potentials import (
    RampSpec,
    WashboardParams,
    barrier_height_washboard,
    plasma_frequency,
)
from .propagator import TimeSeries
from .state import WaveFunction, renormalize

__all__ = [
    "DecayFit",
    "SwitchingDistribution",
    "fit_decay_rate",
    "instantaneous_rate",
    "detect_relaxation_time",
    "project_null_measurement",
    "wkb_rate",
    "switching_distribution_from_ramp",
    "switching_distribution_rate_model",
    "auto_fit_decay",
]


@dataclass(frozen=True)
class DecayFit:
    """Least-squares exponential fit ln P = intercept - rate * t."""

    rate: float
    intercept: float
    window: tuple[float, float]
    residual_rms: float


@dataclass(frozen=True)
class SwitchingDistribution:
    """Probability density of the switching bias over gamma bins.

    gamma_bins are bin centers of uniform width; the pdf integrates to
    total_switch_probability exactly (rectangle rule per bin).
    """

    gamma_bins: np.ndarray
    pdf: np.ndarray
    total_switch_probability: float

    @property
    def bin_width(self) -> float:
        if len(self.gamma_bins) > 1:
            return float(self.gamma_bins[1] - self.gamma_bins[0])
        return math.nan

    def cumulative(self) -> np.ndarray:
        return np.cumsum(self.pdf) * self.bin_width


def fit_decay_rate(ts: TimeSeries, window: tuple[float, float]) -> DecayFit:
    """Fit -d ln P/dt over the window; needs >= 10 samples with P > 0."""
    t_lo, t_hi = window
    if not t_lo < t_hi:
        raise ValueError(f"fit window must satisfy t_lo < t_hi, got {window}")
    mask = (ts.times >= t_lo) & (ts.times <= t_hi)
    if int(np.count_nonzero(mask)) < 10:
        raise ValueError(f"fewer than 10 samples in fit window {window}")
    p = ts.survival[mask]
    if np.any(p <= 0.0):
        raise ValueError("window reaches noise floor: nonpositive survival")
    t = ts.times[mask]
    logp = np.log(p)
    slope, intercept = np.polyfit(t, logp, 1)
    resid = logp - (slope * t + intercept)
    return DecayFit(
        rate=max(-float(slope), 0.0),
        intercept=float(intercept),
        window=(float(t_lo), float(t_hi)),
        residual_rms=float(np.sqrt(np.mean(resid**2))),
    )


def instantaneous_rate(ts: TimeSeries) -> np.ndarray:
    """-d ln P/dt by centered differences at each interior sample.

    The returned array aligns with ts.times[1:-1].
    """
    if np.any(ts.survival <= 0.0):
        raise ValueError("instantaneous rate needs strictly positive survival")
    logp = np.log(ts.survival)
    return -(logp[2:] - logp[:-2]) / (ts.times[2:] - ts.times[:-2])


def detect_relaxation_time(
    ts: TimeSeries,
    gamma_asymptotic_rate: float,
    fraction: float = 0.9,
    sustained: int = 5,
) -> float:
    """Earliest time the escape rate reaches fraction * asymptotic rate.

    The crossing must hold for `sustained` consecutive samples; this is
    the knee marking the end of the post-measurement relaxation.
    """
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"fraction must lie in (0,1), got {fraction}")
    if not gamma_asymptotic_rate > 0.0:
        raise ValueError("asymptotic rate must be > 0")
    rates = instantaneous_rate(ts)
    t_mid = ts.times[1:-1]
    above = rates >= fraction * gamma_asymptotic_rate
    run = 0
    for i, ok in enumerate(above):
        run = run + 1 if ok else 0
        if run >= sustained:
            return float(t_mid[i - sustained + 1])
    raise AnalysisError("no relaxation detected within series")


def project_null_measurement(psi: WaveFunction, x_cut: float) -> WaveFunction:
    """State after a measurement that found the system still trapped.

    Zeroes every amplitude at x >= x_cut and renormalizes; idempotent.
    """
    keep = psi.grid.xs < x_cut
    amps = np.where(keep, psi.amplitudes, 0.0)
    inside = float(np.sum(np.abs(amps) ** 2) * psi.grid.dx)
    if inside <= 0.0:
        raise ValueError("measurement found particle outside")
    return renormalize(WaveFunction(psi.grid, amps))


def wkb_rate(w: WashboardParams) -> float:
    """Cubic-barrier semiclassical escape rate from the washboard well.

    Gamma = (omega_p/2pi) * sqrt(864*pi*dU/omega_p) * exp(-36*dU/(5*omega_p))
    with the barrier height dU and plasma frequency omega_p of the tilted
    washboard (hbar = 1).
    """
    if w.gamma >= 1.0:
        raise ValueError("no metastable well at gamma >= 1")
    dU = barrier_height_washboard(w)
    if dU <= 0.0:
        raise ValueError(f"barrier height must be > 0, got {dU}")
    om = plasma_frequency(w)
    ratio = dU / om
    return om / (2.0 * math.pi) * math.sqrt(864.0 * math.pi * ratio) * math.exp(-7.2 * ratio)


def switching_distribution_from_ramp(
    ts: TimeSeries, ramp: RampSpec, bin_width: float = 0.01
) -> SwitchingDistribution:
    """Switching pdf -dP/dgamma extracted from a ramped evolution.

    Survival decrements between consecutive samples are accumulated into
    uniform gamma bins, so the pdf integrates exactly to the total
    switched probability.  Negative decrements (numerical jitter) are
    clipped to zero and reported via a warning when they exceed 1e-6.
    """
    if not ramp.gamma_end > ramp.gamma_start:
        raise ValueError("ramp must be strictly increasing")
    dp = ts.survival[:-1] - ts.survival[1:]
    clipped = float(-np.sum(dp[dp < 0.0]))
    if clipped > 1e-6:
        warnings.warn(
            f"non-monotone survival: clipped {clipped:.3e} of negative increments",
            stacklevel=2,
        )
    dp = np.clip(dp, 0.0, None)
    g_mid = 0.5 * (ts.gamma[:-1] + ts.gamma[1:])
    moving = ts.gamma[1:] > ts.gamma[:-1]

    n_bins = max(int(math.ceil((ramp.gamma_end - ramp.gamma_start) / bin_width - 1e-9)), 1)
    edges = ramp.gamma_start + bin_width * np.arange(n_bins + 1)
    idx = np.clip(
        np.floor((g_mid[moving] - ramp.gamma_start) / bin_width).astype(int), 0, n_bins - 1
    )
    mass = np.bincount(idx, weights=dp[moving], minlength=n_bins)
    return SwitchingDistribution(
        gamma_bins=0.5 * (edges[:-1] + edges[1:]),
        pdf=mass / bin_width,
        total_switch_probability=float(np.sum(mass)),
    )


def switching_distribution_rate_model(
    ramp: RampSpec, rate_fn, n_bins: int = 100
) -> SwitchingDistribution:
    """First-passage pdf p(gamma) = Gamma/v * exp(-int Gamma/v) for a ramp.

    v = d gamma/dt is the ramp speed; the exponent is accumulated by
    trapezoid over the bin edges and per-bin probabilities telescope, so
    switched plus surviving probability is exactly one.
    """
    if n_bins < 1:
        raise ValueError("n_bins must be >= 1")
    v = (ramp.gamma_end - ramp.gamma_start) / ramp.T
    if v <= 0.0:
        raise ValueError("ramp speed must be > 0")
    edges = np.linspace(ramp.gamma_start, ramp.gamma_end, n_bins + 1)
    rates = np.asarray([rate_fn(g) for g in edges], dtype=float)
    if np.any(rates < 0.0):
        raise ValueError("rate_fn must be >= 0 on the ramp interval")
    dgam = np.diff(edges)
    integ = np.concatenate(([0.0], np.cumsum(0.5 * (rates[1:] + rates[:-1]) * dgam))) / v
    surv = np.exp(-integ)
    mass = surv[:-1] - surv[1:]
    return SwitchingDistribution(
        gamma_bins=0.5 * (edges[:-1] + edges[1:]),
        pdf=mass / dgam,
        total_switch_probability=float(1.0 - surv[-1]),
    )


def auto_fit_decay(ts: TimeSeries, survival_floor: float = 1e-5) -> DecayFit:
    """Asymptotic decay fit with an automatic window.

    Samples below the survival floor are discarded, a provisional fit over
    the last three quarters seeds the knee detection, and the final window
    starts one knee-length past the knee so the transient cannot bias the
    rate.  Falls back to the provisional window when no knee is found.
    """
    keep = ts.survival > survival_floor
    n_keep = int(np.argmin(keep)) if not keep.all() else len(keep)
    if n_keep < 12:
        raise AnalysisError("too few samples above the survival floor to fit")
    t = ts.times[:n_keep]
    sub = TimeSeries(
        times=t,
        gamma=ts.gamma[:n_keep],
        survival=ts.survival[:n_keep],
        norm_full=ts.norm_full[:n_keep],
        x_mean=ts.x_mean[:n_keep],
        flux_probe=ts.flux_probe[:n_keep],
    )
    t_lo = t[0] + 0.25 * (t[-1] - t[0])
    fit = fit_decay_rate(sub, (t_lo, t[-1]))
    if fit.rate <= 0.0:
        return fit
    try:
        knee = detect_relaxation_time(sub, fit.rate)
    except AnalysisError:
        return fit
    lo = 2.0 * knee
    if np.count_nonzero((t >= lo) & (t <= t[-1])) >= 10 and lo < t[-1]:
        fit = fit_decay_rate(sub, (lo, t[-1]))
    return fit
