"""Figure rendering for run reports (written next to the CSV output)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .absorber import PmlParams, absorber_profile
from .potentials import WashboardParams, washboard_eval
from .state import Grid1D

__all__ = ["plot_survival", "plot_rates", "plot_switching", "plot_pml", "plot_potential"]

_FIGSIZE = (6.4, 4.0)


def plot_survival(labeled_series, path) -> None:
    """Survival probability versus time on a log scale, one line per run."""
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    for label, ts in labeled_series:
        ax.semilogy(ts.times, np.maximum(ts.survival, 1e-300), label=label)
    ax.set_xlabel("t (normalized)")
    ax.set_ylabel("survival probability")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def plot_rates(rows, path) -> None:
    """Fitted and semiclassical escape rates versus bias."""
    gammas = [r[0] for r in rows]
    fitted = [r[1] for r in rows]
    wkb = [r[2] for r in rows]
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    ax.semilogy(gammas, fitted, "o-", label="fitted")
    ax.semilogy(gammas, wkb, "s--", label="WKB")
    ax.set_xlabel("bias gamma")
    ax.set_ylabel("escape rate")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def plot_switching(dist, path) -> None:
    """Switching-current probability density over bias bins."""
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    ax.bar(dist.gamma_bins, dist.pdf, width=dist.bin_width, align="center", alpha=0.7)
    ax.set_xlabel("bias gamma")
    ax.set_ylabel("switching pdf")
    ax.grid(True, alpha=0.3)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def plot_pml(rows, path) -> None:
    """Reflection coefficient of the absorbing layer versus packet momentum."""
    ks = [r[0] for r in rows]
    refl = [max(r[4], 1e-300) for r in rows]
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    ax.semilogy(ks, refl, "o-")
    ax.set_xlabel("packet momentum k")
    ax.set_ylabel("reflection coefficient")
    ax.grid(True, alpha=0.3)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def plot_potential(w: WashboardParams, pml: PmlParams, grid: Grid1D, path) -> None:
    """Washboard potential with the imaginary absorber profile overlaid."""
    xs = grid.xs
    show = xs <= pml.x0 + min(pml.width, 50.0)
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    ax.plot(xs[show], washboard_eval(w, xs[show]), label="U(x)")
    ax.plot(xs[show], -absorber_profile(pml, xs[show]), "--", label="-W(x)")
    ax.set_xlabel("x")
    ax.set_ylabel("potential")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
