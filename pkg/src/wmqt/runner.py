"""Experiment orchestration and CSV output.

Every mode writes comma-separated files with one header line; floats are
rendered with repr(), the shortest decimal that round-trips, so repeated
runs of the same configuration produce byte-identical files.  Independent
runs (sweep bias points, reflection momenta) fan out to a process pool
and results are written in parameter order regardless of completion
order.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .absorber import PmlParams, default_reflection_grid, reflection_coefficient
from .analysis import (
    DecayFit,
    auto_fit_decay,
    detect_relaxation_time,
    fit_decay_rate,
    project_null_measurement,
    switching_distribution_from_ramp,
    wkb_rate,
)
from .config import ExperimentConfig
from .errors import AnalysisError, ConfigError, NumericalError
from .propagator import EvolveResult, TimeSeries, evolve, gaussian_ground_state, imaginary_time_relax
from .state import WaveFunction

__all__ = ["run_experiment"]

TIME_SERIES_HEADER = ["t", "gamma", "survival", "norm_full", "x_mean", "flux_at_xstar"]
RATES_HEADER = ["gamma", "rate_fitted", "rate_wkb", "residual_rms", "window_lo", "window_hi"]
SWITCHING_HEADER = ["gamma_bin_center", "pdf", "cumulative"]
PML_HEADER = ["k", "A", "l_ext", "width", "reflection"]
RELAXATION_HEADER = ["gamma", "knee_time", "rate_reference", "rate_post_knee", "rate_ratio", "x_cut"]


def _fmt(value) -> str:
    return repr(float(value))


def write_csv(path: Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_time_series(path: Path, ts: TimeSeries) -> None:
    rows = zip(ts.times, ts.gamma, ts.survival, ts.norm_full, ts.x_mean, ts.flux_probe)
    write_csv(path, TIME_SERIES_HEADER, rows)


def _initial_state(cfg: ExperimentConfig, gamma: float, grid) -> WaveFunction:
    w = cfg.washboard(gamma)
    if cfg.init_method == "gaussian":
        return gaussian_ground_state(w, grid)
    return imaginary_time_relax(w, grid)


def _fit(cfg: ExperimentConfig, ts: TimeSeries) -> DecayFit:
    if cfg.fit_window is not None:
        return fit_decay_rate(ts, cfg.fit_window)
    return auto_fit_decay(ts, survival_floor=cfg.survival_floor)


def _single_run(cfg: ExperimentConfig, gamma: float, ramp=None) -> EvolveResult:
    grid, pml = cfg.domain(gamma)
    psi0 = _initial_state(cfg, gamma, grid)
    return evolve(psi0, cfg.washboard(gamma), pml, cfg.solver, ramp=ramp)


def _sweep_worker(args) -> tuple[float, TimeSeries | None, DecayFit | None, str | None]:
    cfg, gamma = args
    try:
        result = _single_run(cfg, gamma)
    except NumericalError as exc:
        return gamma, None, None, str(exc)
    try:
        fit = _fit(cfg, result.series)
    except (AnalysisError, ValueError) as exc:
        return gamma, result.series, None, str(exc)
    return gamma, result.series, fit, None


def _pml_worker(args) -> tuple[float, float]:
    cfg, k = args
    pml = PmlParams(
        A=cfg.pml_A, l_ext=cfg.pml_l_ext, x0=0.0, width=cfg.pml_width, sides="right"
    )
    grid = default_reflection_grid(pml, k, dx=cfg.grid_dx)
    return k, reflection_coefficient(pml, k, grid)


def _map_ordered(worker, jobs, threads: int):
    """Apply worker to jobs, optionally in a process pool; preserves order."""
    if threads <= 1 or len(jobs) <= 1:
        return [worker(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=min(threads, len(jobs))) as pool:
        return list(pool.map(worker, jobs))


class _RunLog:
    def __init__(self):
        self.lines: list[str] = []

    def add(self, line: str):
        self.lines.append(line)
        print(line)

    def write(self, path: Path):
        path.write_text("\n".join(self.lines) + "\n", encoding="utf-8")


def run_experiment(
    cfg: ExperimentConfig,
    threads: int | None = None,
    plot: bool = False,
    out_dir: str | None = None,
) -> int:
    """Execute the configured mode; returns 0 on success.

    Numerical or analysis failures raise (the CLI maps them to exit
    codes); partial CSV outputs written before the failure are kept, with
    failed sweep points flagged by an all-nan sentinel row.
    """
    threads = threads if threads is not None else (os.cpu_count() or 1)
    out = Path(out_dir if out_dir is not None else cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)

    log = _RunLog()
    log.add(f"mode = {cfg.mode}")
    for line in cfg.applied_defaults:
        log.add(line)
    for key in cfg.unused_keys:
        log.add(f"warning: key {key!r} is not used by mode {cfg.mode!r}")

    try:
        if cfg.mode == "evolve":
            _run_evolve(cfg, out, log, plot)
        elif cfg.mode == "sweep":
            _run_sweep(cfg, out, log, threads, plot)
        elif cfg.mode == "ramp":
            _run_ramp(cfg, out, log, plot)
        elif cfg.mode == "relax_after_measurement":
            _run_relax_after_measurement(cfg, out, log, plot)
        elif cfg.mode == "pml_check":
            _run_pml_check(cfg, out, log, threads, plot)
        else:
            raise ConfigError(f"unknown mode {cfg.mode!r}")
    finally:
        log.write(out / "run.log")
    return 0


def _run_evolve(cfg, out, log, plot):
    gamma = cfg.gamma
    result = _single_run(cfg, gamma)
    write_time_series(out / "time_series.csv", result.series)
    log.add(f"gamma = {gamma}: final survival = {result.series.survival[-1]!r}")
    try:
        fit = _fit(cfg, result.series)
    except (AnalysisError, ValueError) as exc:
        log.add(f"decay fit skipped: {exc}")
    else:
        rate_w = wkb_rate(cfg.washboard(gamma))
        write_csv(
            out / "rates.csv",
            RATES_HEADER,
            [(gamma, fit.rate, rate_w, fit.residual_rms, fit.window[0], fit.window[1])],
        )
        log.add(f"fitted rate = {fit.rate!r}, wkb rate = {rate_w!r}")
    if plot:
        from . import plotting

        plotting.plot_survival([(f"gamma={gamma:g}", result.series)], out / "survival.png")
        grid, pml = cfg.domain(gamma)
        plotting.plot_potential(cfg.washboard(gamma), pml, grid, out / "potential.png")


def _run_sweep(cfg, out, log, threads, plot):
    gammas = sorted(cfg.sweep_gammas)
    results = _map_ordered(_sweep_worker, [(cfg, g) for g in gammas], threads)

    rows = []
    numerical_failure = None
    analysis_failure = None
    series_by_gamma = []
    for gamma, series, fit, error in results:
        if series is not None:
            write_time_series(out / f"time_series_gamma{gamma:g}.csv", series)
            series_by_gamma.append((gamma, series))
        if error is not None and series is None:
            rows.append((gamma, math.nan, math.nan, math.nan, math.nan, math.nan))
            log.add(f"gamma = {gamma}: numerical failure: {error}")
            numerical_failure = error
            continue
        rate_w = wkb_rate(cfg.washboard(gamma))
        if fit is None:
            rows.append((gamma, math.nan, rate_w, math.nan, math.nan, math.nan))
            log.add(f"gamma = {gamma}: fit failure: {error}")
            analysis_failure = error
        else:
            rows.append((gamma, fit.rate, rate_w, fit.residual_rms, *fit.window))
            log.add(f"gamma = {gamma}: rate = {fit.rate!r}, wkb = {rate_w!r}")
    write_csv(out / "rates.csv", RATES_HEADER, rows)

    if plot and series_by_gamma:
        from . import plotting

        plotting.plot_survival(
            [(f"gamma={g:g}", s) for g, s in series_by_gamma], out / "survival.png"
        )
        good = [(g, r[1], r[2]) for g, r in zip(gammas, rows) if math.isfinite(r[1])]
        if good:
            plotting.plot_rates(good, out / "rates.png")

    if numerical_failure is not None:
        raise NumericalError(numerical_failure)
    if analysis_failure is not None:
        raise AnalysisError(analysis_failure)


def _run_ramp(cfg, out, log, plot):
    result = _single_run(cfg, cfg.ramp.gamma_start, ramp=cfg.ramp)
    write_time_series(out / "time_series.csv", result.series)
    dist = switching_distribution_from_ramp(
        result.series, cfg.ramp, bin_width=cfg.switching_bin_width
    )
    cum = dist.cumulative()
    write_csv(
        out / "switching.csv",
        SWITCHING_HEADER,
        zip(dist.gamma_bins, dist.pdf, cum),
    )
    log.add(f"total switch probability = {dist.total_switch_probability!r}")
    log.add(f"final survival = {result.series.survival[-1]!r}")
    if plot:
        from . import plotting

        plotting.plot_survival([("ramp", result.series)], out / "survival.png")
        plotting.plot_switching(dist, out / "switching.png")


def _run_relax_after_measurement(cfg, out, log, plot):
    gamma = cfg.gamma
    reference = _single_run(cfg, gamma)
    write_time_series(out / "time_series_reference.csv", reference.series)
    fit_ref = _fit(cfg, reference.series)
    log.add(f"reference rate = {fit_ref.rate!r}")
    if fit_ref.rate <= 0.0:
        raise AnalysisError("reference run shows no decay; relaxation knee undefined")

    x_cut = cfg.default_x_cut(gamma)
    projected = project_null_measurement(reference.final_state, x_cut)
    grid, pml = cfg.domain(gamma)
    post = evolve(projected, cfg.washboard(gamma), pml, cfg.solver)
    write_time_series(out / "time_series_measured.csv", post.series)

    knee = detect_relaxation_time(post.series, fit_ref.rate)
    lo = 2.0 * knee
    post_fit = fit_decay_rate(post.series, (lo, post.series.times[-1]))
    ratio = post_fit.rate / fit_ref.rate if fit_ref.rate > 0 else math.nan
    write_csv(
        out / "relaxation.csv",
        RELAXATION_HEADER,
        [(gamma, knee, fit_ref.rate, post_fit.rate, ratio, x_cut)],
    )
    log.add(f"knee time = {knee!r}, post-knee rate = {post_fit.rate!r}, ratio = {ratio!r}")
    if plot:
        from . import plotting

        plotting.plot_survival(
            [("reference", reference.series), ("after measurement", post.series)],
            out / "survival.png",
        )


def _run_pml_check(cfg, out, log, threads, plot):
    if cfg.pml_sides != "right":
        raise ConfigError("pml_check supports pml.sides = right only")
    ks = sorted(cfg.k_values)
    results = _map_ordered(_pml_worker, [(cfg, k) for k in ks], threads)
    rows = [(k, cfg.pml_A, cfg.pml_l_ext, cfg.pml_width, r) for k, r in results]
    write_csv(out / "pml_report.csv", PML_HEADER, rows)
    for k, r in results:
        log.add(f"k = {k}: reflection = {r!r}")
    if plot:
        from . import plotting

        plotting.plot_pml(rows, out / "pml_reflection.png")
