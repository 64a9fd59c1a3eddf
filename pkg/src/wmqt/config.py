"""Experiment configuration: strict key=value files with dotted sections.

Format: UTF-8 text, one `key = value` per line, `#` starts a comment,
unknown and duplicate keys are rejected.  Every default that gets applied
is echoed so a run log always records the complete effective setup.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .absorber import PmlParams
from .errors import ConfigError
from .potentials import RampSpec, WashboardParams, well_extrema
from .propagator import SolverConfig, default_domain
from .state import Grid1D

__all__ = ["ExperimentConfig", "load_config", "parse_config_text", "MODES"]

MODES = ("evolve", "sweep", "ramp", "relax_after_measurement", "pml_check")

_FLOAT_KEYS = {
    "V0", "gamma",
    "ramp.gamma_start", "ramp.gamma_end", "ramp.T",
    "grid.x_min", "grid.x_max", "grid.dx",
    "pml.A", "pml.l_ext", "pml.width", "pml.x0",
    "solver.dt", "solver.t_end",
    "measurement.x_cut",
    "fit.window_lo", "fit.window_hi", "fit.survival_floor",
    "switching.bin_width",
}
_INT_KEYS = {"solver.observe_every"}
_LIST_KEYS = {"sweep.gammas", "pml_check.k_values"}
_STR_KEYS = {"mode", "pml.sides", "init.method", "output_dir"}
_ALL_KEYS = _FLOAT_KEYS | _INT_KEYS | _LIST_KEYS | _STR_KEYS

# keys consulted by each mode, beyond the common grid/pml/solver/output set
_COMMON = {
    "mode", "V0", "output_dir",
    "grid.x_min", "grid.x_max", "grid.dx",
    "pml.A", "pml.l_ext", "pml.width", "pml.x0", "pml.sides",
    "solver.dt", "solver.t_end", "solver.observe_every",
    "init.method",
    "fit.window_lo", "fit.window_hi", "fit.survival_floor",
}
_MODE_KEYS = {
    "evolve": _COMMON | {"gamma"},
    "sweep": _COMMON | {"sweep.gammas"},
    "ramp": _COMMON | {"ramp.gamma_start", "ramp.gamma_end", "ramp.T", "switching.bin_width"},
    "relax_after_measurement": _COMMON | {"gamma", "measurement.x_cut"},
    "pml_check": {
        "mode", "output_dir", "grid.dx",
        "pml.A", "pml.l_ext", "pml.width", "pml.sides",
        "solver.dt", "pml_check.k_values",
    },
}


def parse_config_text(text: str) -> dict[str, str]:
    """Raw key -> value strings; rejects syntax errors and duplicates."""
    entries: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key or not value:
            raise ConfigError(f"line {lineno}: empty key or value in {raw!r}")
        if key in entries:
            raise ConfigError(f"line {lineno}: duplicate config key {key!r}")
        entries[key] = value
    return entries


def _parse_float(key: str, value: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"key {key!r}: cannot parse {value!r} as a number") from None


def _parse_float_list(key: str, value: str) -> tuple[float, ...]:
    try:
        items = tuple(float(part) for part in value.split(",") if part.strip())
    except ValueError:
        raise ConfigError(f"key {key!r}: cannot parse {value!r} as a number list") from None
    if not items:
        raise ConfigError(f"key {key!r}: empty list")
    return items


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated configuration for one experiment run."""

    mode: str
    V0: float
    gamma: float | None
    sweep_gammas: tuple[float, ...]
    ramp: RampSpec | None
    grid_x_min: float | None
    grid_x_max: float | None
    grid_dx: float
    pml_A: float
    pml_l_ext: float
    pml_width: float
    pml_x0: float | None
    pml_sides: str
    solver: SolverConfig
    init_method: str
    x_cut: float | None
    fit_window: tuple[float, float] | None
    survival_floor: float
    switching_bin_width: float
    k_values: tuple[float, ...]
    output_dir: str
    applied_defaults: tuple[str, ...] = field(default=())
    unused_keys: tuple[str, ...] = field(default=())

    def washboard(self, gamma: float | None = None) -> WashboardParams:
        g = self.gamma if gamma is None else gamma
        if g is None:
            raise ConfigError("no bias value available for this run")
        return WashboardParams(self.V0, g)

    def domain(self, gamma: float) -> tuple[Grid1D, PmlParams]:
        """Grid and absorber for a run at the given bias, honoring overrides."""
        return default_domain(
            self.washboard(gamma),
            A=self.pml_A,
            l_ext=self.pml_l_ext,
            width=self.pml_width,
            dx=self.grid_dx,
            sides=self.pml_sides,
            x_min=self.grid_x_min,
            x_max=self.grid_x_max,
            x0=self.pml_x0,
        )

    def default_x_cut(self, gamma: float) -> float:
        if self.x_cut is not None:
            return self.x_cut
        return well_extrema(WashboardParams(self.V0, gamma))[1]


def load_config(path, mode: str | None = None) -> ExperimentConfig:
    """Read, type-check and validate a config file.

    `mode` (from the CLI subcommand) must agree with a `mode` key in the
    file when both are present.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            entries = parse_config_text(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None

    unknown = sorted(set(entries) - _ALL_KEYS)
    if unknown:
        raise ConfigError(f"unknown config key {unknown[0]!r}")

    file_mode = entries.get("mode")
    if file_mode is not None and file_mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}, got {file_mode!r}")
    if mode is None:
        if file_mode is None:
            raise ConfigError("no mode given (config key or CLI subcommand)")
        mode = file_mode
    elif file_mode is not None and file_mode != mode:
        raise ConfigError(f"config mode {file_mode!r} conflicts with subcommand {mode!r}")

    defaults: list[str] = []

    def get_float(key: str, default: float | None) -> float | None:
        if key in entries:
            return _parse_float(key, entries[key])
        if default is not None:
            defaults.append(f"{key} = {default!r} (default)")
        return default

    def get_str(key: str, default: str, allowed: tuple[str, ...]) -> str:
        if key in entries:
            value = entries[key]
        else:
            value = default
            defaults.append(f"{key} = {default} (default)")
        if value not in allowed:
            raise ConfigError(f"key {key!r} must be one of {allowed}, got {value!r}")
        return value

    V0 = get_float("V0", 2.0)
    gamma = get_float("gamma", None)
    if mode in ("evolve", "relax_after_measurement"):
        if gamma is None:
            raise ConfigError(f"mode {mode!r} requires key 'gamma'")

    try:
        if gamma is not None:
            WashboardParams(V0, gamma)
        else:
            WashboardParams(V0, 0.0)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    if "sweep.gammas" in entries:
        sweep_gammas = _parse_float_list("sweep.gammas", entries["sweep.gammas"])
    else:
        sweep_gammas = (0.45, 0.5, 0.55, 0.6)
        if mode == "sweep":
            defaults.append("sweep.gammas = 0.45, 0.5, 0.55, 0.6 (default)")
    for g in sweep_gammas:
        try:
            WashboardParams(V0, g)
        except ValueError as exc:
            raise ConfigError(f"sweep.gammas: {exc}") from None

    ramp = None
    if mode == "ramp":
        g0 = get_float("ramp.gamma_start", 0.0)
        g1 = get_float("ramp.gamma_end", 1.0)
        T = get_float("ramp.T", 2000.0)
        try:
            ramp = RampSpec(gamma_start=g0, gamma_end=g1, T=T)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    grid_x_min = get_float("grid.x_min", None)
    grid_x_max = get_float("grid.x_max", None)
    if mode == "pml_check" and (grid_x_min is not None or grid_x_max is not None):
        raise ConfigError("grid bounds are derived automatically for pml_check")
    grid_dx = get_float("grid.dx", 0.05)
    if not grid_dx > 0:
        raise ConfigError(f"grid.dx must be > 0, got {grid_dx}")

    pml_A = get_float("pml.A", 1e-3)
    pml_l_ext = get_float("pml.l_ext", 1e3)
    pml_width = get_float("pml.width", 1e3)
    pml_x0 = get_float("pml.x0", None)
    if pml_x0 is None and mode != "pml_check":
        defaults.append("pml.x0 = barrier top + 8*pi (default rule)")
    pml_sides = get_str("pml.sides", "right", ("right", "left", "both"))
    try:
        PmlParams(A=pml_A, l_ext=pml_l_ext, x0=0.0, width=pml_width, sides=pml_sides)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    dt = get_float("solver.dt", 0.005)
    if mode == "ramp" and "solver.t_end" not in entries:
        t_end = ramp.T
        defaults.append(f"solver.t_end = {t_end!r} (default: ramp.T)")
    else:
        t_end = get_float("solver.t_end", 1000.0)
    if "solver.observe_every" in entries:
        try:
            observe_every = int(entries["solver.observe_every"])
        except ValueError:
            raise ConfigError(
                f"key 'solver.observe_every': cannot parse {entries['solver.observe_every']!r} "
                "as an integer"
            ) from None
    else:
        observe_every = 200
        defaults.append("solver.observe_every = 200 (default)")
    try:
        solver = SolverConfig(dt=dt, t_end=t_end, observe_every=observe_every)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    init_method = get_str("init.method", "relax", ("relax", "gaussian"))

    x_cut = get_float("measurement.x_cut", None)
    if mode == "relax_after_measurement" and x_cut is None:
        defaults.append("measurement.x_cut = barrier top (default rule)")

    window_lo = get_float("fit.window_lo", None)
    window_hi = get_float("fit.window_hi", None)
    if (window_lo is None) != (window_hi is None):
        raise ConfigError("fit.window_lo and fit.window_hi must be given together")
    fit_window = None if window_lo is None else (window_lo, window_hi)

    survival_floor = get_float("fit.survival_floor", 1e-5)
    switching_bin_width = get_float("switching.bin_width", 0.01)
    if not switching_bin_width > 0:
        raise ConfigError(f"switching.bin_width must be > 0, got {switching_bin_width}")

    if "pml_check.k_values" in entries:
        k_values = _parse_float_list("pml_check.k_values", entries["pml_check.k_values"])
    else:
        k_values = (0.5, 1.0, 2.0, 3.0)
        if mode == "pml_check":
            defaults.append("pml_check.k_values = 0.5, 1.0, 2.0, 3.0 (default)")
    for k in k_values:
        if k <= 0:
            raise ConfigError(f"pml_check.k_values must be > 0, got {k}")

    if "output_dir" in entries:
        output_dir = entries["output_dir"]
    else:
        output_dir = "wmqt_out"
        defaults.append("output_dir = wmqt_out (default)")

    unused = tuple(sorted(set(entries) - _MODE_KEYS[mode]))

    return ExperimentConfig(
        mode=mode,
        V0=V0,
        gamma=gamma,
        sweep_gammas=sweep_gammas,
        ramp=ramp,
        grid_x_min=grid_x_min,
        grid_x_max=grid_x_max,
        grid_dx=grid_dx,
        pml_A=pml_A,
        pml_l_ext=pml_l_ext,
        pml_width=pml_width,
        pml_x0=pml_x0,
        pml_sides=pml_sides,
        solver=solver,
        init_method=init_method,
        x_cut=x_cut,
        fit_window=fit_window,
        survival_floor=survival_floor,
        switching_bin_width=switching_bin_width,
        k_values=k_values,
        output_dir=output_dir,
        applied_defaults=tuple(defaults),
        unused_keys=unused,
    )
