"""Quantum escape from metastable washboard potentials.

1D time-dependent Schrodinger solver (Crank-Nicolson) with an imaginary
absorbing boundary layer, plus tooling for tunneling decay rates,
post-measurement relaxation and switching-current statistics.
"""

from .absorber import PmlParams, absorber_profile, build_complex_potential, reflection_coefficient
from .analysis import (
    DecayFit,
    SwitchingDistribution,
    auto_fit_decay,
    detect_relaxation_time,
    fit_decay_rate,
    instantaneous_rate,
    project_null_measurement,
    switching_distribution_from_ramp,
    switching_distribution_rate_model,
    wkb_rate,
)
from .config import ExperimentConfig, load_config
from .errors import AnalysisError, ConfigError, NumericalError
from .potentials import (
    CubicParams,
    PhysicalJunction,
    RampSpec,
    WashboardParams,
    barrier_height_cubic,
    barrier_height_washboard,
    cubic_eval,
    cubic_fit_from_washboard,
    physical_to_normalized,
    plasma_frequency,
    ramp_gamma,
    washboard_eval,
    well_extrema,
)
from .propagator import (
    EvolveResult,
    SolverConfig,
    TimeSeries,
    default_domain,
    evolve,
    gaussian_ground_state,
    imaginary_time_relax,
    rayleigh_quotient,
    step,
)
from .runner import run_experiment
from .state import (
    Grid1D,
    Region,
    WaveFunction,
    norm_squared,
    position_mean,
    probability_current,
    renormalize,
)

__version__ = "0.1.0"
