import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from wmqt.propagator import TimeSeries

settings.register_profile(
    "ci",
    derandomize=True,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("ci")


@pytest.fixture
def make_series():
    """Synthetic TimeSeries with placeholder diagnostics columns."""

    def build(times, survival, gamma=None):
        times = np.asarray(times, dtype=float)
        survival = np.asarray(survival, dtype=float)
        if gamma is None:
            gamma = np.zeros_like(times)
        else:
            gamma = np.asarray(gamma, dtype=float)
        zeros = np.zeros_like(times)
        return TimeSeries(
            times=times,
            gamma=gamma,
            survival=survival,
            norm_full=survival.copy(),
            x_mean=zeros,
            flux_probe=zeros,
        )

    return build
