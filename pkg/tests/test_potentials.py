import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import constants
from scipy.optimize import minimize_scalar

from wmqt.potentials import (
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


def numeric_extrema(p):
    """Well minimum and barrier top located by bounded scalar minimization,
    independent of the arcsin closed form."""
    lo = minimize_scalar(
        lambda x: washboard_eval(p, x), bounds=(-1.0, math.pi / 2), method="bounded",
        options={"xatol": 1e-12},
    )
    hi = minimize_scalar(
        lambda x: -washboard_eval(p, x), bounds=(math.pi / 2, math.pi + 1.0),
        method="bounded", options={"xatol": 1e-12},
    )
    return lo.x, hi.x


class TestWashboardEval:
    def test_untilted_minimum(self):
        assert washboard_eval(WashboardParams(1.0, 0.0), 0.0) == -1.0

    def test_untilted_barrier_top(self):
        assert washboard_eval(WashboardParams(1.0, 0.0), math.pi) == pytest.approx(1.0)

    def test_tilted_point_value(self):
        # -2*(cos(pi/6) + 0.5*pi/6), cross-checked against the extremum scan below
        val = washboard_eval(WashboardParams(2.0, 0.5), math.pi / 6)
        assert val == pytest.approx(-2.2556495831671763, rel=1e-12)

    @given(
        x=st.floats(min_value=-30.0, max_value=30.0),
        v0=st.floats(min_value=0.1, max_value=10.0),
        gamma=st.floats(min_value=0.0, max_value=1.0),
    )
    def test_tilted_periodicity(self, x, v0, gamma):
        p = WashboardParams(v0, gamma)
        lhs = washboard_eval(p, x + 2 * math.pi) - washboard_eval(p, x)
        assert lhs == pytest.approx(-2 * math.pi * v0 * gamma, abs=1e-9)


class TestCubicEval:
    def test_origin_is_minimum(self):
        assert cubic_eval(CubicParams(1.0, 1.0), 0.0) == 0.0

    def test_barrier_top_value(self):
        # top at x = omega_p^2/(3g); value equals the barrier height
        p = CubicParams(1.0, 1.0)
        assert cubic_eval(p, 1.0 / 3.0) == pytest.approx(1.0 / 54.0, rel=1e-12)

    def test_point_value(self):
        assert cubic_eval(CubicParams(1.0, 1.0), -1.0) == pytest.approx(1.5)


class TestBarrierHeights:
    def test_untilted(self):
        assert barrier_height_washboard(WashboardParams(3.0, 0.0)) == pytest.approx(6.0)

    def test_critical_bias(self):
        assert barrier_height_washboard(WashboardParams(1.0, 1.0)) == pytest.approx(0.0, abs=1e-12)

    def test_half_bias_value(self):
        # discriminates against the sqrt(1-gamma) variant, which gives 0.36700
        val = barrier_height_washboard(WashboardParams(1.0, 0.5))
        assert val == pytest.approx(0.68490, abs=1e-4)
        assert abs(val - 0.36700) > 0.3

    @pytest.mark.parametrize("gamma", [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9])
    def test_matches_numeric_extremum_difference(self, gamma):
        p = WashboardParams(1.7, gamma)
        x_lo, x_hi = numeric_extrema(p)
        oracle = washboard_eval(p, x_hi) - washboard_eval(p, x_lo)
        assert barrier_height_washboard(p) == pytest.approx(oracle, rel=1e-8)

    def test_strictly_decreasing_in_gamma(self):
        gammas = np.linspace(0.0, 1.0, 101)
        vals = [barrier_height_washboard(WashboardParams(1.0, g)) for g in gammas]
        assert np.all(np.diff(vals) < 0)

    def test_cubic_value(self):
        assert barrier_height_cubic(CubicParams(1.0, 1.0)) == pytest.approx(1.0 / 54.0)

    def test_cubic_brute_force_extremum(self):
        p = CubicParams(2.0, 1.0)
        xs = np.linspace(0.0, 1.0, 200001)
        vals = cubic_eval(p, xs)
        assert barrier_height_cubic(p) == pytest.approx(1.0 / 216.0, rel=1e-12)
        assert float(vals.max()) == pytest.approx(1.0 / 216.0, rel=1e-6)


class TestWellExtrema:
    def test_untilted(self):
        assert well_extrema(WashboardParams(1.0, 0.0)) == (0.0, math.pi)

    def test_half_bias(self):
        x_lo, x_hi = well_extrema(WashboardParams(1.0, 0.5))
        assert x_lo == pytest.approx(math.pi / 6, rel=1e-12)
        assert x_hi == pytest.approx(5 * math.pi / 6, rel=1e-12)

    def test_derivative_sign_change_scan(self):
        p = WashboardParams(1.0, 0.5)
        x_lo, x_hi = well_extrema(p)
        n_lo, n_hi = numeric_extrema(p)
        assert x_lo == pytest.approx(n_lo, abs=1e-8)
        assert x_hi == pytest.approx(n_hi, abs=1e-8)

    def test_merge_at_critical_tilt(self):
        x_lo, x_hi = well_extrema(WashboardParams(1.0, 1.0 - 1e-12))
        assert x_lo == pytest.approx(math.pi / 2, abs=1e-5)
        assert x_hi == pytest.approx(math.pi / 2, abs=1e-5)

    def test_no_well_at_critical(self):
        with pytest.raises(ValueError, match="no metastable well"):
            well_extrema(WashboardParams(1.0, 1.0))


class TestPlasmaFrequency:
    def test_untilted(self):
        assert plasma_frequency(WashboardParams(1.0, 0.0)) == pytest.approx(1.0)
        assert plasma_frequency(WashboardParams(4.0, 0.0)) == pytest.approx(2.0)

    def test_tilted_value(self):
        assert plasma_frequency(WashboardParams(1.0, 0.6)) == pytest.approx(
            0.8944271909999159, rel=1e-12
        )

    def test_matches_curvature_at_numeric_minimum(self):
        p = WashboardParams(1.0, 0.6)
        x_lo, _ = numeric_extrema(p)
        h = 1e-5
        curv = (
            washboard_eval(p, x_lo + h) - 2 * washboard_eval(p, x_lo) + washboard_eval(p, x_lo - h)
        ) / h**2
        assert plasma_frequency(p) == pytest.approx(math.sqrt(curv), rel=1e-5)

    def test_rejected_at_critical(self):
        with pytest.raises(ValueError):
            plasma_frequency(WashboardParams(1.0, 1.0))


class TestCubicFit:
    @pytest.mark.parametrize("gamma", [0.0, 0.3, 0.7])
    def test_round_trip_barrier(self, gamma):
        p = WashboardParams(2.0, gamma)
        fit = cubic_fit_from_washboard(p)
        assert barrier_height_cubic(fit) == pytest.approx(
            barrier_height_washboard(p), abs=1e-10
        )

    @pytest.mark.parametrize("gamma", [0.0, 0.3, 0.7])
    def test_round_trip_curvature(self, gamma):
        p = WashboardParams(2.0, gamma)
        fit = cubic_fit_from_washboard(p)
        assert fit.omega_p == pytest.approx(plasma_frequency(p), abs=1e-10)

    def test_untilted_closed_form(self):
        fit = cubic_fit_from_washboard(WashboardParams(1.0, 0.0))
        assert fit.omega_p == pytest.approx(1.0)
        assert fit.g == pytest.approx(1.0 / math.sqrt(108.0), rel=1e-12)

    def test_degenerate_barrier_rejected(self):
        with pytest.raises(ValueError, match="barrier too small"):
            cubic_fit_from_washboard(WashboardParams(1.0, 1.0 - 1e-10))


class TestRamp:
    def test_endpoints(self):
        r = RampSpec(0.0, 1.0, T=100.0)
        assert ramp_gamma(r, 0.0) == 0.0
        assert ramp_gamma(r, 100.0) == 1.0

    def test_midpoint(self):
        r = RampSpec(0.0, 1.0, T=100.0)
        assert ramp_gamma(r, 50.0) == pytest.approx(0.5)

    def test_clamped_past_end(self):
        r = RampSpec(0.0, 0.8, T=10.0)
        assert ramp_gamma(r, 25.0) == 0.8

    def test_negative_time_rejected(self):
        with pytest.raises(ValueError):
            ramp_gamma(RampSpec(0.0, 1.0, T=1.0), -0.1)

    @given(st.lists(st.floats(min_value=0.0, max_value=200.0), min_size=2, max_size=20))
    def test_monotone(self, times):
        r = RampSpec(0.1, 0.9, T=120.0)
        times = sorted(times)
        vals = [ramp_gamma(r, t) for t in times]
        assert all(b >= a for a, b in zip(vals, vals[1:]))

    def test_invalid_bounds(self):
        with pytest.raises(ValueError):
            RampSpec(0.5, 0.4, T=1.0)
        with pytest.raises(ValueError):
            RampSpec(0.0, 1.0, T=0.0)


class TestPhysicalUnits:
    def test_doubling_capacitance(self):
        a = physical_to_normalized(PhysicalJunction(1e-6, 1e-12))
        b = physical_to_normalized(PhysicalJunction(1e-6, 2e-12))
        assert b[0] / a[0] == pytest.approx(2.0, rel=1e-12)
        assert b[1] / a[1] == pytest.approx(2.0, rel=1e-12)

    def test_doubling_critical_current(self):
        a = physical_to_normalized(PhysicalJunction(1e-6, 1e-12))
        b = physical_to_normalized(PhysicalJunction(2e-6, 1e-12))
        assert b[0] / a[0] == pytest.approx(2.0, rel=1e-12)
        assert b[1] == pytest.approx(a[1], rel=1e-12)

    def test_equal_energies_give_unit_v0(self):
        C = 1e-12
        phi0_bar = constants.h / (2 * constants.e) / (2 * math.pi)
        E_C = constants.hbar**2 / (C * phi0_bar**2)
        I0 = E_C / phi0_bar
        v0, _ = physical_to_normalized(PhysicalJunction(I0, C))
        assert v0 == pytest.approx(1.0, rel=1e-12)

    def test_positive_inputs_required(self):
        with pytest.raises(ValueError):
            PhysicalJunction(0.0, 1e-12)


class TestParamValidation:
    def test_gamma_range(self):
        with pytest.raises(ValueError, match="gamma must lie"):
            WashboardParams(1.0, 1.2)
        with pytest.raises(ValueError, match="gamma must lie"):
            WashboardParams(1.0, -0.1)

    def test_v0_positive(self):
        with pytest.raises(ValueError):
            WashboardParams(0.0, 0.5)

    def test_cubic_positive(self):
        with pytest.raises(ValueError):
            CubicParams(0.0, 1.0)
        with pytest.raises(ValueError):
            CubicParams(1.0, 0.0)
