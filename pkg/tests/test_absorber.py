import math

import numpy as np
import pytest

from wmqt.absorber import (
    PmlParams,
    absorber_profile,
    build_complex_potential,
    default_reflection_grid,
    physical_region,
    reflection_coefficient,
)
from wmqt.potentials import WashboardParams
from wmqt.state import Grid1D

PAPER_CAL = dict(A=1e-3, l_ext=1e3, width=1e3)


class TestProfile:
    def test_zero_at_onset(self):
        p = PmlParams(x0=3.0, **PAPER_CAL)
        assert absorber_profile(p, 3.0) == 0.0

    def test_calibration_point(self):
        # exp(1) * (1e-3 * 1e3)^6 = e at the far edge of the layer
        p = PmlParams(x0=0.0, **PAPER_CAL)
        assert absorber_profile(p, 1e3) == pytest.approx(math.e, rel=1e-12)

    def test_off_when_amplitude_zero(self):
        p = PmlParams(A=0.0, l_ext=10.0, x0=0.0, width=10.0)
        xs = np.linspace(-5.0, 10.0, 64)
        assert np.all(absorber_profile(p, xs) == 0.0)

    def test_zero_outside_support(self):
        p = PmlParams(A=1.0, l_ext=5.0, x0=2.0, width=5.0)
        assert absorber_profile(p, 1.0) == 0.0
        assert absorber_profile(p, 7.5) == 0.0

    def test_nonnegative(self):
        p = PmlParams(A=0.3, l_ext=7.0, x0=-1.0, width=12.0)
        xs = np.linspace(-20.0, 20.0, 400)
        assert np.all(absorber_profile(p, xs) >= 0.0)

    def test_left_side_mirrors(self):
        right = PmlParams(A=0.2, l_ext=5.0, x0=0.0, width=5.0, sides="right")
        left = PmlParams(A=0.2, l_ext=5.0, x0=0.0, width=5.0, sides="left")
        assert absorber_profile(left, -2.0) == pytest.approx(absorber_profile(right, 2.0))

    def test_first_six_fd_derivatives_vanish_at_onset(self):
        p = PmlParams(x0=0.0, **PAPER_CAL)
        h = 0.05
        vals = absorber_profile(p, h * np.arange(8))
        deriv = vals.copy()
        for order in range(1, 7):
            deriv = np.diff(deriv) / h
            assert abs(deriv[0]) <= 1e-8, f"order-{order} derivative too large"


class TestComplexPotential:
    def grid(self):
        return Grid1D(-10.0, 50.0, 1201)

    def test_absorber_off(self):
        pot = build_complex_potential(
            WashboardParams(2.0, 0.4),
            PmlParams(A=0.0, l_ext=10.0, x0=20.0, width=30.0),
            self.grid(),
        )
        assert np.all(pot.imag == 0.0)

    def test_onset_node(self):
        g = self.grid()
        w = WashboardParams(2.0, 0.4)
        pml = PmlParams(A=0.3, l_ext=10.0, x0=20.0, width=30.0)
        pot = build_complex_potential(w, pml, g)
        i = g.index_near(20.0)
        assert pot.imag[i] == pytest.approx(0.0, abs=1e-12)
        assert pot.real[i] == pytest.approx(-2.0 * (math.cos(g.xs[i]) + 0.4 * g.xs[i]))

    def test_imag_nonpositive(self):
        pot = build_complex_potential(
            WashboardParams(2.0, 0.4),
            PmlParams(A=0.3, l_ext=10.0, x0=20.0, width=30.0),
            self.grid(),
        )
        assert np.all(pot.imag <= 0.0)

    def test_paper_calibration_peak(self):
        w = WashboardParams(2.0, 0.4)
        pml = PmlParams(x0=30.0, **PAPER_CAL)
        g = Grid1D(-10.0, 1030.0, 20801)
        pot = build_complex_potential(w, pml, g)
        assert np.max(np.abs(pot.imag)) == pytest.approx(math.e, rel=1e-9)

    def test_layer_outside_grid_rejected(self):
        with pytest.raises(ValueError, match="PML region outside grid"):
            build_complex_potential(
                WashboardParams(2.0, 0.4),
                PmlParams(A=0.3, l_ext=10.0, x0=45.0, width=30.0),
                self.grid(),
            )

    def test_physical_region(self):
        g = self.grid()
        pml = PmlParams(A=0.3, l_ext=10.0, x0=20.0, width=30.0)
        r = physical_region(pml, g)
        assert r.lo == g.x_min
        assert r.hi == 20.0


class TestReflection:
    def test_hard_wall_reflects_everything(self):
        pml = PmlParams(A=0.0, l_ext=30.0, x0=0.0, width=30.0)
        g = default_reflection_grid(pml, 1.0)
        assert reflection_coefficient(pml, 1.0, g) >= 0.99

    def test_good_absorber_reflects_little(self):
        pml = PmlParams(A=0.05, l_ext=40.0, x0=0.0, width=40.0)
        g = default_reflection_grid(pml, 1.0)
        assert reflection_coefficient(pml, 1.0, g) < 1e-4

    def test_impedance_mismatch_reflects(self):
        # very large amplitude over a short layer: wave bounces at the onset
        pml = PmlParams(A=5.0, l_ext=40.0, x0=0.0, width=40.0)
        g = default_reflection_grid(pml, 1.0)
        assert reflection_coefficient(pml, 1.0, g) > 0.5

    def test_amplitude_scan_is_u_shaped(self):
        amps = [1e-2, 5e-2, 3e-1, 1.0]
        rs = []
        for a in amps:
            pml = PmlParams(A=a, l_ext=40.0, x0=0.0, width=40.0)
            g = default_reflection_grid(pml, 1.0)
            rs.append(reflection_coefficient(pml, 1.0, g))
        i_min = int(np.argmin(rs))
        assert 0 < i_min < len(rs) - 1
        assert all(rs[i] > rs[i + 1] for i in range(i_min))
        assert all(rs[i] < rs[i + 1] for i in range(i_min, len(rs) - 1))

    def test_packet_must_fit(self):
        pml = PmlParams(A=0.05, l_ext=40.0, x0=0.0, width=40.0)
        g = Grid1D(-20.0, 40.0, 1201)  # free region much shorter than 9 sigma
        with pytest.raises(ValueError):
            reflection_coefficient(pml, 1.0, g)

    def test_invalid_momentum(self):
        pml = PmlParams(A=0.05, l_ext=40.0, x0=0.0, width=40.0)
        g = default_reflection_grid(pml, 1.0)
        with pytest.raises(ValueError):
            reflection_coefficient(pml, 0.0, g)


class TestParams:
    def test_validation(self):
        with pytest.raises(ValueError):
            PmlParams(A=-1.0)
        with pytest.raises(ValueError):
            PmlParams(l_ext=0.0)
        with pytest.raises(ValueError):
            PmlParams(width=-2.0)
        with pytest.raises(ValueError):
            PmlParams(sides="up")
