import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from risplan.propagation import (
    BeamAngles,
    RisPanel,
    UmaParams,
    far_field_distance,
    pattern_gain,
    ris_ffbc_pl,
    uma_breakpoint,
    uma_pl_los,
    uma_pl_nlos,
)

# frozen from standalone scalar evaluations of the closed forms
BP_3500 = 677.1351132522486
BP_800 = 154.77374017194256
LOS_100M = 83.2544377545301
NLOS_100M = 103.24408106804464
FFBC_TABLE_PANEL = 104.0907257280935
REF_PANEL = RisPanel(m_elements=102, n_elements=100, d_m=0.01, d_n=0.01, amplitude=0.9)

uma_params = st.builds(
    lambda fc, h_bs, frac: UmaParams(fc=fc, h_bs=h_bs, h_ut=1.0 + frac * (h_bs - 1.0)),
    st.floats(0.5, 100.0),
    st.floats(10.0, 150.0),
    st.floats(0.01, 0.9),
)


class TestBreakpoint:
    def test_3500(self):
        assert uma_breakpoint(UmaParams(3.5, 30, 1.5)) == pytest.approx(BP_3500, rel=1e-12)
        assert uma_breakpoint(UmaParams(3.5, 30, 1.5)) == pytest.approx(677.2, abs=0.1)

    def test_800(self):
        assert uma_breakpoint(UmaParams(0.8, 30, 1.5)) == pytest.approx(BP_800, rel=1e-12)

    def test_zero_effective_height(self):
        with pytest.raises(ValueError):
            uma_breakpoint(UmaParams(3.5, 30, 1.0))

    def test_invalid_params(self):
        with pytest.raises(ValueError):
            UmaParams(0.0, 30, 1.5)
        with pytest.raises(ValueError):
            UmaParams(3.5, 0.5, 1.5)


class TestUma:
    def test_los_spot_value(self):
        assert uma_pl_los(100.0, UmaParams(3.5, 30, 1.5)) == pytest.approx(LOS_100M, abs=1e-9)

    def test_nlos_spot_value(self):
        assert uma_pl_nlos(100.0, UmaParams(3.5, 30, 1.5)) == pytest.approx(NLOS_100M, abs=1e-9)

    def test_continuity_at_breakpoint(self):
        p = UmaParams(3.5, 30, 1.5)
        bp = uma_breakpoint(p)
        dh = p.h_bs - p.h_ut
        d3 = math.sqrt(bp**2 + dh**2)
        pl2 = 28 + 40 * math.log10(d3) + 20 * math.log10(p.fc) - 9 * math.log10(bp**2 + dh**2)
        assert uma_pl_los(bp, p) == pytest.approx(pl2, abs=1e-9)

    def test_near_slope(self):
        # doubling d3D in the near branch adds 22 log10(2)
        p = UmaParams(3.5, 30, 1.5)
        dh = p.h_bs - p.h_ut
        d3 = 60.0
        a = uma_pl_los(math.sqrt(d3**2 - dh**2), p)
        b = uma_pl_los(math.sqrt((2 * d3) ** 2 - dh**2), p)
        assert b - a == pytest.approx(22 * math.log10(2), abs=1e-9)

    def test_clamp_below_10m(self):
        p = UmaParams(3.5, 30, 1.5)
        assert uma_pl_los(2.0, p) == uma_pl_los(10.0, p)
        assert uma_pl_nlos(0.0, p) == uma_pl_nlos(10.0, p)

    def test_far_warning(self):
        with pytest.warns(RuntimeWarning):
            uma_pl_los(6000.0, UmaParams(3.5, 30, 1.5))

    def test_ut_offset_vanishes_at_1_5(self):
        p = UmaParams(3.5, 30, 1.5)
        d3 = math.sqrt(400**2 + 28.5**2)
        expected = 13.54 + 39.08 * math.log10(d3) + 20 * math.log10(3.5)
        assert uma_pl_nlos(400.0, p) == pytest.approx(max(expected, uma_pl_los(400.0, p)), abs=1e-9)

    def test_array_matches_scalar(self):
        p = UmaParams(2.1, 35, 1.5)
        d = np.linspace(5, 4000, 257)
        np.testing.assert_array_equal(uma_pl_nlos(d, p), [uma_pl_nlos(float(x), p) for x in d])

    @settings(max_examples=300, deadline=None)
    @given(uma_params, st.floats(1.0, 5000.0))
    def test_nlos_dominates(self, p, d):
        assert uma_pl_nlos(d, p) >= uma_pl_los(d, p)

    @settings(max_examples=300, deadline=None)
    @given(uma_params, st.floats(1.0, 4999.0), st.floats(0.0, 1000.0))
    def test_monotone(self, p, d, step):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            assert uma_pl_los(d + step, p) >= uma_pl_los(d, p)
            assert uma_pl_nlos(d + step, p) >= uma_pl_nlos(d, p)

    @settings(max_examples=300, deadline=None)
    @given(uma_params)
    def test_continuity_random(self, p):
        bp = uma_breakpoint(p)
        if bp < 10.0:
            return
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            below = uma_pl_los(bp, p)
            above = uma_pl_los(np.nextafter(bp, np.inf), p)
        assert abs(above - below) <= 1e-6

    def test_pure(self):
        p = UmaParams(0.8, 40, 1.5)
        assert uma_pl_nlos(321.0, p) == uma_pl_nlos(321.0, p)


class TestRisFfbc:
    def test_reference_panel_spot_value(self):
        pl = ris_ffbc_pl(100.0, 100.0, 0.0857, REF_PANEL, BeamAngles())
        assert pl == pytest.approx(FFBC_TABLE_PANEL, abs=1e-9)

    def test_swap_hops(self):
        assert ris_ffbc_pl(37.0, 212.0, 0.1, REF_PANEL) == ris_ffbc_pl(212.0, 37.0, 0.1, REF_PANEL)

    def test_double_second_hop(self):
        a = ris_ffbc_pl(50.0, 80.0, 0.1, REF_PANEL)
        b = ris_ffbc_pl(50.0, 160.0, 0.1, REF_PANEL)
        assert b - a == pytest.approx(20 * math.log10(2), abs=1e-9)

    def test_angle_behind_panel(self):
        with pytest.raises(ValueError):
            ris_ffbc_pl(10.0, 10.0, 0.1, REF_PANEL, BeamAngles(theta_t=math.pi / 2))

    def test_pattern(self):
        assert pattern_gain(math.pi / 4, 1.5) == pytest.approx(math.cos(math.pi / 4) ** 3)
        assert pattern_gain(0.3, 0.0) == 1.0

    def test_bad_distances(self):
        with pytest.raises(ValueError):
            ris_ffbc_pl(0.0, 10.0, 0.1, REF_PANEL)

    def test_panel_validation(self):
        with pytest.raises(ValueError):
            RisPanel(amplitude=0.0)
        with pytest.raises(ValueError):
            RisPanel(m_elements=0)

    def test_array_hops(self):
        d2 = np.array([30.0, 60.0, 120.0])
        out = ris_ffbc_pl(50.0, d2, 0.1, REF_PANEL)
        assert out.shape == (3,)
        assert np.allclose(np.diff(out), 20 * math.log10(2))


class TestFarField:
    def test_reference_panel_3500(self):
        assert far_field_distance(REF_PANEL, 0.0857) == pytest.approx(2 * 1.02**2 / 0.0857, rel=1e-12)
        assert far_field_distance(REF_PANEL, 0.0857) == pytest.approx(24.3, abs=0.05)

    def test_reference_panel_800(self):
        assert far_field_distance(REF_PANEL, 0.375) == pytest.approx(5.5488, abs=1e-9)

    def test_single_element(self):
        p = RisPanel(m_elements=1, n_elements=1, d_m=0.01, d_n=0.01)
        assert far_field_distance(p, 0.1) == pytest.approx(0.002, abs=1e-15)
