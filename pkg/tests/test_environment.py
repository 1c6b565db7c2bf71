import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import box
from oracles import sampled_los
from risplan.environment import (
    Building,
    InvalidSceneError,
    MeasurementGrid,
    Scene,
    SiteConfig,
    build_grid,
    check_site_heights,
    distances,
    generate_ris_candidates,
    is_los,
    los_mask,
)


class TestScene:
    def test_degenerate_bounds(self):
        with pytest.raises(InvalidSceneError):
            Scene(bounds=(0, 0, 0, 10))

    def test_building_outside_bounds(self):
        with pytest.raises(InvalidSceneError):
            Scene(bounds=(0, 0, 10, 10), buildings=(box(5, 5, 10, 2, 3.0),))

    def test_non_positive_height(self):
        with pytest.raises(InvalidSceneError):
            box(0, 0, 1, 1, 0.0)

    def test_self_intersecting_footprint(self):
        bowtie = np.array([[0, 0], [2, 2], [2, 0], [0, 2]], dtype=float)
        with pytest.raises(InvalidSceneError):
            Building(bowtie, 5.0)

    def test_clockwise_footprint_is_reoriented(self):
        cw = np.array([[0, 0], [0, 1], [1, 1], [1, 0]], dtype=float)
        b = Building(cw, 5.0)
        assert b.polygon.exterior.is_ccw

    def test_height_at(self):
        s = Scene((0, 0, 10, 10), (box(2, 2, 2, 2, 7.0),))
        assert s.height_at(3, 3) == 7.0
        assert s.height_at(8, 8) == 0.0


class TestBuildGrid:
    @pytest.mark.parametrize(
        "w, d, res, X, Y",
        [(100, 100, 10, 10, 10), (105, 100, 10, 11, 10), (1, 1, 10, 1, 1)],
    )
    def test_dimensions(self, w, d, res, X, Y):
        g = build_grid(Scene((0, 0, w, d)), res)
        assert (g.X, g.Y) == (X, Y)

    def test_exact_division_starts_at_bounds(self):
        g = build_grid(Scene((0, 0, 100, 100)), 10)
        assert g.x_centers()[0] == 5.0
        assert g.y_centers()[-1] == 95.0

    def test_rejects_bad_resolution(self):
        with pytest.raises(ValueError):
            build_grid(Scene((0, 0, 10, 10)), 0.0)

    @settings(max_examples=200, deadline=None)
    @given(
        w=st.floats(0.5, 500),
        d=st.floats(0.5, 500),
        res=st.floats(0.3, 50),
        x0=st.floats(-1e3, 1e3),
        y0=st.floats(-1e3, 1e3),
    )
    def test_centers_inside_bounds(self, w, d, res, x0, y0):
        s = Scene((x0, y0, x0 + w, y0 + d))
        g = build_grid(s, res)
        pts = g.points()
        assert len(pts) == g.X * g.Y
        assert s.contains_xy(pts[:, 0], pts[:, 1]).all()

    def test_points_are_y_major(self):
        g = MeasurementGrid(origin=(0, 0), resolution=1, X=3, Y=2)
        pts = g.points()
        assert pts[1, 0] == 1.5 and pts[1, 1] == 0.5
        assert pts[3, 0] == 0.5 and pts[3, 1] == 1.5


class TestCandidates:
    def test_eight_by_eight_grid_count(self, scene):
        c = generate_ris_candidates(scene, 8, 8, 40.0)
        assert len(c) == 64
        assert [p.ris_id for p in c] == list(range(64))

    def test_single_is_center(self):
        c = generate_ris_candidates(Scene((0, 0, 40, 20)), 1, 1, 40.0)
        assert c[0].position == (20.0, 10.0)

    def test_bottom_left_row_major(self):
        c = generate_ris_candidates(Scene((0, 0, 1, 1)), 2, 2, 5.0)
        assert [p.position for p in c] == [(0.25, 0.25), (0.75, 0.25), (0.25, 0.75), (0.75, 0.75)]

    def test_zero_rows_disables(self, scene):
        assert generate_ris_candidates(scene, 0, 8, 40.0) == []

    @given(rows=st.integers(1, 12), cols=st.integers(1, 12))
    def test_scan_order_and_bounds(self, rows, cols):
        s = Scene((10, -5, 70, 35))
        c = generate_ris_candidates(s, rows, cols, 40.0)
        assert len(c) == rows * cols
        keys = [(p.position[1], p.position[0]) for p in c]
        assert keys == sorted(keys)
        xy = np.array([p.position for p in c])
        assert s.contains_xy(xy[:, 0], xy[:, 1]).all()


class TestDistances:
    def test_equal_heights(self):
        assert distances((0, 0, 10), (30, 40, 10)) == (50.0, 50.0)

    def test_vertical(self):
        assert distances((0, 0, 0), (0, 0, 5)) == (0.0, 5.0)

    def test_slant(self):
        d2, d3 = distances((0, 0, 30), (100, 0, 1.5))
        assert d2 == 100.0
        assert d3 == pytest.approx(math.sqrt(100**2 + 28.5**2), abs=1e-12)
        assert d3 == pytest.approx(103.98, abs=5e-3)

    @given(st.lists(st.floats(-1e4, 1e4), min_size=6, max_size=6))
    def test_3d_not_shorter(self, v):
        d2, d3 = distances(v[:3], v[3:])
        assert d3 >= d2


class TestLos:
    def test_empty_scene(self, flat_scene):
        assert is_los(flat_scene, (1, 1, 1.5), (90, 90, 30))

    def test_box_blocks_low_segment(self):
        b = box(45, -5, 10, 10, 20.0)
        s = Scene((-10, -10, 110, 10), (b,))
        a, c = (0, 0, 1.5), (100, 0, 1.5)
        assert sampled_los([b], a, c) is False
        assert is_los(s, a, c) is False

    def test_box_below_high_segment(self):
        b = box(45, -5, 10, 10, 20.0)
        s = Scene((-10, -10, 110, 10), (b,))
        a, c = (0, 0, 50), (100, 0, 50)
        assert sampled_los([b], a, c) is True
        assert is_los(s, a, c) is True

    def test_coincident_points(self, flat_scene):
        with pytest.raises(ValueError):
            is_los(flat_scene, (1, 1, 1), (1, 1, 1))

    def test_below_ground(self, flat_scene):
        with pytest.raises(ValueError):
            is_los(flat_scene, (1, 1, -1), (2, 2, 1))

    def test_touching_wall_is_clear(self):
        s = Scene((0, 0, 20, 20), (box(5, 5, 5, 5, 10.0),))
        # runs exactly along the south wall
        assert is_los(s, (0, 5, 2), (20, 5, 2))
        # endpoint on the wall
        assert is_los(s, (0, 7, 2), (5, 7, 2))

    def test_skimming_roof_is_clear(self):
        s = Scene((0, 0, 20, 20), (box(5, 5, 5, 5, 10.0),))
        assert is_los(s, (0, 7, 10), (20, 7, 10))
        assert not is_los(s, (0, 7, 9.999), (20, 7, 9.999))

    def test_vertical_segment_inside_footprint(self):
        s = Scene((0, 0, 20, 20), (box(5, 5, 5, 5, 10.0),))
        assert not is_los(s, (7, 7, 1.5), (7, 7, 40))
        assert is_los(s, (2, 2, 1.5), (2, 2, 40))

    def test_concave_footprint(self):
        # U shape opening north; a segment through the notch is clear
        u = Building(np.array([[0, 0], [9, 0], [9, 9], [6, 9], [6, 3], [3, 3], [3, 9], [0, 9]], float), 10.0)
        s = Scene((-1, -1, 10, 10), (u,))
        assert is_los(s, (4.5, 4, 2), (4.5, 9.5, 2))
        assert not is_los(s, (1.5, -0.5, 2), (1.5, 9.5, 2))

    def test_mask_broadcasts(self):
        s = Scene((0, 0, 20, 20), (box(5, 5, 5, 5, 10.0),))
        dst = np.array([[15, 15, 1.5], [15, 1, 1.5], [1, 15, 1.5]])
        assert los_mask(s, (1, 1, 1.5), dst).tolist() == [False, True, True]

    @settings(max_examples=150, deadline=None)
    @given(st.lists(st.floats(0.5, 19.5), min_size=6, max_size=6))
    def test_symmetric(self, v):
        s = Scene((0, 0, 20, 20), (box(5, 5, 5, 5, 10.0), box(12, 2, 3, 10, 4.0)))
        a = (v[0], v[1], v[2])
        b = (v[3], v[4], v[5])
        if a == b:
            return
        assert is_los(s, a, b) == is_los(s, b, a)

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.floats(0.0, 20.0), min_size=4, max_size=4), st.floats(0.01, 30))
    def test_above_tallest_building(self, v, extra):
        s = Scene((0, 0, 20, 20), (box(5, 5, 5, 5, 10.0), box(12, 2, 3, 10, 4.0)))
        z = s.max_height + extra
        assert is_los(s, (v[0], v[1], z), (v[2], v[3], z + 1))


def test_site_height_warning():
    inside = SiteConfig("a", (0, 0), 30.0)
    outside = SiteConfig("b", (0, 0), 60.0)
    with pytest.warns(UserWarning, match="site b"):
        assert check_site_heights([inside, outside]) == ["b"]
