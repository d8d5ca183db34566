"""Conductive-grid construction: thresholding, geometry, electrodes."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wavegates import (
    Channel,
    ConductiveGrid,
    ConfigError,
    Disc,
    GeometrySpec,
    Junction,
    RGBImage,
    ThresholdSpec,
    place_electrodes,
    synthesize,
    threshold_mask,
)
from wavegates.imgio import load_pgm


def rgb(px: np.ndarray) -> RGBImage:
    return RGBImage(width=px.shape[1], height=px.shape[0], pixels=px)


def brute_force_channel(w, h, start, end, width):
    """Independent point-to-segment distance rasterization."""
    ax, ay = start
    bx, by = end
    out = np.zeros((h, w), dtype=bool)
    for y in range(h):
        for x in range(w):
            dx, dy = bx - ax, by - ay
            seg2 = dx * dx + dy * dy
            if seg2 == 0.0:
                d2 = (x - ax) ** 2 + (y - ay) ** 2
                out[y, x] = d2 <= (width / 2.0) ** 2
                continue
            t = ((x - ax) * dx + (y - ay) * dy) / seg2
            if t < 0.0 or t > 1.0:
                continue
            px, py = ax + t * dx, ay + t * dy
            out[y, x] = (x - px) ** 2 + (y - py) ** 2 <= (width / 2.0) ** 2
    return out


class TestThreshold:
    def test_strict_per_channel_bounds(self):
        # one pixel per boundary case around the default (40, 19, 19)
        px = np.array(
            [
                [[41, 20, 20], [40, 20, 20], [41, 19, 20]],
                [[41, 20, 19], [255, 255, 255], [0, 0, 0]],
                [[42, 21, 21], [41, 255, 20], [41, 20, 255]],
            ],
            dtype=np.uint8,
        )
        grid = threshold_mask(rgb(px))
        expected = np.array(
            [[True, False, False], [False, True, False], [True, True, True]]
        )
        assert np.array_equal(grid.mask, expected)

    def test_custom_spec(self):
        px = np.zeros((2, 2, 3), dtype=np.uint8)
        px[0, 0] = (200, 200, 200)
        px[0, 1] = (100, 200, 200)
        grid = threshold_mask(rgb(px), ThresholdSpec(r_min=150, g_min=0, b_min=0))
        assert grid.mask[0, 0] and not grid.mask[0, 1]
        assert grid.conductive_count == 1

    @pytest.mark.parametrize("bad", [{"r_min": -1}, {"g_min": 256}, {"b_min": 1000}])
    def test_bounds_validation(self, bad):
        with pytest.raises(ConfigError):
            ThresholdSpec(**bad)

    @given(
        r=st.integers(0, 255),
        g=st.integers(0, 255),
        b=st.integers(0, 255),
        spec=st.tuples(st.integers(0, 255), st.integers(0, 255), st.integers(0, 255)),
    )
    def test_single_pixel_oracle(self, r, g, b, spec):
        px = np.array([[[r, g, b]]], dtype=np.uint8)
        grid = threshold_mask(rgb(px), ThresholdSpec(*spec))
        assert bool(grid.mask[0, 0]) == (r > spec[0] and g > spec[1] and b > spec[2])


class TestGeometry:
    @pytest.mark.parametrize(
        "start,end,width",
        [
            ((5, 10), (55, 10), 5),
            ((5, 5), (50, 25), 4),
            ((30, 2), (30, 28), 7),
            ((12, 12), (12, 12), 6),
        ],
    )
    def test_channel_matches_brute_force(self, start, end, width):
        spec = GeometrySpec((Channel(start=start, end=end, width=width),))
        grid = synthesize(60, 30, spec)
        assert np.array_equal(grid.mask, brute_force_channel(60, 30, start, end, width))

    def test_disc_matches_brute_force(self):
        grid = synthesize(30, 30, GeometrySpec((Disc(center=(14, 15), radius=6.5),)))
        expected = np.zeros((30, 30), dtype=bool)
        for y in range(30):
            for x in range(30):
                expected[y, x] = (x - 14) ** 2 + (y - 15) ** 2 <= 6.5**2
        assert np.array_equal(grid.mask, expected)

    def test_junction_is_union_of_arm_channels(self):
        j = Junction(center=(30, 30), arm_length=20, arm_width=5, angles=(0, 120, 240))
        grid = synthesize(60, 60, GeometrySpec((j,)))
        expected = np.zeros((60, 60), dtype=bool)
        for ang in (0, 120, 240):
            rad = math.radians(ang)
            end = (30 + 20 * math.cos(rad), 30 + 20 * math.sin(rad))
            expected |= brute_force_channel(60, 60, (30, 30), end, 5)
        assert np.array_equal(grid.mask, expected)

    def test_shapes_union(self):
        a = Channel(start=(2, 5), end=(30, 5), width=3)
        b = Disc(center=(20, 12), radius=4)
        both = synthesize(40, 20, GeometrySpec((a, b)))
        only_a = synthesize(40, 20, GeometrySpec((a,)))
        only_b = synthesize(40, 20, GeometrySpec((b,)))
        assert np.array_equal(both.mask, only_a.mask | only_b.mask)

    def test_out_of_bounds_primitive_rejected(self):
        with pytest.raises(ConfigError, match="exceeds"):
            synthesize(20, 20, GeometrySpec((Disc(center=(19, 10), radius=3),)))
        # snug fit is allowed: footprint reaches exactly the last node center
        synthesize(20, 20, GeometrySpec((Disc(center=(10, 10), radius=9.5),)))

    def test_from_obj_round_trip_and_errors(self):
        spec = GeometrySpec.from_obj(
            [
                {"type": "channel", "start": [0, 4], "end": [9, 4], "width": 3},
                {"type": "disc", "center": [5, 5], "radius": 2},
                {
                    "type": "junction",
                    "center": [5, 5],
                    "arm_length": 3,
                    "arm_width": 1,
                    "angles": [0, 90],
                },
            ]
        )
        assert len(spec.primitives) == 3
        with pytest.raises(ConfigError, match="unknown type"):
            GeometrySpec.from_obj([{"type": "blob"}])
        with pytest.raises(ConfigError):
            GeometrySpec.from_obj([{"type": "disc", "center": [1, 2]}])

    def test_empty_and_bad_dims(self):
        with pytest.raises(ConfigError):
            synthesize(0, 10, GeometrySpec(()))
        grid = synthesize(10, 10, GeometrySpec(()))
        assert grid.conductive_count == 0


class TestConductiveGrid:
    def test_mask_is_read_only(self):
        grid = ConductiveGrid(np.ones((3, 3), dtype=bool))
        with pytest.raises(ValueError):
            grid.mask[0, 0] = False

    def test_counts_and_bounds(self):
        mask = np.zeros((4, 6), dtype=bool)
        mask[1, 2] = mask[2, 3] = True
        grid = ConductiveGrid(mask)
        assert (grid.width, grid.height) == (6, 4)
        assert grid.conductive_count == 2
        assert grid.is_conductive(2, 1) and not grid.is_conductive(0, 0)
        assert not grid.is_conductive(-1, 0) and not grid.is_conductive(6, 0)

    def test_mask_hash_sensitivity(self):
        mask = np.zeros((5, 5), dtype=bool)
        mask[2, 2] = True
        a = ConductiveGrid(mask.copy())
        mask[2, 3] = True
        b = ConductiveGrid(mask.copy())
        assert a.mask_hash() != b.mask_hash()
        assert a.mask_hash() == ConductiveGrid(a.mask.copy()).mask_hash()
        # dimensions participate, not just the flattened bits
        c = ConductiveGrid(a.mask.reshape(1, 25).copy())
        assert a.mask_hash() != c.mask_hash()

    def test_to_pgm_round_trip(self, tmp_path):
        mask = np.random.default_rng(3).random((7, 9)) < 0.5
        grid = ConductiveGrid(mask)
        path = tmp_path / "mask.pgm"
        grid.to_pgm(path)
        back = load_pgm(path)
        assert np.array_equal(back == 255, mask)

    def test_rejects_bad_shapes(self):
        with pytest.raises(ValueError):
            ConductiveGrid(np.ones((3,), dtype=bool))
        with pytest.raises(ValueError):
            ConductiveGrid(np.ones((0, 3), dtype=bool))


class TestElectrodes:
    def test_placement_and_lookup(self):
        grid = ConductiveGrid(np.ones((10, 10), dtype=bool))
        es = place_electrodes(grid, [("E1", 2, 3), ("probe-2", 7, 7)])
        assert es.labels() == ["E1", "probe-2"]
        assert (es.get("E1").x, es.get("E1").y) == (2, 3)
        with pytest.raises(ConfigError, match="not defined"):
            es.get("E9")

    def test_duplicate_label_rejected(self):
        grid = ConductiveGrid(np.ones((5, 5), dtype=bool))
        with pytest.raises(ConfigError, match="duplicate"):
            place_electrodes(grid, [("E1", 1, 1), ("E1", 2, 2)])

    def test_out_of_bounds_rejected(self):
        grid = ConductiveGrid(np.ones((5, 5), dtype=bool))
        with pytest.raises(ConfigError, match="outside"):
            place_electrodes(grid, [("E1", 5, 0)])

    def test_isolated_electrode_is_flagged_not_fatal(self):
        mask = np.zeros((9, 9), dtype=bool)
        mask[1, 1] = True
        grid = ConductiveGrid(mask)
        es = place_electrodes(grid, [("far", 6, 6), ("near", 2, 2)])
        assert es.isolation_warnings == ("far",)
