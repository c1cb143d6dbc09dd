"""
Tests for LOS tracing over heightmaps and the empirical LOS census.
"""

import numpy as np
import pytest

from src.models.errors import TerrainDomainError
from src.simulation.terrain import (
    building_mask,
    estimate_los_curve,
    flat_heightmap,
    log_distance_bins,
    los_curve_frame,
    terrain_height,
    trace_los,
    trace_los_many,
)


class TestTerrainHeight:
    def test_flat(self, flat_map):
        assert terrain_height(flat_map, 500.0, 700.0) == 0.0

    def test_ridge_peak_at_cell_center(self, ridge_map):
        assert terrain_height(ridge_map, 2502.5, 1000.0) == pytest.approx(20.0)
        assert terrain_height(ridge_map, 2000.0, 1000.0) == pytest.approx(0.0)


class TestTraceLos:
    """Segment tests against the surface."""

    def test_flat_map_is_always_clear(self, flat_map):
        assert trace_los((100.0, 100.0, 35.0), (1900.0, 1500.0, 1.5), flat_map)

    @pytest.mark.parametrize(
        "ue, clear",
        [
            ((2000.0, 2000.0, 1.5), True),
            ((2600.0, 2000.0, 1.5), False),
            ((3500.0, 2000.0, 1.5), False),
            ((3500.0, 2000.0, 8.0), False),
            ((3500.0, 2000.0, 12.0), True),
            ((3500.0, 2000.0, 30.0), True),
        ],
    )
    def test_ridge_shadow(self, ridge_map, ue, clear):
        # With the BS 1502.5 m in front of the ridge the shadow edge at
        # 2500 m is a UE height of 35 - 15 * 2500 / 1502.5, about 10 m.
        assert trace_los((1000.0, 2000.0, 35.0), ue, ridge_map) is clear

    def test_symmetric(self, wall_map):
        rng = np.random.default_rng(12)
        a = np.column_stack([rng.uniform(0, 2000, 300), rng.uniform(0, 2000, 300), rng.uniform(1.5, 40, 300)])
        b = np.column_stack([rng.uniform(0, 2000, 300), rng.uniform(0, 2000, 300), rng.uniform(1.5, 40, 300)])
        assert np.array_equal(trace_los_many(a, b, wall_map), trace_los_many(b, a, wall_map))

    def test_short_links_are_clear(self, wall_map):
        assert trace_los((0.5, 0.5, 1.0), (1.5, 0.5, 1.0), wall_map)

    def test_endpoint_outside_map(self, flat_map):
        with pytest.raises(TerrainDomainError):
            trace_los((100.0, 100.0, 35.0), (2500.0, 100.0, 1.5), flat_map)

    def test_mismatched_shapes(self, flat_map):
        with pytest.raises(ValueError):
            trace_los_many(np.zeros((2, 3)), np.zeros((3, 3)), flat_map)


class TestBuildingMask:
    def test_walls_are_buildings(self, wall_map):
        # The median window sees three wall rows on the map edge, so compare the interior.
        inner = (slice(5, -5), slice(5, -5))
        assert np.array_equal(building_mask(wall_map)[inner], (wall_map.grid > 0)[inner])

    def test_flat_has_no_buildings(self, flat_map):
        assert not building_mask(flat_map).any()


class TestEstimateLosCurve:
    """Empirical LOS census."""

    def test_bins(self):
        edges = log_distance_bins()
        assert len(edges) == 47
        assert edges[0] == pytest.approx(10.0)
        assert edges[-1] == pytest.approx(35_000.0)
        with pytest.raises(ValueError):
            log_distance_bins(100.0, 10.0)

    def test_flat_map_is_all_los(self, flat_map):
        table = estimate_los_curve(
            flat_map, 2, 35.0, [1.5, 40.0], log_distance_bins(10.0, 1000.0, 5), rng_seed=1, ues_per_bin=10
        )
        assert table.n_samples[:, 0].min() > 0
        assert np.nanmin(table.p_los) == 1.0

    def test_wall_grid_heights(self, wall_map):
        table = estimate_los_curve(
            wall_map, 3, 35.0, [120.0, 1.5], [10.0, 50.0, 500.0, 1000.0], rng_seed=4, ues_per_bin=30
        )
        assert table.ue_heights == [1.5, 120.0]
        low, high = table.p_los
        assert np.all(high[~np.isnan(high)] == 1.0)
        assert np.all(low[~np.isnan(low)] <= high[~np.isnan(low)])
        assert low[-1] < 0.2

    def test_same_seed_same_curve(self, wall_map):
        args = (wall_map, 2, 35.0, [1.5, 30.0], [10.0, 100.0, 400.0])
        first = estimate_los_curve(*args, rng_seed=9, ues_per_bin=15)
        second = estimate_los_curve(*args, rng_seed=9, ues_per_bin=15, workers=2)
        assert np.array_equal(first.n_samples, second.n_samples)
        assert np.array_equal(first.p_los, second.p_los, equal_nan=True)

    def test_fixed_sites_must_be_inside(self, flat_map):
        with pytest.raises(TerrainDomainError):
            estimate_los_curve(flat_map, 1, 35.0, [1.5], [10.0, 100.0], rng_seed=1, bs_sites=[(5000.0, 5000.0)])

    def test_unreachable_bins_are_missing(self):
        small = flat_heightmap(200.0)
        table = estimate_los_curve(small, 1, 35.0, [1.5], [10.0, 50.0, 5000.0, 6000.0], rng_seed=2, bs_sites=[(100.0, 100.0)])
        assert np.isnan(table.p_los[0, -1])
        assert table.n_samples[0, -1] == 0

    def test_emits_span(self, flat_map, span_exporter):
        estimate_los_curve(flat_map, 1, 35.0, [1.5], [10.0, 100.0], rng_seed=3, ues_per_bin=5)
        names = [span.name for span in span_exporter.get_finished_spans()]
        assert "estimate_los_curve" in names

    def test_curve_frame(self, flat_map):
        table = estimate_los_curve(flat_map, 1, 35.0, [1.5, 40.0], [10.0, 100.0, 400.0], rng_seed=3, ues_per_bin=5)
        frame = los_curve_frame(table)
        assert list(frame.columns) == ["ue_height_m", "d2d_bin_m", "p_los", "n_samples", "bin_lo_m", "bin_hi_m"]
        assert len(frame) == 4
