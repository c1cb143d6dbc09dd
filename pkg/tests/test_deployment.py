"""
Tests for the hexagonal layout, wraparound geometry and UE drops.
"""

import math

import numpy as np
import pytest

from src.models.errors import ConfigurationError
from src.models.network import UeKind, UserTerminal
from src.models.radio import LinkState
from src.simulation.deployment import (
    build_layout,
    cell_centers,
    cell_hexagon_contains,
    drop_ues,
    layout_table,
    select_serving_cell,
    serving_cells,
    ue_arrays,
    wrap_distance,
    wrapped_offsets,
)


class TestBuildLayout:
    """Site and cell construction."""

    @pytest.mark.parametrize("n_sites, n_cells", [(1, 3), (7, 21), (19, 57), (37, 111)])
    def test_counts(self, n_sites, n_cells):
        layout = build_layout(1732.0, n_sites, 35.0)
        assert layout.n_sites == n_sites
        assert layout.n_cells == n_cells

    def test_unsupported_site_count(self):
        with pytest.raises(ConfigurationError) as exc_info:
            build_layout(1732.0, 12, 35.0)
        assert exc_info.value.key == "layout.n_sites"

    def test_nearest_neighbours_at_isd(self, layout37):
        xy = layout37.site_xy
        dist = np.hypot(*(xy[:, None, :] - xy[None, :, :]).transpose(2, 0, 1))
        np.fill_diagonal(dist, np.inf)
        assert dist.min() == pytest.approx(1732.0)
        assert np.isclose(dist[0], 1732.0).sum() == 6

    def test_sector_azimuths(self, layout7):
        assert layout7.cell_azimuths[:3].tolist() == [0.0, 120.0, 240.0]
        assert layout7.cell_site.tolist()[:6] == [0, 0, 0, 1, 1, 1]

    def test_translations_identity_first(self, layout37):
        shifts = layout37.translations
        assert shifts.shape == (7, 2)
        assert shifts[0].tolist() == [0.0, 0.0]
        assert np.allclose(np.hypot(shifts[1:, 0], shifts[1:, 1]), math.sqrt(37.0) * 1732.0)

    def test_layout_table(self, layout7):
        table = layout_table(layout7)
        assert list(table.columns) == ["site_id", "cell_id", "x", "y", "azimuth_deg"]
        assert len(table) == 21


class TestWraparound:
    """Distances over the wrapped cluster."""

    def test_seven_site_cluster_is_fully_adjacent(self, layout7):
        xy = layout7.site_xy
        for i in range(7):
            for j in range(7):
                if i != j:
                    assert wrap_distance(xy[i], xy[j], layout7) == pytest.approx(1732.0)

    def test_translated_point_is_at_zero_distance(self, layout37):
        point = np.array([120.0, -40.0])
        shifted = point + layout37.translations[3]
        assert wrap_distance(point, shifted, layout37) == pytest.approx(0.0, abs=1e-6)

    def test_offsets_shape(self, layout7):
        offsets = wrapped_offsets(np.zeros((5, 2)), layout7.site_xy, layout7)
        assert offsets.shape == (5, 7, 2)

    def test_symmetry_and_triangle_inequality(self, layout37):
        rng = np.random.default_rng(7)
        sites = layout37.site_xy[rng.integers(0, layout37.n_sites, size=(2_000, 3))]
        points = sites + rng.uniform(-400.0, 400.0, size=sites.shape)
        for a, b, c in points:
            ab = wrap_distance(a, b, layout37)
            assert ab == pytest.approx(wrap_distance(b, a, layout37), abs=1e-6)
            assert wrap_distance(a, c, layout37) <= ab + wrap_distance(b, c, layout37) + 1e-6


class TestDropUes:
    """Per-cell UE drops."""

    def test_count_and_aerial_share(self, layout7):
        ues = drop_ues(layout7, 10, [40.0, 120.0], 0.1, rng_seed=3)
        assert len(ues) == 210
        aerial = [ue for ue in ues if ue.kind == UeKind.AERIAL]
        assert len(aerial) == 21
        assert {ue.height_agl for ue in aerial} == {40.0, 120.0}
        assert all(ue.height_agl == 1.5 for ue in ues if ue.kind == UeKind.TERRESTRIAL)

    def test_same_seed_same_drop(self, layout7):
        first = drop_ues(layout7, 4, [40.0], 0.5, rng_seed=11)
        second = drop_ues(layout7, 4, [40.0], 0.5, rng_seed=11)
        assert first == second

    def test_positions_do_not_depend_on_altitude(self, layout7):
        low, _ = ue_arrays(drop_ues(layout7, 5, [40.0], 1.0, rng_seed=5))
        high, _ = ue_arrays(drop_ues(layout7, 5, [120.0], 1.0, rng_seed=5))
        assert np.array_equal(low[:, :2], high[:, :2])
        assert np.all(high[:, 2] == 120.0)

    def test_ues_lie_in_their_home_cell(self, layout7):
        ues = drop_ues(layout7, 20, [1.5], 0.0, rng_seed=2)
        positions, _ = ue_arrays(ues)
        centers = cell_centers(layout7)
        homes = np.array([ue.home_cell for ue in ues])
        az = np.radians(layout7.cell_azimuths[homes])
        rel = positions[:, :2] - centers[homes]
        local = np.column_stack([
            np.cos(az) * rel[:, 0] + np.sin(az) * rel[:, 1],
            -np.sin(az) * rel[:, 0] + np.cos(az) * rel[:, 1],
        ])
        assert np.all(cell_hexagon_contains(local, 1732.0 / 3.0 + 1e-6))

    def test_minimum_distance_to_site(self, layout7):
        ues = drop_ues(layout7, 30, [1.5], 0.0, rng_seed=9, min_distance=50.0)
        positions, _ = ue_arrays(ues)
        sites = layout7.site_xy[layout7.cell_site[[ue.home_cell for ue in ues]]]
        assert np.all(np.hypot(*(positions[:, :2] - sites).T) >= 50.0)

    def test_invalid_ratio(self, layout7):
        with pytest.raises(ConfigurationError):
            drop_ues(layout7, 1, [40.0], 1.5, rng_seed=1)


class TestServingCell:
    """Serving-cell association."""

    def test_argmax_invariant_under_offset(self):
        rng = np.random.default_rng(4)
        coupling = rng.normal(-100.0, 10.0, size=(500, 21))
        assert np.array_equal(serving_cells(coupling), serving_cells(coupling + 37.5))

    def test_ties_go_to_lowest_cell(self):
        ue = UserTerminal(ue_id=0, x=0.0, y=0.0, height_agl=1.5)
        links = [
            LinkState(cell=cell, ue=0, d2d=100.0, d3d=math.hypot(100.0, 45.0), height_difference=45.0, los=True,
                      pathloss=10.0 - gain, shadowing=0.0, antenna_gain=10.0, coupling_gain=gain)
            for cell, gain in [(0, -85.0), (1, -80.0), (2, -80.0)]
        ]
        assert select_serving_cell(ue, links) == 1
        assert serving_cells(np.array([[-85.0, -80.0, -80.0]])).tolist() == [1]
