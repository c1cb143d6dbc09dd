"""
Unit tests for the pydantic domain models.
"""

import math

import numpy as np
import pytest
from pydantic import ValidationError

from src.models.errors import ConfigurationError, SimulationError
from src.models.ledger import DEFAULT_LEDGER, ModelLedger
from src.models.network import UeKind, UserTerminal
from src.models.radio import (
    AerialClassifierConfig,
    AntennaArrayConfig,
    HandoverConfig,
    LinkState,
    PowerControlConfig,
    TrafficModel,
)
from src.models.terrain_map import Heightmap, LosCurveTable


class TestModelLedger:
    """Defaults and cross-field checks of the constants ledger."""

    def test_defaults(self):
        assert DEFAULT_LEDGER.fspl_constant_db == 32.45
        assert DEFAULT_LEDGER.sigma_los_db == 4.0
        assert DEFAULT_LEDGER.sigma_nlos_db == 8.0
        assert DEFAULT_LEDGER.rma_max_ue_height == 23.0

    def test_unknown_constant_rejected(self):
        with pytest.raises(ValidationError):
            ModelLedger(mystery_constant=1.0)

    def test_cutoff_must_exceed_anchor(self):
        with pytest.raises(ValidationError):
            ModelLedger(aerial_los_anchor_height=50.0, los_cutoff_altitude=40.0)

    def test_frozen(self):
        with pytest.raises(ValidationError):
            DEFAULT_LEDGER.sigma_los_db = 3.0


class TestErrors:
    """Exception hierarchy."""

    def test_configuration_error_names_key_and_constraint(self):
        err = ConfigurationError("layout.n_sites", "must be one of (1, 7, 19, 37)")
        assert isinstance(err, SimulationError)
        assert err.key == "layout.n_sites"
        assert str(err) == "layout.n_sites: must be one of (1, 7, 19, 37)"


class TestRadioModels:
    """Radio parameter records."""

    def test_antenna_peak_gain(self):
        assert AntennaArrayConfig().peak_gain == pytest.approx(8.0 + 10.0 * math.log10(8))

    def test_power_control_cap_below_p0_rejected(self):
        with pytest.raises(ValidationError):
            PowerControlConfig(p0=30.0, alpha=1.0, p_max=23.0)

    def test_alpha_range(self):
        with pytest.raises(ValidationError):
            PowerControlConfig(alpha=1.2)

    def test_traffic_from_offered_load(self):
        traffic = TrafficModel.from_offered_load(2.0e6, 500_000)
        assert traffic.arrival_rate == pytest.approx(0.5)
        assert traffic.offered_load_bps == pytest.approx(2.0e6)

    def test_classifier_requires_two_cells(self):
        with pytest.raises(ValidationError):
            AerialClassifierConfig(delta_db=6.0, k_cells=1)
        with pytest.raises(ValidationError):
            AerialClassifierConfig(delta_db=0.0, k_cells=4)

    def test_handover_ttt_multiple_of_period(self):
        HandoverConfig(time_to_trigger=160.0, measurement_period=40.0)
        with pytest.raises(ValidationError):
            HandoverConfig(time_to_trigger=100.0, measurement_period=40.0)

    def test_handover_accepts_infinite_hysteresis(self):
        assert math.isinf(HandoverConfig(hysteresis=float("inf")).hysteresis)

    def test_link_state_accepts_consistent_link(self):
        link = LinkState(
            cell=0, ue=0, d2d=300.0, d3d=500.0, height_difference=400.0, los=True,
            pathloss=80.0, shadowing=2.5, antenna_gain=10.0, coupling_gain=-72.5,
        )
        assert link.d3d == pytest.approx(math.hypot(link.d2d, link.height_difference))

    def test_link_state_geometry(self):
        with pytest.raises(ValidationError):
            LinkState(
                cell=0, ue=0, d2d=100.0, d3d=50.0, height_difference=0.0, los=True,
                pathloss=80.0, shadowing=0.0, antenna_gain=10.0, coupling_gain=-70.0,
            )

    def test_link_state_slant_distance_must_match_heights(self):
        with pytest.raises(ValidationError, match="hypot"):
            LinkState(
                cell=0, ue=0, d2d=100.0, d3d=500.0, height_difference=33.5, los=True,
                pathloss=100.0, shadowing=0.0, antenna_gain=0.0, coupling_gain=-100.0,
            )

    def test_link_state_coupling_gain_must_match_components(self):
        with pytest.raises(ValidationError, match="coupling_gain"):
            LinkState(
                cell=0, ue=0, d2d=100.0, d3d=100.0, height_difference=0.0, los=True,
                pathloss=100.0, shadowing=0.0, antenna_gain=0.0, coupling_gain=40.0,
            )


class TestUserTerminal:
    """UE records."""

    def test_position_and_kind(self):
        ue = UserTerminal(ue_id=3, x=10.0, y=-5.0, height_agl=120.0, kind=UeKind.AERIAL)
        assert ue.position == (10.0, -5.0, 120.0)
        assert ue.is_aerial

    def test_height_must_be_positive(self):
        with pytest.raises(ValidationError):
            UserTerminal(ue_id=0, x=0.0, y=0.0, height_agl=0.0)


class TestHeightmap:
    """Raster model."""

    def test_quantization_and_read_only(self):
        hmap = Heightmap(origin=(0.0, 0.0), cell_size=5.0, quantization=0.5, grid=[[0.2, 0.8], [1.1, 2.0]])
        assert hmap.grid.tolist() == [[0.0, 1.0], [1.0, 2.0]]
        assert not hmap.grid.flags.writeable

    def test_extent_and_contains(self):
        hmap = Heightmap(origin=(100.0, 200.0), cell_size=10.0, grid=np.zeros((3, 4)))
        assert hmap.extent == (100.0, 200.0, 140.0, 230.0)
        assert hmap.contains(np.array([100.0, 141.0]), np.array([210.0, 210.0])).tolist() == [True, False]

    def test_non_finite_rejected(self):
        with pytest.raises(ValidationError):
            Heightmap(origin=(0.0, 0.0), grid=[[0.0, float("nan")]])


class TestLosCurveTable:
    """Empirical LOS curve container."""

    @pytest.fixture
    def table(self):
        return LosCurveTable(
            ue_heights=[1.5, 50.0],
            bin_edges=[10.0, 100.0, 1000.0, 10000.0],
            p_los=np.array([[0.9, 0.95, np.nan], [0.8, 0.9, 0.7]]),
            n_samples=np.array([[10, 10, 0], [10, 10, 10]]),
        )

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValidationError):
            LosCurveTable(ue_heights=[1.5], bin_edges=[10.0, 100.0], p_los=np.zeros(3), n_samples=np.zeros(3))

    def test_monotone_keeps_missing_bins(self, table):
        mono = table.monotone()
        assert np.isnan(mono.p_los[0, 2])
        assert mono.p_los[0].tolist()[:2] == [0.9, 0.9]
        assert mono.p_los[1].tolist() == [0.9, 0.9, 0.7]

    def test_probability_at_bin_centers(self, table):
        centers = table.bin_centers
        value = table.probability(np.array([centers[1]]), np.array([50.0]))
        assert value[0] == pytest.approx(0.9)

    def test_probability_clamps_outside_table(self, table):
        far = table.probability(np.array([1e6]), np.array([200.0]))
        assert far[0] == pytest.approx(0.7)

    def test_probability_interpolates_between_heights(self, table):
        far_bin = table.bin_centers[2]
        value = table.probability(np.full(3, far_bin), np.array([1.0, 25.75, 50.0]))
        assert value == pytest.approx([0.9, 0.8, 0.7])

    def test_probability_grid_matches_row_then_height_interpolation(self, table):
        d2d = np.geomspace(20.0, 8000.0, 6)[:, None]
        h_ut = np.array([1.5, 10.0, 30.0, 80.0])
        grid = table.probability(d2d, h_ut)
        assert grid.shape == (6, 4)
        mono = table.monotone().p_los
        log_centers = np.log10(table.bin_centers)
        for i, d in enumerate(d2d[:, 0]):
            low = np.interp(np.log10(d), log_centers[:2], mono[0, :2])
            high = np.interp(np.log10(d), log_centers, mono[1])
            for j, h in enumerate(h_ut):
                assert grid[i, j] == pytest.approx(np.interp(h, [1.5, 50.0], [low, high]))
