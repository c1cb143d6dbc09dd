"""
Tests for power-control sweeps, resource partitioning and aerial UE identification.
"""

import numpy as np
import pytest

from src.models.errors import SimulationError
from src.models.radio import AerialClassifierConfig
from src.simulation.enhancements import (
    PARTITION_COLUMNS,
    PC_COLUMNS,
    ROC_COLUMNS,
    classify_aerial,
    pareto_front,
    partition_resources,
    partition_sweep,
    roc_sweep,
    sweep_power_control,
)


class TestClassifyAerial:
    """Received-power pattern detector."""

    def test_examples(self):
        profile = [-80.0, -82.0, -85.0, -90.0]
        assert classify_aerial(profile, AerialClassifierConfig(delta_db=6.0, k_cells=3))
        assert not classify_aerial(profile, AerialClassifierConfig(delta_db=6.0, k_cells=4))
        assert classify_aerial(profile, AerialClassifierConfig(delta_db=10.0, k_cells=4))

    def test_boundary_is_inclusive(self):
        assert classify_aerial([-80.0, -86.0], AerialClassifierConfig(delta_db=6.0, k_cells=2))

    def test_invariant_to_common_offset(self):
        rng = np.random.default_rng(21)
        cfg = AerialClassifierConfig(delta_db=6.0, k_cells=4)
        for profile in rng.normal(-100.0, 6.0, size=(1000, 21)):
            shift = rng.uniform(-40.0, 40.0)
            assert classify_aerial(profile, cfg) == classify_aerial(profile + shift, cfg)

    def test_empty_profile(self):
        with pytest.raises(SimulationError):
            classify_aerial([], AerialClassifierConfig())


class TestParetoFront:
    def test_dominated_points(self):
        aerial = np.array([1.0, 2.0, 3.0, 2.0])
        terrestrial = np.array([3.0, 2.0, 1.0, 1.0])
        assert pareto_front(aerial, terrestrial).tolist() == [True, True, True, False]

    def test_nan_is_worst(self):
        assert pareto_front(np.array([np.nan, 1.0]), np.array([5.0, 5.0])).tolist() == [False, True]

    def test_ties_are_kept(self):
        assert pareto_front(np.array([1.0, 1.0]), np.array([1.0, 1.0])).tolist() == [True, True]


class TestPowerControlSweep:
    def test_grid(self, small_config):
        table = sweep_power_control(small_config)
        assert list(table.columns) == PC_COLUMNS
        assert len(table) == 4
        assert table["baseline"].sum() == 1
        baseline = table[table["baseline"] == 1].iloc[0]
        assert (baseline["p0_dbm"], baseline["alpha"]) == (-90.0, 1.0)
        assert table["pareto_flag"].sum() >= 1
        assert set(table["target"]) == {"aerial"}

    def test_empty_grid(self, small_config):
        with pytest.raises(SimulationError):
            sweep_power_control(small_config, p0_grid=[])


class TestPartition:
    """Orthogonal aerial and terrestrial RB pools."""

    def test_sweep_rows(self, small_config):
        table = partition_sweep(small_config)
        assert list(table.columns) == PARTITION_COLUMNS
        assert table["scheme"].tolist() == ["shared", "partitioned", "partitioned"]
        assert np.isnan(table["aerial_rb_fraction"].iloc[0])
        assert table["aerial_rb_fraction"].iloc[1:].tolist() == [0.1, 0.3]

    def test_pools_are_orthogonal(self, small_config):
        # Aerial traffic is scaled up so both seeds carry aerial files.
        table = partition_resources(small_config, 0.2, load_scale=(1.0, 20.0))
        shared, partitioned = table.iloc[0], table.iloc[1]
        assert shared["aerial_interference_on_terrestrial_pool_mw"] > 0.0
        assert partitioned["aerial_interference_on_terrestrial_pool_mw"] == 0.0
        assert partitioned["pool_ru_gap"] == pytest.approx(
            partitioned["terrestrial_pool_ru"] - partitioned["aerial_pool_ru"]
        )


class TestRocSweep:
    """Classifier ROC on labeled drops."""

    @pytest.fixture
    def roc(self, small_config):
        return roc_sweep(small_config)

    def test_table(self, roc):
        table = roc.table
        assert list(table.columns) == ROC_COLUMNS
        assert len(table) == 4
        assert table["operating_point"].sum() <= 1
        assert ((table["tpr"] >= 0) & (table["tpr"] <= 1)).all()

    def test_rates_are_monotone(self, roc):
        table = roc.table.set_index(["delta_db", "k_cells"])
        for delta in (4.0, 8.0):
            assert table.loc[(delta, 2), "tpr"] >= table.loc[(delta, 4), "tpr"]
            assert table.loc[(delta, 2), "fpr"] >= table.loc[(delta, 4), "fpr"]
        for k in (2, 4):
            assert table.loc[(8.0, k), "tpr"] >= table.loc[(4.0, k), "tpr"]

    def test_aerial_ues_are_detectable(self, roc):
        table = roc.table.set_index(["delta_db", "k_cells"])
        assert table.loc[(8.0, 2), "tpr"] > table.loc[(8.0, 2), "fpr"]

    def test_operating_point_respects_fpr_cap(self, roc, small_config):
        if roc.operating_point is None:
            assert (roc.table["fpr"] > small_config.enhancements.classifier_max_fpr).all()
        else:
            row = roc.table[roc.table["operating_point"] == 1].iloc[0]
            assert row["fpr"] <= small_config.enhancements.classifier_max_fpr
            assert row["delta_db"] == roc.operating_point.delta_db

    def test_needs_both_classes(self, small_config):
        with pytest.raises(SimulationError):
            roc_sweep(small_config, aerial_ratio=0.0)
