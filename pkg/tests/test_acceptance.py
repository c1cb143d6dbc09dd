"""
Campaign-level checks on the full 37-site baseline.

These runs take minutes rather than seconds, so they run only with
``pytest --run-acceptance``.
"""

import os

import pytest

from src.ingestion.config_loader import parse_config
from src.simulation.downlink import run_dl_analysis
from src.simulation.uplink import run_ul_sim

from tests.conftest import BASELINE

pytestmark = pytest.mark.acceptance

SINR_DELTA_TOLERANCE_DB = 3.0
WORKERS = os.cpu_count() or 1


@pytest.fixture(scope="module")
def dl_summary():
    config = parse_config(BASELINE)
    downlink = config.downlink.model_copy(update={"link_dump": False})
    result = run_dl_analysis(config.model_copy(update={"downlink": downlink}), workers=WORKERS)
    return result.summary.set_index("altitude_m")


class TestDownlinkCampaign:
    """Ten seeds, ten UEs per cell, ru = 0.2."""

    @pytest.mark.parametrize("altitude,expected", [(40.0, -10.9), (120.0, -11.3)])
    def test_median_sinr_delta(self, dl_summary, altitude, expected):
        delta = dl_summary.loc[altitude, "median_sinr_db"] - dl_summary.loc[1.5, "median_sinr_db"]
        assert delta < 0.0
        assert delta == pytest.approx(expected, abs=SINR_DELTA_TOLERANCE_DB)

    @pytest.mark.parametrize("altitude", [40.0, 120.0])
    def test_coupling_tail(self, dl_summary, altitude):
        assert dl_summary.loc[altitude, "p05_cg_db"] >= dl_summary.loc[1.5, "p05_cg_db"]

    def test_aerial_ues_fall_out_of_coverage(self, dl_summary):
        row = dl_summary.loc[120.0]
        assert 1.0 - row["coverage_m6"] > 0.0
        assert row["coverage_m10"] > row["coverage_m6"]


class TestUplinkCampaign:
    """Seed-averaged load sweep with twenty seeds."""

    def test_aerial_orderings_at_unsaturated_loads(self, baseline_config):
        run = baseline_config.run.model_copy(update={"seeds": list(range(1, 21))})
        sweep = run_ul_sim(baseline_config.model_copy(update={"run": run}), workers=WORKERS)
        rows = sweep.table[sweep.table["group"] == "all"]
        checked = 0
        for load, at_load in rows.groupby("offered_load_bps"):
            by_altitude = at_load.set_index("altitude_m")
            if by_altitude["saturated_flag"].any():
                continue
            ground = by_altitude.loc[1.5]
            for altitude in (40.0, 120.0):
                assert by_altitude.loc[altitude, "mean_ru"] > ground["mean_ru"], load
                assert by_altitude.loc[altitude, "mean_tput_bps"] < ground["mean_tput_bps"], load
            checked += 1
        assert checked > 0
