"""
Tests for the downlink SINR census.
"""

import math

import numpy as np
import pytest

from src.models.network import UserTerminal
from src.models.radio import LinkState
from src.simulation.downlink import (
    DownlinkSnapshot,
    compute_dl_sinr,
    coverage_check,
    dl_sinr,
    noise_power_dbm,
    rate_bps,
    run_dl_analysis,
)


def _links(gains):
    return [
        LinkState(cell=cell, ue=0, d2d=500.0, d3d=500.0, height_difference=0.0, los=False, pathloss=-gain,
                  shadowing=0.0, antenna_gain=0.0, coupling_gain=gain)
        for cell, gain in enumerate(gains)
    ]


class TestFormulas:
    """Noise, rate mapping and SINR."""

    def test_noise_power(self):
        assert noise_power_dbm(10e6, 9.0) == pytest.approx(-95.0)

    def test_rate_mapping(self):
        assert rate_bps(0.0, 180e3) == pytest.approx(0.6 * 180e3)
        assert rate_bps(60.0, 180e3) == pytest.approx(4.4 * 180e3)
        assert np.all(np.diff(rate_bps(np.linspace(-10, 20, 31), 10e6)) > 0)

    def test_single_link_sinr(self):
        ue = UserTerminal(ue_id=0, x=0.0, y=0.0, height_agl=1.5)
        links = _links([-100.0, -110.0, -110.0])
        signal = 46.0 - 100.0
        interference = 0.2 * 2 * 10 ** ((46.0 - 110.0) / 10.0)
        expected = signal - 10.0 * math.log10(interference + 10 ** (-95.0 / 10.0))
        assert compute_dl_sinr(ue, links, 0.2, 46.0, -95.0) == pytest.approx(expected)

    def test_vectorized_matches_single(self):
        ue = UserTerminal(ue_id=0, x=0.0, y=0.0, height_agl=1.5)
        gains = [-104.0, -98.0, -115.0, -101.0]
        serving, sinr = dl_sinr(np.array([gains]), 46.0, -95.0, 0.2)
        assert serving.tolist() == [1]
        assert sinr[0] == pytest.approx(compute_dl_sinr(ue, _links(gains), 0.2, 46.0, -95.0))

    def test_bernoulli_activity_silences_cells(self):
        gains = np.array([[-100.0, -105.0, -105.0]])
        _, all_on = dl_sinr(gains, 46.0, -95.0, np.array([1.0, 1.0, 1.0]))
        _, all_off = dl_sinr(gains, 46.0, -95.0, np.array([1.0, 0.0, 0.0]))
        assert all_off[0] == pytest.approx(46.0 - 100.0 + 95.0)
        assert all_on[0] < all_off[0]

    def test_invalid_ru(self):
        ue = UserTerminal(ue_id=0, x=0.0, y=0.0, height_agl=1.5)
        with pytest.raises(ValueError):
            compute_dl_sinr(ue, _links([-100.0, -110.0]), 1.5, 46.0, -95.0)


class TestCoverage:
    def test_fractions(self):
        snap = DownlinkSnapshot(
            altitude=120.0,
            seeds=(1,),
            ru=0.2,
            serving=np.zeros(4, dtype=int),
            coupling_gain=np.full(4, -100.0),
            sinr=np.array([-12.0, -8.0, -4.0, 30.0]),
        )
        report = coverage_check(snap)
        assert report.n_ue == 4
        assert report.coverage == pytest.approx(0.5)
        assert report.coverage_enhanced == pytest.approx(0.75)
        assert report.data_rate == pytest.approx(0.0)


class TestRunDlAnalysis:
    """Census on a 7-site layout."""

    @pytest.fixture
    def result(self, small_config):
        return run_dl_analysis(small_config)

    def test_aerial_sinr_below_ground(self, result):
        summary = result.summary.set_index("altitude_m")
        assert summary.loc[120.0, "median_sinr_db"] < summary.loc[1.5, "median_sinr_db"]
        assert summary.loc[40.0, "median_sinr_db"] < summary.loc[1.5, "median_sinr_db"]

    def test_aerial_coupling_tail_is_stronger(self, result):
        summary = result.summary.set_index("altitude_m")
        assert summary.loc[120.0, "p05_cg_db"] > summary.loc[1.5, "p05_cg_db"]
        assert summary.loc[40.0, "p05_cg_db"] > summary.loc[1.5, "p05_cg_db"]

    def test_summary_shape(self, result):
        summary = result.summary
        assert summary["altitude_m"].tolist() == [1.5, 40.0, 120.0]
        assert (summary["n_ue"] == 2 * 21 * 5).all()
        assert (summary["coverage_m10"] >= summary["coverage_m6"]).all()

    def test_cdf_table(self, result):
        cdf = result.cdf
        assert set(cdf["metric"]) == {"coupling_gain_db", "sinr_db"}
        for _, group in cdf.groupby(["altitude_m", "metric"]):
            assert group["cdf"].iloc[-1] == pytest.approx(1.0)
            assert group["x_value"].is_monotonic_increasing

    def test_links_dumped_for_first_seed(self, result):
        assert result.links is not None
        assert len(result.links) == 3 * 105 * 21

    def test_deterministic(self, small_config, result):
        again = run_dl_analysis(small_config)
        assert again.summary.equals(result.summary)

    def test_spans(self, small_config, span_exporter):
        run_dl_analysis(small_config)
        names = {span.name for span in span_exporter.get_finished_spans()}
        assert {"run_dl_analysis", "dl_jobs"} <= names
