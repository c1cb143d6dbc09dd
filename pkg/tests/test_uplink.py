"""
Tests for uplink power control, resource pools, traffic and the TTI loop.
"""

import math

import numpy as np
import pytest

from src.models.errors import ConfigurationError
from src.models.network import UserTerminal
from src.models.radio import LinkState, PowerControlConfig, TrafficModel
from src.simulation.uplink import (
    AERIAL,
    TERRESTRIAL,
    FileArrivals,
    UplinkParams,
    UplinkScenario,
    generate_arrivals,
    peak_rate_bps,
    resource_pools,
    run_ul_sim,
    simulate_uplink,
    ul_sinr,
    ul_tx_power,
)

PC = PowerControlConfig(p0=-90.0, alpha=1.0, p_max=23.0)
PAIR = (PC, PC)


def _one_file(ue=0, at=0.0005, size_bytes=500_000):
    return FileArrivals(times=np.array([at]), ues=np.array([ue]), bits=np.array([size_bytes * 8.0]))


class TestPowerControl:
    def test_full_compensation(self):
        assert ul_tx_power(PC, 1, 100.0) == pytest.approx(10.0)
        assert ul_tx_power(PC, 10, 100.0) == pytest.approx(20.0)

    def test_capped_at_p_max(self):
        assert ul_tx_power(PC, 1, 200.0) == pytest.approx(23.0)

    def test_fractional(self):
        pc = PowerControlConfig(p0=-80.0, alpha=0.8)
        assert ul_tx_power(pc, 1, 120.0) == pytest.approx(16.0)

    def test_vectorized(self):
        power = ul_tx_power(PC, 1, np.array([90.0, 100.0, 150.0]))
        assert power.tolist() == pytest.approx([0.0, 10.0, 23.0])

    def test_no_rbs(self):
        with pytest.raises(ValueError):
            ul_tx_power(PC, 0, 100.0)


class TestUlSinr:
    def test_interference_from_other_cell(self):
        ue = UserTerminal(ue_id=0, x=0.0, y=0.0, height_agl=1.5)
        gains = {(0, 0): -100.0, (0, 1): -120.0, (1, 0): -110.0, (1, 1): -95.0}
        links = [
            LinkState(cell=cell, ue=u, d2d=100.0, d3d=100.0, height_difference=0.0, los=True, pathloss=-g,
                      shadowing=0.0, antenna_gain=0.0, coupling_gain=g)
            for (u, cell), g in gains.items()
        ]
        sinr = ul_sinr(ue, 0, {0: 0, 1: 1}, links, -116.0, {0: 10.0, 1: 5.0})
        signal = 10 ** ((10.0 - 100.0) / 10.0)
        interference = 10 ** ((5.0 - 110.0) / 10.0)
        expected = 10.0 * math.log10(signal / (interference + 10 ** (-116.0 / 10.0)))
        assert sinr == pytest.approx(expected)


class TestResourcePools:
    def test_shared(self):
        pools = resource_pools(50)
        assert pools.shape == (2, 50)
        assert pools.all()

    def test_partitioned(self):
        pools = resource_pools(50, 0.3)
        assert pools[AERIAL].sum() == 15
        assert pools[AERIAL][:15].all()
        assert not np.any(pools[AERIAL] & pools[TERRESTRIAL])
        assert np.all(pools[AERIAL] | pools[TERRESTRIAL])

    @pytest.mark.parametrize("fraction", [0.0, 1.0])
    def test_fraction_out_of_range(self, fraction):
        with pytest.raises(ConfigurationError):
            resource_pools(50, fraction)


class TestArrivals:
    def test_seeded_and_sorted(self):
        traffic = TrafficModel(arrival_rate=2.0, file_size=1000)
        groups = np.array([0] * 9 + [1])
        first = generate_arrivals(3, traffic, 21, groups, 10.0)
        second = generate_arrivals(3, traffic, 21, groups, 10.0)
        assert np.array_equal(first.times, second.times)
        assert np.array_equal(first.ues, second.ues)
        assert np.all(np.diff(first.times) >= 0)
        assert np.all(first.bits == 8000.0)

    def test_rate(self):
        traffic = TrafficModel.from_offered_load(1e6, 500_000)
        assert traffic.arrival_rate == pytest.approx(0.25)
        arrivals = generate_arrivals(1, traffic, 100, np.zeros(50, dtype=int), 100.0)
        assert arrivals.count == pytest.approx(2500, rel=0.1)

    def test_load_scale_silences_group(self):
        traffic = TrafficModel(arrival_rate=2.0, file_size=1000)
        groups = np.array([0, 0, 1, 1])
        arrivals = generate_arrivals(5, traffic, 7, groups, 10.0, load_scale=(1.0, 0.0))
        assert np.all(groups[arrivals.ues] == TERRESTRIAL)


class TestSimulateUplink:
    """TTI loop on hand-built couplings."""

    def test_isolated_ue_runs_at_peak_rate(self):
        params = UplinkParams(warmup_s=0.0, duration_s=0.5, check_invariants=True)
        result = simulate_uplink(
            np.array([[-100.0]]), np.array([0]), np.array([0]), _one_file(), PAIR, params
        )
        tput = result.throughputs[TERRESTRIAL]
        assert tput.size == 1
        assert 0.9 * peak_rate_bps(50) < tput[0] <= peak_rate_bps(50)
        assert result.unfinished_files == (0, 0)
        assert result.invariant_checks > 0
        assert result.mean_ru == pytest.approx(102 / 500)

    def test_empty_pool_with_traffic(self):
        pools = np.array([[True] * 50, [False] * 50])
        params = UplinkParams(warmup_s=0.0, duration_s=0.1)
        with pytest.raises(ConfigurationError):
            simulate_uplink(np.array([[-100.0]]), np.array([0]), np.array([AERIAL]), _one_file(), PAIR, params, pools)

    def test_partition_isolates_groups(self):
        coupling = np.array([[-100.0, -105.0], [-104.0, -100.0]])
        arrivals = FileArrivals(
            times=np.array([0.0005, 0.0005]), ues=np.array([0, 1]), bits=np.array([4e6, 4e6])
        )
        params = UplinkParams(warmup_s=0.0, duration_s=0.3, check_invariants=True)
        groups = np.array([TERRESTRIAL, AERIAL])
        shared = simulate_uplink(coupling, np.array([0, 1]), groups, arrivals, PAIR, params)
        split = simulate_uplink(coupling, np.array([0, 1]), groups, arrivals, PAIR, params, resource_pools(50, 0.5))
        assert shared.aerial_interference_on_terrestrial_pool_mw > 0.0
        assert split.aerial_interference_on_terrestrial_pool_mw == 0.0

    def test_saturation_flag(self):
        params = UplinkParams(warmup_s=0.0, duration_s=0.05)
        result = simulate_uplink(
            np.array([[-100.0]]), np.array([0]), np.array([0]), _one_file(size_bytes=5_000_000), PAIR, params
        )
        assert result.unfinished_files == (1, 0)
        assert result.saturated


class TestRunUlSim:
    """Load sweep on a 7-site layout."""

    def test_utilization_grows_with_load(self, small_config):
        sweep = run_ul_sim(small_config, offered_loads=[0.25e6, 2.0e6], altitudes=[1.5])
        rows = sweep.table[sweep.table["group"] == "all"].sort_values("offered_load_bps")
        assert rows["mean_ru"].iloc[0] < rows["mean_ru"].iloc[1]

    def test_table_layout(self, small_config):
        sweep = run_ul_sim(small_config, scenario=UplinkScenario(check_invariants=True))
        table = sweep.table
        assert len(table) == 1 * 2 * 3
        assert set(table["group"]) == {"all", "aerial", "terrestrial"}
        assert len(sweep.runs) == 1 * 2 * 2
        assert all(result.invariant_checks > 0 for _, result in sweep.runs)

    def test_no_aerial_share_without_aerial_ues(self, small_config):
        sweep = run_ul_sim(small_config, altitudes=[120.0], aerial_ratio=0.0)
        assert (sweep.table["aerial_interference_share"] == 0.0).all()

    def test_aerial_ues_cost_resources_and_throughput(self, small_config):
        section = small_config.uplink.model_copy(update={"duration": 3.0, "warmup": 0.5})
        config = small_config.model_copy(update={"uplink": section})
        sweep = run_ul_sim(config, offered_loads=[4.0e6], altitudes=[1.5, 40.0, 120.0])
        rows = sweep.table[sweep.table["group"] == "all"].set_index("altitude_m")
        ground = rows.loc[1.5]
        for altitude in (40.0, 120.0):
            assert rows.loc[altitude, "mean_ru"] > ground["mean_ru"]
            assert rows.loc[altitude, "mean_tput_bps"] < ground["mean_tput_bps"]

    @pytest.mark.slow
    def test_allocation_invariants_over_full_duration(self, small_config):
        section = small_config.uplink.model_copy(update={"duration": 10.0, "warmup": 1.0})
        run = small_config.run.model_copy(update={"seeds": [1]})
        config = small_config.model_copy(update={"uplink": section, "run": run})
        sweep = run_ul_sim(config, altitudes=[120.0], scenario=UplinkScenario(check_invariants=True))
        (_, result), = sweep.runs
        assert result.invariant_checks > 100
