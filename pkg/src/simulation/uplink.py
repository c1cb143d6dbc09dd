"""
TTI-based uplink simulation with open-loop fractional power control.

Files arrive as a Poisson process and queue FIFO at their UE. Every TTI each
cell splits the RBs of a resource pool among its backlogged UEs of the
pool's group in round-robin order (one owner per RB), sets the transmit
power from the number of granted RBs, and serves bits at the attenuated
Shannon rate of the per-RB SINR. Interference on an RB comes from the
owners of that RB in all other cells.

UE groups are indexed 0 (terrestrial) and 1 (aerial). Without partitioning
both groups share one pool covering every RB.
"""

from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Deque, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from opentelemetry import trace

from src.models.errors import ConfigurationError, SimulationError
from src.models.ledger import DEFAULT_LEDGER, ModelLedger
from src.models.network import UserTerminal
from src.models.radio import LinkState, PowerControlConfig, TrafficModel
from src.models.run_config import RunConfig, SchedulerKind
from src.models.terrain_map import LosCurveTable
from src.simulation.antenna import AntennaPattern
from src.simulation.channel import channel_settings_from_config, link_matrix
from src.simulation.deployment import drop_ues, layout_from_config, serving_cells, ue_arrays
from src.simulation.downlink import dbm_to_mw, mw_to_dbm, noise_power_dbm
from src.simulation.parallel import run_jobs


LOGGER = logging.getLogger(__name__)

TERRESTRIAL, AERIAL = 0, 1
GROUP_NAMES = {TERRESTRIAL: "terrestrial", AERIAL: "aerial"}
TRAFFIC_STREAM = 2**31 - 2
SATURATION_RU = 0.99
SATURATION_BACKLOG_FRACTION = 0.1
PF_WINDOW_TTI = 100.0
# Bits below this are treated as an empty queue.
BIT_EPSILON = 1e-6


def ul_tx_power(pc: PowerControlConfig, n_rb: int, pathloss_db):
	"""Open-loop fractional power control: min(p_max, p0 + 10 log10(n_rb) + alpha * PL)."""
	if n_rb < 1:
		raise ValueError("n_rb must be at least 1")
	power = np.minimum(pc.p_max, pc.p0 + 10.0 * math.log10(n_rb) + pc.alpha * np.asarray(pathloss_db, dtype=float))
	return power if np.ndim(power) else float(power)


def ul_sinr(
	ue: UserTerminal,
	serving_cell: int,
	co_scheduled: Mapping[int, int],
	links: Sequence[LinkState],
	noise_per_rb: float,
	tx_power_per_rb: Mapping[int, float],
) -> float:
	"""
	Per-RB SINR in dB at the serving BS.

	`co_scheduled` maps each other cell to the UE it scheduled on the same
	RB; `tx_power_per_rb` maps UE ids to their per-RB transmit power in dBm.
	"""
	gains = {(link.ue, link.cell): link.coupling_gain for link in links}
	signal = float(dbm_to_mw(tx_power_per_rb[ue.ue_id] + gains[(ue.ue_id, serving_cell)]))
	interference = 0.0
	for cell, other in co_scheduled.items():
		if cell == serving_cell or other == ue.ue_id:
			continue
		interference += float(dbm_to_mw(tx_power_per_rb[other] + gains[(other, serving_cell)]))
	return float(mw_to_dbm(signal / (interference + float(dbm_to_mw(noise_per_rb)))))


def peak_rate_bps(n_rb: int, ledger: ModelLedger = DEFAULT_LEDGER) -> float:
	"""Rate of a UE holding every RB at the spectral-efficiency cap."""
	return ledger.rate_cap * ledger.rb_bandwidth * n_rb


def resource_pools(n_rb: int, aerial_rb_fraction: Optional[float] = None) -> np.ndarray:
	"""
	(2, n_rb) pool masks. Without a fraction both groups share every RB;
	otherwise the aerial pool is the first round(fraction * n_rb) RBs.
	"""
	masks = np.ones((2, n_rb), dtype=bool)
	if aerial_rb_fraction is None:
		return masks
	if not 0.0 < aerial_rb_fraction < 1.0:
		raise ConfigurationError("enhancements.partition_fractions", f"fraction {aerial_rb_fraction} must lie in (0, 1)")
	n_aerial = int(math.floor(aerial_rb_fraction * n_rb + 0.5))
	masks[AERIAL] = np.arange(n_rb) < n_aerial
	masks[TERRESTRIAL] = ~masks[AERIAL]
	return masks


@dataclass(frozen=True)
class FileArrivals:
	"""Arrival time (s), owning UE and size (bits) of every file, sorted by time."""

	times: np.ndarray
	ues: np.ndarray
	bits: np.ndarray

	@property
	def count(self) -> int:
		return int(self.times.size)


def generate_arrivals(
	seed: int,
	traffic: TrafficModel,
	n_cells: int,
	groups: np.ndarray,
	horizon_s: float,
	load_scale: Tuple[float, float] = (1.0, 1.0),
) -> FileArrivals:
	"""
	Network-wide Poisson file arrivals at traffic.arrival_rate * n_cells files/s.

	Each group receives its population share of the rate, scaled by
	`load_scale`, and every file goes to a uniformly chosen UE of its group.
	"""
	groups = np.asarray(groups)
	n_ue = groups.size
	times: List[np.ndarray] = []
	owners: List[np.ndarray] = []
	for group in (TERRESTRIAL, AERIAL):
		members = np.flatnonzero(groups == group)
		if members.size == 0:
			continue
		rate = traffic.arrival_rate * n_cells * members.size / n_ue * load_scale[group]
		rng = np.random.default_rng([seed, TRAFFIC_STREAM, group])
		count = rng.poisson(rate * horizon_s)
		times.append(rng.uniform(0.0, horizon_s, size=count))
		owners.append(members[rng.integers(members.size, size=count)])
	if not times:
		return FileArrivals(np.empty(0), np.empty(0, dtype=np.int64), np.empty(0))
	all_times = np.concatenate(times)
	all_owners = np.concatenate(owners)
	order = np.argsort(all_times, kind="stable")
	return FileArrivals(
		times=all_times[order],
		ues=all_owners[order].astype(np.int64),
		bits=np.full(order.size, traffic.file_size * 8.0),
	)


@dataclass(frozen=True)
class UplinkParams:
	"""Timing, noise and scheduling parameters of one uplink run."""

	n_rb: int = 50
	tti_s: float = 1e-3
	warmup_s: float = 1.0
	duration_s: float = 10.0
	noise_per_rb_dbm: float = -116.4
	scheduler: SchedulerKind = SchedulerKind.ROUND_ROBIN
	check_invariants: bool = False
	ledger: ModelLedger = DEFAULT_LEDGER

	@property
	def n_tti(self) -> int:
		return int(round((self.warmup_s + self.duration_s) / self.tti_s))

	@property
	def warmup_tti(self) -> int:
		return int(round(self.warmup_s / self.tti_s))


@dataclass(frozen=True)
class UplinkRunResult:
	"""Statistics of one uplink run, measured after the warm-up."""

	mean_ru: float
	group_ru: Tuple[float, float]
	pool_ru: Tuple[float, float]
	throughputs: Tuple[np.ndarray, np.ndarray]
	offered_files: Tuple[int, int]
	unfinished_files: Tuple[int, int]
	iot_db: float
	aerial_interference_share: float
	aerial_interference_on_terrestrial_pool_mw: float
	invariant_checks: int = 0

	@property
	def saturated(self) -> bool:
		offered = sum(self.offered_files)
		backlog = sum(self.unfinished_files) / offered if offered else 0.0
		return self.mean_ru >= SATURATION_RU or backlog > SATURATION_BACKLOG_FRACTION


@dataclass
class _Queues:
	"""FIFO file queues; a file completes once the UE's served bits reach its cumulative end."""

	n_ue: int
	offered: np.ndarray = field(init=False)
	served: np.ndarray = field(init=False)
	pending: List[Deque[int]] = field(init=False)

	def __post_init__(self) -> None:
		self.offered = np.zeros(self.n_ue)
		self.served = np.zeros(self.n_ue)
		self.pending = [deque() for _ in range(self.n_ue)]


def _check_allocation(
	owner: np.ndarray,
	serving: np.ndarray,
	groups: np.ndarray,
	pools: np.ndarray,
	backlog: np.ndarray,
) -> None:
	n_cells, n_rb = owner.shape
	granted = owner >= 0
	if np.any(granted.sum(axis=1) > n_rb):
		raise SimulationError("a cell granted more RBs than it has")
	cells, rbs = np.nonzero(granted)
	owners = owner[cells, rbs]
	if np.any(serving[owners] != cells):
		raise SimulationError("an RB was granted to a UE of another cell")
	if not np.all(pools[groups[owners], rbs]):
		raise SimulationError("a UE was granted an RB outside its pool")
	for group in (TERRESTRIAL, AERIAL):
		waiting = np.zeros(n_cells, dtype=bool)
		waiting[serving[backlog & (groups == group)]] = True
		pool = pools[group]
		if np.any(~granted[np.ix_(waiting, pool)]):
			raise SimulationError("a backlogged cell left RBs of its pool idle")


def simulate_uplink(
	coupling_db: np.ndarray,
	serving: np.ndarray,
	groups: np.ndarray,
	arrivals: FileArrivals,
	power_control: Tuple[PowerControlConfig, PowerControlConfig],
	params: UplinkParams,
	pools: Optional[np.ndarray] = None,
) -> UplinkRunResult:
	"""
	Run the TTI loop for one drop.

	coupling_db is (n_ue, n_cells); `power_control` holds the terrestrial
	and aerial settings. With `params.check_invariants` every TTI asserts RB
	conservation, pool membership and work conservation.
	"""
	coupling_db = np.asarray(coupling_db, dtype=float)
	n_ue, n_cells = coupling_db.shape
	n_rb = params.n_rb
	groups = np.asarray(groups, dtype=np.int64)
	serving = np.asarray(serving, dtype=np.int64)
	pools = resource_pools(n_rb) if pools is None else np.asarray(pools, dtype=bool)
	pool_rbs = [np.flatnonzero(pools[g]) for g in (TERRESTRIAL, AERIAL)]
	# Groups sharing one pool are scheduled together as one round-robin population.
	slot_of_group = np.array([0, 0] if np.array_equal(pools[TERRESTRIAL], pools[AERIAL]) else [0, 1])
	slots_used = sorted(set(slot_of_group.tolist()))
	for group in (TERRESTRIAL, AERIAL):
		if pool_rbs[group].size == 0 and np.any(groups[arrivals.ues] == group):
			raise ConfigurationError(
				"enhancements.partition_fractions",
				f"the {GROUP_NAMES[group]} pool is empty but {GROUP_NAMES[group]} UEs have traffic",
			)

	ledger = params.ledger
	gain_lin = dbm_to_mw(coupling_db)
	pathloss = -coupling_db[np.arange(n_ue), serving]
	p0 = np.array([power_control[g].p0 for g in groups])
	alpha = np.array([power_control[g].alpha for g in groups])
	p_max = np.array([power_control[g].p_max for g in groups])
	noise_mw = float(dbm_to_mw(params.noise_per_rb_dbm))
	rb_bw = ledger.rb_bandwidth
	bits_cap = ledger.rate_cap * rb_bw * params.tti_s
	aerial_ue = groups == AERIAL

	queues = _Queues(n_ue)
	head_end = np.full(n_ue, np.inf)
	arrival_tti = np.floor(arrivals.times / params.tti_s).astype(np.int64) + 1
	cum_end = np.zeros(arrivals.count)
	completion = np.full(arrivals.count, np.nan)
	next_file = 0
	rr = np.zeros((n_cells, 2), dtype=np.int64)
	avg_tput = np.full(n_ue, 1.0)

	n_window = 0
	ru_sum = 0.0
	group_grants = np.zeros(2)
	iot_sum = 0.0
	interference_sum = 0.0
	aerial_interference_sum = 0.0
	aerial_on_terrestrial_pool = 0.0
	checks = 0

	for tti in range(params.n_tti):
		while next_file < arrivals.count and arrival_tti[next_file] <= tti:
			ue = arrivals.ues[next_file]
			queues.offered[ue] += arrivals.bits[next_file]
			cum_end[next_file] = queues.offered[ue]
			if not queues.pending[ue]:
				head_end[ue] = cum_end[next_file]
			queues.pending[ue].append(next_file)
			next_file += 1

		in_window = tti >= params.warmup_tti
		if in_window:
			n_window += 1
		backlog = queues.offered - queues.served > BIT_EPSILON
		if not np.any(backlog):
			if in_window:
				iot_sum += n_cells * n_rb
			if params.scheduler == SchedulerKind.PROPORTIONAL_FAIR:
				avg_tput *= 1.0 - 1.0 / PF_WINDOW_TTI
			continue

		active = np.flatnonzero(backlog)
		keys = serving[active] * 2 + slot_of_group[groups[active]]
		if params.scheduler == SchedulerKind.PROPORTIONAL_FAIR:
			snr_rate = np.log2(1.0 + dbm_to_mw(p_max[active] - 10.0 * math.log10(n_rb) - pathloss[active]) / noise_mw)
			metric = snr_rate / avg_tput[active]
			order = np.lexsort((active, -metric, keys))
			first = np.ones(order.size, dtype=bool)
			first[1:] = keys[order][1:] != keys[order][:-1]
			order = order[first]
		else:
			order = np.argsort(keys, kind="stable")
		members = active[order]
		member_keys = keys[order]
		counts = np.bincount(member_keys, minlength=2 * n_cells)
		starts = np.cumsum(counts) - counts

		owner = np.full((n_cells, n_rb), -1, dtype=np.int64)
		for slot in slots_used:
			rbs = pool_rbs[slot]
			if rbs.size == 0:
				continue
			k = counts[slot::2]
			cells = np.flatnonzero(k > 0)
			if cells.size == 0:
				continue
			pos = (rr[cells, slot][:, None] + np.arange(rbs.size)[None, :]) % k[cells][:, None]
			owner[cells[:, None], rbs[None, :]] = members[starts[cells * 2 + slot][:, None] + pos]
			rr[cells, slot] += rbs.size

		if params.check_invariants:
			_check_allocation(owner, serving, groups, pools, backlog)
			checks += 1

		cells_o, rbs_o = np.nonzero(owner >= 0)
		owners_o = owner[cells_o, rbs_o]
		n_granted = np.bincount(owners_o, minlength=n_ue)
		granted = np.flatnonzero(n_granted)
		n_g = n_granted[granted]
		p_total = np.minimum(p_max[granted], p0[granted] + 10.0 * np.log10(n_g) + alpha[granted] * pathloss[granted])
		tx_mw = dbm_to_mw(p_total - 10.0 * np.log10(n_g))

		column = np.full(n_ue, -1, dtype=np.int64)
		column[granted] = np.arange(granted.size)
		rx = tx_mw[:, None] * gain_lin[granted]
		schedule = np.zeros((n_rb, granted.size))
		schedule[rbs_o, column[owners_o]] = 1.0
		total = schedule @ rx
		own = np.zeros((n_rb, n_cells))
		own[rbs_o, cells_o] = rx[column[owners_o], cells_o]
		interference = np.maximum(total - own, 0.0)

		signal = own[rbs_o, cells_o]
		sinr = signal / (interference[rbs_o, cells_o] + noise_mw)
		bits = np.minimum(ledger.rate_efficiency * rb_bw * np.log2(1.0 + sinr) * params.tti_s, bits_cap)
		served_now = np.bincount(owners_o, weights=bits, minlength=n_ue)
		queues.served = np.minimum(queues.served + served_now, queues.offered)
		if params.scheduler == SchedulerKind.PROPORTIONAL_FAIR:
			avg_tput = (1.0 - 1.0 / PF_WINDOW_TTI) * avg_tput + served_now / PF_WINDOW_TTI

		done_at = (tti + 1) * params.tti_s
		for ue in granted[head_end[granted] <= queues.served[granted] + BIT_EPSILON]:
			pending = queues.pending[ue]
			while pending and cum_end[pending[0]] <= queues.served[ue] + BIT_EPSILON:
				completion[pending.popleft()] = done_at
			head_end[ue] = cum_end[pending[0]] if pending else np.inf

		if in_window:
			ru_sum += owners_o.size / (n_cells * n_rb)
			group_grants += np.bincount(groups[owners_o], minlength=2)
			iot_sum += float(np.sum((interference + noise_mw) / noise_mw))
			interference_sum += float(interference.sum())
			aerial_cols = aerial_ue[granted]
			if np.any(aerial_cols):
				aerial_total = schedule[:, aerial_cols] @ rx[aerial_cols]
				aerial_own = np.where(aerial_ue[owner.T] & (owner.T >= 0), own, 0.0)
				aerial_interference = np.maximum(aerial_total - aerial_own, 0.0)
				aerial_interference_sum += float(aerial_interference.sum())
				aerial_on_terrestrial_pool += float(aerial_interference[pool_rbs[TERRESTRIAL]].sum())

	window_start = params.warmup_s
	window_end = params.warmup_s + params.duration_s
	measured = (arrivals.times >= window_start) & (arrivals.times < window_end)
	finished = measured & ~np.isnan(completion)
	file_groups = groups[arrivals.ues] if arrivals.count else np.empty(0, dtype=np.int64)
	throughputs = []
	offered = []
	unfinished = []
	for group in (TERRESTRIAL, AERIAL):
		mask = file_groups == group
		done = finished & mask
		throughputs.append(arrivals.bits[done] / (completion[done] - arrivals.times[done]))
		offered.append(int(np.count_nonzero(measured & mask)))
		unfinished.append(int(np.count_nonzero(measured & mask & np.isnan(completion))))

	cell_ttis = max(n_window, 1) * n_cells
	pool_sizes = np.array([pool_rbs[g].size for g in (TERRESTRIAL, AERIAL)], dtype=float)
	with np.errstate(invalid="ignore", divide="ignore"):
		pool_ru = np.where(pool_sizes > 0, group_grants / (cell_ttis * pool_sizes), np.nan)
	return UplinkRunResult(
		mean_ru=ru_sum / max(n_window, 1),
		group_ru=tuple(float(v) for v in group_grants / (cell_ttis * n_rb)),
		pool_ru=tuple(float(v) for v in pool_ru),
		throughputs=(throughputs[0], throughputs[1]),
		offered_files=(offered[0], offered[1]),
		unfinished_files=(unfinished[0], unfinished[1]),
		iot_db=float(mw_to_dbm(iot_sum / (cell_ttis * n_rb))) if n_window else 0.0,
		aerial_interference_share=aerial_interference_sum / interference_sum if interference_sum > 0 else 0.0,
		aerial_interference_on_terrestrial_pool_mw=aerial_on_terrestrial_pool,
		invariant_checks=checks,
	)


@dataclass(frozen=True)
class UplinkScenario:
	"""Deviations from the baseline uplink used by the enhancement experiments."""

	terrestrial_pc: Optional[PowerControlConfig] = None
	aerial_pc: Optional[PowerControlConfig] = None
	aerial_rb_fraction: Optional[float] = None
	load_scale: Tuple[float, float] = (1.0, 1.0)
	check_invariants: bool = False


def uplink_params_from_config(config: RunConfig, ledger: ModelLedger = DEFAULT_LEDGER, check_invariants: bool = False) -> UplinkParams:
	section = config.uplink
	return UplinkParams(
		n_rb=config.radio.n_rb,
		tti_s=section.tti / 1000.0,
		warmup_s=section.warmup,
		duration_s=section.duration,
		noise_per_rb_dbm=noise_power_dbm(ledger.rb_bandwidth, config.radio.bs_noise_figure, ledger),
		scheduler=section.scheduler,
		check_invariants=check_invariants,
		ledger=ledger,
	)


def power_control_pair(config: RunConfig, scenario: UplinkScenario) -> Tuple[PowerControlConfig, PowerControlConfig]:
	"""(terrestrial, aerial) settings; aerial falls back to the shared setting."""
	terrestrial = scenario.terrestrial_pc or config.power_control
	aerial = scenario.aerial_pc or config.aerial_power_control or config.power_control
	return terrestrial, aerial


def run_uplink_drop(
	config: RunConfig,
	ledger: ModelLedger,
	curve: Optional[LosCurveTable],
	offered_load: float,
	altitude: float,
	aerial_ratio: float,
	seed: int,
	scenario: UplinkScenario,
) -> UplinkRunResult:
	layout = layout_from_config(config)
	pattern = AntennaPattern.synthesize(config.antenna)
	settings = channel_settings_from_config(config, ledger, curve)
	ues = drop_ues(layout, config.layout.ues_per_cell, [altitude], aerial_ratio, seed, config.layout.min_ue_distance)
	links = link_matrix(layout, pattern, ues, settings, seed)
	_, aerial = ue_arrays(ues)
	groups = aerial.astype(np.int64)
	params = uplink_params_from_config(config, ledger, scenario.check_invariants)
	traffic = TrafficModel.from_offered_load(offered_load, config.traffic.file_size)
	arrivals = generate_arrivals(seed, traffic, layout.n_cells, groups, params.warmup_s + params.duration_s, scenario.load_scale)
	return simulate_uplink(
		links.coupling_gain,
		serving_cells(links.coupling_gain),
		groups,
		arrivals,
		power_control_pair(config, scenario),
		params,
		resource_pools(params.n_rb, scenario.aerial_rb_fraction),
	)


SWEEP_COLUMNS = [
	"offered_load_bps", "altitude_m", "group", "mean_ru", "mean_tput_bps", "p05_tput_bps", "saturated_flag",
	"n_files", "unfinished_files", "iot_db", "aerial_interference_share",
]


def _throughput_stats(values: Sequence[np.ndarray]) -> Tuple[float, float, int]:
	pooled = np.concatenate(values) if values else np.empty(0)
	if pooled.size == 0:
		return float("nan"), float("nan"), 0
	return float(pooled.mean()), float(np.percentile(pooled, 5)), int(pooled.size)


def sweep_table(results: Sequence[Tuple[Tuple[float, float, int], UplinkRunResult]]) -> pd.DataFrame:
	"""Seed-aggregated rows per (offered load, altitude, group)."""
	grouped: Dict[Tuple[float, float], List[UplinkRunResult]] = {}
	for (load, altitude, _), result in results:
		grouped.setdefault((load, altitude), []).append(result)
	rows = []
	for (load, altitude), runs in sorted(grouped.items()):
		saturated = any(run.saturated for run in runs)
		common = {
			"offered_load_bps": load,
			"altitude_m": altitude,
			"saturated_flag": int(saturated),
			"iot_db": float(np.mean([run.iot_db for run in runs])),
			"aerial_interference_share": float(np.mean([run.aerial_interference_share for run in runs])),
		}
		mean, p05, n_files = _throughput_stats([t for run in runs for t in run.throughputs])
		rows.append({
			**common,
			"group": "all",
			"mean_ru": float(np.mean([run.mean_ru for run in runs])),
			"mean_tput_bps": mean,
			"p05_tput_bps": p05,
			"n_files": n_files,
			"unfinished_files": sum(sum(run.unfinished_files) for run in runs),
		})
		for group in (AERIAL, TERRESTRIAL):
			mean, p05, n_files = _throughput_stats([run.throughputs[group] for run in runs])
			rows.append({
				**common,
				"group": GROUP_NAMES[group],
				"mean_ru": float(np.mean([run.group_ru[group] for run in runs])),
				"mean_tput_bps": mean,
				"p05_tput_bps": p05,
				"n_files": n_files,
				"unfinished_files": sum(run.unfinished_files[group] for run in runs),
			})
	return pd.DataFrame(rows, columns=SWEEP_COLUMNS)


@dataclass(frozen=True)
class UplinkSweep:
	table: pd.DataFrame
	runs: List[Tuple[Tuple[float, float, int], UplinkRunResult]]


def run_ul_sim(
	config: RunConfig,
	offered_loads: Optional[Sequence[float]] = None,
	altitudes: Optional[Sequence[float]] = None,
	aerial_ratio: Optional[float] = None,
	ledger: ModelLedger = DEFAULT_LEDGER,
	curve: Optional[LosCurveTable] = None,
	workers: int = 1,
	scenario: UplinkScenario = UplinkScenario(),
) -> UplinkSweep:
	"""
	Uplink load sweep over (offered load, aerial altitude, seed).

	Drops, link states and traffic depend only on the seed and the altitude,
	so every load and altitude point sees common random numbers.
	"""
	section = config.uplink
	loads = list(section.offered_loads if offered_loads is None else offered_loads)
	heights = list(section.altitudes if altitudes is None else altitudes)
	ratio = section.aerial_ratio if aerial_ratio is None else aerial_ratio
	tracer = trace.get_tracer(__name__)
	with tracer.start_as_current_span("run_ul_sim") as span:
		span.set_attribute("offered_loads", [float(v) for v in loads])
		span.set_attribute("altitudes", [float(v) for v in heights])
		span.set_attribute("aerial_ratio", ratio)
		span.set_attribute("seed_count", len(config.run.seeds))
		jobs = {
			(float(load), float(altitude), seed): (config, ledger, curve, float(load), float(altitude), ratio, seed, scenario)
			for load in loads
			for altitude in heights
			for seed in config.run.seeds
		}
		runs = run_jobs(run_uplink_drop, jobs, workers, span_name="ul_jobs")
		table = sweep_table(runs)
		for row in table[table["group"] == "all"].itertuples():
			if row.saturated_flag:
				span.add_event("saturated", {"offered_load_bps": row.offered_load_bps, "altitude_m": row.altitude_m})
				LOGGER.warning("Uplink saturated at %.3g bit/s per cell, altitude %.1f m", row.offered_load_bps, row.altitude_m)
	return UplinkSweep(table=table, runs=runs)
