"""
Uplink enhancements for networks with aerial UEs.

- Power-control sweeps over (p0, alpha), applied to aerial UEs only or to everyone.
- Orthogonal resource partitioning between aerial and terrestrial traffic.
- Aerial UE identification from the pattern of received powers across cells.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from opentelemetry import trace

from src.models.errors import SimulationError
from src.models.ledger import DEFAULT_LEDGER, ModelLedger
from src.models.radio import AerialClassifierConfig, PowerControlConfig
from src.models.run_config import PowerControlTarget, RunConfig
from src.models.terrain_map import LosCurveTable
from src.simulation.antenna import AntennaPattern
from src.simulation.channel import channel_settings_from_config, link_matrix
from src.simulation.deployment import drop_ues, layout_from_config, ue_arrays
from src.simulation.parallel import run_jobs
from src.simulation.uplink import (
	AERIAL,
	TERRESTRIAL,
	UplinkRunResult,
	UplinkScenario,
	run_uplink_drop,
)


LOGGER = logging.getLogger(__name__)


def _pooled(runs: Sequence[UplinkRunResult], group: int) -> Tuple[float, float]:
	values = np.concatenate([run.throughputs[group] for run in runs])
	if values.size == 0:
		return float("nan"), float("nan")
	return float(values.mean()), float(np.percentile(values, 5))


def pareto_front(aerial: np.ndarray, terrestrial: np.ndarray) -> np.ndarray:
	"""Rows not dominated in (aerial throughput, terrestrial throughput); NaN counts as worst."""
	a = np.nan_to_num(np.asarray(aerial, dtype=float), nan=-np.inf)
	t = np.nan_to_num(np.asarray(terrestrial, dtype=float), nan=-np.inf)
	dominated = (
		(a[None, :] >= a[:, None])
		& (t[None, :] >= t[:, None])
		& ((a[None, :] > a[:, None]) | (t[None, :] > t[:, None]))
	)
	return ~np.any(dominated, axis=1)


PC_COLUMNS = [
	"p0_dbm", "alpha", "target", "baseline", "aerial_mean_tput_bps", "aerial_p05_tput_bps",
	"terrestrial_mean_tput_bps", "terrestrial_p05_tput_bps", "mean_ru", "iot_db", "saturated_flag", "pareto_flag",
]


def sweep_power_control(
	config: RunConfig,
	p0_grid: Optional[Sequence[float]] = None,
	alpha_grid: Optional[Sequence[float]] = None,
	target: Optional[PowerControlTarget] = None,
	offered_load: Optional[float] = None,
	altitude: Optional[float] = None,
	ledger: ModelLedger = DEFAULT_LEDGER,
	curve: Optional[LosCurveTable] = None,
	workers: int = 1,
) -> pd.DataFrame:
	"""
	Uplink throughput and interference for every (p0, alpha) at one traffic point.

	With target "aerial" only aerial UEs use the grid setting and terrestrial
	UEs keep the configured one; with "all" everyone uses it. Every grid point
	sees the same drops and arrivals.
	"""
	section = config.enhancements
	p0s = list(section.pc_p0_grid if p0_grid is None else p0_grid)
	alphas = list(section.pc_alpha_grid if alpha_grid is None else alpha_grid)
	if not p0s or not alphas:
		raise SimulationError("power-control grids must not be empty")
	target = section.pc_target if target is None else PowerControlTarget(target)
	load = section.pc_offered_load if offered_load is None else offered_load
	height = section.pc_altitude if altitude is None else altitude
	ratio = config.uplink.aerial_ratio
	p_max = config.power_control.p_max
	reference = config.aerial_power_control or config.power_control

	jobs = {}
	for p0 in p0s:
		for alpha in alphas:
			pc = PowerControlConfig(p0=p0, alpha=alpha, p_max=p_max)
			if target == PowerControlTarget.ALL:
				scenario = UplinkScenario(terrestrial_pc=pc, aerial_pc=pc)
			else:
				scenario = UplinkScenario(aerial_pc=pc)
			for seed in config.run.seeds:
				jobs[(float(p0), float(alpha), seed)] = (config, ledger, curve, load, height, ratio, seed, scenario)

	tracer = trace.get_tracer(__name__)
	with tracer.start_as_current_span("sweep_power_control") as span:
		span.set_attribute("target", target.value)
		span.set_attribute("grid_points", len(p0s) * len(alphas))
		runs = run_jobs(run_uplink_drop, jobs, workers, span_name="pc_jobs")
		grouped: Dict[Tuple[float, float], List[UplinkRunResult]] = {}
		for (p0, alpha, _), result in runs:
			grouped.setdefault((p0, alpha), []).append(result)
		rows = []
		for (p0, alpha), results in sorted(grouped.items()):
			aerial_mean, aerial_p05 = _pooled(results, AERIAL)
			terr_mean, terr_p05 = _pooled(results, TERRESTRIAL)
			rows.append({
				"p0_dbm": p0,
				"alpha": alpha,
				"target": target.value,
				"baseline": int(np.isclose(p0, reference.p0) and np.isclose(alpha, reference.alpha)),
				"aerial_mean_tput_bps": aerial_mean,
				"aerial_p05_tput_bps": aerial_p05,
				"terrestrial_mean_tput_bps": terr_mean,
				"terrestrial_p05_tput_bps": terr_p05,
				"mean_ru": float(np.mean([r.mean_ru for r in results])),
				"iot_db": float(np.mean([r.iot_db for r in results])),
				"saturated_flag": int(any(r.saturated for r in results)),
			})
		table = pd.DataFrame(rows, columns=PC_COLUMNS[:-1])
		table["pareto_flag"] = pareto_front(
			table["aerial_mean_tput_bps"].to_numpy(), table["terrestrial_mean_tput_bps"].to_numpy()
		).astype(int)
		span.set_attribute("pareto_points", int(table["pareto_flag"].sum()))
	LOGGER.info("Power-control sweep (%s): %d points, %d on the Pareto front", target.value, len(table), int(table["pareto_flag"].sum()))
	return table[PC_COLUMNS]


PARTITION_COLUMNS = [
	"scheme", "aerial_rb_fraction", "aerial_pool_ru", "terrestrial_pool_ru", "pool_ru_gap",
	"aerial_mean_tput_bps", "terrestrial_mean_tput_bps", "aerial_interference_on_terrestrial_pool_mw",
	"iot_db", "saturated_flag",
]
SHARED = "shared"
PARTITIONED = "partitioned"


def _partition_row(scheme: str, fraction: float, results: Sequence[UplinkRunResult]) -> dict:
	aerial_ru = float(np.mean([r.pool_ru[AERIAL] for r in results]))
	terr_ru = float(np.mean([r.pool_ru[TERRESTRIAL] for r in results]))
	return {
		"scheme": scheme,
		"aerial_rb_fraction": fraction,
		"aerial_pool_ru": aerial_ru,
		"terrestrial_pool_ru": terr_ru,
		"pool_ru_gap": terr_ru - aerial_ru,
		"aerial_mean_tput_bps": _pooled(results, AERIAL)[0],
		"terrestrial_mean_tput_bps": _pooled(results, TERRESTRIAL)[0],
		"aerial_interference_on_terrestrial_pool_mw": float(
			np.mean([r.aerial_interference_on_terrestrial_pool_mw for r in results])
		),
		"iot_db": float(np.mean([r.iot_db for r in results])),
		"saturated_flag": int(any(r.saturated for r in results)),
	}


def partition_sweep(
	config: RunConfig,
	fractions: Optional[Sequence[float]] = None,
	offered_load: Optional[float] = None,
	altitude: Optional[float] = None,
	load_scale: Tuple[float, float] = (1.0, 1.0),
	ledger: ModelLedger = DEFAULT_LEDGER,
	curve: Optional[LosCurveTable] = None,
	workers: int = 1,
) -> pd.DataFrame:
	"""
	Shared-pool baseline followed by one row per aerial RB fraction.

	A positive pool_ru_gap means the aerial pool is less utilized than the
	terrestrial one, i.e. reserved aerial resources sit idle.
	"""
	section = config.enhancements
	fractions = list(section.partition_fractions if fractions is None else fractions)
	load = section.partition_offered_load if offered_load is None else offered_load
	height = section.partition_altitude if altitude is None else altitude
	ratio = config.uplink.aerial_ratio

	jobs = {}
	schemes = [(0, SHARED, float("nan"), UplinkScenario(load_scale=load_scale))]
	schemes += [
		(1, PARTITIONED, float(f), UplinkScenario(aerial_rb_fraction=float(f), load_scale=load_scale))
		for f in fractions
	]
	for order, scheme, fraction, scenario in schemes:
		key_fraction = -1.0 if scheme == SHARED else fraction
		for seed in config.run.seeds:
			jobs[(order, key_fraction, seed)] = (config, ledger, curve, load, height, ratio, seed, scenario)

	tracer = trace.get_tracer(__name__)
	with tracer.start_as_current_span("partition_sweep") as span:
		span.set_attribute("fractions", [float(f) for f in fractions])
		span.set_attribute("load_scale", [float(v) for v in load_scale])
		runs = run_jobs(run_uplink_drop, jobs, workers, span_name="partition_jobs")
		grouped: Dict[Tuple[int, float], List[UplinkRunResult]] = {}
		for (order, fraction, _), result in runs:
			grouped.setdefault((order, fraction), []).append(result)
		rows = [
			_partition_row(SHARED if order == 0 else PARTITIONED, float("nan") if order == 0 else fraction, results)
			for (order, fraction), results in sorted(grouped.items())
		]
		table = pd.DataFrame(rows, columns=PARTITION_COLUMNS)
		idle = table[(table["scheme"] == PARTITIONED) & (table["pool_ru_gap"] > 0)]
		for row in idle.itertuples():
			span.add_event("aerial_pool_underutilized", {"fraction": row.aerial_rb_fraction, "gap": row.pool_ru_gap})
	LOGGER.info("Partition sweep: %d fractions, %d with an underutilized aerial pool", len(fractions), len(idle))
	return table


def partition_resources(
	config: RunConfig,
	aerial_rb_fraction: float,
	offered_load: Optional[float] = None,
	altitude: Optional[float] = None,
	load_scale: Tuple[float, float] = (1.0, 1.0),
	ledger: ModelLedger = DEFAULT_LEDGER,
	curve: Optional[LosCurveTable] = None,
	workers: int = 1,
) -> pd.DataFrame:
	"""Shared versus partitioned uplink at a single aerial RB fraction."""
	return partition_sweep(config, [aerial_rb_fraction], offered_load, altitude, load_scale, ledger, curve, workers)


def _cells_within(profiles: np.ndarray, delta_db: float) -> np.ndarray:
	relative = profiles - np.max(profiles, axis=-1, keepdims=True)
	return np.sum(relative >= -delta_db, axis=-1)


def classify_aerial(profile: Sequence[float], cfg: AerialClassifierConfig) -> bool:
	"""True when at least k_cells cells are received within delta_db of the strongest one."""
	values = np.asarray(profile, dtype=float)
	if values.size == 0:
		raise SimulationError("received-power profile is empty")
	return bool(_cells_within(values, cfg.delta_db) >= cfg.k_cells)


def _received_power_job(
	config: RunConfig,
	ledger: ModelLedger,
	curve: Optional[LosCurveTable],
	altitude: float,
	aerial_ratio: float,
	seed: int,
) -> Tuple[np.ndarray, np.ndarray]:
	layout = layout_from_config(config)
	pattern = AntennaPattern.synthesize(config.antenna)
	settings = channel_settings_from_config(config, ledger, curve)
	ues = drop_ues(layout, config.layout.ues_per_cell, [altitude], aerial_ratio, seed, config.layout.min_ue_distance)
	links = link_matrix(layout, pattern, ues, settings, seed)
	_, aerial = ue_arrays(ues)
	return config.power_control.p_max + links.coupling_gain, aerial


ROC_COLUMNS = ["delta_db", "k_cells", "tpr", "fpr", "n_aerial", "n_terrestrial", "operating_point"]


@dataclass(frozen=True)
class RocResult:
	table: pd.DataFrame
	operating_point: Optional[AerialClassifierConfig]


def roc_sweep(
	config: RunConfig,
	delta_grid: Optional[Sequence[float]] = None,
	k_grid: Optional[Sequence[int]] = None,
	altitude: Optional[float] = None,
	aerial_ratio: Optional[float] = None,
	max_fpr: Optional[float] = None,
	ledger: ModelLedger = DEFAULT_LEDGER,
	curve: Optional[LosCurveTable] = None,
	workers: int = 1,
) -> RocResult:
	"""
	True- and false-positive rates of the received-power classifier on labeled drops.

	Each UE's profile is its full transmit power received at every cell. The
	operating point maximizes the true-positive rate subject to fpr <= max_fpr.
	"""
	section = config.enhancements
	deltas = list(section.classifier_delta_grid if delta_grid is None else delta_grid)
	ks = list(section.classifier_k_grid if k_grid is None else k_grid)
	height = section.classifier_altitude if altitude is None else altitude
	ratio = config.uplink.aerial_ratio if aerial_ratio is None else aerial_ratio
	fpr_cap = section.classifier_max_fpr if max_fpr is None else max_fpr

	tracer = trace.get_tracer(__name__)
	with tracer.start_as_current_span("roc_sweep") as span:
		span.set_attribute("altitude_m", height)
		span.set_attribute("aerial_ratio", ratio)
		jobs = {seed: (config, ledger, curve, height, ratio, seed) for seed in config.run.seeds}
		drops = run_jobs(_received_power_job, jobs, workers, span_name="roc_jobs")
		profiles = np.vstack([profile for _, (profile, _) in drops])
		labels = np.concatenate([aerial for _, (_, aerial) in drops])
		n_aerial = int(labels.sum())
		n_terr = int((~labels).sum())
		if n_aerial == 0 or n_terr == 0:
			raise SimulationError("ROC sweep needs both aerial and terrestrial UEs in the drops")

		rows = []
		for delta in sorted(float(d) for d in deltas):
			counts = _cells_within(profiles, delta)
			for k in sorted(int(v) for v in ks):
				flagged = counts >= k
				rows.append({
					"delta_db": delta,
					"k_cells": k,
					"tpr": float(flagged[labels].mean()),
					"fpr": float(flagged[~labels].mean()),
					"n_aerial": n_aerial,
					"n_terrestrial": n_terr,
					"operating_point": 0,
				})
		table = pd.DataFrame(rows, columns=ROC_COLUMNS)
		feasible = table[table["fpr"] <= fpr_cap]
		operating: Optional[AerialClassifierConfig] = None
		if feasible.empty:
			span.add_event("no_operating_point", {"max_fpr": fpr_cap})
			LOGGER.warning("No classifier setting reaches fpr <= %.3f", fpr_cap)
		else:
			best = feasible.sort_values(["tpr", "fpr", "delta_db", "k_cells"], ascending=[False, True, True, True]).index[0]
			table.loc[best, "operating_point"] = 1
			operating = AerialClassifierConfig(delta_db=table.loc[best, "delta_db"], k_cells=int(table.loc[best, "k_cells"]))
			span.set_attribute("operating_tpr", float(table.loc[best, "tpr"]))
			span.set_attribute("operating_fpr", float(table.loc[best, "fpr"]))
			LOGGER.info(
				"Classifier operating point delta=%.1f dB k=%d: tpr %.3f fpr %.3f",
				operating.delta_db, operating.k_cells, table.loc[best, "tpr"], table.loc[best, "fpr"],
			)
	return RocResult(table=table, operating_point=operating)
