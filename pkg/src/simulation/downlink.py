"""
Downlink coupling-gain and SINR census versus UE altitude.

Every drop places all UEs at one altitude, associates each UE with its
strongest cell and evaluates the SINR with the other cells transmitting at
an average activity equal to the resource utilization (or, in Bernoulli
mode, each cell on or off with that probability).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from opentelemetry import trace

from src.models.ledger import DEFAULT_LEDGER, ModelLedger
from src.models.network import UserTerminal
from src.models.radio import LinkState
from src.models.run_config import GROUND_HEIGHT, InterferenceMode, RunConfig
from src.models.terrain_map import LosCurveTable
from src.simulation.antenna import AntennaPattern
from src.simulation.channel import channel_settings_from_config, link_matrix
from src.simulation.deployment import drop_ues, layout_from_config, select_serving_cell, serving_cells
from src.simulation.parallel import run_jobs


LOGGER = logging.getLogger(__name__)

# Stream key for cell on/off draws; UE streams use ids below it.
ACTIVITY_STREAM = 2**31 - 1


def dbm_to_mw(value):
	return 10.0 ** (np.asarray(value, dtype=float) / 10.0)


def mw_to_dbm(value):
	with np.errstate(divide="ignore"):
		return 10.0 * np.log10(value)


def noise_power_dbm(bandwidth_hz: float, noise_figure_db: float, ledger: ModelLedger = DEFAULT_LEDGER) -> float:
	"""Thermal noise plus receiver noise figure over a bandwidth."""
	return ledger.thermal_noise_density + 10.0 * math.log10(bandwidth_hz) + noise_figure_db


def rate_bps(sinr_db, bandwidth_hz: float, ledger: ModelLedger = DEFAULT_LEDGER):
	"""Attenuated Shannon mapping: min(eff * BW * log2(1 + SINR), cap * BW)."""
	sinr = dbm_to_mw(sinr_db)
	rate = np.minimum(ledger.rate_efficiency * bandwidth_hz * np.log2(1.0 + sinr), ledger.rate_cap * bandwidth_hz)
	return rate if np.ndim(rate) else float(rate)


def compute_dl_sinr(
	ue: UserTerminal,
	links: Sequence[LinkState],
	ru: float,
	tx_power: float,
	noise: float,
) -> float:
	"""SINR in dB with every non-serving cell's power scaled by the resource utilization."""
	if not 0.0 <= ru <= 1.0:
		raise ValueError("ru must lie in [0, 1]")
	serving = select_serving_cell(ue, links)
	signal = 0.0
	interference = 0.0
	for link in links:
		if link.ue != ue.ue_id:
			continue
		power = float(dbm_to_mw(tx_power + link.coupling_gain))
		if link.cell == serving:
			signal = power
		else:
			interference += power
	return float(mw_to_dbm(signal / (ru * interference + float(dbm_to_mw(noise)))))


def dl_sinr(
	coupling_db: np.ndarray,
	tx_power: float,
	noise: float,
	activity: np.ndarray,
) -> Tuple[np.ndarray, np.ndarray]:
	"""
	Vectorized SINR for (n_ue, n_cells) coupling gains.

	`activity` weights each cell's interference: a scalar RU in average mode
	or a 0/1 vector in Bernoulli mode. Returns (serving cells, SINR dB).
	"""
	coupling_db = np.asarray(coupling_db, dtype=float)
	serving = serving_cells(coupling_db)
	rows = np.arange(coupling_db.shape[0])
	rx = dbm_to_mw(tx_power + coupling_db)
	signal = rx[rows, serving]
	others = rx.copy()
	others[rows, serving] = 0.0
	weights = np.broadcast_to(np.asarray(activity, dtype=float), (coupling_db.shape[1],))
	interference = others @ weights
	return serving, mw_to_dbm(signal / (interference + float(dbm_to_mw(noise))))


@dataclass(frozen=True)
class DownlinkSnapshot:
	"""Per-UE downlink state of one or more drops at a single altitude."""

	altitude: float
	seeds: Tuple[int, ...]
	ru: float
	serving: np.ndarray
	coupling_gain: np.ndarray
	sinr: np.ndarray

	@property
	def n_ue(self) -> int:
		return int(self.sinr.size)

	@classmethod
	def concat(cls, snapshots: Sequence["DownlinkSnapshot"]) -> "DownlinkSnapshot":
		if not snapshots:
			raise ValueError("nothing to concatenate")
		return cls(
			altitude=snapshots[0].altitude,
			seeds=tuple(seed for snap in snapshots for seed in snap.seeds),
			ru=snapshots[0].ru,
			serving=np.concatenate([snap.serving for snap in snapshots]),
			coupling_gain=np.concatenate([snap.coupling_gain for snap in snapshots]),
			sinr=np.concatenate([snap.sinr for snap in snapshots]),
		)


@dataclass(frozen=True)
class CoverageReport:
	"""Fractions of UEs meeting each downlink requirement."""

	n_ue: int
	sinr_floor: float
	ce_sinr_floor: float
	coverage: float
	coverage_enhanced: float
	c2_rate: float
	data_rate: float


def coverage_check(
	snapshot: DownlinkSnapshot,
	sinr_floor: float = -6.0,
	c2_rate_floor: float = 100e3,
	ce_sinr_floor: float = -10.0,
	data_rate_floor: float = 50e6,
	bandwidth_hz: float = 10e6,
	ledger: ModelLedger = DEFAULT_LEDGER,
) -> CoverageReport:
	"""Release-12 and coverage-enhanced SINR coverage plus rate-requirement fractions."""
	sinr = np.asarray(snapshot.sinr, dtype=float)
	if sinr.size == 0:
		return CoverageReport(0, sinr_floor, ce_sinr_floor, 0.0, 0.0, 0.0, 0.0)
	rates = np.asarray(rate_bps(sinr, bandwidth_hz, ledger))
	return CoverageReport(
		n_ue=int(sinr.size),
		sinr_floor=sinr_floor,
		ce_sinr_floor=ce_sinr_floor,
		coverage=float(np.mean(sinr >= sinr_floor)),
		coverage_enhanced=float(np.mean(sinr >= ce_sinr_floor)),
		c2_rate=float(np.mean(rates >= c2_rate_floor)),
		data_rate=float(np.mean(rates >= data_rate_floor)),
	)


def _dl_job(
	config: RunConfig,
	ledger: ModelLedger,
	curve: Optional[LosCurveTable],
	altitude: float,
	seed: int,
	dump_links: bool,
) -> Tuple[DownlinkSnapshot, Optional[pd.DataFrame]]:
	layout = layout_from_config(config)
	pattern = AntennaPattern.synthesize(config.antenna)
	settings = channel_settings_from_config(config, ledger, curve)
	ratio = 0.0 if altitude <= GROUND_HEIGHT else 1.0
	ues = drop_ues(
		layout,
		config.layout.ues_per_cell,
		[altitude],
		ratio,
		seed,
		config.layout.min_ue_distance,
	)
	links = link_matrix(layout, pattern, ues, settings, seed)
	section = config.downlink
	if section.interference_mode == InterferenceMode.BERNOULLI:
		rng = np.random.default_rng([seed, 0, ACTIVITY_STREAM])
		activity = (rng.random(layout.n_cells) < section.resource_utilization).astype(float)
	else:
		activity = np.asarray(section.resource_utilization)
	noise = noise_power_dbm(config.radio.bandwidth_mhz * 1e6, config.radio.ue_noise_figure, ledger)
	serving, sinr = dl_sinr(links.coupling_gain, config.radio.bs_tx_power, noise, activity)
	rows = np.arange(links.n_ue)
	snapshot = DownlinkSnapshot(
		altitude=altitude,
		seeds=(seed,),
		ru=section.resource_utilization,
		serving=serving,
		coupling_gain=links.coupling_gain[rows, serving],
		sinr=sinr,
	)
	frame = None
	if dump_links:
		frame = links.to_frame()
		frame.insert(0, "altitude_m", altitude)
	return snapshot, frame


@dataclass(frozen=True)
class DownlinkResult:
	snapshots: Dict[float, DownlinkSnapshot]
	cdf: pd.DataFrame
	summary: pd.DataFrame
	links: Optional[pd.DataFrame]


def cdf_table(snapshots: Dict[float, DownlinkSnapshot]) -> pd.DataFrame:
	"""Empirical CDFs (altitude_m, metric, x_value, cdf) with cdf = rank / n."""
	frames: List[pd.DataFrame] = []
	for altitude in sorted(snapshots):
		snap = snapshots[altitude]
		for metric, values in (("coupling_gain_db", snap.coupling_gain), ("sinr_db", snap.sinr)):
			ordered = np.sort(np.asarray(values, dtype=float))
			frames.append(
				pd.DataFrame(
					{
						"altitude_m": altitude,
						"metric": metric,
						"x_value": ordered,
						"cdf": np.arange(1, ordered.size + 1) / max(ordered.size, 1),
					}
				)
			)
	if not frames:
		return pd.DataFrame(columns=["altitude_m", "metric", "x_value", "cdf"])
	return pd.concat(frames, ignore_index=True)


def summary_table(
	snapshots: Dict[float, DownlinkSnapshot],
	config: RunConfig,
	ledger: ModelLedger = DEFAULT_LEDGER,
) -> pd.DataFrame:
	section = config.downlink
	rows = []
	for altitude in sorted(snapshots):
		snap = snapshots[altitude]
		report = coverage_check(
			snap,
			section.sinr_floor,
			section.c2_rate_floor,
			section.ce_sinr_floor,
			section.data_rate_floor,
			config.radio.bandwidth_mhz * 1e6,
			ledger,
		)
		rows.append(
			{
				"altitude_m": altitude,
				"median_sinr_db": float(np.percentile(snap.sinr, 50)),
				"p05_cg_db": float(np.percentile(snap.coupling_gain, 5)),
				"coverage_m6": report.coverage,
				"coverage_m10": report.coverage_enhanced,
				"ru": snap.ru,
				"median_cg_db": float(np.percentile(snap.coupling_gain, 50)),
				"p05_sinr_db": float(np.percentile(snap.sinr, 5)),
				"coverage_c2": report.c2_rate,
				"coverage_data": report.data_rate,
				"n_ue": report.n_ue,
			}
		)
	columns = [
		"altitude_m", "median_sinr_db", "p05_cg_db", "coverage_m6", "coverage_m10", "ru",
		"median_cg_db", "p05_sinr_db", "coverage_c2", "coverage_data", "n_ue",
	]
	return pd.DataFrame(rows, columns=columns)


def run_dl_analysis(
	config: RunConfig,
	ledger: ModelLedger = DEFAULT_LEDGER,
	curve: Optional[LosCurveTable] = None,
	workers: int = 1,
) -> DownlinkResult:
	"""Downlink census over every configured altitude and seed."""
	section = config.downlink
	seeds = list(config.run.seeds)
	tracer = trace.get_tracer(__name__)
	with tracer.start_as_current_span("run_dl_analysis") as span:
		span.set_attribute("altitudes", [float(a) for a in section.altitudes])
		span.set_attribute("seed_count", len(seeds))
		span.set_attribute("ru", section.resource_utilization)
		jobs = {
			(float(altitude), seed): (config, ledger, curve, float(altitude), seed, section.link_dump and seed == seeds[0])
			for altitude in section.altitudes
			for seed in seeds
		}
		results = run_jobs(_dl_job, jobs, workers, span_name="dl_jobs")

		grouped: Dict[float, List[DownlinkSnapshot]] = {}
		link_frames: List[pd.DataFrame] = []
		for (altitude, _), (snapshot, frame) in results:
			grouped.setdefault(altitude, []).append(snapshot)
			if frame is not None:
				link_frames.append(frame)
		snapshots = {altitude: DownlinkSnapshot.concat(snaps) for altitude, snaps in grouped.items()}
		summary = summary_table(snapshots, config, ledger)
		for row in summary.itertuples():
			LOGGER.info(
				"Downlink %.1f m: median SINR %.2f dB, p05 coupling %.2f dB, coverage %.3f",
				row.altitude_m, row.median_sinr_db, row.p05_cg_db, row.coverage_m6,
			)
	return DownlinkResult(
		snapshots=snapshots,
		cdf=cdf_table(snapshots),
		summary=summary,
		links=pd.concat(link_frames, ignore_index=True) if link_frames else None,
	)
