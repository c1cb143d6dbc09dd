"""
Large-scale channel: LOS probability, pathloss, shadow fading and coupling gain.

Below the BS antenna height the rural-macro (RMa) LOS/NLOS models apply;
above it propagation is free space. Every constant comes from the
`ModelLedger`. Random draws for a link come from a stream keyed by
(seed, drop, ue), drawn in cell order, so a link's state does not depend on
which other links are evaluated or in which order.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.models.errors import ModelDomainError
from src.models.ledger import DEFAULT_LEDGER, ModelLedger
from src.models.network import NetworkLayout, UserTerminal
from src.models.radio import LinkState
from src.models.run_config import LosModel, RunConfig
from src.models.terrain_map import LosCurveTable
from src.simulation.antenna import AntennaPattern
from src.simulation.deployment import ue_arrays, wrapped_offsets


LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class ChannelSettings:
	"""Channel model selection for a campaign."""

	carrier_ghz: float = 0.7
	los_model: LosModel = LosModel.RMA_AERIAL
	shadowing: bool = True
	ledger: ModelLedger = DEFAULT_LEDGER
	curve: Optional[LosCurveTable] = None


def _check_frequency(f_c: float, ledger: ModelLedger) -> None:
	if not ledger.min_frequency_ghz <= f_c <= ledger.max_frequency_ghz:
		raise ModelDomainError(
			f"carrier {f_c} GHz outside [{ledger.min_frequency_ghz}, {ledger.max_frequency_ghz}] GHz"
		)


def _check_distance(d2d: np.ndarray, ledger: ModelLedger) -> None:
	if np.any(d2d < ledger.pathloss_min_distance) or np.any(d2d > ledger.pathloss_max_distance):
		raise ModelDomainError(
			f"d2d outside [{ledger.pathloss_min_distance}, {ledger.pathloss_max_distance}] m: "
			f"min {float(np.min(d2d)):.2f}, max {float(np.max(d2d)):.2f}"
		)


def _scalar(value: np.ndarray):
	value = np.asarray(value)
	return value if value.ndim else float(value)


def free_space_pathloss(d3d, f_c: float, ledger: ModelLedger = DEFAULT_LEDGER):
	"""FSPL = 32.45 + 20 log10(f_c / GHz) + 20 log10(d3d / m)."""
	d3d = np.asarray(d3d, dtype=float)
	return _scalar(ledger.fspl_constant_db + 20.0 * math.log10(f_c) + 20.0 * np.log10(d3d))


def breakpoint_distance(h_bs, h_ut, f_c: float, ledger: ModelLedger = DEFAULT_LEDGER):
	return 2.0 * np.pi * np.asarray(h_bs, dtype=float) * np.asarray(h_ut, dtype=float) * f_c * 1e9 / ledger.speed_of_light


def _rma_pl1(distance: np.ndarray, f_c: float, ledger: ModelLedger) -> np.ndarray:
	h = ledger.rma_building_height
	return (
		20.0 * np.log10(40.0 * np.pi * distance * f_c / 3.0)
		+ min(0.03 * h ** 1.72, 10.0) * np.log10(distance)
		- min(0.044 * h ** 1.72, 14.77)
		+ 0.002 * math.log10(h) * distance
	)


def rma_los_pathloss(d2d, h_bs, h_ut, f_c: float, ledger: ModelLedger = DEFAULT_LEDGER):
	"""RMa LOS pathloss with the breakpoint at d_BP = 2π h_BS h_UT f_c / c."""
	d2d, h_bs, h_ut = np.broadcast_arrays(
		np.asarray(d2d, dtype=float), np.asarray(h_bs, dtype=float), np.asarray(h_ut, dtype=float)
	)
	d3d = np.sqrt(d2d ** 2 + (h_bs - h_ut) ** 2)
	d_bp = breakpoint_distance(h_bs, h_ut, f_c, ledger)
	near = _rma_pl1(d3d, f_c, ledger)
	far = _rma_pl1(d_bp, f_c, ledger) + 40.0 * np.log10(d3d / d_bp)
	return _scalar(np.where(d2d <= d_bp, near, far))


def rma_nlos_pathloss(d2d, h_bs, h_ut, f_c: float, ledger: ModelLedger = DEFAULT_LEDGER):
	"""RMa NLOS pathloss, clamped from below by the LOS value."""
	d2d, h_bs, h_ut = np.broadcast_arrays(
		np.asarray(d2d, dtype=float), np.asarray(h_bs, dtype=float), np.asarray(h_ut, dtype=float)
	)
	h = ledger.rma_building_height
	w = ledger.rma_street_width
	d3d = np.sqrt(d2d ** 2 + (h_bs - h_ut) ** 2)
	nlos = (
		161.04
		- 7.1 * math.log10(w)
		+ 7.5 * math.log10(h)
		- (24.37 - 3.7 * (h / h_bs) ** 2) * np.log10(h_bs)
		+ (43.42 - 3.1 * np.log10(h_bs)) * (np.log10(d3d) - 3.0)
		+ 20.0 * math.log10(f_c)
		- (3.2 * np.log10(11.75 * h_ut) ** 2 - 4.97)
	)
	return _scalar(np.maximum(nlos, rma_los_pathloss(d2d, h_bs, h_ut, f_c, ledger)))


def pathloss(d2d, h_bs, h_ut, f_c: float, los, ledger: ModelLedger = DEFAULT_LEDGER):
	"""
	Pathloss in dB: free space when the UE is above the BS antenna,
	otherwise the RMa LOS or NLOS model selected by `los`.
	"""
	_check_frequency(f_c, ledger)
	d2d, h_bs, h_ut, los = np.broadcast_arrays(
		np.asarray(d2d, dtype=float),
		np.asarray(h_bs, dtype=float),
		np.asarray(h_ut, dtype=float),
		np.asarray(los, dtype=bool),
	)
	_check_distance(d2d, ledger)
	d3d = np.sqrt(d2d ** 2 + (h_bs - h_ut) ** 2)
	ground = np.where(
		los,
		rma_los_pathloss(d2d, h_bs, h_ut, f_c, ledger),
		rma_nlos_pathloss(d2d, h_bs, h_ut, f_c, ledger),
	)
	return _scalar(np.where(h_ut > h_bs, free_space_pathloss(d3d, f_c, ledger), ground))


def _rma_ground_los(d2d: np.ndarray, ledger: ModelLedger) -> np.ndarray:
	return np.where(
		d2d <= ledger.rma_los_near_distance,
		1.0,
		np.exp(-(d2d - ledger.rma_los_near_distance) / ledger.rma_los_decay_length),
	)


def los_probability(
	d2d,
	h_ut,
	model: LosModel = LosModel.RMA_AERIAL,
	ledger: ModelLedger = DEFAULT_LEDGER,
	curve: Optional[LosCurveTable] = None,
):
	"""
	LOS probability for a link.

	rma_baseline is the ground model and refuses UE heights above the
	ledger's applicability limit. rma_aerial keeps the ground model up to the
	anchor height, reaches 1 at the cutoff altitude, and in between scales
	log(P) linearly with altitude. terrain_empirical reads a curve table
	produced by the terrain census.
	"""
	d2d, h_ut = np.broadcast_arrays(np.asarray(d2d, dtype=float), np.asarray(h_ut, dtype=float))
	if np.any(d2d < 0):
		raise ModelDomainError("d2d must be nonnegative")
	if np.any(h_ut < 1.5):
		raise ModelDomainError("UE height must be at least 1.5 m")
	model = LosModel(model)
	if model == LosModel.RMA_BASELINE:
		if np.any(h_ut > ledger.rma_max_ue_height):
			raise ModelDomainError(
				f"rma_baseline LOS model is not applicable above {ledger.rma_max_ue_height} m "
				f"(queried {float(np.max(h_ut)):.1f} m)"
			)
		return _scalar(_rma_ground_los(d2d, ledger))
	if model == LosModel.RMA_AERIAL:
		ground = _rma_ground_los(d2d, ledger)
		span = ledger.los_cutoff_altitude - ledger.aerial_los_anchor_height
		weight = np.clip((h_ut - ledger.aerial_los_anchor_height) / span, 0.0, 1.0)
		with np.errstate(divide="ignore"):
			log_p = np.log(ground)
		return _scalar(np.where(weight >= 1.0, 1.0, np.exp((1.0 - weight) * log_p)))
	if curve is None:
		raise ModelDomainError("terrain_empirical LOS model requires a curve table")
	return _scalar(curve.probability(d2d, h_ut))


def shadowing_sigma(los, h_ut, h_bs, ledger: ModelLedger = DEFAULT_LEDGER):
	"""Std-dev in dB: 4/8 dB up to BS height, tapered linearly to 0 at the LOS cutoff altitude."""
	los, h_ut, h_bs = np.broadcast_arrays(
		np.asarray(los, dtype=bool), np.asarray(h_ut, dtype=float), np.asarray(h_bs, dtype=float)
	)
	base = np.where(los, ledger.sigma_los_db, ledger.sigma_nlos_db)
	span = ledger.los_cutoff_altitude - h_bs
	with np.errstate(divide="ignore", invalid="ignore"):
		taper = np.where(span > 0, (ledger.los_cutoff_altitude - h_ut) / span, 0.0)
	taper = np.where(h_ut <= h_bs, 1.0, np.clip(taper, 0.0, 1.0))
	return _scalar(base * taper)


def shadowing_draw(
	los: bool,
	rng: np.random.Generator,
	h_ut: float = 1.5,
	h_bs: float = 35.0,
	ledger: ModelLedger = DEFAULT_LEDGER,
) -> float:
	"""One zero-mean log-normal shadowing sample in dB."""
	sigma = shadowing_sigma(los, h_ut, h_bs, ledger)
	return float(sigma * rng.standard_normal())


def expected_pathloss(d2d, h_bs, h_ut, settings: ChannelSettings):
	"""Deterministic pathloss: LOS/NLOS path gains averaged with the LOS probability in the linear domain."""
	ledger = settings.ledger
	d2d, h_bs, h_ut = np.broadcast_arrays(
		np.asarray(d2d, dtype=float), np.asarray(h_bs, dtype=float), np.asarray(h_ut, dtype=float)
	)
	p_los = np.asarray(los_probability(d2d, h_ut, settings.los_model, ledger, settings.curve))
	pl_los = np.asarray(pathloss(d2d, h_bs, h_ut, settings.carrier_ghz, True, ledger))
	pl_nlos = np.asarray(pathloss(d2d, h_bs, h_ut, settings.carrier_ghz, False, ledger))
	gain = p_los * 10.0 ** (-pl_los / 10.0) + (1.0 - p_los) * 10.0 ** (-pl_nlos / 10.0)
	return _scalar(-10.0 * np.log10(gain))


def altitude_seam_db(d2d, h_bs: float, f_c: float, ledger: ModelLedger = DEFAULT_LEDGER):
	"""Jump of the LOS pathloss where the model switches to free space at h_ut = h_bs."""
	d2d = np.asarray(d2d, dtype=float)
	d3d = np.sqrt(d2d ** 2)
	return _scalar(np.abs(np.asarray(rma_los_pathloss(d2d, h_bs, h_bs, f_c, ledger)) - free_space_pathloss(d3d, f_c, ledger)))


def generate_pathloss_curves(h_bs: float, h_ut: float, f_c: float, d_range: Sequence[float], ledger: ModelLedger = DEFAULT_LEDGER) -> pd.DataFrame:
	"""Rows (d2d, pl_los, pl_nlos, pl_fspl) of the RMa models against free space at the slant distance."""
	_check_frequency(f_c, ledger)
	d2d = np.asarray(sorted(d_range), dtype=float)
	_check_distance(d2d, ledger)
	d3d = np.sqrt(d2d ** 2 + (h_bs - h_ut) ** 2)
	return pd.DataFrame(
		{
			"h_bs_m": h_bs,
			"h_ut_m": h_ut,
			"f_c_ghz": f_c,
			"d2d_m": d2d,
			"pl_los_db": np.atleast_1d(rma_los_pathloss(d2d, h_bs, h_ut, f_c, ledger)),
			"pl_nlos_db": np.atleast_1d(rma_nlos_pathloss(d2d, h_bs, h_ut, f_c, ledger)),
			"pl_fspl_db": np.atleast_1d(free_space_pathloss(d3d, f_c, ledger)),
		}
	)


def link_stream(seed: int, drop: int, ue_id: int, n_cells: int) -> Tuple[np.ndarray, np.ndarray]:
	"""Uniforms (LOS draw) and standard normals (shadowing) for all cells of one UE."""
	rng = np.random.default_rng([seed, drop, ue_id])
	return rng.random(n_cells), rng.standard_normal(n_cells)


@dataclass(frozen=True)
class LinkGeometry:
	"""Wrapped geometry of every (UE, cell) pair; arrays are (n_ue, n_cells)."""

	d2d: np.ndarray
	d3d: np.ndarray
	theta: np.ndarray
	phi: np.ndarray
	h_bs: np.ndarray
	h_ut: np.ndarray


def link_geometry(layout: NetworkLayout, positions: np.ndarray) -> LinkGeometry:
	positions = np.asarray(positions, dtype=float).reshape(-1, 3)
	offsets = wrapped_offsets(positions[:, :2], layout.site_xy, layout)[:, layout.cell_site, :]
	dx, dy = offsets[..., 0], offsets[..., 1]
	d2d = np.hypot(dx, dy)
	h_bs = np.broadcast_to(layout.site_heights[layout.cell_site], d2d.shape)
	h_ut = np.broadcast_to(positions[:, 2:3], d2d.shape)
	dz = h_ut - h_bs
	d3d = np.sqrt(d2d ** 2 + dz ** 2)
	theta = np.degrees(np.arctan2(d2d, dz))
	phi = np.degrees(np.arctan2(dy, dx)) - layout.cell_azimuths[None, :]
	phi = (phi + 180.0) % 360.0 - 180.0
	return LinkGeometry(d2d=d2d, d3d=d3d, theta=theta, phi=phi, h_bs=h_bs, h_ut=h_ut)


@dataclass(frozen=True)
class LinkMatrix:
	"""All links of one drop; every array is (n_ue, n_cells)."""

	ue_ids: np.ndarray
	d2d: np.ndarray
	d3d: np.ndarray
	height_difference: np.ndarray
	los: np.ndarray
	pathloss: np.ndarray
	shadowing: np.ndarray
	antenna_gain: np.ndarray
	coupling_gain: np.ndarray

	@property
	def n_ue(self) -> int:
		return self.coupling_gain.shape[0]

	@property
	def n_cells(self) -> int:
		return self.coupling_gain.shape[1]

	def link(self, row: int, cell: int) -> LinkState:
		return LinkState(
			cell=cell,
			ue=int(self.ue_ids[row]),
			d2d=float(self.d2d[row, cell]),
			d3d=float(self.d3d[row, cell]),
			height_difference=float(self.height_difference[row, cell]),
			los=bool(self.los[row, cell]),
			pathloss=float(self.pathloss[row, cell]),
			shadowing=float(self.shadowing[row, cell]),
			antenna_gain=float(self.antenna_gain[row, cell]),
			coupling_gain=float(self.coupling_gain[row, cell]),
		)

	def links_for(self, row: int) -> list:
		return [self.link(row, cell) for cell in range(self.n_cells)]

	def to_frame(self) -> pd.DataFrame:
		"""Link dump with columns (cell, ue, d2d, los, pl_db, sf_db, ag_dbi, cg_db)."""
		n_ue, n_cells = self.coupling_gain.shape
		return pd.DataFrame(
			{
				"cell": np.tile(np.arange(n_cells), n_ue),
				"ue": np.repeat(self.ue_ids, n_cells),
				"d2d": self.d2d.ravel(),
				"los": self.los.ravel().astype(int),
				"pl_db": self.pathloss.ravel(),
				"sf_db": self.shadowing.ravel(),
				"ag_dbi": self.antenna_gain.ravel(),
				"cg_db": self.coupling_gain.ravel(),
			}
		)


def link_matrix(
	layout: NetworkLayout,
	pattern: AntennaPattern,
	ues: Sequence[UserTerminal],
	settings: ChannelSettings,
	seed: int,
	drop: int = 0,
) -> LinkMatrix:
	"""Evaluate every (UE, cell) link of a drop with frozen LOS states and shadowing."""
	positions, _ = ue_arrays(ues)
	ue_ids = np.array([ue.ue_id for ue in ues], dtype=np.int64)
	geo = link_geometry(layout, positions)
	n_cells = layout.n_cells
	uniforms = np.empty(geo.d2d.shape)
	normals = np.empty(geo.d2d.shape)
	for row, ue_id in enumerate(ue_ids):
		uniforms[row], normals[row] = link_stream(seed, drop, int(ue_id), n_cells)

	ledger = settings.ledger
	p_los = np.asarray(los_probability(geo.d2d, geo.h_ut, settings.los_model, ledger, settings.curve))
	los = uniforms < p_los
	pl = np.asarray(pathloss(geo.d2d, geo.h_bs, geo.h_ut, settings.carrier_ghz, los, ledger))
	if settings.shadowing:
		sf = np.asarray(shadowing_sigma(los, geo.h_ut, geo.h_bs, ledger)) * normals
	else:
		sf = np.zeros_like(pl)
	ag = np.asarray(pattern.gain(geo.theta, geo.phi))
	return LinkMatrix(
		ue_ids=ue_ids,
		d2d=geo.d2d,
		d3d=geo.d3d,
		height_difference=np.abs(geo.h_ut - geo.h_bs),
		los=los,
		pathloss=pl,
		shadowing=sf,
		antenna_gain=ag,
		coupling_gain=ag - pl - sf,
	)


def coupling_gain(
	layout: NetworkLayout,
	pattern: AntennaPattern,
	ue: UserTerminal,
	cell: int,
	settings: ChannelSettings,
	seed: int,
	drop: int = 0,
) -> LinkState:
	"""Single-link view: identical to the corresponding entry of `link_matrix`."""
	return link_matrix(layout, pattern, [ue], settings, seed, drop).link(0, cell)


def deterministic_coupling(
	layout: NetworkLayout,
	pattern: AntennaPattern,
	positions: np.ndarray,
	settings: ChannelSettings,
) -> np.ndarray:
	"""
	Coupling gain without random draws: antenna gain minus the expected
	pathloss. Distances shorter than the model minimum are clamped to it.
	"""
	geo = link_geometry(layout, positions)
	d2d = np.clip(geo.d2d, settings.ledger.pathloss_min_distance, settings.ledger.pathloss_max_distance)
	pl = np.asarray(expected_pathloss(d2d, geo.h_bs, geo.h_ut, settings))
	ag = np.asarray(pattern.gain(geo.theta, geo.phi))
	return ag - pl


def channel_settings_from_config(
	config: RunConfig,
	ledger: ModelLedger = DEFAULT_LEDGER,
	curve: Optional[LosCurveTable] = None,
) -> ChannelSettings:
	"""Channel selection of a run; the terrain_empirical curve is read from disk unless given."""
	section = config.channel
	if section.los_model == LosModel.TERRAIN_EMPIRICAL and curve is None:
		from src.ingestion.heightmap_io import load_los_curve

		curve = load_los_curve(section.los_curve_path)
	return ChannelSettings(
		carrier_ghz=section.carrier_frequency,
		los_model=section.los_model,
		shadowing=section.shadowing,
		ledger=ledger,
		curve=curve,
	)
