"""
Cell association geometry: fragmentation of serving areas and handovers along a path.

Both analyses use the deterministic coupling gain (antenna gain minus the
LOS-probability-weighted pathloss), so results depend only on geometry.
The handover trace can add log-normal shadowing on top, correlated along
the path with the ledger's decorrelation distance.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from opentelemetry import trace
from scipy import ndimage, signal

from src.models.errors import ConfigurationError
from src.models.network import NetworkLayout
from src.models.radio import HandoverConfig
from src.models.run_config import ShadowingMode
from src.simulation.antenna import AntennaPattern
from src.simulation.channel import (
	ChannelSettings,
	deterministic_coupling,
	link_geometry,
	los_probability,
	shadowing_sigma,
)
from src.simulation.deployment import serving_cells


LOGGER = logging.getLogger(__name__)

RASTER_CHUNK = 4000
SHADOWING_STREAM = 2**31 - 3
FOUR_CONNECTED = ndimage.generate_binary_structure(2, 1)


def _coupling_in_chunks(
	layout: NetworkLayout,
	pattern: AntennaPattern,
	positions: np.ndarray,
	settings: ChannelSettings,
) -> np.ndarray:
	return np.vstack([
		deterministic_coupling(layout, pattern, positions[start:start + RASTER_CHUNK], settings)
		for start in range(0, len(positions), RASTER_CHUNK)
	])


def _to_cluster(points: np.ndarray, layout: NetworkLayout) -> np.ndarray:
	"""Translate points onto the copy of the cluster that holds the original sites."""
	out = np.empty_like(points, dtype=float)
	for start in range(0, len(points), RASTER_CHUNK):
		chunk = points[start:start + RASTER_CHUNK]
		shifted = chunk[:, None, :] + layout.translations[None, :, :]
		diff = shifted[:, :, None, :] - layout.site_xy[None, None, :, :]
		nearest = np.min(np.einsum("ntsk,ntsk->nts", diff, diff), axis=2)
		# Ties go to the identity so points on the boundary stay put.
		best = np.argmin(nearest - 1e-6 * (np.arange(nearest.shape[1]) == 0), axis=1)
		out[start:start + len(chunk)] = shifted[np.arange(len(chunk)), best]
	return out


class _UnionFind:
	def __init__(self, size: int) -> None:
		self.parent = np.arange(size)

	def find(self, item: int) -> int:
		root = item
		while self.parent[root] != root:
			root = self.parent[root]
		while self.parent[item] != root:
			self.parent[item], item = root, self.parent[item]
		return int(root)

	def union(self, a: int, b: int) -> None:
		ra, rb = self.find(a), self.find(b)
		if ra != rb:
			self.parent[max(ra, rb)] = min(ra, rb)


@dataclass(frozen=True)
class FragmentationResult:
	"""Connected serving areas per cell on one raster."""

	altitude: float
	raster_step: float
	components: np.ndarray
	pixels: np.ndarray

	@property
	def mean_components(self) -> float:
		served = self.pixels > 0
		return float(self.components[served].mean()) if np.any(served) else 0.0

	def to_frame(self) -> pd.DataFrame:
		return pd.DataFrame(
			{
				"altitude_m": self.altitude,
				"raster_step_m": self.raster_step,
				"cell": np.arange(self.components.size),
				"components": self.components,
				"pixels": self.pixels,
			}
		)


def association_fragmentation(
	layout: NetworkLayout,
	pattern: AntennaPattern,
	altitude: float,
	raster_step: float,
	settings: Optional[ChannelSettings] = None,
) -> FragmentationResult:
	"""
	Count the 4-connected pieces of every cell's serving area.

	The raster covers one copy of the wraparound cluster. Pieces that touch
	across the cluster boundary belong to the same area and are merged.
	"""
	if raster_step > layout.inter_site_distance / 20.0:
		raise ConfigurationError(
			"enhancements.fragmentation_raster_step",
			f"must not exceed ISD/20 = {layout.inter_site_distance / 20.0:.2f} m",
		)
	settings = settings or ChannelSettings()
	tracer = trace.get_tracer(__name__)
	with tracer.start_as_current_span("association_fragmentation") as span:
		span.set_attribute("altitude_m", altitude)
		span.set_attribute("raster_step_m", raster_step)
		reach = float(np.max(np.abs(layout.site_xy))) + layout.inter_site_distance
		n_half = int(math.ceil(reach / raster_step))
		axis = np.arange(-n_half, n_half + 1) * raster_step
		gx, gy = np.meshgrid(axis, axis, indexing="xy")
		points = np.column_stack([gx.ravel(), gy.ravel()])

		in_cluster = np.all(np.isclose(_to_cluster(points, layout), points), axis=1)
		labels = np.full(points.shape[0], -1, dtype=np.int64)
		inside = np.flatnonzero(in_cluster)
		positions = np.column_stack([points[inside], np.full(inside.size, altitude)])
		labels[inside] = serving_cells(_coupling_in_chunks(layout, pattern, positions, settings))
		labels = labels.reshape(gx.shape)
		span.set_attribute("pixel_count", int(inside.size))

		components = np.zeros(layout.n_cells, dtype=np.int64)
		pixels = np.bincount(labels[labels >= 0], minlength=layout.n_cells)
		pieces = np.zeros(gx.shape, dtype=np.int64)
		offset = 0
		for cell in np.flatnonzero(pixels):
			cell_pieces, count = ndimage.label(labels == cell, structure=FOUR_CONNECTED)
			mask = cell_pieces > 0
			pieces[mask] = cell_pieces[mask] + offset
			offset += count

		# Merge pieces whose 4-neighbours across the cluster boundary are the same cell.
		finder = _UnionFind(offset + 1)
		n = gx.shape[0]
		rows, cols = np.nonzero(labels >= 0)
		for dr, dc in ((0, 1), (0, -1), (1, 0), (-1, 0)):
			nr, nc = rows + dr, cols + dc
			outside = (nr < 0) | (nr >= n) | (nc < 0) | (nc >= n)
			clipped_r, clipped_c = np.clip(nr, 0, n - 1), np.clip(nc, 0, n - 1)
			outside |= labels[clipped_r, clipped_c] < 0
			if not np.any(outside):
				continue
			src_r, src_c = rows[outside], cols[outside]
			neighbour = np.column_stack([axis[0] + (src_c + dc) * raster_step, axis[0] + (src_r + dr) * raster_step])
			wrapped = _to_cluster(neighbour, layout)
			wr = np.rint((wrapped[:, 1] - axis[0]) / raster_step).astype(np.int64)
			wc = np.rint((wrapped[:, 0] - axis[0]) / raster_step).astype(np.int64)
			valid = (wr >= 0) & (wr < n) & (wc >= 0) & (wc < n)
			for r, c, r2, c2 in zip(src_r[valid], src_c[valid], wr[valid], wc[valid]):
				if labels[r2, c2] == labels[r, c]:
					finder.union(int(pieces[r, c]), int(pieces[r2, c2]))

		for cell in np.flatnonzero(pixels):
			roots = {finder.find(int(piece)) for piece in np.unique(pieces[labels == cell])}
			components[cell] = len(roots)
		result = FragmentationResult(altitude=altitude, raster_step=raster_step, components=components, pixels=pixels)
		span.set_attribute("mean_components", result.mean_components)
	LOGGER.info("Fragmentation at %.1f m: %.2f components per cell", altitude, result.mean_components)
	return result


@dataclass(frozen=True)
class HandoverEvent:
	time_ms: float
	from_cell: int
	to_cell: int
	sinr_db: float
	source_sinr_db: float
	ping_pong: bool


@dataclass(frozen=True)
class HandoverTrace:
	"""Serving cell per measurement and the handover events that changed it."""

	altitude: float
	seed: int
	times_ms: np.ndarray
	serving: np.ndarray
	events: Tuple[HandoverEvent, ...]

	@property
	def handover_count(self) -> int:
		return len(self.events)

	@property
	def ping_pong_count(self) -> int:
		return sum(event.ping_pong for event in self.events)

	def events_frame(self) -> pd.DataFrame:
		columns = ["altitude_m", "seed", "event_time_ms", "from_cell", "to_cell", "sinr_db", "source_sinr_db", "ping_pong"]
		rows = [
			{
				"altitude_m": self.altitude,
				"seed": self.seed,
				"event_time_ms": event.time_ms,
				"from_cell": event.from_cell,
				"to_cell": event.to_cell,
				"sinr_db": event.sinr_db,
				"source_sinr_db": event.source_sinr_db,
				"ping_pong": int(event.ping_pong),
			}
			for event in self.events
		]
		return pd.DataFrame(rows, columns=columns)


def _path_shadowing(
	layout: NetworkLayout,
	positions: np.ndarray,
	settings: ChannelSettings,
	mode: ShadowingMode,
	seed: int,
	step_m: float,
) -> np.ndarray:
	if mode == ShadowingMode.NONE:
		return np.zeros((len(positions), layout.n_cells))
	geo = link_geometry(layout, positions)
	ledger = settings.ledger
	d2d = np.clip(geo.d2d, ledger.pathloss_min_distance, ledger.pathloss_max_distance)
	p_los = np.asarray(los_probability(d2d, geo.h_ut, settings.los_model, ledger, settings.curve))
	sigma = np.asarray(shadowing_sigma(p_los >= 0.5, geo.h_ut, geo.h_bs, ledger))
	rng = np.random.default_rng([seed, SHADOWING_STREAM])
	z = rng.standard_normal((len(positions), layout.n_cells))
	if mode == ShadowingMode.CORRELATED:
		rho = math.exp(-step_m / ledger.shadowing_decorrelation)
		z[0] /= math.sqrt(1.0 - rho ** 2)
		z = signal.lfilter([math.sqrt(1.0 - rho ** 2)], [1.0, -rho], z, axis=0)
	return sigma * z


def simulate_trajectory_handover(
	layout: NetworkLayout,
	pattern: AntennaPattern,
	hoc: HandoverConfig,
	path: Tuple[Tuple[float, float], Tuple[float, float]],
	seed: int,
	settings: Optional[ChannelSettings] = None,
	shadowing_mode: ShadowingMode = ShadowingMode.CORRELATED,
	tx_power: float = 46.0,
	noise_dbm: float = -95.0,
	ru: float = 0.2,
) -> HandoverTrace:
	"""
	A3-event handovers of a UE flying a straight path at `hoc.altitude`.

	Measurements are taken every measurement period. A neighbour triggers a
	handover once it has exceeded the serving cell by the hysteresis in
	every measurement spanning time_to_trigger. A return to the previous
	cell within the ping-pong window marks the later event as a ping-pong.
	"""
	settings = settings or ChannelSettings()
	start = np.asarray(path[0], dtype=float)
	end = np.asarray(path[1], dtype=float)
	length = float(np.hypot(*(end - start)))
	step_m = hoc.ue_speed * hoc.measurement_period / 1000.0
	n_steps = int(math.floor(length / step_m)) + 1
	frac = np.arange(n_steps) * step_m / max(length, 1e-12)
	xy = start[None, :] + np.clip(frac, 0.0, 1.0)[:, None] * (end - start)[None, :]
	positions = np.column_stack([xy, np.full(n_steps, hoc.altitude)])
	times_ms = np.arange(n_steps) * hoc.measurement_period

	tracer = trace.get_tracer(__name__)
	with tracer.start_as_current_span("simulate_trajectory_handover") as span:
		span.set_attribute("altitude_m", hoc.altitude)
		span.set_attribute("seed", seed)
		span.set_attribute("steps", n_steps)
		coupling = _coupling_in_chunks(layout, pattern, positions, settings)
		coupling = coupling - _path_shadowing(layout, positions, settings, shadowing_mode, seed, step_m)
		rsrp = tx_power + coupling

		ttt_steps = int(round(hoc.time_to_trigger / hoc.measurement_period))
		timers = np.zeros(layout.n_cells, dtype=np.int64)
		current = int(np.argmax(rsrp[0]))
		serving = np.empty(n_steps, dtype=np.int64)
		events: List[HandoverEvent] = []
		last: Dict[str, float] = {}
		for k in range(n_steps):
			row = rsrp[k]
			exceeds = row > row[current] + hoc.hysteresis
			exceeds[current] = False
			timers = np.where(exceeds, timers + 1, 0)
			ready = np.flatnonzero(timers > ttt_steps)
			if ready.size:
				target = int(ready[np.argmax(row[ready])])
				target_sinr = _sinr_towards(coupling[k], target, tx_power, noise_dbm, ru)
				ping_pong = (
					last.get("from") == target
					and last.get("to") == current
					and times_ms[k] - last["time"] <= hoc.ping_pong_window
				)
				events.append(
					HandoverEvent(
						time_ms=float(times_ms[k]),
						from_cell=current,
						to_cell=target,
						sinr_db=target_sinr,
						source_sinr_db=_sinr_towards(coupling[k], current, tx_power, noise_dbm, ru),
						ping_pong=bool(ping_pong),
					)
				)
				last = {"from": current, "to": target, "time": float(times_ms[k])}
				current = target
				timers[:] = 0
			serving[k] = current
		span.set_attribute("handovers", len(events))
		span.set_attribute("ping_pongs", sum(event.ping_pong for event in events))
	return HandoverTrace(altitude=hoc.altitude, seed=seed, times_ms=times_ms, serving=serving, events=tuple(events))


def _sinr_towards(coupling_row: np.ndarray, cell: int, tx_power: float, noise_dbm: float, ru: float) -> float:
	rx = 10.0 ** ((tx_power + coupling_row) / 10.0)
	interference = ru * (rx.sum() - rx[cell])
	return float(10.0 * np.log10(rx[cell] / (interference + 10.0 ** (noise_dbm / 10.0))))


def handover_summary(traces: Sequence[HandoverTrace], path_length_m: float) -> pd.DataFrame:
	rows = [
		{
			"altitude_m": tr.altitude,
			"seed": tr.seed,
			"handovers": tr.handover_count,
			"ping_pongs": tr.ping_pong_count,
			"handovers_per_km": tr.handover_count / max(path_length_m / 1000.0, 1e-12),
		}
		for tr in traces
	]
	return pd.DataFrame(rows, columns=["altitude_m", "seed", "handovers", "ping_pongs", "handovers_per_km"])
