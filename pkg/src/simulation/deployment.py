"""
Hexagonal multi-cell deployment, UE drops and serving-cell association.

Sites sit on a hexagonal lattice (nearest neighbours at bearings 0°, 60°, ...)
arranged as a center site plus hexagonal rings. Each site hosts three sectors
whose cell areas are hexagons of circumradius ISD/3 that meet at the site.
"""

from __future__ import annotations

import logging
import math
from typing import Iterable, List, Sequence, Tuple

import numpy as np
import pandas as pd

from src.models.errors import ConfigurationError, SimulationError
from src.models.network import Cell, NetworkLayout, Site, UeKind, UserTerminal
from src.models.radio import LinkState
from src.models.run_config import GROUND_HEIGHT, SUPPORTED_SITE_COUNTS, RunConfig


LOGGER = logging.getLogger(__name__)

# Axial neighbour steps on a lattice spanned by b1 (0°) and b2 (60°).
AXIAL_DIRECTIONS: Tuple[Tuple[int, int], ...] = ((1, 0), (1, -1), (0, -1), (-1, 0), (-1, 1), (0, 1))
RING_COUNTS = {1: 0, 7: 1, 19: 2, 37: 3}


def _ring(radius: int) -> List[Tuple[int, int]]:
	if radius == 0:
		return [(0, 0)]
	q, r = -radius, radius
	members = []
	for dq, dr in AXIAL_DIRECTIONS:
		for _ in range(radius):
			members.append((q, r))
			q, r = q + dq, r + dr
	return members


def _rotate(vec: np.ndarray, degrees: float) -> np.ndarray:
	rad = math.radians(degrees)
	c, s = math.cos(rad), math.sin(rad)
	return np.array([c * vec[0] - s * vec[1], s * vec[0] + c * vec[1]])


def build_layout(
	isd: float,
	n_sites: int,
	bs_height: float,
	cells_per_site: int = 3,
	azimuth_offset: float = 0.0,
) -> NetworkLayout:
	"""
	Build a center-plus-rings hexagonal layout with wraparound translations.

	Ring populations are 1, 6, 12, 18. The six wraparound translations are
	(R+1)*b1 + R*b2 rotated in 60° steps, where R is the outer ring index;
	they tile the plane with copies of the 3R^2 + 3R + 1 site cluster.
	"""
	if n_sites not in SUPPORTED_SITE_COUNTS:
		raise ConfigurationError("layout.n_sites", f"must be one of {SUPPORTED_SITE_COUNTS}, got {n_sites}")
	if isd <= 0:
		raise ConfigurationError("layout.inter_site_distance", "must be positive")
	rings = RING_COUNTS[n_sites]
	b1 = np.array([isd, 0.0])
	b2 = np.array([0.5 * isd, 0.5 * math.sqrt(3.0) * isd])

	sites: List[Site] = []
	for ring in range(rings + 1):
		for q, r in _ring(ring):
			pos = q * b1 + r * b2
			sites.append(Site(site_id=len(sites), x=float(pos[0]), y=float(pos[1]), antenna_height=bs_height, ring=ring))

	cells = [
		Cell(
			cell_id=site.site_id * cells_per_site + sector,
			site_id=site.site_id,
			azimuth_deg=(azimuth_offset + sector * 360.0 / cells_per_site) % 360.0,
		)
		for site in sites
		for sector in range(cells_per_site)
	]

	shift = (rings + 1) * b1 + rings * b2
	translations = [tuple(float(v) for v in _rotate(shift, 60.0 * k)) for k in range(6)]
	LOGGER.debug("Built layout: %d sites, %d cells, ISD %.1f m", len(sites), len(cells), isd)
	return NetworkLayout(
		sites=sites,
		cells=cells,
		cells_per_site=cells_per_site,
		inter_site_distance=isd,
		wrap_translations=translations,
	)


def wrapped_offsets(points: np.ndarray, origins: np.ndarray, layout: NetworkLayout) -> np.ndarray:
	"""
	Displacement from each origin to the nearest wraparound image of each point.

	points: (N, 2); origins: (S, 2). Returns (N, S, 2).
	"""
	points = np.asarray(points, dtype=float).reshape(-1, 2)
	origins = np.asarray(origins, dtype=float).reshape(-1, 2)
	shifts = layout.translations
	diff = points[:, None, None, :] + shifts[None, None, :, :] - origins[None, :, None, :]
	norms = np.einsum("nstk,nstk->nst", diff, diff)
	best = np.argmin(norms, axis=2)
	return np.take_along_axis(diff, best[:, :, None, None], axis=2)[:, :, 0, :]


def wrap_distance(a: Sequence[float], b: Sequence[float], layout: NetworkLayout) -> float:
	"""Minimum 2D distance between a and b over the identity and all cluster translations."""
	offset = wrapped_offsets(np.asarray(b[:2], dtype=float), np.asarray(a[:2], dtype=float), layout)
	return float(np.hypot(offset[0, 0, 0], offset[0, 0, 1]))


def cell_centers(layout: NetworkLayout) -> np.ndarray:
	"""(n_cells, 2) centers of the sector hexagons."""
	radius = layout.inter_site_distance / 3.0
	az = np.radians(layout.cell_azimuths)
	return layout.site_xy[layout.cell_site] + radius * np.column_stack([np.cos(az), np.sin(az)])


def cell_hexagon_contains(local_xy: np.ndarray, radius: float) -> np.ndarray:
	"""Membership test for a hexagon with vertices at 0°, 60°, ... in its local frame."""
	x = np.abs(local_xy[..., 0])
	y = np.abs(local_xy[..., 1])
	return (y <= 0.5 * math.sqrt(3.0) * radius) & (math.sqrt(3.0) * x + y <= math.sqrt(3.0) * radius)


def _sample_cell(
	rng: np.random.Generator,
	center: np.ndarray,
	azimuth_deg: float,
	radius: float,
	site_xy: np.ndarray,
	count: int,
	min_distance: float,
) -> np.ndarray:
	rad = math.radians(azimuth_deg)
	c, s = math.cos(rad), math.sin(rad)
	half_height = 0.5 * math.sqrt(3.0) * radius
	accepted: List[np.ndarray] = []
	n_accepted = 0
	while n_accepted < count:
		local = rng.uniform([-radius, -half_height], [radius, half_height], size=(2 * count + 8, 2))
		local = local[cell_hexagon_contains(local, radius)]
		world = center + np.column_stack([c * local[:, 0] - s * local[:, 1], s * local[:, 0] + c * local[:, 1]])
		world = world[np.hypot(*(world - site_xy).T) >= min_distance]
		accepted.append(world)
		n_accepted += len(world)
	return np.vstack(accepted)[:count]


def drop_ues(
	layout: NetworkLayout,
	per_cell: int,
	heights: Sequence[float],
	aerial_ratio: float,
	rng_seed: int,
	min_distance: float = 10.0,
	ground_height: float = GROUND_HEIGHT,
) -> List[UserTerminal]:
	"""
	Drop `per_cell` UEs uniformly in every cell area.

	round(aerial_ratio * total) UEs, picked by a seeded permutation, become
	aerial and take the `heights` values in turn; the rest stay at
	`ground_height`. The same seed always yields the same drop.
	"""
	if not heights:
		raise ConfigurationError("heights", "at least one aerial height is required")
	if per_cell < 1:
		raise ConfigurationError("layout.ues_per_cell", "must be at least 1")
	if not 0.0 <= aerial_ratio <= 1.0:
		raise ConfigurationError("aerial_ratio", "must lie in [0, 1]")

	rng = np.random.default_rng(rng_seed)
	radius = layout.inter_site_distance / 3.0
	centers = cell_centers(layout)
	positions = np.vstack([
		_sample_cell(
			rng,
			centers[cell.cell_id],
			cell.azimuth_deg,
			radius,
			layout.site_xy[cell.site_id],
			per_cell,
			min_distance,
		)
		for cell in layout.cells
	])
	total = len(positions)
	n_aerial = int(math.floor(aerial_ratio * total + 0.5))
	aerial_ids = np.sort(rng.permutation(total)[:n_aerial])
	ue_heights = np.full(total, ground_height)
	kinds = np.empty(total, dtype=object)
	kinds[:] = [UeKind.TERRESTRIAL] * total
	for rank, ue_idx in enumerate(aerial_ids):
		ue_heights[ue_idx] = heights[rank % len(heights)]
		kinds[ue_idx] = UeKind.AERIAL
	return [
		UserTerminal(
			ue_id=idx,
			x=float(positions[idx, 0]),
			y=float(positions[idx, 1]),
			height_agl=float(ue_heights[idx]),
			kind=kinds[idx],
			home_cell=idx // per_cell,
		)
		for idx in range(total)
	]


def ue_arrays(ues: Iterable[UserTerminal]) -> Tuple[np.ndarray, np.ndarray]:
	"""Stack UEs into (N, 3) positions and an (N,) aerial mask."""
	ues = list(ues)
	positions = np.array([ue.position for ue in ues], dtype=float).reshape(-1, 3)
	aerial = np.array([ue.is_aerial for ue in ues], dtype=bool)
	return positions, aerial


def serving_cells(coupling_db: np.ndarray) -> np.ndarray:
	"""Row-wise argmax; numpy returns the first maximum, i.e. the lowest cell id."""
	return np.argmax(np.asarray(coupling_db), axis=-1)


def select_serving_cell(ue: UserTerminal, links: Sequence[LinkState]) -> int:
	"""Cell with the largest coupling gain for this UE; ties go to the lowest cell id."""
	own = [link for link in links if link.ue == ue.ue_id]
	if not own:
		raise SimulationError(f"no links for UE {ue.ue_id}")
	best = max(own, key=lambda link: (link.coupling_gain, -link.cell))
	return best.cell


def layout_table(layout: NetworkLayout) -> pd.DataFrame:
	"""Layout dump: one row per cell."""
	rows = [
		{
			"site_id": cell.site_id,
			"cell_id": cell.cell_id,
			"x": layout.sites[cell.site_id].x,
			"y": layout.sites[cell.site_id].y,
			"azimuth_deg": cell.azimuth_deg,
		}
		for cell in layout.cells
	]
	return pd.DataFrame(rows, columns=["site_id", "cell_id", "x", "y", "azimuth_deg"])


def layout_from_config(config: RunConfig) -> NetworkLayout:
	section = config.layout
	return build_layout(
		section.inter_site_distance,
		section.n_sites,
		section.bs_height,
		section.cells_per_site,
		section.azimuth_offset,
	)
