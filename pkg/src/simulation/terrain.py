"""
Line-of-sight tracing over a heightmap and the empirical LOS-probability census.

A BS is dropped at random open-ground locations of the map (35 m above the
local surface); for every UE height and 2D distance bin, UEs are dropped
around it and each link is traced against the surface model. The fraction of
clear links per (height, bin) forms a `LosCurveTable`.
"""

from __future__ import annotations

import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from opentelemetry import trace
from scipy.ndimage import median_filter

from src.models.errors import TerrainDomainError
from src.models.terrain_map import Heightmap, LosCurveTable
from src.simulation.parallel import run_jobs


LOGGER = logging.getLogger(__name__)

# Upper bound on samples held in memory by one batched trace.
TRACE_CHUNK_SAMPLES = 2_000_000
MAX_SITE_ATTEMPTS = 10_000


def log_distance_bins(bin_min: float = 10.0, bin_max: float = 35_000.0, n_bins: int = 46) -> np.ndarray:
	"""Log-spaced 2D distance bin edges (n_bins + 1 values)."""
	if bin_min <= 0 or bin_max <= bin_min or n_bins < 1:
		raise ValueError("bins need 0 < bin_min < bin_max and n_bins >= 1")
	return np.geomspace(bin_min, bin_max, n_bins + 1)


def terrain_height(hmap: Heightmap, x, y):
	"""Surface elevation, bilinear between cell centers and clamped at the map edge."""
	x = np.asarray(x, dtype=float)
	y = np.asarray(y, dtype=float)
	nrows, ncols = hmap.shape
	x0, y0 = hmap.origin
	fx = np.clip((x - x0) / hmap.cell_size - 0.5, 0.0, ncols - 1)
	fy = np.clip((y - y0) / hmap.cell_size - 0.5, 0.0, nrows - 1)
	c0 = np.minimum(np.floor(fx).astype(np.int64), max(ncols - 2, 0))
	r0 = np.minimum(np.floor(fy).astype(np.int64), max(nrows - 2, 0))
	c1 = np.minimum(c0 + 1, ncols - 1)
	r1 = np.minimum(r0 + 1, nrows - 1)
	wx = fx - c0
	wy = fy - r0
	grid = hmap.grid
	south = grid[r0, c0] * (1.0 - wx) + grid[r0, c1] * wx
	north = grid[r1, c0] * (1.0 - wx) + grid[r1, c1] * wx
	height = south * (1.0 - wy) + north * wy
	return height if height.ndim else float(height)


def _canonical_order(a: np.ndarray, b: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
	# Trace every link from its lexicographically smaller endpoint so that
	# swapping the endpoints evaluates the exact same samples.
	swap = (a[:, 0] > b[:, 0]) | ((a[:, 0] == b[:, 0]) & ((a[:, 1] > b[:, 1]) | ((a[:, 1] == b[:, 1]) & (a[:, 2] > b[:, 2]))))
	first = np.where(swap[:, None], b, a)
	second = np.where(swap[:, None], a, b)
	return first, second


def trace_los_many(a: np.ndarray, b: np.ndarray, hmap: Heightmap, step: Optional[float] = None) -> np.ndarray:
	"""
	Batched LOS test between absolute 3D points a[i] and b[i].

	Interior samples sit at t = k/n, k = 1..n-1 with n = max(floor(d_h / step), 1),
	so links shorter than two steps have no interior samples. A link is
	clear when the segment is strictly above the surface at every sample.
	"""
	a = np.asarray(a, dtype=float).reshape(-1, 3)
	b = np.asarray(b, dtype=float).reshape(-1, 3)
	if a.shape != b.shape:
		raise ValueError("endpoint arrays must have the same shape")
	inside = hmap.contains(a[:, 0], a[:, 1]) & hmap.contains(b[:, 0], b[:, 1])
	if not np.all(inside):
		bad = int(np.flatnonzero(~inside)[0])
		raise TerrainDomainError(f"link {bad} has an endpoint outside the heightmap extent {hmap.extent}")
	step = hmap.cell_size / 2.0 if step is None else float(step)
	if step <= 0:
		raise ValueError("step must be positive")

	a, b = _canonical_order(a, b)
	d_h = np.hypot(b[:, 0] - a[:, 0], b[:, 1] - a[:, 1])
	n = np.maximum(np.floor(d_h / step).astype(np.int64), 1)
	result = np.ones(len(a), dtype=bool)
	order = np.argsort(n, kind="stable")
	start = 0
	while start < len(order):
		# Links sorted by sample count keep the padded batch compact.
		width = int(n[order[start]])
		stop = start + 1
		while stop < len(order) and int(n[order[stop]]) * (stop - start + 1) <= max(TRACE_CHUNK_SAMPLES, width):
			stop += 1
		idx = order[start:stop]
		n_max = int(n[idx].max())
		if n_max > 1:
			k = np.arange(1, n_max)
			t = k[None, :] / n[idx][:, None]
			valid = k[None, :] < n[idx][:, None]
			delta = b[idx] - a[idx]
			px = a[idx, 0:1] + t * delta[:, 0:1]
			py = a[idx, 1:2] + t * delta[:, 1:2]
			pz = a[idx, 2:3] + t * delta[:, 2:3]
			ground = terrain_height(hmap, px, py)
			blocked = valid & (pz <= ground)
			result[idx] = ~np.any(blocked, axis=1)
		start = stop
	return result


def trace_los(a: Sequence[float], b: Sequence[float], hmap: Heightmap, step: Optional[float] = None) -> bool:
	"""LOS test between two absolute 3D points (heights already include the surface elevation)."""
	return bool(trace_los_many(np.asarray(a, dtype=float), np.asarray(b, dtype=float), hmap, step)[0])


def building_mask(hmap: Heightmap, threshold: float = 2.0, window: int = 5) -> np.ndarray:
	"""Cells rising more than `threshold` above the local median surface."""
	local = median_filter(hmap.grid, size=window, mode="nearest")
	return hmap.grid > local + threshold


def _pick_bs_sites(
	hmap: Heightmap,
	n_drops: int,
	rng: np.random.Generator,
	mask: np.ndarray,
) -> np.ndarray:
	xmin, ymin, xmax, ymax = hmap.extent
	nrows, ncols = hmap.shape
	sites: List[Tuple[float, float]] = []
	attempts = 0
	while len(sites) < n_drops:
		attempts += 1
		if attempts > MAX_SITE_ATTEMPTS * n_drops:
			raise TerrainDomainError("could not place BS drops outside buildings")
		x = rng.uniform(xmin, xmax)
		y = rng.uniform(ymin, ymax)
		col = min(int((x - xmin) // hmap.cell_size), ncols - 1)
		row = min(int((y - ymin) // hmap.cell_size), nrows - 1)
		if not mask[row, col]:
			sites.append((x, y))
	return np.asarray(sites, dtype=float)


def _census_drop(
	hmap: Heightmap,
	site: Tuple[float, float],
	bs_height_agl: float,
	ue_heights: Sequence[float],
	edges: np.ndarray,
	seed: int,
	drop: int,
	ues_per_bin: int,
) -> Tuple[int, np.ndarray, np.ndarray]:
	"""LOS and link counts of one BS drop; UE positions are shared by all heights."""
	rng = np.random.default_rng([seed, drop])
	n_bins = len(edges) - 1
	clear = np.zeros((len(ue_heights), n_bins), dtype=np.int64)
	total = np.zeros((len(ue_heights), n_bins), dtype=np.int64)
	bs = np.array([site[0], site[1], terrain_height(hmap, site[0], site[1]) + bs_height_agl])

	for bin_idx in range(n_bins):
		r2 = rng.uniform(edges[bin_idx] ** 2, edges[bin_idx + 1] ** 2, size=ues_per_bin)
		bearing = rng.uniform(0.0, 2.0 * math.pi, size=ues_per_bin)
		radius = np.sqrt(r2)
		ux = bs[0] + radius * np.cos(bearing)
		uy = bs[1] + radius * np.sin(bearing)
		keep = hmap.contains(ux, uy)
		if not np.any(keep):
			continue
		ux, uy = ux[keep], uy[keep]
		surface = terrain_height(hmap, ux, uy)
		a = np.broadcast_to(bs, (len(ux), 3))
		for h_idx, h_ut in enumerate(ue_heights):
			b = np.column_stack([ux, uy, surface + h_ut])
			clear[h_idx, bin_idx] += int(np.count_nonzero(trace_los_many(a, b, hmap)))
			total[h_idx, bin_idx] += len(ux)
	return drop, clear, total


def estimate_los_curve(
	hmap: Heightmap,
	n_bs_drops: int,
	bs_height_agl: float,
	ue_heights: Sequence[float],
	distance_bins: Sequence[float],
	rng_seed: int,
	ues_per_bin: int = 20,
	bs_sites: Optional[Sequence[Tuple[float, float]]] = None,
	building_threshold: float = 2.0,
	median_window: int = 5,
	workers: int = 1,
) -> LosCurveTable:
	"""
	Empirical LOS probability per (UE height, 2D distance bin).

	BS drops land uniformly on open ground (cells flagged by `building_mask`
	are rejected) unless `bs_sites` fixes them. UEs are dropped area-uniformly
	in each distance annulus at a uniform bearing; samples falling off the
	map are discarded. Bins that receive no sample are NaN.
	"""
	if n_bs_drops < 1:
		raise ValueError("n_bs_drops must be at least 1")
	heights = sorted(float(h) for h in ue_heights)
	edges = np.asarray(distance_bins, dtype=float)
	rng = np.random.default_rng([rng_seed])
	if bs_sites is not None:
		sites = np.asarray(bs_sites, dtype=float).reshape(-1, 2)
		sites = sites[np.arange(n_bs_drops) % len(sites)]
		if not np.all(hmap.contains(sites[:, 0], sites[:, 1])):
			raise TerrainDomainError("fixed BS sites must lie inside the heightmap")
	else:
		sites = _pick_bs_sites(hmap, n_bs_drops, rng, building_mask(hmap, building_threshold, median_window))

	clear = np.zeros((len(heights), len(edges) - 1), dtype=np.int64)
	total = np.zeros_like(clear)
	tracer = trace.get_tracer(__name__)
	with tracer.start_as_current_span("estimate_los_curve") as span:
		span.set_attribute("n_bs_drops", n_bs_drops)
		span.set_attribute("n_bins", len(edges) - 1)
		span.set_attribute("ue_heights", heights)
		jobs = {
			drop: (hmap, tuple(sites[drop]), bs_height_agl, heights, edges, rng_seed, drop, ues_per_bin)
			for drop in range(n_bs_drops)
		}
		for _, (_, drop_clear, drop_total) in run_jobs(_census_drop, jobs, workers, span_name="los_census_jobs"):
			clear += drop_clear
			total += drop_total

		with np.errstate(invalid="ignore", divide="ignore"):
			p_los = np.where(total > 0, clear / np.maximum(total, 1), np.nan)
		missing = int(np.count_nonzero(total == 0))
		if missing:
			span.add_event("missing_bins", {"count": missing})
			LOGGER.info("LOS census left %d (height, bin) cells without samples", missing)
		span.set_attribute("traced_links", int(total.sum()))

	return LosCurveTable(ue_heights=heights, bin_edges=edges.tolist(), p_los=p_los, n_samples=total)


def los_curve_frame(table: LosCurveTable) -> pd.DataFrame:
	"""Curve CSV rows (ue_height_m, d2d_bin_m, p_los, n_samples, bin_lo_m, bin_hi_m)."""
	edges = np.asarray(table.bin_edges, dtype=float)
	centers = table.bin_centers
	rows = []
	for h_idx, height in enumerate(table.ue_heights):
		for bin_idx, center in enumerate(centers):
			rows.append(
				{
					"ue_height_m": height,
					"d2d_bin_m": center,
					"p_los": table.p_los[h_idx, bin_idx],
					"n_samples": int(table.n_samples[h_idx, bin_idx]),
					"bin_lo_m": edges[bin_idx],
					"bin_hi_m": edges[bin_idx + 1],
				}
			)
	return pd.DataFrame(rows, columns=["ue_height_m", "d2d_bin_m", "p_los", "n_samples", "bin_lo_m", "bin_hi_m"])


def flat_heightmap(size: float, cell_size: float = 5.0, elevation: float = 0.0) -> Heightmap:
	n = int(round(size / cell_size))
	return Heightmap(origin=(0.0, 0.0), cell_size=cell_size, quantization=0.0, grid=np.full((n, n), elevation))


def ridge_heightmap(size: float, ridge_x: float, ridge_height: float, cell_size: float = 5.0) -> Heightmap:
	"""Flat ground with one wall of `ridge_height`, one cell thick, along x = ridge_x."""
	n = int(round(size / cell_size))
	grid = np.zeros((n, n))
	grid[:, int(ridge_x // cell_size)] = ridge_height
	return Heightmap(origin=(0.0, 0.0), cell_size=cell_size, quantization=0.0, grid=grid)


def wall_grid_heightmap(
	size: float,
	spacing: float,
	wall_height: float,
	cell_size: float = 5.0,
	thickness: int = 1,
) -> Heightmap:
	"""Flat ground crossed by walls every `spacing` meters in both directions."""
	n = int(round(size / cell_size))
	period = max(int(round(spacing / cell_size)), thickness + 1)
	on_wall = (np.arange(n) % period) < thickness
	grid = np.where(on_wall[:, None] | on_wall[None, :], wall_height, 0.0)
	return Heightmap(origin=(0.0, 0.0), cell_size=cell_size, quantization=0.0, grid=grid)
