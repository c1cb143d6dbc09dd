"""
Heightmap and LOS-curve file readers and writers.

Two raster formats are supported:

- ascii_grid: the ESRI ASCII grid (`ncols`, `nrows`, `xllcorner`,
  `yllcorner`, `cellsize`, optional `NODATA_value` header lines followed by
  one text line per row, north row first).
- flat_binary: a single header line
  `FLATBIN <ncols> <nrows> <xll> <yll> <cellsize> <quantization>` followed by
  ncols * nrows little-endian float32 values, north row first.
"""

from __future__ import annotations

import logging
import math
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np
import pandas as pd

from src.models.errors import HeightmapParseError
from src.models.run_config import HeightmapFormat
from src.models.terrain_map import Heightmap, LosCurveTable


LOGGER = logging.getLogger(__name__)

ASCII_HEADER_KEYS = ("ncols", "nrows", "xllcorner", "yllcorner", "cellsize")
FLATBIN_MAGIC = "FLATBIN"
FLATBIN_DTYPE = np.dtype("<f4")

PathLike = Union[str, Path]


def load_heightmap(
	path: PathLike,
	fmt: Union[HeightmapFormat, str] = HeightmapFormat.ASCII_GRID,
	quantization: float = 0.15,
) -> Heightmap:
	"""
	Read a raster into a `Heightmap`, flipping it so row 0 is the south edge.

	For ascii_grid the vertical quantization comes from `quantization`; the
	flat_binary header carries its own.
	"""
	path = Path(path)
	fmt = HeightmapFormat(fmt)
	if fmt == HeightmapFormat.ASCII_GRID:
		hmap = _load_ascii_grid(path, quantization)
	else:
		hmap = _load_flat_binary(path)
	LOGGER.info("Loaded %s heightmap %s: %dx%d cells of %.2f m", fmt.value, path, hmap.shape[1], hmap.shape[0], hmap.cell_size)
	return hmap


def _load_ascii_grid(path: Path, quantization: float) -> Heightmap:
	lines = path.read_text(encoding="utf-8").splitlines()
	header: Dict[str, float] = {}
	nodata: Optional[float] = None
	line_no = 0
	while line_no < len(lines):
		parts = lines[line_no].split()
		if not parts:
			line_no += 1
			continue
		key = parts[0].lower()
		if key not in ASCII_HEADER_KEYS and key != "nodata_value":
			break
		if len(parts) != 2:
			raise HeightmapParseError(f"{path}:{line_no + 1}: header line must be '<key> <value>'")
		try:
			value = float(parts[1])
		except ValueError as exc:
			raise HeightmapParseError(f"{path}:{line_no + 1}: invalid number {parts[1]!r} for {key}") from exc
		if key == "nodata_value":
			nodata = value
		else:
			header[key] = value
		line_no += 1

	missing = [key for key in ASCII_HEADER_KEYS if key not in header]
	if missing:
		raise HeightmapParseError(f"{path}:{line_no + 1}: header is missing {', '.join(missing)}")
	ncols, nrows = int(header["ncols"]), int(header["nrows"])
	if ncols < 1 or nrows < 1 or ncols != header["ncols"] or nrows != header["nrows"]:
		raise HeightmapParseError(f"{path}: ncols and nrows must be positive integers")
	if header["cellsize"] <= 0:
		raise HeightmapParseError(f"{path}: cellsize must be positive")

	rows: List[List[float]] = []
	for idx in range(line_no, len(lines)):
		text = lines[idx].strip()
		if not text:
			continue
		if len(rows) == nrows:
			raise HeightmapParseError(f"{path}:{idx + 1}: more than {nrows} data rows")
		parts = text.split()
		if len(parts) != ncols:
			raise HeightmapParseError(f"{path}:{idx + 1}: expected {ncols} values, found {len(parts)}")
		try:
			values = [float(item) for item in parts]
		except ValueError as exc:
			raise HeightmapParseError(f"{path}:{idx + 1}: non-numeric value") from exc
		bad = [
			col for col, v in enumerate(values)
			if not math.isfinite(v) or (nodata is not None and v == nodata)
		]
		if bad:
			raise HeightmapParseError(f"{path}:{idx + 1}: missing or non-finite elevation in column {bad[0] + 1}")
		rows.append(values)
	if len(rows) != nrows:
		raise HeightmapParseError(f"{path}:{len(lines)}: expected {nrows} data rows, found {len(rows)}")

	return Heightmap(
		origin=(header["xllcorner"], header["yllcorner"]),
		cell_size=header["cellsize"],
		quantization=quantization,
		grid=np.flipud(np.asarray(rows, dtype=float)),
	)


def _load_flat_binary(path: Path) -> Heightmap:
	raw = path.read_bytes()
	newline = raw.find(b"\n")
	if newline < 0:
		raise HeightmapParseError(f"{path}: offset 0: header line is not terminated")
	parts = raw[:newline].decode("ascii", errors="replace").split()
	if len(parts) != 7 or parts[0] != FLATBIN_MAGIC:
		raise HeightmapParseError(f"{path}: offset 0: expected '{FLATBIN_MAGIC} ncols nrows xll yll cellsize quant'")
	try:
		ncols, nrows = int(parts[1]), int(parts[2])
		xll, yll, cellsize, quant = (float(v) for v in parts[3:])
	except ValueError as exc:
		raise HeightmapParseError(f"{path}: offset 0: malformed header values") from exc
	if ncols < 1 or nrows < 1 or cellsize <= 0 or quant < 0:
		raise HeightmapParseError(f"{path}: offset 0: invalid dimensions, cell size or quantization")

	offset = newline + 1
	expected = ncols * nrows * FLATBIN_DTYPE.itemsize
	payload = raw[offset:]
	if len(payload) < expected:
		raise HeightmapParseError(
			f"{path}: offset {offset + len(payload)}: payload ends early, expected {expected} bytes after offset {offset}"
		)
	if len(payload) > expected:
		raise HeightmapParseError(f"{path}: offset {offset + expected}: trailing bytes after payload")
	values = np.frombuffer(payload, dtype=FLATBIN_DTYPE).astype(float)
	bad = np.flatnonzero(~np.isfinite(values))
	if bad.size:
		raise HeightmapParseError(f"{path}: offset {offset + int(bad[0]) * FLATBIN_DTYPE.itemsize}: non-finite elevation")
	return Heightmap(
		origin=(xll, yll),
		cell_size=cellsize,
		quantization=quant,
		grid=np.flipud(values.reshape(nrows, ncols)),
	)


def write_heightmap(hmap: Heightmap, path: PathLike, fmt: Union[HeightmapFormat, str] = HeightmapFormat.ASCII_GRID) -> Path:
	"""Write a heightmap (north row first) so that `load_heightmap` returns the same cells."""
	path = Path(path)
	fmt = HeightmapFormat(fmt)
	path.parent.mkdir(parents=True, exist_ok=True)
	nrows, ncols = hmap.shape
	north_first = np.flipud(hmap.grid)
	x0, y0 = hmap.origin
	if fmt == HeightmapFormat.ASCII_GRID:
		lines = [
			f"ncols {ncols}",
			f"nrows {nrows}",
			f"xllcorner {x0!r}",
			f"yllcorner {y0!r}",
			f"cellsize {hmap.cell_size!r}",
			"NODATA_value -9999",
		]
		lines += [" ".join(repr(float(v)) for v in row) for row in north_first]
		path.write_text("\n".join(lines) + "\n", encoding="utf-8")
	else:
		header = f"{FLATBIN_MAGIC} {ncols} {nrows} {x0!r} {y0!r} {hmap.cell_size!r} {hmap.quantization!r}\n"
		path.write_bytes(header.encode("ascii") + north_first.astype(FLATBIN_DTYPE).tobytes())
	LOGGER.debug("Wrote %s heightmap to %s", fmt.value, path)
	return path


def load_los_curve(path: PathLike) -> LosCurveTable:
	"""Read a curve CSV written by the los_curve experiment; empty p_los cells are missing bins."""
	path = Path(path)
	try:
		frame = pd.read_csv(path)
	except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
		raise HeightmapParseError(f"{path}: cannot read LOS curve table: {exc}") from exc
	required = {"ue_height_m", "p_los", "n_samples", "bin_lo_m", "bin_hi_m"}
	missing = sorted(required - set(frame.columns))
	if missing:
		raise HeightmapParseError(f"{path}:1: missing columns {', '.join(missing)}")
	heights = sorted(frame["ue_height_m"].unique().tolist())
	bins = frame[["bin_lo_m", "bin_hi_m"]].drop_duplicates().sort_values("bin_lo_m")
	edges = bins["bin_lo_m"].tolist() + [float(bins["bin_hi_m"].iloc[-1])]
	table = frame.pivot(index="ue_height_m", columns="bin_lo_m", values="p_los").reindex(index=heights)
	counts = frame.pivot(index="ue_height_m", columns="bin_lo_m", values="n_samples").reindex(index=heights)
	return LosCurveTable(
		ue_heights=[float(h) for h in heights],
		bin_edges=[float(e) for e in edges],
		p_los=table.to_numpy(dtype=float),
		n_samples=counts.fillna(0).to_numpy(dtype=np.int64),
	)
