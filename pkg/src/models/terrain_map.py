"""
Raster terrain and empirical LOS-probability tables.

`Heightmap` stores a single composite terrain-plus-building elevation layer.
Row 0 of `grid` is the southern edge, so grid[row, col] covers the square
[x0 + col*cs, x0 + (col+1)*cs) x [y0 + row*cs, y0 + (row+1)*cs). Files in
ASCII-grid order (north row first) are flipped by the loader.
"""

from __future__ import annotations

from typing import List, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class Heightmap(BaseModel):
    """Digital surface model sampled on a regular grid."""

    origin: Tuple[float, float] = Field(..., description="Lower-left corner (x, y) in meters.")
    cell_size: float = Field(default=5.0, gt=0, description="Horizontal resolution in meters.")
    quantization: float = Field(default=0.15, ge=0, description="Vertical resolution in meters; 0 keeps raw values.")
    grid: np.ndarray = Field(..., description="(nrows, ncols) elevations in meters, south row first.")

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    @field_validator("grid", mode="before")
    @classmethod
    def _as_float_grid(cls, value: object) -> np.ndarray:
        grid = np.array(value, dtype=float)
        if grid.ndim != 2 or grid.size == 0:
            raise ValueError("grid must be a non-empty 2D array")
        if not np.all(np.isfinite(grid)):
            raise ValueError("grid elevations must be finite")
        return grid

    @model_validator(mode="after")
    def _quantize(self) -> "Heightmap":
        grid = self.grid
        if self.quantization > 0:
            grid = np.round(grid / self.quantization) * self.quantization
        grid.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        return self

    @property
    def shape(self) -> Tuple[int, int]:
        return self.grid.shape

    @property
    def extent(self) -> Tuple[float, float, float, float]:
        """(xmin, ymin, xmax, ymax) in meters."""
        nrows, ncols = self.grid.shape
        x0, y0 = self.origin
        return (x0, y0, x0 + ncols * self.cell_size, y0 + nrows * self.cell_size)

    def contains(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        xmin, ymin, xmax, ymax = self.extent
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return (x >= xmin) & (x <= xmax) & (y >= ymin) & (y <= ymax)


class LosCurveTable(BaseModel):
    """
    Empirical LOS probability per (UE height, 2D distance bin).

    Bins without any traced link hold NaN in `p_los` and 0 in `n_samples`;
    they are reported as missing rather than as zero probability.
    """

    ue_heights: List[float] = Field(..., min_length=1, description="UE heights AGL in meters, ascending.")
    bin_edges: List[float] = Field(..., min_length=2, description="2D distance bin edges in meters, ascending.")
    p_los: np.ndarray = Field(..., description="(n_heights, n_bins) LOS fraction, NaN where missing.")
    n_samples: np.ndarray = Field(..., description="(n_heights, n_bins) traced link counts.")

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    @model_validator(mode="after")
    def _check_shapes(self) -> "LosCurveTable":
        expected = (len(self.ue_heights), len(self.bin_edges) - 1)
        p_los = np.asarray(self.p_los, dtype=float).reshape(expected)
        counts = np.asarray(self.n_samples, dtype=np.int64).reshape(expected)
        if np.any(np.diff(self.ue_heights) <= 0) or np.any(np.diff(self.bin_edges) <= 0):
            raise ValueError("ue_heights and bin_edges must be strictly increasing")
        p_los.setflags(write=False)
        counts.setflags(write=False)
        object.__setattr__(self, "p_los", p_los)
        object.__setattr__(self, "n_samples", counts)
        return self

    @property
    def bin_centers(self) -> np.ndarray:
        """Geometric bin centers (bins are log-spaced by default)."""
        edges = np.asarray(self.bin_edges, dtype=float)
        return np.sqrt(np.maximum(edges[:-1], 1e-9) * edges[1:])

    def monotone(self) -> "LosCurveTable":
        """Copy made nonincreasing in distance and nondecreasing in height; missing bins stay missing."""
        missing = np.isnan(self.p_los)
        filled = np.where(missing, np.inf, self.p_los)
        by_distance = np.minimum.accumulate(filled, axis=1)
        by_distance = np.where(missing, np.nan, by_distance)
        by_height = np.fmax.accumulate(by_distance, axis=0)
        by_height = np.where(missing, np.nan, by_height)
        return LosCurveTable(
            ue_heights=self.ue_heights,
            bin_edges=self.bin_edges,
            p_los=by_height,
            n_samples=self.n_samples,
        )

    def probability(self, d2d: np.ndarray, h_ut: np.ndarray) -> np.ndarray:
        """
        Interpolate the monotone table: linear in log-distance within a height
        row, then linear in height. Values outside the table are clamped.
        """
        table = self.monotone()
        d2d, h_ut = np.broadcast_arrays(np.asarray(d2d, dtype=float), np.asarray(h_ut, dtype=float))
        shape = d2d.shape
        log_d = np.log10(np.maximum(d2d.ravel(), 1e-3))
        h_flat = h_ut.ravel()
        log_centers = np.log10(self.bin_centers)
        per_height = np.full((len(self.ue_heights), log_d.size), np.nan)
        for row_idx, row in enumerate(table.p_los):
            valid = ~np.isnan(row)
            if np.any(valid):
                per_height[row_idx] = np.interp(log_d, log_centers[valid], row[valid])
        heights = np.asarray(self.ue_heights, dtype=float)
        rows_valid = ~np.all(np.isnan(per_height), axis=1) if log_d.size else np.zeros(len(heights), dtype=bool)
        if not np.any(rows_valid):
            return np.full(shape, np.nan)
        heights, per_height = heights[rows_valid], per_height[rows_valid]
        if heights.size == 1:
            return np.clip(per_height[0], 0.0, 1.0).reshape(shape)
        lower = np.clip(np.searchsorted(heights, h_flat, side="right") - 1, 0, heights.size - 2)
        weight = np.clip((h_flat - heights[lower]) / (heights[lower + 1] - heights[lower]), 0.0, 1.0)
        columns = np.arange(log_d.size)
        result = (1.0 - weight) * per_height[lower, columns] + weight * per_height[lower + 1, columns]
        return np.clip(result, 0.0, 1.0).reshape(shape)
