#!/usr/bin/env python3
"""Write flat, single-ridge and wall-grid test heightmaps as ASCII grids."""

from __future__ import annotations

import sys
from pathlib import Path

PROJECT_ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(PROJECT_ROOT))

from src.ingestion.heightmap_io import write_heightmap
from src.simulation.terrain import flat_heightmap, ridge_heightmap, wall_grid_heightmap

TARGET_DIR = Path("data/terrain")
MAP_SIZE = 4000.0
CELL_SIZE = 5.0


def make_synthetic_terrain() -> None:
	TARGET_DIR.mkdir(parents=True, exist_ok=True)
	maps = {
		"flat.asc": flat_heightmap(MAP_SIZE, CELL_SIZE),
		"ridge.asc": ridge_heightmap(MAP_SIZE, ridge_x=2500.0, ridge_height=20.0, cell_size=CELL_SIZE),
		"wall_grid.asc": wall_grid_heightmap(MAP_SIZE, spacing=100.0, wall_height=15.0, cell_size=CELL_SIZE),
	}
	for name, hmap in maps.items():
		path = write_heightmap(hmap, TARGET_DIR / name)
		print(f"Wrote {path} ({hmap.shape[1]}x{hmap.shape[0]} cells)")


if __name__ == "__main__":
	make_synthetic_terrain()
