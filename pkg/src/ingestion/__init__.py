"""Ingestion package: run configurations, the model ledger and terrain rasters."""

from src.ingestion.config_loader import load_ledger, parse_config
from src.ingestion.heightmap_io import load_heightmap, load_los_curve, write_heightmap

__all__ = ["load_heightmap", "load_ledger", "load_los_curve", "parse_config", "write_heightmap"]
