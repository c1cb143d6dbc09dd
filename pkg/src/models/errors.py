"""
Exception hierarchy shared by every simulator package.

The CLI maps `ConfigurationError` to exit code 1 and every other
`SimulationError` to exit code 2.
"""


class SimulationError(Exception):
    """Base class for all simulator failures."""


class ConfigurationError(SimulationError):
    """A run configuration or ledger value is missing, unknown or inconsistent."""

    def __init__(self, key: str, constraint: str) -> None:
        self.key = key
        self.constraint = constraint
        super().__init__(f"{key}: {constraint}")


class ModelDomainError(SimulationError):
    """A channel or antenna model was queried outside its domain of validity."""


class HeightmapParseError(SimulationError):
    """A raster file is malformed; the message names the line or byte offset."""


class TerrainDomainError(SimulationError):
    """A terrain query lies outside the heightmap bounds."""
