"""
Domain models and schemas for the aerial-LTE simulator.

This package defines the Pydantic models that structure network geometry,
radio parameters, terrain rasters, the model ledger and run configurations.
"""

from src.models.errors import (
    ConfigurationError,
    HeightmapParseError,
    ModelDomainError,
    SimulationError,
    TerrainDomainError,
)
from src.models.ledger import DEFAULT_LEDGER, ModelLedger
from src.models.network import Cell, NetworkLayout, Site, UeKind, UserTerminal
from src.models.radio import (
    AerialClassifierConfig,
    AntennaArrayConfig,
    HandoverConfig,
    LinkState,
    PowerControlConfig,
    TrafficModel,
)
from src.models.run_config import Experiment, RunConfig
from src.models.terrain_map import Heightmap, LosCurveTable

__all__ = [
    "AerialClassifierConfig",
    "AntennaArrayConfig",
    "Cell",
    "ConfigurationError",
    "DEFAULT_LEDGER",
    "Experiment",
    "HandoverConfig",
    "Heightmap",
    "HeightmapParseError",
    "LinkState",
    "LosCurveTable",
    "ModelDomainError",
    "ModelLedger",
    "NetworkLayout",
    "PowerControlConfig",
    "RunConfig",
    "SimulationError",
    "Site",
    "TerrainDomainError",
    "TrafficModel",
    "UeKind",
    "UserTerminal",
]
