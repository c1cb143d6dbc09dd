"""
Pytest configuration and shared fixtures for the test suite.

Layouts, antenna patterns and terrain maps are built once per session; run
configurations are written to temporary directories together with a copy of
the shipped model ledger.
"""

import shutil
from pathlib import Path

import pytest
from opentelemetry import trace
from opentelemetry.sdk.trace import TracerProvider
from opentelemetry.sdk.trace.export import SimpleSpanProcessor
from opentelemetry.sdk.trace.export.in_memory_span_exporter import InMemorySpanExporter

from src.ingestion.config_loader import parse_config
from src.models.radio import AntennaArrayConfig
from src.simulation.antenna import AntennaPattern
from src.simulation.deployment import build_layout
from src.simulation.terrain import flat_heightmap, ridge_heightmap, wall_grid_heightmap

CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs"
BASELINE = CONFIG_DIR / "baseline.toml"
LEDGER = CONFIG_DIR / "model_ledger.toml"

_EXPORTER = InMemorySpanExporter()
_PROVIDER = TracerProvider()
_PROVIDER.add_span_processor(SimpleSpanProcessor(_EXPORTER))
trace.set_tracer_provider(_PROVIDER)


def pytest_addoption(parser):
    parser.addoption(
        "--run-acceptance",
        action="store_true",
        default=False,
        help="run the full-layout acceptance suite (37 sites, many seeds)",
    )


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: full-layout campaign checks, opt in with --run-acceptance")
    config.addinivalue_line("markers", "slow: long single-drop runs")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--run-acceptance"):
        return
    skip = pytest.mark.skip(reason="needs --run-acceptance")
    for item in items:
        if "acceptance" in item.keywords:
            item.add_marker(skip)


@pytest.fixture
def span_exporter():
    """
    Fixture exposing spans finished during the test.
    """
    _EXPORTER.clear()
    yield _EXPORTER
    _EXPORTER.clear()


@pytest.fixture(scope="session")
def pattern():
    return AntennaPattern.synthesize(AntennaArrayConfig())


@pytest.fixture(scope="session")
def layout7():
    return build_layout(1732.0, 7, 35.0)


@pytest.fixture(scope="session")
def layout37():
    return build_layout(1732.0, 37, 35.0)


@pytest.fixture
def baseline_config():
    return parse_config(BASELINE)


@pytest.fixture
def write_config(tmp_path):
    """
    Fixture writing a TOML run configuration next to a copy of the ledger.

    Returns a callable taking the TOML text and returning the file path.
    """
    shutil.copy(LEDGER, tmp_path / "model_ledger.toml")

    def _write(text: str, name: str = "run.toml") -> Path:
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path

    return _write


SMALL_RUN = """
[scenario]
name = "small"

[layout]
n_sites = 7
ues_per_cell = 5

[uplink]
altitudes = [1.5, 120.0]
offered_loads = [1.0e6]
duration = 0.5
warmup = 0.1

[enhancements]
pc_p0_grid = [-93.0, -90.0]
pc_alpha_grid = [0.8, 1.0]
partition_fractions = [0.1, 0.3]
classifier_delta_grid = [4.0, 8.0]
classifier_k_grid = [2, 4]
fragmentation_altitudes = [1.5, 120.0]
fragmentation_raster_step = 80.0

[handover]
altitudes = [1.5, 120.0]
path_start = [-1500.0, -300.0]
path_end = [1500.0, -300.0]

[run]
seeds = [1, 2]
"""


@pytest.fixture
def small_config(write_config):
    """
    Fixture providing a 7-site configuration with short uplink runs.
    """
    return parse_config(write_config(SMALL_RUN))


@pytest.fixture(scope="session")
def flat_map():
    return flat_heightmap(2000.0, cell_size=5.0)


@pytest.fixture(scope="session")
def ridge_map():
    return ridge_heightmap(4000.0, ridge_x=2500.0, ridge_height=20.0, cell_size=5.0)


@pytest.fixture(scope="session")
def wall_map():
    return wall_grid_heightmap(2000.0, spacing=100.0, wall_height=15.0, cell_size=5.0)
