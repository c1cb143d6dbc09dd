"""
TOML loading for run configurations and the model ledger.

Validation errors from pydantic are re-raised as `ConfigurationError` with
the dotted key path of the first offending value, so the CLI can report a
single actionable line. Relative paths inside a run configuration are
resolved against the directory of the configuration file.
"""

from __future__ import annotations

import logging
try:
	import tomllib
except ModuleNotFoundError:  # Python < 3.11
	import tomli as tomllib
from pathlib import Path
from typing import Any, Dict, Union

from pydantic import BaseModel, ValidationError

from src.models.errors import ConfigurationError
from src.models.ledger import ModelLedger
from src.models.run_config import LosModel, RunConfig


LOGGER = logging.getLogger(__name__)

PathLike = Union[str, Path]


def _read_toml(path: Path) -> Dict[str, Any]:
	try:
		with path.open("rb") as handle:
			return tomllib.load(handle)
	except FileNotFoundError as exc:
		raise ConfigurationError(str(path), "file not found") from exc
	except tomllib.TOMLDecodeError as exc:
		raise ConfigurationError(str(path), f"invalid TOML: {exc}") from exc


def _as_configuration_error(exc: ValidationError, prefix: str = "") -> ConfigurationError:
	errors = exc.errors()
	locations = [prefix + ".".join(str(part) for part in err["loc"]) if err["loc"] else prefix.rstrip(".") or "<root>" for err in errors]
	if errors and all(err["type"] == "missing" for err in errors):
		return ConfigurationError(", ".join(locations), "missing required keys")
	first = errors[0]
	constraint = first["msg"]
	if len(errors) > 1:
		constraint += f" (and {len(errors) - 1} more)"
	return ConfigurationError(locations[0], constraint)


def _validate(model: type[BaseModel], data: Dict[str, Any], prefix: str = "") -> Any:
	try:
		return model.model_validate(data)
	except ValidationError as exc:
		raise _as_configuration_error(exc, prefix) from exc


def load_ledger(path: PathLike) -> ModelLedger:
	"""Parse the model ledger; unknown constants are rejected."""
	path = Path(path)
	ledger = _validate(ModelLedger, _read_toml(path), prefix="ledger.")
	LOGGER.debug("Loaded model ledger from %s", path)
	return ledger


def _resolve(base: Path, value: Path | None) -> Path | None:
	if value is None or value.is_absolute():
		return value
	return (base / value).resolve()


def parse_config(path: PathLike) -> RunConfig:
	"""
	Parse and validate a run configuration.

	Beyond the schema this checks that every altitude a campaign may evaluate
	is within the applicability limit of the rma_baseline LOS model when that
	model is selected. The limit comes from the ledger.
	"""
	path = Path(path)
	config: RunConfig = _validate(RunConfig, _read_toml(path))
	base = path.parent
	run = config.run.model_copy(
		update={
			"ledger_path": _resolve(base, config.run.ledger_path),
			"output_dir": _resolve(base, config.run.output_dir),
		}
	)
	channel = config.channel.model_copy(update={"los_curve_path": _resolve(base, config.channel.los_curve_path)})
	terrain = config.terrain.model_copy(update={"heightmap_path": _resolve(base, config.terrain.heightmap_path)})
	config = config.model_copy(update={"run": run, "channel": channel, "terrain": terrain})

	ledger = load_ledger(config.run.ledger_path)
	if config.channel.los_model == LosModel.RMA_BASELINE:
		for key, altitude in config.campaign_altitudes():
			if altitude > ledger.rma_max_ue_height:
				raise ConfigurationError(
					key,
					f"altitude {altitude} m exceeds {ledger.rma_max_ue_height} m, the limit of los_model = rma_baseline",
				)
	LOGGER.info("Parsed configuration %s (scenario %s)", path, config.scenario.name)
	return config
