"""
Command-line entry point.

    python -m src.experiments <experiment> --config configs/baseline.toml --out results/dl [--dry-run] [--workers N]

Exit codes: 0 success, 1 configuration error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError

from src.experiments.runner import run_experiment
from src.experiments.settings import SimSettings
from src.ingestion.config_loader import parse_config
from src.ingestion.otel_config import setup_tracer
from src.models.errors import ConfigurationError
from src.models.run_config import Experiment


LOGGER = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


def build_parser() -> argparse.ArgumentParser:
	parser = argparse.ArgumentParser(prog="sim", description="Aerial-LTE system-level simulator")
	parser.add_argument("experiment", choices=[e.value for e in Experiment])
	parser.add_argument("--config", required=True, type=Path, help="Run configuration (TOML).")
	parser.add_argument("--out", type=Path, default=None, help="Output directory; defaults to run.output_dir/<experiment>.")
	parser.add_argument("--dry-run", action="store_true", help="Validate the configuration without computing.")
	parser.add_argument("--workers", type=int, default=None, help="Worker processes; overrides SIM_WORKERS and run.workers.")
	return parser


def main(argv: Optional[List[str]] = None) -> int:
	args = build_parser().parse_args(argv)
	try:
		settings = SimSettings()
	except ValidationError as exc:
		logging.basicConfig(level=logging.INFO)
		LOGGER.error("Invalid SIM_* settings: %s", exc)
		return EXIT_CONFIG
	logging.basicConfig(level=settings.log_level.upper(), format="%(asctime)s %(levelname)s %(name)s: %(message)s")
	setup_tracer(settings.service_name, settings.otlp_endpoint)

	if args.workers is not None and args.workers < 1:
		LOGGER.error("Configuration error: --workers must be at least 1")
		return EXIT_CONFIG
	try:
		config = parse_config(args.config)
		workers = args.workers or settings.workers
		outcome = run_experiment(config, args.experiment, args.out, workers, args.dry_run)
	except ConfigurationError as exc:
		LOGGER.error("Configuration error: %s", exc)
		return EXIT_CONFIG
	except Exception as exc:
		LOGGER.exception("Experiment %s failed: %s", args.experiment, exc)
		return EXIT_RUNTIME
	if not args.dry_run:
		LOGGER.info("Wrote %s", ", ".join(sorted(outcome.manifest)))
	return EXIT_OK


if __name__ == "__main__":
	sys.exit(main())
