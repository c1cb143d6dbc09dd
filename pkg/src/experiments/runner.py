"""
Experiment dispatch.

Each experiment maps a validated configuration to named result tables. The
runner adds the run metadata and a copy of the model ledger, then hands
everything to the writer. Nothing is written unless every table was
computed.
"""

from __future__ import annotations

import hashlib
import json
import logging
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, Optional, Union

import numpy as np
import pandas as pd
from opentelemetry import trace

import src
from src.ingestion.config_loader import load_ledger
from src.ingestion.heightmap_io import load_heightmap, load_los_curve
from src.models.errors import ConfigurationError, SimulationError
from src.models.ledger import ModelLedger
from src.models.radio import HandoverConfig
from src.models.run_config import Experiment, LosModel, RunConfig
from src.models.terrain_map import LosCurveTable
from src.simulation.antenna import AntennaPattern, pattern_table
from src.simulation.channel import altitude_seam_db, channel_settings_from_config, generate_pathloss_curves
from src.simulation.deployment import layout_from_config, layout_table
from src.simulation.downlink import noise_power_dbm, run_dl_analysis
from src.simulation.enhancements import partition_sweep, roc_sweep, sweep_power_control
from src.simulation.mobility import (
	FragmentationResult,
	HandoverTrace,
	association_fragmentation,
	handover_summary,
	simulate_trajectory_handover,
)
from src.simulation.parallel import run_jobs
from src.simulation.terrain import estimate_los_curve, log_distance_bins, los_curve_frame
from src.simulation.uplink import run_ul_sim
from src.experiments.writer import write_results


LOGGER = logging.getLogger(__name__)

LEDGER_COPY_NAME = "model_ledger.toml"
METADATA_NAME = "metadata.json"
SEAM_DISTANCES = (100.0, 1000.0, 10000.0)
SEAM_TOLERANCE_DB = 6.0
PATHLOSS_CURVE_POINTS = 200

Tables = Dict[str, pd.DataFrame]


@dataclass(frozen=True)
class RunContext:
	config: RunConfig
	ledger: ModelLedger
	curve: Optional[LosCurveTable]
	workers: int


def _dl_cdf(ctx: RunContext) -> Tables:
	result = run_dl_analysis(ctx.config, ctx.ledger, ctx.curve, ctx.workers)
	tables = {"dl_cdf": result.cdf, "dl_summary": result.summary}
	if result.links is not None:
		tables["links"] = result.links
	return tables


def _ul_sweep(ctx: RunContext) -> Tables:
	return {"ul_sweep": run_ul_sim(ctx.config, ledger=ctx.ledger, curve=ctx.curve, workers=ctx.workers).table}


def _pc_sweep(ctx: RunContext) -> Tables:
	return {"pc_sweep": sweep_power_control(ctx.config, ledger=ctx.ledger, curve=ctx.curve, workers=ctx.workers)}


def _partition(ctx: RunContext) -> Tables:
	return {"partition": partition_sweep(ctx.config, ledger=ctx.ledger, curve=ctx.curve, workers=ctx.workers)}


def _aerial_id(ctx: RunContext) -> Tables:
	return {"roc": roc_sweep(ctx.config, ledger=ctx.ledger, curve=ctx.curve, workers=ctx.workers).table}


def _los_curve(ctx: RunContext) -> Tables:
	section = ctx.config.terrain
	if section.heightmap_path is None:
		raise ConfigurationError("terrain.heightmap_path", "required by the los_curve experiment")
	hmap = load_heightmap(section.heightmap_path, section.heightmap_format)
	table = estimate_los_curve(
		hmap,
		section.n_bs_drops,
		section.bs_height_agl,
		section.ue_heights,
		log_distance_bins(section.bin_min, section.bin_max, section.n_bins),
		rng_seed=ctx.config.run.seeds[0],
		ues_per_bin=section.ues_per_bin,
		building_threshold=section.building_threshold,
		median_window=section.median_window,
		workers=ctx.workers,
	)
	return {"los_curve": los_curve_frame(table)}


def _pathloss_curves(ctx: RunContext) -> Tables:
	section, ledger = ctx.config.pathloss_curves, ctx.ledger
	distances = np.geomspace(ledger.pathloss_min_distance, ledger.pathloss_max_distance, PATHLOSS_CURVE_POINTS)
	frames = [
		generate_pathloss_curves(section.bs_height, h_ut, section.carrier_frequency, distances, ledger)
		for h_ut in sorted(set(section.altitudes))
	]
	return {"pathloss_curves": pd.concat(frames, ignore_index=True)}


def _fragmentation_job(config: RunConfig, ledger: ModelLedger, curve: Optional[LosCurveTable], altitude: float) -> FragmentationResult:
	layout = layout_from_config(config)
	pattern = AntennaPattern.synthesize(config.antenna)
	settings = channel_settings_from_config(config, ledger, curve)
	return association_fragmentation(layout, pattern, altitude, config.enhancements.fragmentation_raster_step, settings)


def _fragmentation(ctx: RunContext) -> Tables:
	jobs = {float(h): (ctx.config, ctx.ledger, ctx.curve, float(h)) for h in ctx.config.enhancements.fragmentation_altitudes}
	results = run_jobs(_fragmentation_job, jobs, ctx.workers, span_name="fragmentation_jobs")
	return {"fragmentation": pd.concat([result.to_frame() for _, result in results], ignore_index=True)}


def _handover_job(config: RunConfig, ledger: ModelLedger, curve: Optional[LosCurveTable], altitude: float, seed: int) -> HandoverTrace:
	section = config.handover
	hoc = HandoverConfig(
		hysteresis=section.hysteresis,
		time_to_trigger=section.time_to_trigger,
		ue_speed=section.ue_speed,
		altitude=altitude,
		measurement_period=section.measurement_period,
		ping_pong_window=section.ping_pong_window,
	)
	return simulate_trajectory_handover(
		layout_from_config(config),
		AntennaPattern.synthesize(config.antenna),
		hoc,
		(section.path_start, section.path_end),
		seed,
		channel_settings_from_config(config, ledger, curve),
		section.shadowing_mode,
		tx_power=config.radio.bs_tx_power,
		noise_dbm=noise_power_dbm(config.radio.bandwidth_mhz * 1e6, config.radio.ue_noise_figure, ledger),
		ru=config.downlink.resource_utilization,
	)


def _handover(ctx: RunContext) -> Tables:
	section = ctx.config.handover
	jobs = {
		(float(h), seed): (ctx.config, ctx.ledger, ctx.curve, float(h), seed)
		for h in section.altitudes
		for seed in ctx.config.run.seeds
	}
	traces = [tr for _, tr in run_jobs(_handover_job, jobs, ctx.workers, span_name="handover_jobs")]
	length = float(np.hypot(section.path_end[0] - section.path_start[0], section.path_end[1] - section.path_start[1]))
	return {
		"handover": pd.concat([tr.events_frame() for tr in traces], ignore_index=True),
		"handover_summary": handover_summary(traces, length),
	}


def _layout(ctx: RunContext) -> Tables:
	return {"layout": layout_table(layout_from_config(ctx.config))}


def _antenna_pattern(ctx: RunContext) -> Tables:
	return {"antenna_pattern": pattern_table(AntennaPattern.synthesize(ctx.config.antenna))}


EXPERIMENTS: Dict[Experiment, Callable[[RunContext], Tables]] = {
	Experiment.DL_CDF: _dl_cdf,
	Experiment.UL_SWEEP: _ul_sweep,
	Experiment.PC_SWEEP: _pc_sweep,
	Experiment.PARTITION: _partition,
	Experiment.LOS_CURVE: _los_curve,
	Experiment.PATHLOSS_CURVES: _pathloss_curves,
	Experiment.FRAGMENTATION: _fragmentation,
	Experiment.HANDOVER: _handover,
	Experiment.AERIAL_ID: _aerial_id,
	Experiment.LAYOUT: _layout,
	Experiment.ANTENNA_PATTERN: _antenna_pattern,
}


def config_digest(config: RunConfig) -> str:
	return hashlib.sha256(config.model_dump_json().encode("utf-8")).hexdigest()


def seam_report(config: RunConfig, ledger: ModelLedger) -> Dict[str, object]:
	"""LOS pathloss jump at h_ut = h_bs for a few distances, flagged above the tolerance."""
	seams = {
		f"{d:g}": float(altitude_seam_db(d, config.layout.bs_height, config.channel.carrier_frequency, ledger))
		for d in SEAM_DISTANCES
	}
	return {"altitude_seam_db": seams, "altitude_seam_flag": max(seams.values()) > SEAM_TOLERANCE_DB}


def build_metadata(config: RunConfig, ledger: ModelLedger, experiment: Experiment, wall_time_s: float) -> Dict[str, object]:
	return {
		"scenario": config.scenario.name,
		"experiment": experiment.value,
		"config_sha256": config_digest(config),
		"seeds": list(config.run.seeds),
		"version": src.__version__,
		"wall_time_s": round(wall_time_s, 3),
		**seam_report(config, ledger),
	}


@dataclass(frozen=True)
class ExperimentOutcome:
	tables: Tables
	metadata: Dict[str, object]
	manifest: Dict[str, str]


def prepare(config: RunConfig, workers: Optional[int] = None) -> RunContext:
	"""Load the ledger and, for terrain_empirical, the LOS curve; validates without computing."""
	ledger = load_ledger(config.run.ledger_path)
	curve = None
	if config.channel.los_model == LosModel.TERRAIN_EMPIRICAL:
		curve = load_los_curve(config.channel.los_curve_path)
	return RunContext(config=config, ledger=ledger, curve=curve, workers=workers or config.run.workers)


def run_experiment(
	config: RunConfig,
	experiment: Union[Experiment, str],
	out_dir: Optional[Union[str, Path]] = None,
	workers: Optional[int] = None,
	dry_run: bool = False,
) -> ExperimentOutcome:
	"""
	Compute one experiment and write its tables, metadata and ledger copy.

	With dry_run the configuration, ledger and inputs are validated and
	nothing is computed or written.
	"""
	experiment = Experiment(experiment)
	ctx = prepare(config, workers)
	out_dir = Path(out_dir) if out_dir is not None else Path(config.run.output_dir) / experiment.value
	if experiment == Experiment.LOS_CURVE and config.terrain.heightmap_path is None:
		raise ConfigurationError("terrain.heightmap_path", "required by the los_curve experiment")
	if dry_run:
		LOGGER.info("Dry run of %s: configuration %s is valid", experiment.value, config.scenario.name)
		return ExperimentOutcome(tables={}, metadata={}, manifest={})

	tracer = trace.get_tracer(__name__)
	with tracer.start_as_current_span("run_experiment") as span:
		span.set_attribute("experiment", experiment.value)
		span.set_attribute("scenario", config.scenario.name)
		span.set_attribute("workers", ctx.workers)
		started = time.perf_counter()
		try:
			tables = EXPERIMENTS[experiment](ctx)
		except SimulationError as exc:
			span.add_event("experiment_failed", {"error": str(exc)})
			LOGGER.error("Experiment %s failed: %s", experiment.value, exc)
			raise
		metadata = build_metadata(config, ctx.ledger, experiment, time.perf_counter() - started)
		extra = {
			METADATA_NAME: (json.dumps(metadata, indent=2, sort_keys=True) + "\n").encode("utf-8"),
			LEDGER_COPY_NAME: Path(config.run.ledger_path).read_bytes(),
		}
		manifest = write_results(tables, out_dir, extra)
		span.set_attribute("files_written", len(manifest))
	if metadata["altitude_seam_flag"]:
		LOGGER.warning("Pathloss seam at h_ut = h_bs exceeds %.1f dB: %s", SEAM_TOLERANCE_DB, metadata["altitude_seam_db"])
	LOGGER.info("Experiment %s finished in %.1f s", experiment.value, metadata["wall_time_s"])
	return ExperimentOutcome(tables=tables, metadata=metadata, manifest=manifest)
