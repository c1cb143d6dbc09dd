"""Experiment orchestration: dispatch, result writing and the command line."""

from src.experiments.runner import EXPERIMENTS, ExperimentOutcome, run_experiment
from src.experiments.writer import write_results

__all__ = ["EXPERIMENTS", "ExperimentOutcome", "run_experiment", "write_results"]
