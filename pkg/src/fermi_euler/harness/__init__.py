"""Experiment orchestration: configs, the commuting-diagram experiments,
the invariant-check runner, and the command-line interface."""

from .config import ExperimentConfig, load_config  # noqa: F401
