"""Experiment runner and command-line interface."""

from .config import ConfigError, ExperimentConfig, config_from_dict, load_config
from .runner import InvariantBreach, ParameterDomainError, run_experiment

__all__ = [
    "ConfigError", "ExperimentConfig", "InvariantBreach", "ParameterDomainError",
    "config_from_dict", "load_config", "run_experiment",
]
