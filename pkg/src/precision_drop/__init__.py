"""Simulation of a GPS-guided payload drop with camera-based terminal alignment."""

from .config import ExperimentConfig, load_config
from .navigation import Mode, Phase
from .runner import ComparisonReport, run_comparison, run_mission

__version__ = "0.1.0"

__all__ = ["ExperimentConfig", "load_config", "Mode", "Phase", "ComparisonReport", "run_comparison", "run_mission"]
