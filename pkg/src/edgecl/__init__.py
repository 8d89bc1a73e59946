from __future__ import annotations

from .config import ExperimentConfig, TrainConfig
from .network import Network, NetworkDescriptor
from .pipeline import EdgeCLPipeline, cmd_plan, cmd_train

__all__ = [
    "EdgeCLPipeline",
    "ExperimentConfig",
    "Network",
    "NetworkDescriptor",
    "TrainConfig",
    "cmd_plan",
    "cmd_train",
]

__version__ = "0.1.0"
