from __future__ import annotations

from .hw import PASSES, HwProfile, load_profile
from .tiling import TileEntry, TileSchedule, plan_network, plan_tiles
from .memory import FootprintReport, footprint, pareto_memory
from .latency import LatencyReport, estimate_latency, inference_macs, layer_macs, mcu_ratio
from .energy import EnergyReport, EnergyScenario, battery_hours, estimate_energy
from .speedup import SpeedupReport, speedup_report

__all__ = [
    "PASSES",
    "EnergyReport",
    "EnergyScenario",
    "FootprintReport",
    "HwProfile",
    "LatencyReport",
    "SpeedupReport",
    "TileEntry",
    "TileSchedule",
    "battery_hours",
    "estimate_energy",
    "estimate_latency",
    "footprint",
    "inference_macs",
    "layer_macs",
    "load_profile",
    "mcu_ratio",
    "pareto_memory",
    "plan_network",
    "plan_tiles",
    "speedup_report",
]
