from __future__ import annotations

import math
from dataclasses import dataclass

from edgecl.errors import ConfigurationError

from .hw import HwProfile

DEFAULT_BATTERY_MAH = 3100.0
DEFAULT_BATTERY_VOLTS = 2.2


@dataclass(frozen=True)
class EnergyScenario:
    inferences_per_s: float = 1.0
    retrains_per_hour: float = 1.0

    def __post_init__(self) -> None:
        if self.inferences_per_s < 0 or self.retrains_per_hour < 0:
            raise ConfigurationError(f"场景频率不能为负: {self}")


@dataclass(frozen=True)
class EnergyReport:
    train_j_per_h: float
    inference_j_per_h: float

    @property
    def total_j_per_h(self) -> float:
        return self.train_j_per_h + self.inference_j_per_h


def estimate_energy(
    latency_s: float,
    macs_total: int,
    hw: HwProfile,
    scenario: EnergyScenario = EnergyScenario(),
) -> EnergyReport:
    """
    每小时能耗：学习期间集群与外部存储同时工作（power_active_w + power_ext_mem_w），
    推理能耗按能效 MMAC/s/mW（即 1e9 MAC/J 为单位）由 MAC 数换算。

    latency_s 为学习一个新类别的时间，macs_total 为一次推理的 MAC 数。
    """
    if latency_s < 0 or macs_total < 0:
        raise ConfigurationError("latency_s 与 macs_total 不能为负")
    train = (hw.power_active_w + hw.power_ext_mem_w) * latency_s * scenario.retrains_per_hour
    mac_per_joule = hw.efficiency_mmac_per_s_per_mw * 1e9
    inference = scenario.inferences_per_s * 3600.0 * macs_total / mac_per_joule
    return EnergyReport(train_j_per_h=train, inference_j_per_h=inference)


def battery_hours(
    joules_per_hour: float,
    capacity_mah: float = DEFAULT_BATTERY_MAH,
    volts: float = DEFAULT_BATTERY_VOLTS,
) -> float:
    """电池容量 capacity·volts·3600 J 除以每小时能耗；能耗为 0 时返回 inf。"""
    if capacity_mah < 0 or volts <= 0:
        raise ConfigurationError(f"电池参数不合法: {capacity_mah} mAh, {volts} V")
    if joules_per_hour <= 0:
        return math.inf
    return capacity_mah / 1000.0 * volts * 3600.0 / joules_per_hour
