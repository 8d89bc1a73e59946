from __future__ import annotations

from dataclasses import dataclass
from typing import Dict

from edgecl.errors import ConfigurationError

from .hw import HwProfile


@dataclass(frozen=True)
class SpeedupReport:
    per_kernel: Dict[str, float]

    @property
    def average(self) -> float:
        return sum(self.per_kernel.values()) / len(self.per_kernel)


def speedup_report(hw_single: HwProfile, hw_octa: HwProfile) -> SpeedupReport:
    """
    每个内核（mac_per_cycle 的键）的并行加速比 = 多核 MAC/cycle / 单核 MAC/cycle。
    """
    single, octa = hw_single.mac_per_cycle, hw_octa.mac_per_cycle
    missing = sorted(set(single) ^ set(octa))
    if missing:
        raise ConfigurationError(
            f"{hw_single.name} 与 {hw_octa.name} 的内核不一致，缺少: {', '.join(missing)}"
        )
    table = {key: octa[key] / single[key] for key in sorted(octa)}
    over = {k: v for k, v in table.items() if v > hw_octa.cores}
    if over:
        raise ConfigurationError(f"加速比超过核数 {hw_octa.cores}: {over}")
    return SpeedupReport(per_kernel=table)
