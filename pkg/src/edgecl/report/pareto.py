from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

from edgecl.errors import ConfigurationError

ACCURACY_SOURCES = ("ingested", "measured", "none")


@dataclass(frozen=True)
class ParetoRow:
    """
    一个 LR 切分点在 内存 / 延迟 / 准确率 三个维度上的结果。

    accuracy_source 为 "ingested" 时，准确率来自网络描述中导入的元数据，
    并非本机计算。
    """

    cut: str
    ram_bytes: int
    flash_bytes: int
    latency_s: float
    energy_j_per_h: float
    accuracy_pct: Optional[float] = None
    accuracy_source: str = "none"
    pareto: bool = False
    feasible: bool = True

    def __post_init__(self) -> None:
        if self.accuracy_source not in ACCURACY_SOURCES:
            raise ConfigurationError(f"未知的 accuracy_source: {self.accuracy_source}")

    def objectives(self) -> Tuple[float, float, float]:
        """越小越好：(ram, latency, -accuracy)；缺失准确率按最差处理。"""
        acc = -math.inf if self.accuracy_pct is None else self.accuracy_pct
        latency = self.latency_s if self.feasible else math.inf
        return (float(self.ram_bytes), latency, -acc)


def dominates(a: ParetoRow, b: ParetoRow) -> bool:
    oa, ob = a.objectives(), b.objectives()
    return all(x <= y for x, y in zip(oa, ob)) and any(x < y for x, y in zip(oa, ob))


def pareto_front(rows: Sequence[ParetoRow]) -> List[ParetoRow]:
    """
    按支配关系重新计算每行的 pareto 标记（与输入顺序无关，重复调用结果不变）。
    """
    return [replace(row, pareto=not any(dominates(other, row) for other in rows)) for row in rows]
