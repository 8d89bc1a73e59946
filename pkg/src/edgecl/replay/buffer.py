from __future__ import annotations

import logging
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Literal, Optional, Tuple

import torch

from edgecl.errors import ConfigurationError, ShapeError

logger = logging.getLogger(__name__)

SelectionStrategy = Literal["first_k", "uniform_random"]


@dataclass
class ReplayBuffer:
    """
    按类别存放的 latent 向量，每类最多 quota 个。

    所有向量形状相同（即当前 LR 层的激活形状）。store_path 不为空时，
    表示该缓冲区对应外部 FLASH 上的 LRBF 文件。
    """

    vector_shape: Tuple[int, ...]
    quota: int = 30
    strategy: SelectionStrategy = "first_k"
    seed: int = 0
    store_path: Optional[Path] = None
    classes: Dict[int, torch.Tensor] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.quota < 0:
            raise ConfigurationError(f"quota 不能为负: {self.quota}")
        if self.strategy not in ("first_k", "uniform_random"):
            raise ConfigurationError(f"未知的回放选择策略: {self.strategy}")
        self.vector_shape = tuple(self.vector_shape)
        self._lock = threading.Lock()
        self._generator = torch.Generator().manual_seed(self.seed)

    def __len__(self) -> int:
        return sum(v.shape[0] for v in self.classes.values())

    @property
    def class_ids(self) -> List[int]:
        return sorted(self.classes)

    def count(self, class_id: int) -> int:
        stored = self.classes.get(class_id)
        return 0 if stored is None else stored.shape[0]

    def vectors(self, class_id: int) -> torch.Tensor:
        return self.classes[class_id]

    def _select(self, latents: torch.Tensor, keep: int) -> torch.Tensor:
        if latents.shape[0] <= keep:
            return latents
        if self.strategy == "first_k":
            return latents[:keep]
        order = torch.randperm(latents.shape[0], generator=self._generator)[:keep]
        return latents[order.sort().values]

    def rebalance(self, total_budget: int) -> None:
        """
        固定总预算被越来越多的类别共享时，把每类配额降为 budget // 类别数。
        """
        if not self.classes:
            return
        with self._lock:
            self.quota = min(self.quota, max(total_budget // len(self.classes), 0))
            for class_id in list(self.classes):
                self.classes[class_id] = self._select(self.classes[class_id], self.quota)
        logger.info("[replay] 配额调整为每类 %d 个（共 %d 类）", self.quota, len(self.classes))


def insert_class(buffer: ReplayBuffer, class_id: int, latents: torch.Tensor) -> ReplayBuffer:
    """
    将一个类别的 latent 向量写入缓冲区，该类最多保留 quota 个。

    first_k 按到达顺序保留前 quota 个；重复插入同一类别时，已有向量排在前面。
    """
    if tuple(latents.shape[1:]) != buffer.vector_shape:
        raise ShapeError(
            f"latent 形状 {tuple(latents.shape[1:])} 与缓冲区形状 {buffer.vector_shape} 不一致"
        )
    with buffer._lock:
        existing = buffer.classes.get(class_id)
        merged = latents if existing is None else torch.cat([existing, latents])
        buffer.classes[class_id] = buffer._select(merged.contiguous(), buffer.quota).clone()
    logger.debug("[replay] 类别 %d 保存 %d 个回放向量", class_id, buffer.count(class_id))
    return buffer
