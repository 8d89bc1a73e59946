from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Tuple

import torch

from edgecl.errors import ConfigurationError, ShapeError

DEFAULT_FISHER_DECAY = 0.9
DEFAULT_F_MAX_CLIP = 0.001


@dataclass
class FisherState:
    """
    对角 Fisher 近似：与可训练参数同形状的非负累加器 f，以及上限 f_max_clip。
    """

    f: torch.Tensor
    f_max_clip: float = DEFAULT_F_MAX_CLIP

    def __post_init__(self) -> None:
        if self.f_max_clip <= 0:
            raise ConfigurationError(f"f_max_clip 必须 > 0: {self.f_max_clip}")

    @classmethod
    def zeros(cls, shape: Tuple[int, ...], f_max_clip: float = DEFAULT_F_MAX_CLIP) -> "FisherState":
        return cls(f=torch.zeros(shape), f_max_clip=f_max_clip)

    def scale(self) -> torch.Tensor:
        """每个参数的梯度缩放系数 1 − f/f_max_clip，取值 [0, 1]。"""
        return torch.clamp(1.0 - self.f / self.f_max_clip, 0.0, 1.0)


def fisher_accumulate(
    state: FisherState,
    grad: torch.Tensor,
    fisher_decay: float = DEFAULT_FISHER_DECAY,
) -> FisherState:
    """
    f ← decay·f + (1 − decay)·grad²，再逐元素截断到 f_max_clip。
    """
    if tuple(grad.shape) != tuple(state.f.shape):
        raise ShapeError(f"梯度形状 {tuple(grad.shape)} 与 Fisher 形状 {tuple(state.f.shape)} 不一致")
    if not 0.0 <= fisher_decay <= 1.0:
        raise ConfigurationError(f"fisher_decay 必须在 [0, 1] 内: {fisher_decay}")
    f = fisher_decay * state.f + (1.0 - fisher_decay) * grad * grad
    return FisherState(f=torch.clamp(f, max=state.f_max_clip), f_max_clip=state.f_max_clip)


@dataclass
class FisherBank:
    """
    网络中所有可训练参数的 FisherState，按 (层下标, 参数名) 索引。
    """

    f_max_clip: float = DEFAULT_F_MAX_CLIP
    states: Dict[Tuple[int, str], FisherState] = field(default_factory=dict)

    def get(self, index: int, key: str, shape: Tuple[int, ...]) -> FisherState:
        state = self.states.get((index, key))
        if state is None:
            state = FisherState.zeros(shape, self.f_max_clip)
            self.states[(index, key)] = state
        return state

    def put(self, index: int, key: str, state: FisherState) -> None:
        self.states[(index, key)] = state

    @property
    def element_count(self) -> int:
        return sum(state.f.numel() for state in self.states.values())
