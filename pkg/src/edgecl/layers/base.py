from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Dict, Optional

import torch

from edgecl.errors import ShapeError, StateError

from .types import LayerSpec, LayerTape

Params = Dict[str, torch.Tensor]


class Layer(ABC):
    """
    抽象层，封装三张计算图：前向、误差反传与梯度计算。

    所有张量带批量维 N；形状检查以 LayerSpec 中的单样本形状为准。
    """

    #: 不参与训练、但随网络保存的状态（如 BRN 的滑动统计量）
    buffers: tuple[str, ...] = ()

    def __init__(self, spec: LayerSpec) -> None:
        self.spec = spec

    @property
    def name(self) -> str:
        return self.spec.name

    def init_params(self, generator: torch.Generator) -> Params:
        return {}

    def check_input(self, act_in: torch.Tensor) -> None:
        if tuple(act_in.shape[1:]) != tuple(self.spec.in_shape):
            raise ShapeError(
                f"层 {self.name} 输入形状应为 N×{self.spec.in_shape}，实际 {tuple(act_in.shape)}"
            )

    def check_error(self, err_in: torch.Tensor) -> None:
        if tuple(err_in.shape[1:]) != tuple(self.spec.out_shape):
            raise ShapeError(
                f"层 {self.name} 误差形状应为 N×{self.spec.out_shape}，实际 {tuple(err_in.shape)}"
            )

    def check_params(self, params: Params) -> None:
        for key, shape in self.spec.param_shapes.items():
            value = params.get(key)
            if value is None or tuple(value.shape) != tuple(shape):
                got = None if value is None else tuple(value.shape)
                raise ShapeError(f"层 {self.name} 参数 {key} 形状应为 {shape}，实际 {got}")

    def require_tape(self, tape: Optional[LayerTape]) -> LayerTape:
        if tape is None or tape.act_in is None:
            raise StateError(f"层 {self.name} 缺少前向保存的 LayerTape")
        return tape

    @abstractmethod
    def forward(
        self,
        act_in: torch.Tensor,
        params: Params,
        tape: Optional[LayerTape] = None,
        training: bool = False,
    ) -> torch.Tensor:
        """
        前向计算；tape 不为 None 时记录 act_in 供反向使用。
        """

    @abstractmethod
    def backward_error(
        self,
        err_in: torch.Tensor,
        params: Params,
        tape: Optional[LayerTape] = None,
    ) -> torch.Tensor:
        """
        将输出误差反传为输入误差。
        """

    def backward_grad(
        self,
        err_in: torch.Tensor,
        params: Params,
        tape: Optional[LayerTape] = None,
    ) -> Params:
        return {}

    def commit_buffers(self, params: Params, tape: LayerTape, scale: torch.Tensor | float) -> None:
        """
        把训练前向记录在 tape 中的 buffer 候选值按 scale 写回 params。

        scale 为 0 时 buffer 不变；无 buffer 的层什么也不做。
        """
