from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from math import prod
from typing import Any, Dict, Optional, Tuple

import torch

from edgecl.errors import ConfigurationError
from edgecl.tensor import ConvGeometry


class LayerKind(str, Enum):
    CONV = "conv"
    DEPTHWISE = "depthwise"
    POINTWISE = "pointwise"
    FULLY_CONNECTED = "fully_connected"
    AVG_POOL = "avg_pool"
    RELU = "relu"
    BATCH_RENORM = "batch_renorm"
    SOFTMAX_XENT = "softmax_xent"

    @property
    def is_conv(self) -> bool:
        return self in (LayerKind.CONV, LayerKind.DEPTHWISE, LayerKind.POINTWISE)

    @property
    def is_gemm(self) -> bool:
        return self.is_conv or self is LayerKind.FULLY_CONNECTED


Shape = Tuple[int, ...]


@dataclass(frozen=True)
class LayerSpec:
    """
    网络中的一层：类型、几何参数与输入/输出形状（单样本，不含 N 维）。

    param_count 即该层参数个数 N_w(i)。
    """

    name: str
    kind: LayerKind
    in_shape: Shape
    out_shape: Shape
    geom: Optional[ConvGeometry] = None

    def __post_init__(self) -> None:
        expected = infer_out_shape(self.kind, self.in_shape, self.geom, self.out_shape)
        if tuple(expected) != tuple(self.out_shape):
            raise ConfigurationError(
                f"层 {self.name} 的输出形状 {self.out_shape} 与几何推导结果 {expected} 不一致"
            )

    @property
    def param_count(self) -> int:
        return sum(prod(s) for s in self.param_shapes.values())

    @property
    def param_shapes(self) -> Dict[str, Shape]:
        """可训练参数的形状。"""
        if self.kind.is_conv:
            assert self.geom is not None
            g = self.geom
            c_in_per_group = 1 if g.depthwise else g.c_in
            return {"weight": (g.c_out, c_in_per_group, g.k_h, g.k_w), "bias": (g.c_out,)}
        if self.kind is LayerKind.FULLY_CONNECTED:
            return {"weight": (self.out_shape[0], self.in_shape[0]), "bias": (self.out_shape[0],)}
        if self.kind is LayerKind.BATCH_RENORM:
            return {"gamma": (self.in_shape[0],), "beta": (self.in_shape[0],)}
        return {}

    @property
    def in_size(self) -> int:
        return prod(self.in_shape)

    @property
    def out_size(self) -> int:
        return prod(self.out_shape)


def infer_out_shape(
    kind: LayerKind,
    in_shape: Shape,
    geom: Optional[ConvGeometry],
    out_shape: Optional[Shape] = None,
) -> Shape:
    if kind.is_conv:
        if geom is None or len(in_shape) != 3:
            raise ConfigurationError(f"{kind.value} 层需要 C×H×W 输入与卷积几何参数")
        if in_shape[0] != geom.c_in:
            raise ConfigurationError(f"输入通道 {in_shape[0]} 与 c_in={geom.c_in} 不一致")
        if kind is LayerKind.DEPTHWISE and not geom.depthwise:
            raise ConfigurationError("depthwise 层的几何参数必须设置 depthwise")
        if kind is LayerKind.POINTWISE and (geom.k_h, geom.k_w) != (1, 1):
            raise ConfigurationError("pointwise 层的卷积核必须为 1×1")
        h_out, w_out = geom.out_hw(in_shape[1], in_shape[2])
        return (geom.c_out, h_out, w_out)
    if kind is LayerKind.AVG_POOL:
        if len(in_shape) != 3:
            raise ConfigurationError("全局平均池化需要 C×H×W 输入")
        return (in_shape[0],)
    if kind is LayerKind.FULLY_CONNECTED:
        if len(in_shape) != 1 or out_shape is None or len(out_shape) != 1:
            raise ConfigurationError("全连接层需要一维输入与一维输出形状")
        return tuple(out_shape)
    return tuple(in_shape)


@dataclass
class LayerTape:
    """
    前向时为反向计算保存的数据：act_in 以及层相关的缓存（如 BRN 统计量）。
    """

    act_in: Optional[torch.Tensor] = None
    aux: Dict[str, Any] = field(default_factory=dict)
