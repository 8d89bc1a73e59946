from __future__ import annotations

from typing import Optional

import torch

from edgecl.errors import ConfigurationError

from .activation import ReLULayer
from .base import Layer, Params
from .conv import ConvLayer
from .linear import FullyConnectedLayer
from .loss import SoftmaxXentLayer
from .pooling import GlobalAvgPoolLayer
from .renorm import BatchRenormLayer, RenormClip
from .types import LayerKind, LayerSpec, LayerTape


def build_layer(spec: LayerSpec, clip: RenormClip = RenormClip()) -> Layer:
    """
    根据 LayerSpec.kind 返回对应的层实现。
    """
    kind = spec.kind
    if kind.is_conv:
        return ConvLayer(spec)
    if kind is LayerKind.FULLY_CONNECTED:
        return FullyConnectedLayer(spec)
    if kind is LayerKind.RELU:
        return ReLULayer(spec)
    if kind is LayerKind.AVG_POOL:
        return GlobalAvgPoolLayer(spec)
    if kind is LayerKind.BATCH_RENORM:
        return BatchRenormLayer(spec, clip=clip)
    if kind is LayerKind.SOFTMAX_XENT:
        return SoftmaxXentLayer(spec)
    raise ConfigurationError(f"未知的层类型: {kind}")


def forward(
    spec: LayerSpec,
    act_in: torch.Tensor,
    params: Params,
    tape: Optional[LayerTape] = None,
    training: bool = False,
) -> torch.Tensor:
    return build_layer(spec).forward(act_in, params, tape=tape, training=training)


def backward_error(
    spec: LayerSpec,
    err_in: torch.Tensor,
    params: Params,
    tape: Optional[LayerTape] = None,
) -> torch.Tensor:
    return build_layer(spec).backward_error(err_in, params, tape=tape)


def backward_grad(
    spec: LayerSpec,
    err_in: torch.Tensor,
    params: Params,
    tape: Optional[LayerTape] = None,
) -> Params:
    return build_layer(spec).backward_grad(err_in, params, tape=tape)
