from __future__ import annotations

import torch

from edgecl.errors import ConfigurationError, ShapeError

from .fisher import FisherState


def ar1_step(
    params: torch.Tensor,
    grad: torch.Tensor,
    state: FisherState,
    lr: float,
) -> torch.Tensor:
    """
    AR1 参数更新：params − lr·(1 − f/f_max_clip)·grad。

    f 达到上限的参数不再变化；f = 0 时退化为普通 SGD。
    """
    if tuple(params.shape) != tuple(grad.shape) or tuple(grad.shape) != tuple(state.f.shape):
        raise ShapeError(
            f"ar1_step 形状不一致: params {tuple(params.shape)}, grad {tuple(grad.shape)}, f {tuple(state.f.shape)}"
        )
    if lr < 0:
        raise ConfigurationError(f"学习率不能为负: {lr}")
    return params - lr * (state.scale() * grad)
