from __future__ import annotations

from typing import Optional

import torch

from .base import Layer, Params
from .types import LayerTape


class GlobalAvgPoolLayer(Layer):
    """
    分类器之前的全局平均池化：N×C×H×W → N×C。
    """

    def forward(
        self,
        act_in: torch.Tensor,
        params: Params,
        tape: Optional[LayerTape] = None,
        training: bool = False,
    ) -> torch.Tensor:
        self.check_input(act_in)
        if tape is not None:
            tape.act_in = act_in
        return act_in.mean(dim=(2, 3))

    def backward_error(
        self,
        err_in: torch.Tensor,
        params: Params,
        tape: Optional[LayerTape] = None,
    ) -> torch.Tensor:
        self.check_error(err_in)
        _, h, w = self.spec.in_shape
        spread = err_in / float(h * w)
        return spread[:, :, None, None].expand(-1, -1, h, w).contiguous()
