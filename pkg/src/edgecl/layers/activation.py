from __future__ import annotations

from typing import Optional

import torch

from .base import Layer, Params
from .types import LayerTape


class ReLULayer(Layer):
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
        return torch.clamp(act_in, min=0.0)

    def backward_error(
        self,
        err_in: torch.Tensor,
        params: Params,
        tape: Optional[LayerTape] = None,
    ) -> torch.Tensor:
        tape = self.require_tape(tape)
        self.check_error(err_in)
        # 按保存的 act_in 符号屏蔽误差
        return torch.where(tape.act_in > 0, err_in, torch.zeros_like(err_in))
