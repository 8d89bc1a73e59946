from __future__ import annotations

import math
from typing import Optional

import torch

from edgecl.tensor import gemm, gemm_tiled

from .base import Layer, Params
from .types import LayerTape


class FullyConnectedLayer(Layer):
    """
    全连接层 y = W·x + b，按批量写成 GEMM：W (out×in) · Xᵀ (in×N)。
    """

    def init_params(self, generator: torch.Generator) -> Params:
        shapes = self.spec.param_shapes
        fan_in = shapes["weight"][1]
        bound = 1.0 / math.sqrt(fan_in)
        weight = (torch.rand(shapes["weight"], generator=generator) * 2.0 - 1.0) * bound
        return {"weight": weight, "bias": torch.zeros(shapes["bias"])}

    def forward(
        self,
        act_in: torch.Tensor,
        params: Params,
        tape: Optional[LayerTape] = None,
        training: bool = False,
        c_tile: Optional[int] = None,
    ) -> torch.Tensor:
        self.check_input(act_in)
        self.check_params(params)
        if c_tile is None:
            out = gemm(params["weight"], act_in.t())
        else:
            out = gemm_tiled(params["weight"], act_in.t(), c_tile)
        if tape is not None:
            tape.act_in = act_in
        return (out + params["bias"].reshape(-1, 1)).t().contiguous()

    def backward_error(
        self,
        err_in: torch.Tensor,
        params: Params,
        tape: Optional[LayerTape] = None,
    ) -> torch.Tensor:
        self.check_error(err_in)
        return gemm(params["weight"].t(), err_in.t()).t().contiguous()

    def backward_grad(
        self,
        err_in: torch.Tensor,
        params: Params,
        tape: Optional[LayerTape] = None,
    ) -> Params:
        tape = self.require_tape(tape)
        self.check_error(err_in)
        return {
            "weight": gemm(err_in.t(), tape.act_in),
            "bias": err_in.sum(dim=0),
        }
