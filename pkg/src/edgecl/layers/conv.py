from __future__ import annotations

import math
from typing import Optional

import torch

from edgecl.tensor import col2im, gemm, gemm_tiled, im2col

from .base import Layer, Params
from .types import LayerTape


class ConvLayer(Layer):
    """
    标准 / depthwise / pointwise 卷积，全部降级为 im2col + GEMM。

    depthwise 使用分组 GEMM：每个通道与自己的 K_h·K_w 行独立相乘，
    等价于 C 个单通道卷积。
    """

    def init_params(self, generator: torch.Generator) -> Params:
        shapes = self.spec.param_shapes
        w_shape = shapes["weight"]
        fan_in = w_shape[1] * w_shape[2] * w_shape[3]
        std = math.sqrt(2.0 / fan_in)
        return {
            "weight": torch.randn(w_shape, generator=generator) * std,
            "bias": torch.zeros(shapes["bias"]),
        }

    @property
    def _geom(self):
        geom = self.spec.geom
        assert geom is not None
        return geom

    def _coeff_matrix(self, weight: torch.Tensor) -> torch.Tensor:
        g = self._geom
        if g.depthwise:
            return weight.reshape(g.c_out, 1, g.k_h * g.k_w)
        return weight.reshape(g.c_out, g.col_rows)

    def _grouped_cols(self, cols: torch.Tensor) -> torch.Tensor:
        g = self._geom
        return cols.reshape(g.c_in, g.k_h * g.k_w, cols.shape[-1])

    def _err_matrix(self, err_in: torch.Tensor) -> torch.Tensor:
        c_out = self._geom.c_out
        return err_in.permute(1, 0, 2, 3).reshape(c_out, -1)

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
        g = self._geom
        cols = im2col(act_in, g)
        coeff = self._coeff_matrix(params["weight"])
        if g.depthwise:
            cols = self._grouped_cols(cols)
            if c_tile is None:
                out = gemm(coeff, cols)
            else:
                out = torch.cat(
                    [gemm(coeff[s : s + c_tile], cols[s : s + c_tile]) for s in range(0, g.c_out, c_tile)]
                )
            out = out.reshape(g.c_out, -1)
        elif c_tile is None:
            out = gemm(coeff, cols)
        else:
            out = gemm_tiled(coeff, cols, c_tile)
        out = out + params["bias"].reshape(-1, 1)
        n = act_in.shape[0]
        c, h_out, w_out = self.spec.out_shape
        if tape is not None:
            tape.act_in = act_in
        return out.reshape(c, n, h_out, w_out).permute(1, 0, 2, 3).contiguous()

    def backward_error(
        self,
        err_in: torch.Tensor,
        params: Params,
        tape: Optional[LayerTape] = None,
    ) -> torch.Tensor:
        self.check_error(err_in)
        g = self._geom
        err = self._err_matrix(err_in)
        coeff = self._coeff_matrix(params["weight"])
        if g.depthwise:
            d_cols = gemm(coeff.transpose(1, 2), err.reshape(g.c_out, 1, -1))
            d_cols = d_cols.reshape(g.col_rows, -1)
        else:
            d_cols = gemm(coeff.t(), err)
        in_shape = (err_in.shape[0], *self.spec.in_shape)
        return col2im(d_cols, g, in_shape)

    def backward_grad(
        self,
        err_in: torch.Tensor,
        params: Params,
        tape: Optional[LayerTape] = None,
    ) -> Params:
        tape = self.require_tape(tape)
        self.check_error(err_in)
        g = self._geom
        err = self._err_matrix(err_in)
        cols = im2col(tape.act_in, g)
        if g.depthwise:
            cols = self._grouped_cols(cols)
            grad = gemm(err.reshape(g.c_out, 1, -1), cols.transpose(1, 2))
        else:
            grad = gemm(err, cols.t())
        return {
            "weight": grad.reshape(self.spec.param_shapes["weight"]),
            "bias": err.sum(dim=1),
        }
