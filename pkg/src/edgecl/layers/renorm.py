from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import torch

from edgecl.errors import StateError

from .base import Layer, Params
from .types import LayerSpec, LayerTape

DEFAULT_R_MAX = 3.0
DEFAULT_D_MAX = 5.0
DEFAULT_EPS = 1e-5
DEFAULT_MOMENTUM = 0.1


@dataclass(frozen=True)
class RenormClip:
    r_max: float = DEFAULT_R_MAX
    d_max: float = DEFAULT_D_MAX
    eps: float = DEFAULT_EPS
    momentum: float = DEFAULT_MOMENTUM


def _reduce_dims(x: torch.Tensor) -> Tuple[int, ...]:
    return (0, 2, 3) if x.dim() == 4 else (0,)


def _per_channel(v: torch.Tensor, x: torch.Tensor) -> torch.Tensor:
    return v.reshape(1, -1, 1, 1) if x.dim() == 4 else v.reshape(1, -1)


def batch_renorm_forward(
    act_in: torch.Tensor,
    gamma: torch.Tensor,
    beta: torch.Tensor,
    running_mean: torch.Tensor,
    running_var: torch.Tensor,
    clip: RenormClip = RenormClip(),
    training: bool = True,
) -> Tuple[torch.Tensor, dict, torch.Tensor, torch.Tensor]:
    """
    Batch Renormalization 前向。

    训练时 y = γ·(x̂·r + d) + β，其中
    r = clip(σ_B/σ_run, 1/r_max, r_max)，d = clip((μ_B − μ_run)/σ_run, −d_max, d_max)，
    r、d 在反向中视为常数。返回 (输出, 反向缓存, 新的滑动均值, 新的滑动方差)。
    推理时直接使用滑动统计量归一化。
    """
    sigma_run = torch.sqrt(running_var + clip.eps)
    if not training:
        x_hat = (act_in - _per_channel(running_mean, act_in)) / _per_channel(sigma_run, act_in)
        y = _per_channel(gamma, act_in) * x_hat + _per_channel(beta, act_in)
        return y, {}, running_mean, running_var

    dims = _reduce_dims(act_in)
    mu_b = act_in.mean(dim=dims)
    var_b = act_in.var(dim=dims, unbiased=False)
    sigma_b = torch.sqrt(var_b + clip.eps)
    r = torch.clamp(sigma_b / sigma_run, 1.0 / clip.r_max, clip.r_max)
    d = torch.clamp((mu_b - running_mean) / sigma_run, -clip.d_max, clip.d_max)
    x_hat = (act_in - _per_channel(mu_b, act_in)) / _per_channel(sigma_b, act_in)
    x_renorm = x_hat * _per_channel(r, act_in) + _per_channel(d, act_in)
    y = _per_channel(gamma, act_in) * x_renorm + _per_channel(beta, act_in)

    new_mean = running_mean + clip.momentum * (mu_b - running_mean)
    new_var = running_var + clip.momentum * (var_b - running_var)
    cache = {"x_hat": x_hat, "x_renorm": x_renorm, "sigma_b": sigma_b, "r": r}
    return y, cache, new_mean, new_var


def batch_renorm_backward(
    err_in: torch.Tensor,
    gamma: torch.Tensor,
    cache: dict,
) -> Tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
    """
    返回 (err_out, dγ, dβ)。
    """
    dims = _reduce_dims(err_in)
    x_hat = cache["x_hat"]
    g = err_in * _per_channel(gamma * cache["r"], err_in)
    mean_g = g.mean(dim=dims, keepdim=True)
    mean_gx = (g * x_hat).mean(dim=dims, keepdim=True)
    err_out = (g - mean_g - x_hat * mean_gx) / _per_channel(cache["sigma_b"], err_in)
    d_gamma = (err_in * cache["x_renorm"]).sum(dim=dims)
    d_beta = err_in.sum(dim=dims)
    return err_out, d_gamma, d_beta


class BatchRenormLayer(Layer):
    buffers = ("running_mean", "running_var")

    def __init__(self, spec: LayerSpec, clip: RenormClip = RenormClip()) -> None:
        super().__init__(spec)
        self.clip = clip

    def init_params(self, generator: torch.Generator) -> Params:
        c = self.spec.in_shape[0]
        return {
            "gamma": torch.ones(c),
            "beta": torch.zeros(c),
            "running_mean": torch.zeros(c),
            "running_var": torch.ones(c),
        }

    def forward(
        self,
        act_in: torch.Tensor,
        params: Params,
        tape: Optional[LayerTape] = None,
        training: bool = False,
    ) -> torch.Tensor:
        self.check_input(act_in)
        self.check_params(params)
        y, cache, new_mean, new_var = batch_renorm_forward(
            act_in,
            params["gamma"],
            params["beta"],
            params["running_mean"],
            params["running_var"],
            clip=self.clip,
            training=training,
        )
        # 滑动统计量只记在 tape 里，由训练器随参数更新一起提交
        if tape is not None:
            tape.act_in = act_in
            tape.aux.update(cache)
            if training:
                tape.aux["next_running_mean"] = new_mean
                tape.aux["next_running_var"] = new_var
        return y

    def commit_buffers(self, params: Params, tape: LayerTape, scale: torch.Tensor | float) -> None:
        for key in self.buffers:
            proposed = tape.aux.get(f"next_{key}")
            if proposed is None:
                continue
            params[key] = params[key] + scale * (proposed - params[key])

    def backward_error(
        self,
        err_in: torch.Tensor,
        params: Params,
        tape: Optional[LayerTape] = None,
    ) -> torch.Tensor:
        tape = self.require_tape(tape)
        self.check_error(err_in)
        if "x_hat" not in tape.aux:
            raise StateError(f"层 {self.name} 的 tape 不是在训练模式下记录的")
        err_out, _, _ = batch_renorm_backward(err_in, params["gamma"], tape.aux)
        return err_out

    def backward_grad(
        self,
        err_in: torch.Tensor,
        params: Params,
        tape: Optional[LayerTape] = None,
    ) -> Params:
        tape = self.require_tape(tape)
        if "x_hat" not in tape.aux:
            raise StateError(f"层 {self.name} 的 tape 不是在训练模式下记录的")
        _, d_gamma, d_beta = batch_renorm_backward(err_in, params["gamma"], tape.aux)
        return {"gamma": d_gamma, "beta": d_beta}
