from __future__ import annotations

from typing import Optional, Tuple

import torch

from edgecl.errors import ArgumentError, ShapeError

from .base import Layer, Params
from .types import LayerTape


def softmax_xent(logits: torch.Tensor, label: int) -> Tuple[float, torch.Tensor]:
    """
    单样本 softmax 交叉熵：loss = −log softmax(logits)[label]，
    err = softmax(logits) − onehot(label)。
    """
    if logits.dim() != 1:
        raise ShapeError(f"logits 应为一维，实际 {tuple(logits.shape)}")
    loss, err = softmax_xent_batch(logits.unsqueeze(0), torch.tensor([label]))
    return loss, err[0]


def softmax_xent_batch(
    logits: torch.Tensor,
    labels: torch.Tensor,
    reduction: str = "mean",
) -> Tuple[float, torch.Tensor]:
    """
    批量版本，默认返回平均损失与对应的误差（已除以 N）。
    """
    n, classes = logits.shape
    labels = labels.to(torch.long).reshape(-1)
    if labels.numel() != n:
        raise ShapeError(f"标签个数 {labels.numel()} 与批量大小 {n} 不一致")
    if bool((labels < 0).any()) or bool((labels >= classes).any()):
        raise ArgumentError(f"标签越界：取值范围应为 [0, {classes})")
    shifted = logits - logits.max(dim=1, keepdim=True).values
    log_z = torch.log(torch.exp(shifted).sum(dim=1, keepdim=True))
    log_prob = shifted - log_z
    rows = torch.arange(n)
    losses = -log_prob[rows, labels]
    err = torch.exp(log_prob)
    err[rows, labels] -= 1.0
    if reduction == "mean":
        return float(losses.mean()), err / float(n)
    return float(losses.sum()), err


class SoftmaxXentLayer(Layer):
    """
    损失层：前向返回 logits 本身；误差由 loss_and_error 给出。
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
        return act_in

    def loss_and_error(self, logits: torch.Tensor, labels: torch.Tensor) -> Tuple[float, torch.Tensor]:
        return softmax_xent_batch(logits, labels)

    def backward_error(
        self,
        err_in: torch.Tensor,
        params: Params,
        tape: Optional[LayerTape] = None,
    ) -> torch.Tensor:
        return err_in
