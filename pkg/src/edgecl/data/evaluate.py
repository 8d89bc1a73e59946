from __future__ import annotations

from typing import Dict, Iterable, Optional

import torch

from edgecl.network import Network


def evaluate(
    net: Network,
    images: torch.Tensor,
    labels: torch.Tensor,
    classes: Optional[Iterable[int]] = None,
) -> float:
    """
    推理模式下的 top-1 准确率（百分比）；classes 给定时只统计这些类别的样本。
    """
    if classes is not None:
        mask = torch.isin(labels, torch.tensor(list(classes), dtype=labels.dtype))
        images, labels = images[mask], labels[mask]
    if labels.numel() == 0:
        return 0.0
    with torch.no_grad():
        predicted = net.predict(images)
    return 100.0 * (predicted == labels).float().mean().item()


def per_class_accuracy(net: Network, images: torch.Tensor, labels: torch.Tensor) -> Dict[int, float]:
    return {int(c): evaluate(net, images, labels, [int(c)]) for c in torch.unique(labels).tolist()}
