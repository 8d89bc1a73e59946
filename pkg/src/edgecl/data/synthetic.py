from __future__ import annotations

from math import prod
from typing import Optional, Tuple

import torch

from edgecl.errors import ConfigurationError


def class_prototypes(classes: int, input_shape: Tuple[int, ...], seed: int = 0) -> torch.Tensor:
    """
    每个类别一个原型：随机颜色（每通道一个系数）乘以随机中心的高斯光斑，
    再加上同色的整体偏置，因此全局平均池化之后类别仍可区分。
    """
    if classes < 2:
        raise ConfigurationError(f"至少需要 2 个类别: {classes}")
    if len(input_shape) != 3 or min(input_shape) < 1:
        raise ConfigurationError(f"input_shape 必须为 C×H×W: {input_shape}")
    c, h, w = input_shape
    generator = torch.Generator().manual_seed(seed)
    colors = torch.randn(classes, c, generator=generator) * 1.5
    centers = torch.rand(classes, 2, generator=generator)
    sigma = 0.3 * max(h, w)
    ys = torch.arange(h, dtype=torch.float32).view(h, 1)
    xs = torch.arange(w, dtype=torch.float32).view(1, w)
    protos = torch.empty(classes, c, h, w)
    for k in range(classes):
        cy, cx = centers[k, 0] * (h - 1), centers[k, 1] * (w - 1)
        blob = torch.exp(-((ys - cy) ** 2 + (xs - cx) ** 2) / (2 * sigma * sigma))
        protos[k] = colors[k].view(c, 1, 1) * (blob + 0.5)
    return protos


def synth_dataset(
    classes: int,
    per_class: int,
    input_shape: Tuple[int, ...],
    seed: int = 0,
    noise: float = 0.6,
    noise_seed: Optional[int] = None,
) -> Tuple[torch.Tensor, torch.Tensor]:
    """
    合成的带标签图像集：类别原型加独立高斯噪声，按类别顺序排列。

    原型只由 seed 决定；噪声来自独立的随机流（noise_seed，默认 seed + 1），
    训练集与测试集可共享原型、使用不同噪声。
    """
    if per_class < 1:
        raise ConfigurationError(f"per_class 必须 >= 1: {per_class}")
    if noise < 0:
        raise ConfigurationError(f"noise 不能为负: {noise}")
    if prod(input_shape) < 1:
        raise ConfigurationError(f"input_shape 退化: {input_shape}")
    protos = class_prototypes(classes, input_shape, seed)
    generator = torch.Generator().manual_seed(seed + 1 if noise_seed is None else noise_seed)
    ids = torch.arange(classes).repeat_interleave(per_class)
    images = protos[ids].clone()
    if noise > 0:
        images += noise * torch.randn(images.shape, generator=generator)
    return images.contiguous(), ids
