"""
所有层最终都被降级为三个基本变换：im2col、GEMM 与系数翻转。

张量默认使用 float32、通道优先（CHW）布局；批量数据在最前面加 N 维。
"""

from __future__ import annotations

from typing import Optional, Sequence

import torch
import torch.nn.functional as F

from edgecl.errors import ShapeError

from .types import ConvGeometry

DTYPE = torch.float32


def check_shape(t: torch.Tensor, dims: Sequence[int], what: str = "tensor") -> None:
    if tuple(t.shape) != tuple(dims):
        raise ShapeError(f"{what} 形状应为 {tuple(dims)}，实际为 {tuple(t.shape)}")


def _accumulate(out: torch.Tensor, a: torch.Tensor, b: torch.Tensor) -> torch.Tensor:
    # k 从小到大逐个累加，每个输出元素的归约顺序固定
    for k in range(a.shape[-1]):
        out.add_(a[..., :, k : k + 1] * b[..., k : k + 1, :])
    return out


def gemm(
    a: torch.Tensor,
    b: torch.Tensor,
    accumulate_into: Optional[torch.Tensor] = None,
) -> torch.Tensor:
    """
    矩阵乘 out = a·b (+ accumulate_into)，默认 FP32；任一操作数为 float64 时按 float64 计算。

    同时支持分组形式：a 为 G×M×K、b 为 G×K×N 时，对每组独立计算，
    用于 depthwise 卷积。结果可逐位复现，与分块方式无关。
    """
    if a.dim() != b.dim() or a.dim() not in (2, 3):
        raise ShapeError(f"gemm 需要同为 2 维或 3 维的矩阵，实际 {tuple(a.shape)} 与 {tuple(b.shape)}")
    if a.shape[-1] != b.shape[-2] or a.shape[:-2] != b.shape[:-2]:
        raise ShapeError(f"gemm 维度不匹配: {tuple(a.shape)} · {tuple(b.shape)}")
    out_shape = (*a.shape[:-1], b.shape[-1])
    dtype = torch.float64 if torch.float64 in (a.dtype, b.dtype) else DTYPE
    if accumulate_into is not None:
        check_shape(accumulate_into, out_shape, "accumulate_into")
        out = accumulate_into.to(dtype).clone()
    else:
        out = torch.zeros(out_shape, dtype=dtype)
    return _accumulate(out, a.to(dtype), b.to(dtype))


def _split_batch(act_in: torch.Tensor) -> tuple[torch.Tensor, bool]:
    if act_in.dim() == 3:
        return act_in.unsqueeze(0), False
    if act_in.dim() == 4:
        return act_in, True
    raise ShapeError(f"im2col 需要 C×H×W 或 N×C×H×W 输入，实际 {tuple(act_in.shape)}")


def _padded(x: torch.Tensor, geom: ConvGeometry) -> torch.Tensor:
    if geom.padding == 0 and geom.pad_end == 0:
        return x
    return F.pad(x, (geom.padding, geom.pad_end, geom.padding, geom.pad_end), value=0.0)


def im2col(act_in: torch.Tensor, geom: ConvGeometry) -> torch.Tensor:
    """
    将感受野展开为矩阵列，返回 (C_in·K_h·K_w) × (N·H_out·W_out)。

    批量输入时各样本的列依次并排；1×1 卷积（stride 1、无填充）的单样本
    输入直接 reshape，不发生拷贝。
    """
    x, batched = _split_batch(act_in)
    n, c, h, w = x.shape
    if c != geom.c_in:
        raise ShapeError(f"输入通道数 {c} 与几何参数 c_in={geom.c_in} 不一致")
    h_out, w_out = geom.out_hw(h, w)
    if geom.is_pointwise:
        if not batched:
            return act_in.reshape(c, h * w)
        return x.permute(1, 0, 2, 3).reshape(c, n * h * w)
    cols = F.unfold(_padded(x, geom), kernel_size=(geom.k_h, geom.k_w), stride=geom.stride)
    # cols: N × (C·Kh·Kw) × L
    return cols.permute(1, 0, 2).reshape(geom.col_rows, n * h_out * w_out)


def col2im(
    cols: torch.Tensor,
    geom: ConvGeometry,
    in_shape: Sequence[int],
) -> torch.Tensor:
    """
    im2col 的伴随变换：把列矩阵按感受野累加回输入形状（重叠位置求和）。

    in_shape 为 C×H×W 或 N×C×H×W，返回同样秩的张量。
    """
    batched = len(in_shape) == 4
    n = in_shape[0] if batched else 1
    c, h, w = in_shape[-3:]
    h_out, w_out = geom.out_hw(h, w)
    check_shape(cols, (geom.col_rows, n * h_out * w_out), "im2col 列矩阵")
    if geom.is_pointwise:
        x = cols.reshape(c, n, h, w).permute(1, 0, 2, 3)
    else:
        per_sample = cols.reshape(geom.col_rows, n, h_out * w_out).permute(1, 0, 2)
        h_pad = h + geom.padding + geom.pad_end
        w_pad = w + geom.padding + geom.pad_end
        x = F.fold(
            per_sample.contiguous(),
            output_size=(h_pad, w_pad),
            kernel_size=(geom.k_h, geom.k_w),
            stride=geom.stride,
        )
        x = x[:, :, geom.padding : geom.padding + h, geom.padding : geom.padding + w]
    x = x.contiguous()
    return x if batched else x[0]


def flip_coeff(coeff: torch.Tensor) -> torch.Tensor:
    """
    Cout×Cin×Kh×Kw → Cin×Cout×Kh×Kw：空间维旋转 180°，输入/输出通道互换。

    得到的就是把误差作为卷积反向传播所需的卷积核。
    """
    if coeff.dim() != 4:
        raise ShapeError(f"flip_coeff 需要 4 维系数张量，实际 {coeff.dim()} 维")
    return coeff.transpose(0, 1).flip(2, 3).contiguous()
