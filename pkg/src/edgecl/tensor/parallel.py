from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Optional

import torch

from edgecl.errors import ShapeError

from .ops import gemm


def _row_blocks(rows: int, block: int) -> list[tuple[int, int]]:
    return [(start, min(start + block, rows)) for start in range(0, rows, block)]


def gemm_tiled(
    a: torch.Tensor,
    b: torch.Tensor,
    c_tile: int,
    accumulate_into: Optional[torch.Tensor] = None,
) -> torch.Tensor:
    """
    按 a 的行（输出通道）切成 c_tile 大小的块逐块计算，对应 L1 中一次驻留的
    C_TILE 个滤波器。每个元素的归约顺序不变，因此与 gemm 结果逐位一致。
    """
    if c_tile < 1:
        raise ShapeError(f"c_tile 必须 >= 1: {c_tile}")
    if a.dim() != 2 or b.dim() != 2:
        raise ShapeError("gemm_tiled 只支持 2 维矩阵")
    parts = []
    for start, end in _row_blocks(a.shape[0], c_tile):
        prior = accumulate_into[start:end] if accumulate_into is not None else None
        parts.append(gemm(a[start:end], b, accumulate_into=prior))
    return torch.cat(parts, dim=0)


def gemm_parallel(
    a: torch.Tensor,
    b: torch.Tensor,
    workers: int,
    accumulate_into: Optional[torch.Tensor] = None,
) -> torch.Tensor:
    """
    数据并行 GEMM：输出行划分给 workers 个线程，每个输出元素只由一个
    线程写入，没有跨线程归约，结果与单线程 gemm 逐位一致。
    """
    if workers < 1:
        raise ShapeError(f"workers 必须 >= 1: {workers}")
    rows = a.shape[0]
    if workers == 1 or rows < 2:
        return gemm(a, b, accumulate_into=accumulate_into)
    block = -(-rows // workers)
    blocks = _row_blocks(rows, block)
    with ThreadPoolExecutor(max_workers=len(blocks)) as executor:
        futures = [
            executor.submit(
                gemm,
                a[start:end],
                b,
                accumulate_into[start:end] if accumulate_into is not None else None,
            )
            for start, end in blocks
        ]
        parts = [f.result() for f in futures]
    return torch.cat(parts, dim=0)
