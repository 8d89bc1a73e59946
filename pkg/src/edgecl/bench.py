from __future__ import annotations

import logging
import time
from dataclasses import dataclass
from typing import Callable, Dict, List, Sequence, Tuple

import torch

from .errors import ConfigurationError, UsageError
from .tensor import ConvGeometry, col2im, gemm_parallel, im2col

logger = logging.getLogger(__name__)

KERNELS = ("gemm", "conv_fwd", "conv_bwd_err", "conv_bwd_grad")

# conv_* 基准的固定空间尺寸与卷积核
CONV_HW = 16
CONV_K = 3


@dataclass(frozen=True)
class BenchRow:
    kernel: str
    size: int
    workers: int
    macs: int
    seconds: float
    speedup: float

    @property
    def mac_per_s(self) -> float:
        return self.macs / self.seconds if self.seconds > 0 else float("inf")

    def as_row(self) -> Dict[str, object]:
        return {
            "kernel": self.kernel,
            "size": self.size,
            "workers": self.workers,
            "macs": self.macs,
            "seconds": self.seconds,
            "mac_per_s": self.mac_per_s,
            "speedup": self.speedup,
        }


def _operands(kernel: str, size: int, generator: torch.Generator) -> Tuple[Callable[[int], torch.Tensor], int]:
    """
    返回 (以 workers 为参数的计算函数, MAC 数)。

    卷积类内核都降为一次 GEMM：C_in = C_out = size，3×3，16×16 输入，stride 1。
    """
    if kernel == "gemm":
        a = torch.randn(size, size, generator=generator)
        b = torch.randn(size, size, generator=generator)
        return (lambda w: gemm_parallel(a, b, w)), size**3

    geom = ConvGeometry(c_in=size, c_out=size, k_h=CONV_K, k_w=CONV_K, padding=CONV_K // 2)
    x = torch.randn(size, CONV_HW, CONV_HW, generator=generator)
    coeff = torch.randn(size, geom.col_rows, generator=generator)
    cols = im2col(x, geom)
    err = torch.randn(size, cols.shape[1], generator=generator)
    macs = size * geom.col_rows * cols.shape[1]
    if kernel == "conv_fwd":
        return (lambda w: gemm_parallel(coeff, cols, w)), macs
    if kernel == "conv_bwd_err":
        coeff_t = coeff.t().contiguous()
        return (lambda w: col2im(gemm_parallel(coeff_t, err, w), geom, x.shape)), macs
    if kernel == "conv_bwd_grad":
        cols_t = cols.t().contiguous()
        return (lambda w: gemm_parallel(err, cols_t, w)), macs
    raise UsageError(f"未知的 kernel: {kernel}；可选: {', '.join(KERNELS)}")


def _time(fn: Callable[[int], torch.Tensor], workers: int, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(workers)
        best = min(best, time.perf_counter() - start)
    return best


def cmd_bench(
    kernel: str,
    sizes: Sequence[int],
    workers: int,
    repeats: int = 3,
    seed: int = 0,
) -> List[BenchRow]:
    """
    在本机测量内核吞吐：每个尺寸分别用 1 个和 workers 个线程运行，
    取 repeats 次中的最短时间，speedup = min(t(1) / t(workers), workers)。
    """
    if kernel not in KERNELS:
        raise UsageError(f"未知的 kernel: {kernel}；可选: {', '.join(KERNELS)}")
    if workers < 1 or repeats < 1:
        raise ConfigurationError(f"workers 与 repeats 必须 >= 1: {workers}, {repeats}")
    if not sizes or min(sizes) < 1:
        raise ConfigurationError(f"sizes 必须为正整数列表: {list(sizes)}")

    rows: List[BenchRow] = []
    for size in sizes:
        fn, macs = _operands(kernel, size, torch.Generator().manual_seed(seed))
        base = _time(fn, 1, repeats)
        rows.append(BenchRow(kernel, size, 1, macs, base, 1.0))
        if workers > 1:
            elapsed = _time(fn, workers, repeats)
            # 加速比不超过线程数
            speedup = min(base / elapsed, float(workers)) if elapsed > 0 else 1.0
            rows.append(BenchRow(kernel, size, workers, macs, elapsed, speedup))
        logger.info("[bench] %s size=%d: 1 线程 %.4f s，%d 线程 %.4f s", kernel, size, base, workers, rows[-1].seconds)
    return rows
