from __future__ import annotations

from .types import ConvGeometry
from .ops import DTYPE, check_shape, col2im, flip_coeff, gemm, im2col
from .parallel import gemm_parallel, gemm_tiled

__all__ = [
    "DTYPE",
    "ConvGeometry",
    "check_shape",
    "col2im",
    "flip_coeff",
    "gemm",
    "gemm_parallel",
    "gemm_tiled",
    "im2col",
]
