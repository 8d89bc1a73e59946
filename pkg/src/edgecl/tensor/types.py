from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

from edgecl.errors import ConfigurationError, GeometryError


@dataclass(frozen=True)
class ConvGeometry:
    """
    卷积几何参数（通道数、卷积核尺寸、步长与填充）。

    padding 作用于上/左边界；padding_end 为下/右边界的填充，
    为 None 时与 padding 相同。非对称填充用于表达 stride=2 且
    输出尺寸恰为输入一半的 "SAME" 卷积。
    """

    c_in: int
    c_out: int
    k_h: int = 1
    k_w: int = 1
    stride: int = 1
    padding: int = 0
    padding_end: Optional[int] = None
    depthwise: bool = False

    def __post_init__(self) -> None:
        if min(self.c_in, self.c_out, self.k_h, self.k_w) < 1:
            raise ConfigurationError(f"卷积几何参数必须 >= 1: {self}")
        if self.stride < 1:
            raise ConfigurationError(f"stride 必须 >= 1: {self.stride}")
        if self.padding < 0 or self.pad_end < 0:
            raise ConfigurationError(f"padding 必须 >= 0: {self}")
        if self.depthwise and self.c_out != self.c_in:
            raise ConfigurationError(
                f"depthwise 卷积要求 c_out == c_in，实际 {self.c_out} != {self.c_in}"
            )

    @property
    def pad_end(self) -> int:
        return self.padding if self.padding_end is None else self.padding_end

    @property
    def is_pointwise(self) -> bool:
        return (
            self.k_h == 1
            and self.k_w == 1
            and self.stride == 1
            and self.padding == 0
            and self.pad_end == 0
        )

    @property
    def col_rows(self) -> int:
        """im2col 矩阵的行数 C_in·K_h·K_w。"""
        return self.c_in * self.k_h * self.k_w

    def out_extent(self, extent: int, kernel: int) -> int:
        span = extent + self.padding + self.pad_end - kernel
        if span < 0 or span % self.stride != 0:
            raise GeometryError(
                f"输出尺寸不是正整数: ({extent} + {self.padding} + {self.pad_end} - {kernel})"
                f" / {self.stride} + 1"
            )
        return span // self.stride + 1

    def out_hw(self, h: int, w: int) -> Tuple[int, int]:
        return self.out_extent(h, self.k_h), self.out_extent(w, self.k_w)
