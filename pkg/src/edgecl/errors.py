from __future__ import annotations


class EdgeCLError(Exception):
    """
    edgecl 所有自定义异常的基类。
    """


class ShapeError(EdgeCLError, ValueError):
    """张量形状不匹配。"""


class GeometryError(ShapeError):
    """卷积几何参数无法得到整数输出尺寸。"""


class StateError(EdgeCLError, RuntimeError):
    """缺少运行期状态（例如反向传播时没有 LayerTape）。"""


class ConfigurationError(EdgeCLError, ValueError):
    """网络描述、硬件配置或实验配置不合法。"""


class InfeasibleTileError(ConfigurationError):
    """单个滤波器都无法放入 L1。"""


class UsageError(EdgeCLError, ValueError):
    """命令行用法错误（例如未知的 kernel 名称）。"""


class ArgumentError(EdgeCLError, ValueError):
    """参数取值越界（例如类别标签超出范围）。"""
