from __future__ import annotations

import logging
from dataclasses import dataclass, field
from math import ceil
from typing import Dict, List, Optional

from edgecl.errors import InfeasibleTileError
from edgecl.layers import LayerKind, LayerSpec
from edgecl.network import NetworkDescriptor

from .hw import HwProfile

logger = logging.getLogger(__name__)

BYTES_PER_ELEM = 4


@dataclass(frozen=True)
class TileEntry:
    """
    一层的分块方案：系数沿 C_out 切成 c_tile 个滤波器一块，
    每块 c_tile × C_in × K_h × K_w 个参数，在 L1 中乒乓双缓冲。
    """

    layer: str
    index: int
    c_out: int
    c_tile: int
    tile_bytes: int
    n_tiles: int
    double_buffered: bool = True
    infeasible: bool = False
    reason: str = ""


@dataclass
class TileSchedule:
    entries: List[TileEntry] = field(default_factory=list)

    @property
    def feasible(self) -> bool:
        return all(not e.infeasible for e in self.entries)

    def infeasible_layers(self) -> List[str]:
        return [e.layer for e in self.entries if e.infeasible]

    def c_tiles(self) -> Dict[int, int]:
        """层下标 → c_tile，可直接传给 Network.forward(tiles=...)。"""
        return {e.index: e.c_tile for e in self.entries if not e.infeasible}


def filter_bytes(layer: LayerSpec) -> int:
    """单个输出滤波器（系数矩阵的一行）占用的字节数。"""
    if layer.kind.is_conv:
        assert layer.geom is not None
        g = layer.geom
        per_group = 1 if g.depthwise else g.c_in
        return per_group * g.k_h * g.k_w * BYTES_PER_ELEM
    if layer.kind is LayerKind.FULLY_CONNECTED:
        return layer.in_shape[0] * BYTES_PER_ELEM
    raise InfeasibleTileError(f"层 {layer.name}（{layer.kind.value}）没有可分块的系数")


def plan_tiles(layer: LayerSpec, hw: HwProfile, index: int = 0, double_buffered: bool = True) -> TileEntry:
    """
    选出满足 2·tile_bytes ≤ L1（双缓冲）的最大 c_tile。

    单个滤波器都放不下时抛出 InfeasibleTileError。
    """
    per_filter = filter_bytes(layer)
    c_out = layer.out_shape[0]
    budget = hw.l1_bytes // 2 if double_buffered else hw.l1_bytes
    if per_filter > budget:
        raise InfeasibleTileError(
            f"层 {layer.name}: 单个滤波器 {per_filter} B 超过 L1 预算 {budget} B（L1={hw.l1_bytes} B）"
        )
    c_tile = min(c_out, budget // per_filter)
    return TileEntry(
        layer=layer.name,
        index=index,
        c_out=c_out,
        c_tile=c_tile,
        tile_bytes=c_tile * per_filter,
        n_tiles=ceil(c_out / c_tile),
        double_buffered=double_buffered,
    )


def plan_network(
    net: NetworkDescriptor,
    hw: HwProfile,
    start: int = 0,
    stop: Optional[int] = None,
) -> TileSchedule:
    """
    为 [start, stop) 内的所有 GEMM 类层生成分块方案；
    不可行的层在结果中标记 infeasible，而不是抛出异常。
    """
    stop = len(net.layers) if stop is None else stop
    schedule = TileSchedule()
    for idx in range(start, stop):
        spec = net.layers[idx]
        if not spec.kind.is_gemm:
            continue
        try:
            schedule.entries.append(plan_tiles(spec, hw, index=idx))
        except InfeasibleTileError as exc:
            logger.warning("[plan] %s", exc)
            schedule.entries.append(
                TileEntry(
                    layer=spec.name,
                    index=idx,
                    c_out=spec.out_shape[0],
                    c_tile=0,
                    tile_bytes=filter_bytes(spec),
                    n_tiles=0,
                    infeasible=True,
                    reason=str(exc),
                )
            )
    return schedule
