from __future__ import annotations

import logging
from dataclasses import dataclass, field
from math import prod
from typing import List

from edgecl.errors import ArgumentError, InfeasibleTileError
from edgecl.layers import LayerKind, LayerSpec
from edgecl.network import NetworkDescriptor
from edgecl.replay import CLBatchPlan

from .hw import PASSES, HwProfile, Pass
from .tiling import TileSchedule, plan_network

logger = logging.getLogger(__name__)


def layer_macs(layer: LayerSpec, pass_: Pass = "fwd") -> int:
    """
    一层（单个样本）的 MAC 数。

    卷积：C_out·C_in·K_h·K_w·H_out·W_out（depthwise 去掉 C_in）；全连接：out·in。
    两个反向 pass 与前向 MAC 数相同；ReLU、池化、BRN 等不计 MAC。
    """
    if pass_ not in PASSES:
        raise ArgumentError(f"未知的 pass: {pass_}")
    if layer.kind.is_conv:
        assert layer.geom is not None
        g = layer.geom
        per_group = 1 if g.depthwise else g.c_in
        return g.c_out * per_group * g.k_h * g.k_w * prod(layer.out_shape[1:])
    if layer.kind is LayerKind.FULLY_CONNECTED:
        return layer.out_shape[0] * layer.in_shape[0]
    return 0


def inference_macs(net: NetworkDescriptor) -> int:
    return sum(layer_macs(spec) for spec in net.layers)


@dataclass(frozen=True)
class LayerLatency:
    layer: str
    pass_: str
    macs: int
    cycles: float


@dataclass
class LatencyReport:
    """
    学习一个新类别的延迟估计。

    cycles 已包含 DMA 开销；frozen_forward_cycles 是新图像在冻结层上
    的一次前向（仅当 include_frozen_forward 时计入）。
    """

    lr_cut: str
    samples: int
    include_frozen_forward: bool
    cycles: float
    seconds: float
    frozen_forward_cycles: float = 0.0
    breakdown: List[LayerLatency] = field(default_factory=list)
    tiles: TileSchedule = field(default_factory=TileSchedule)

    @property
    def minutes(self) -> float:
        return self.seconds / 60.0


def _pass_cycles(spec: LayerSpec, pass_: Pass, hw: HwProfile) -> float:
    macs = layer_macs(spec, pass_)
    if macs == 0:
        return 0.0
    cycles = macs / hw.throughput(spec.kind.value, pass_)
    if pass_ != "fwd":
        cycles /= hw.bwd_mac_normalization
    return cycles


def estimate_latency(
    net: NetworkDescriptor,
    lr_cut: str | int,
    plan: CLBatchPlan,
    hw: HwProfile,
    include_frozen_forward: bool = False,
) -> LatencyReport:
    """
    cycles = Σ_样本 Σ_层 macs / mac_per_cycle：切分点以上每个样本做前向与两个
    反向 pass，共 (n_new + n_replay)·epochs 个样本；再乘 (1 + dma_overhead_frac)。
    """
    cut = net.index_of(lr_cut)
    retrained = net.layers[cut:]
    schedule = plan_network(net, hw, start=cut)
    if not schedule.feasible:
        reasons = "; ".join(e.reason for e in schedule.entries if e.infeasible)
        raise InfeasibleTileError(f"切分点 {net.layers[cut].name} 在 {hw.name} 上不可行: {reasons}")

    samples = plan.presentations
    breakdown: List[LayerLatency] = []
    per_sample = 0.0
    for spec in retrained:
        for pass_ in PASSES:
            cycles = _pass_cycles(spec, pass_, hw)
            if cycles == 0.0:
                continue
            per_sample += cycles
            breakdown.append(LayerLatency(spec.name, pass_, layer_macs(spec, pass_) * samples, cycles * samples))
    cycles_total = per_sample * samples

    frozen = plan.n_new * sum(_pass_cycles(spec, "fwd", hw) for spec in net.layers[:cut])
    if include_frozen_forward:
        cycles_total += frozen

    cycles_total *= 1.0 + hw.dma_overhead_frac
    report = LatencyReport(
        lr_cut=net.layers[cut].name,
        samples=samples,
        include_frozen_forward=include_frozen_forward,
        cycles=cycles_total,
        seconds=cycles_total / hw.freq_hz,
        frozen_forward_cycles=frozen * (1.0 + hw.dma_overhead_frac),
        breakdown=breakdown,
        tiles=schedule,
    )
    logger.debug(
        "[plan] %s @ %s: %.3e cycles, %.2f s", report.lr_cut, hw.name, report.cycles, report.seconds
    )
    return report


def mcu_ratio(
    net: NetworkDescriptor,
    lr_cut: str | int,
    plan: CLBatchPlan,
    hw_mcu: HwProfile,
    hw_cluster: HwProfile,
    include_frozen_forward: bool = False,
) -> float:
    """MCU 与集群学习同一类别的延迟之比。"""
    slow = estimate_latency(net, lr_cut, plan, hw_mcu, include_frozen_forward)
    fast = estimate_latency(net, lr_cut, plan, hw_cluster, include_frozen_forward)
    return slow.seconds / fast.seconds
