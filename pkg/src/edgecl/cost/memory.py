from __future__ import annotations

from dataclasses import dataclass, field
from math import prod
from typing import Dict, List, Sequence

from edgecl.errors import ConfigurationError
from edgecl.layers import LayerSpec
from edgecl.network import NetworkDescriptor

BYTES_PER_ELEM = 4
MB = 1e6

RAM_TERMS = ("n_w_bytes", "n_a_bytes", "n_g_bytes", "n_fi_bytes", "n_fw_bytes", "new_latents_bytes")


@dataclass
class FootprintReport:
    """
    某个 LR 切分点下的存储开销（字节）。

    flash_bytes 为外部 FLASH 上的回放向量；ram_breakdown 为外部 RAM 中的
    参数 N_w、激活 N_a、梯度 N_g、Fisher N_Fi、前向临时缓冲 N_fw 与新图像 latent。
    """

    lr_cut: str
    cut_index: int
    flash_bytes: int
    ram_breakdown: Dict[str, int] = field(default_factory=dict)

    @property
    def ram_total_bytes(self) -> int:
        return sum(self.ram_breakdown.values())

    def as_row(self) -> Dict[str, object]:
        row: Dict[str, object] = {"cut": self.lr_cut, "flash_bytes": self.flash_bytes}
        row.update({k: self.ram_breakdown[k] for k in RAM_TERMS})
        row["ram_total_bytes"] = self.ram_total_bytes
        return row


def forward_buffer_elems(layer: LayerSpec) -> int:
    """
    单个样本在该层前向时同时存在的元素数：输入 + 输出 + im2col 矩阵。

    1×1 卷积直接复用输入作为列矩阵，不计 im2col。
    """
    total = layer.in_size + layer.out_size
    if layer.kind.is_conv:
        assert layer.geom is not None
        if not layer.geom.is_pointwise:
            total += layer.geom.col_rows * prod(layer.out_shape[1:])
    return total


def footprint(
    net: NetworkDescriptor,
    lr_cut: str | int,
    n_replay: int,
    n_new: int,
    bytes_per_elem: int = BYTES_PER_ELEM,
) -> FootprintReport:
    if n_replay < 0 or n_new < 0:
        raise ConfigurationError("n_replay 与 n_new 不能为负")
    cut = net.index_of(lr_cut)
    latent = net.latent_size(cut)
    retrained = net.layers[cut:]

    n_w = sum(spec.param_count for spec in net.layers)
    n_a = sum(spec.in_size for spec in retrained)
    n_g = sum(spec.param_count for spec in retrained)
    n_fw = max(forward_buffer_elems(spec) for spec in net.layers)

    return FootprintReport(
        lr_cut=net.layers[cut].name,
        cut_index=cut,
        flash_bytes=n_replay * latent * bytes_per_elem,
        ram_breakdown={
            "n_w_bytes": n_w * bytes_per_elem,
            "n_a_bytes": n_a * bytes_per_elem,
            "n_g_bytes": n_g * bytes_per_elem,
            "n_fi_bytes": n_g * bytes_per_elem,
            "n_fw_bytes": n_fw * bytes_per_elem,
            "new_latents_bytes": n_new * latent * bytes_per_elem,
        },
    )


def pareto_memory(
    net: NetworkDescriptor,
    cuts: Sequence[str | int],
    budget_ram_bytes: float,
    n_replay: int = 1500,
    n_new: int = 300,
) -> List[str]:
    """
    返回 RAM 总量不超过预算的切分点（按 RAM 升序）。
    """
    if not cuts:
        raise ConfigurationError("cuts 不能为空")
    reports = [footprint(net, cut, n_replay, n_new) for cut in cuts]
    feasible = [r for r in reports if r.ram_total_bytes <= budget_ram_bytes]
    feasible.sort(key=lambda r: r.ram_total_bytes)
    return [r.lr_cut for r in feasible]
