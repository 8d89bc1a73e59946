from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Literal

from dotenv import dotenv_values

from edgecl.errors import ConfigurationError

logger = logging.getLogger(__name__)

Pass = Literal["fwd", "bwd_err", "bwd_grad"]
PASSES: tuple[Pass, ...] = ("fwd", "bwd_err", "bwd_grad")

MAC_PREFIX = "mac_per_cycle."
DEFAULT_KEY = "default"


@dataclass
class HwProfile:
    """
    目标平台的分析模型参数。

    mac_per_cycle 的键形如 "pointwise.fwd"、"pointwise.bwd"、"default"；
    bwd_err / bwd_grad 未单独配置时共用 "<kind>.bwd"，再回退到 "default"。
    bwd_mac_normalization 表示实测的反向 MAC/cycle 是以多少倍前向 MAC 数
    为分母统计的（两个反向 pass 合计计为一次前向时取 2）。
    """

    name: str = "custom"
    cores: int = 8
    freq_hz: float = 150e6
    l1_bytes: int = 64 * 1024
    l2_bytes: int = 512 * 1024
    mac_per_cycle: Dict[str, float] = field(default_factory=lambda: {DEFAULT_KEY: 1.84})
    parallel_speedup: float = 7.79
    power_active_w: float = 0.070
    power_ext_mem_w: float = 0.0
    efficiency_mmac_per_s_per_mw: float = 9.0
    dma_overhead_frac: float = 0.05
    bwd_mac_normalization: float = 1.0

    def __post_init__(self) -> None:
        if self.cores < 1:
            raise ConfigurationError(f"cores 必须 >= 1: {self.cores}")
        if not 1.0 <= self.parallel_speedup <= self.cores:
            raise ConfigurationError(
                f"parallel_speedup={self.parallel_speedup} 必须在 [1, cores={self.cores}] 内"
            )
        if self.freq_hz <= 0 or self.l1_bytes <= 0 or self.l2_bytes <= 0:
            raise ConfigurationError(f"{self.name}: freq_hz、l1_bytes、l2_bytes 必须 > 0")
        if DEFAULT_KEY not in self.mac_per_cycle:
            raise ConfigurationError(f"{self.name}: 缺少 {MAC_PREFIX}{DEFAULT_KEY}")
        for key, value in self.mac_per_cycle.items():
            if value <= 0:
                raise ConfigurationError(f"{self.name}: {MAC_PREFIX}{key} 必须 > 0，实际为 {value}")
        if self.dma_overhead_frac < 0 or self.bwd_mac_normalization <= 0:
            raise ConfigurationError(f"{self.name}: dma_overhead_frac 或 bwd_mac_normalization 不合法")
        if self.power_active_w < 0 or self.power_ext_mem_w < 0 or self.efficiency_mmac_per_s_per_mw <= 0:
            raise ConfigurationError(f"{self.name}: 功耗与能效参数不合法")

    def throughput(self, kind: str, pass_: Pass) -> float:
        table = self.mac_per_cycle
        key = f"{kind}.{pass_}"
        if key in table:
            return table[key]
        if pass_ != "fwd" and f"{kind}.bwd" in table:
            return table[f"{kind}.bwd"]
        return table[DEFAULT_KEY]

    def scaled(self, factor: float) -> "HwProfile":
        """所有 MAC/cycle 乘以 factor 的副本。"""
        data = {**self.__dict__, "mac_per_cycle": {k: v * factor for k, v in self.mac_per_cycle.items()}}
        return HwProfile(**data)


_INT_KEYS = ("cores", "l1_bytes", "l2_bytes")
_FLOAT_KEYS = (
    "freq_hz",
    "parallel_speedup",
    "power_active_w",
    "power_ext_mem_w",
    "efficiency_mmac_per_s_per_mw",
    "dma_overhead_frac",
    "bwd_mac_normalization",
)


def load_profile(path: str | Path) -> HwProfile:
    """
    读取 key=value 格式的硬件配置文件（# 开头为注释）。
    """
    path_obj = Path(path).expanduser().resolve()
    if not path_obj.is_file():
        raise ConfigurationError(f"硬件配置文件不存在: {path_obj}")
    raw = {k: v for k, v in dotenv_values(path_obj).items() if v is not None}

    kwargs: Dict[str, object] = {"name": raw.pop("name", path_obj.stem)}
    mac: Dict[str, float] = {}
    try:
        for key in _INT_KEYS:
            if key in raw:
                kwargs[key] = int(float(raw.pop(key)))
        for key in _FLOAT_KEYS:
            if key in raw:
                kwargs[key] = float(raw.pop(key))
        for key in [k for k in raw if k.startswith(MAC_PREFIX)]:
            mac[key[len(MAC_PREFIX) :]] = float(raw.pop(key))
    except ValueError as exc:
        raise ConfigurationError(f"{path_obj}: 数值解析失败: {exc}") from exc
    if raw:
        raise ConfigurationError(f"{path_obj}: 未知的配置项 {', '.join(sorted(raw))}")
    if mac:
        kwargs["mac_per_cycle"] = mac
    profile = HwProfile(**kwargs)  # type: ignore[arg-type]
    logger.debug("[hw] 载入硬件配置 %s（%d 核，%.0f MHz）", profile.name, profile.cores, profile.freq_hz / 1e6)
    return profile
