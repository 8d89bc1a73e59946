from __future__ import annotations

from dataclasses import dataclass, field
import os
from pathlib import Path
from typing import Optional

from .env import env_int
from .errors import ConfigurationError
from .train.fisher import DEFAULT_F_MAX_CLIP, DEFAULT_FISHER_DECAY

PACKAGE_ROOT = Path(__file__).resolve().parent
DEFAULT_NET = PACKAGE_ROOT / "nets" / "mobilenet_v1_128.net"
DEFAULT_TOY_NET = PACKAGE_ROOT / "nets" / "toy_cl.net"
DEFAULT_HW = PACKAGE_ROOT / "hw" / "pulp_octa.hw"
DEFAULT_MCU_HW = PACKAGE_ROOT / "hw" / "stm32l4.hw"
DEFAULT_SINGLE_HW = PACKAGE_ROOT / "hw" / "pulp_single.hw"

# 桌面实验（合成数据 + 小网络）使用的 Fisher 上限
DESK_F_MAX_CLIP = 1.0


@dataclass
class TrainConfig:
    """
    AR1 训练超参数。

    学习率、Fisher 上限等均不是来自实测平台的数值，只是可用的默认值。
    """

    learning_rate: float = 0.05
    epochs: int = 8
    batch_size: int = 32
    fisher_decay: float = DEFAULT_FISHER_DECAY
    f_max_clip: float = DEFAULT_F_MAX_CLIP

    def __post_init__(self) -> None:
        if self.epochs < 0:
            raise ConfigurationError(f"epochs 不能为负: {self.epochs}")
        if self.learning_rate < 0:
            raise ConfigurationError(f"learning_rate 不能为负: {self.learning_rate}")
        if self.batch_size < 1:
            raise ConfigurationError(f"batch_size 必须 >= 1: {self.batch_size}")
        if not 0.0 <= self.fisher_decay <= 1.0:
            raise ConfigurationError(f"fisher_decay 必须在 [0, 1] 内: {self.fisher_decay}")
        if self.f_max_clip <= 0:
            raise ConfigurationError(f"f_max_clip 必须 > 0: {self.f_max_clip}")


@dataclass
class ExperimentConfig:
    """
    桌面规模的类增量实验配置（合成数据集 + 训练 + 回放）。
    """

    net_path: Path = DEFAULT_TOY_NET
    cut: str = "fc"
    base_classes: int = 4
    new_classes: int = 1
    per_class: int = 60
    test_per_class: int = 30
    noise: float = 0.6
    seed: int = 0
    n_new: int = 60
    n_replay: int = 300
    quota: int = 30
    replay: bool = True
    base_epochs: int = 20
    #: 非空时回放缓冲区常驻该 LRBF 文件，每步从文件读出、插入后写回
    store_path: Optional[Path] = None
    #: 非空时所有类别共享这一总预算，类别增多后每类配额随之下调
    replay_budget: Optional[int] = None
    train: TrainConfig = field(default_factory=lambda: TrainConfig(f_max_clip=DESK_F_MAX_CLIP))

    def __post_init__(self) -> None:
        if self.base_classes + self.new_classes < 2:
            raise ConfigurationError("至少需要 2 个类别")
        if self.per_class < 1 or self.test_per_class < 1:
            raise ConfigurationError("每类样本数必须 >= 1")
        if self.n_new > self.per_class:
            raise ConfigurationError(f"n_new={self.n_new} 超过每类样本数 {self.per_class}")
        if self.quota < 0 or self.n_replay < 0:
            raise ConfigurationError("quota 与 n_replay 不能为负")
        if self.replay_budget is not None and self.replay_budget < 0:
            raise ConfigurationError(f"replay_budget 不能为负: {self.replay_budget}")

    @property
    def classes(self) -> int:
        return self.base_classes + self.new_classes

    @classmethod
    def from_args(
        cls,
        net_path: Optional[str | Path] = None,
        cut: Optional[str] = None,
        seed: Optional[int] = None,
        epochs: Optional[int] = None,
        n_new: Optional[int] = None,
        n_replay: Optional[int] = None,
        replay: bool = True,
        learning_rate: Optional[float] = None,
        store_path: Optional[str | Path] = None,
        replay_budget: Optional[int] = None,
    ) -> "ExperimentConfig":
        """
        由命令行参数构造；未显式传入的字段回退到默认值（seed 可由 EDGECL_SEED 指定）。
        网络默认为自带的小网络 toy_cl.net。
        """
        net_path_obj = Path(net_path).expanduser().resolve() if net_path is not None else DEFAULT_TOY_NET
        seed_value = seed if seed is not None else env_int("EDGECL_SEED", 0)

        train = TrainConfig(
            learning_rate=learning_rate if learning_rate is not None else TrainConfig.learning_rate,
            epochs=epochs if epochs is not None else TrainConfig.epochs,
            f_max_clip=DESK_F_MAX_CLIP,
        )

        base = cls()
        return cls(
            net_path=net_path_obj,
            cut=cut or base.cut,
            seed=seed_value,
            n_new=n_new if n_new is not None else base.n_new,
            n_replay=n_replay if n_replay is not None else base.n_replay,
            replay=replay,
            train=train,
            store_path=Path(store_path).expanduser().resolve() if store_path else None,
            replay_budget=replay_budget,
        )


def resolve_path(path: Optional[str | Path], env_name: str, default: Path) -> Path:
    """
    显式路径优先，其次环境变量 env_name，最后是包内自带的默认文件。
    """
    if path is not None and str(path).strip():
        return Path(path).expanduser().resolve()
    env_value = os.getenv(env_name, "").strip()
    if env_value:
        return Path(env_value).expanduser().resolve()
    return default
