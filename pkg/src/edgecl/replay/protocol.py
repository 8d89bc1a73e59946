from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, List, Optional, Tuple

import torch

from edgecl.errors import ShapeError
from edgecl.network import Network
from edgecl.train import FisherBank, train_epochs

from .batching import CLBatchPlan, compose_batches
from .buffer import ReplayBuffer, insert_class
from .store import save_buffer

if TYPE_CHECKING:
    from edgecl.config import TrainConfig

logger = logging.getLogger(__name__)


@dataclass
class LearnMetrics:
    epoch_losses: List[float] = field(default_factory=list)
    presentations: int = 0
    n_new: int = 0
    n_replay: int = 0
    classes_inserted: List[int] = field(default_factory=list)


def generate_latents(net: Network, images: torch.Tensor, lr_cut: Optional[str | int] = None) -> torch.Tensor:
    """
    新图像在冻结层 [0, lr_cut) 上做推理模式前向，得到 LR 层的输入激活。

    lr_cut = 0 时直接返回原始图像。
    """
    if tuple(images.shape[1:]) != tuple(net.descriptor.input_shape):
        raise ShapeError(
            f"图像形状 {tuple(images.shape[1:])} 与网络输入 {net.descriptor.input_shape} 不一致"
        )
    with torch.no_grad():
        return net.latents(images, lr_cut)


def learn_new_class(
    net: Network,
    buffer: ReplayBuffer,
    images: torch.Tensor,
    labels: torch.Tensor,
    cfg: "TrainConfig",
    plan: Optional[CLBatchPlan] = None,
    seed: int = 0,
    fisher: Optional[FisherBank] = None,
) -> Tuple[Network, ReplayBuffer, LearnMetrics]:
    """
    一次增量学习：生成新图像的 latent → 与回放向量混合组批 → 训练
    cfg.epochs 轮 → 把新类别的 latent 写入回放缓冲区。

    buffer.store_path 不为空时，插入后把缓冲区写回 LRBF 文件。
    """
    if plan is None:
        plan = CLBatchPlan(n_new=images.shape[0], n_replay=min(5 * images.shape[0], len(buffer)), epochs=cfg.epochs)
    elif plan.epochs != cfg.epochs:
        plan = CLBatchPlan(n_new=plan.n_new, n_replay=plan.n_replay, epochs=cfg.epochs)

    latents = generate_latents(net, images)
    epochs = compose_batches(buffer, latents, labels, plan, seed=seed, batch_size=cfg.batch_size)
    logger.info(
        "[replay] 学习新类别：%d 个新样本 + %d 个回放向量，%d 个 epoch",
        plan.n_new,
        plan.n_replay,
        plan.epochs,
    )
    losses = train_epochs(net, epochs, cfg, fisher)

    inserted: List[int] = []
    for class_id in torch.unique(labels).tolist():
        insert_class(buffer, int(class_id), latents[labels == class_id])
        inserted.append(int(class_id))
    if buffer.store_path is not None:
        save_buffer(buffer)
        logger.debug("[replay] 回放缓冲区已写回 %s", buffer.store_path)
    metrics = LearnMetrics(
        epoch_losses=losses,
        presentations=sum(batch[1].numel() for epoch in epochs for batch in epoch),
        n_new=plan.n_new,
        n_replay=plan.n_replay,
        classes_inserted=inserted,
    )
    return net, buffer, metrics
