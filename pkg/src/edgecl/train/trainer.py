from __future__ import annotations

import logging
from typing import TYPE_CHECKING, Iterable, List, Optional, Tuple

import torch

from edgecl.errors import ConfigurationError
from edgecl.layers import LayerTape
from edgecl.network import Network

from .ar1 import ar1_step
from .fisher import FisherBank, fisher_accumulate

if TYPE_CHECKING:
    from edgecl.config import TrainConfig

logger = logging.getLogger(__name__)

Batch = Tuple[torch.Tensor, torch.Tensor]


def train_batch(
    net: Network,
    batch: Batch,
    cfg: "TrainConfig",
    fisher: Optional[FisherBank] = None,
) -> Tuple[float, Network]:
    """
    在一个 mini-batch 上从 LR 层开始做一次前向、损失、反传到切分点，
    然后对每个可训练参数先 fisher_accumulate 再 ar1_step。

    batch = (latents N×latent_shape, labels N)；网络参数原地更新并返回。
    """
    latents, labels = batch
    cut = net.lr_cut
    expected = net.descriptor.latent_shape(cut)
    if tuple(latents.shape[1:]) != tuple(expected):
        raise ConfigurationError(
            f"批数据形状 {tuple(latents.shape[1:])} 与 LR 层 {net.descriptor.layers[cut].name}"
            f" 的 latent 形状 {expected} 不一致"
        )
    if fisher is None:
        fisher = FisherBank(f_max_clip=cfg.f_max_clip)

    tapes: dict[int, LayerTape] = {}
    logits = net.forward(latents, start=cut, training=True, tapes=tapes)
    loss, err = net.loss_layer().loss_and_error(logits, labels)
    grads = net.backward(err, tapes, start=cut)

    for idx, layer_grads in grads.items():
        params = net.params[idx]
        for key, grad in layer_grads.items():
            state = fisher_accumulate(fisher.get(idx, key, tuple(grad.shape)), grad, cfg.fisher_decay)
            fisher.put(idx, key, state)
            params[key] = ar1_step(params[key], grad, state, cfg.learning_rate)
    commit_buffers(net, tapes, fisher, cfg.learning_rate)
    return loss, net


def commit_buffers(
    net: Network,
    tapes: dict[int, LayerTape],
    fisher: FisherBank,
    lr: float,
) -> None:
    """
    提交训练前向中记录的 buffer（BRN 滑动统计量）。

    与参数更新同步：lr = 0 时不动；按通道取该层 gamma 的 AR1 系数
    1 − f/f_max_clip，Fisher 达到上限的通道统计量保持不变。
    """
    if lr == 0:
        return
    for idx, tape in tapes.items():
        layer = net.layers[idx]
        if not layer.buffers:
            continue
        state = fisher.states.get((idx, "gamma"))
        scale = state.scale() if state is not None else 1.0
        layer.commit_buffers(net.params[idx], tape, scale)


def train_epochs(
    net: Network,
    epochs: Iterable[List[Batch]],
    cfg: "TrainConfig",
    fisher: Optional[FisherBank] = None,
) -> List[float]:
    """
    依次训练每个 epoch 的 mini-batch 序列，返回每个 epoch 的平均损失。
    """
    if fisher is None:
        fisher = FisherBank(f_max_clip=cfg.f_max_clip)
    history: List[float] = []
    for epoch, batches in enumerate(epochs, start=1):
        losses = [train_batch(net, batch, cfg, fisher)[0] for batch in batches]
        mean_loss = sum(losses) / len(losses) if losses else 0.0
        history.append(mean_loss)
        logger.debug("[train] epoch %d: %d batches, loss %.4f", epoch, len(losses), mean_loss)
    return history
