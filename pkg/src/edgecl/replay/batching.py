from __future__ import annotations

from dataclasses import dataclass
from typing import List, Tuple

import torch

from edgecl.errors import ConfigurationError, ShapeError

from .buffer import ReplayBuffer

Batch = Tuple[torch.Tensor, torch.Tensor]


@dataclass(frozen=True)
class CLBatchPlan:
    """
    一次增量学习中每个 epoch 的样本构成：n_new 张新图像（N_I）与
    n_replay 个旧 LR 向量（N_LR），默认比例 1:5。
    """

    n_new: int = 300
    n_replay: int = 1500
    epochs: int = 8

    def __post_init__(self) -> None:
        if self.n_new < 0 or self.n_replay < 0:
            raise ConfigurationError("n_new 与 n_replay 不能为负")
        if self.epochs < 0:
            raise ConfigurationError(f"epochs 不能为负: {self.epochs}")

    @property
    def samples_per_epoch(self) -> int:
        return self.n_new + self.n_replay

    @property
    def presentations(self) -> int:
        return self.samples_per_epoch * self.epochs


def sample_replay(buffer: ReplayBuffer, n_replay: int, generator: torch.Generator) -> Batch:
    """
    按类别均衡地抽取 n_replay 个回放向量。

    类别顺序随机，之后轮流从各类的随机排列中取下一个；某类取尽后
    重新排列，因此在一轮之内不放回。
    """
    if n_replay == 0:
        return torch.zeros((0, *buffer.vector_shape)), torch.zeros(0, dtype=torch.long)
    class_ids = [c for c in buffer.class_ids if buffer.count(c) > 0]
    if not class_ids:
        raise ConfigurationError(f"回放缓冲区为空，无法抽取 n_replay={n_replay} 个样本")
    order = [class_ids[i] for i in torch.randperm(len(class_ids), generator=generator).tolist()]
    queues = {c: [] for c in class_ids}
    picked_x: List[torch.Tensor] = []
    picked_y: List[int] = []
    turn = 0
    while len(picked_y) < n_replay:
        class_id = order[turn % len(order)]
        turn += 1
        if not queues[class_id]:
            queues[class_id] = torch.randperm(buffer.count(class_id), generator=generator).tolist()
        picked_x.append(buffer.vectors(class_id)[queues[class_id].pop()])
        picked_y.append(class_id)
    return torch.stack(picked_x), torch.tensor(picked_y, dtype=torch.long)


def compose_batches(
    buffer: ReplayBuffer,
    new_latents: torch.Tensor,
    new_labels: torch.Tensor,
    plan: CLBatchPlan,
    seed: int = 0,
    batch_size: int = 32,
) -> List[List[Batch]]:
    """
    为每个 epoch 生成一组混合 mini-batch：全部 n_new 个新 latent 与
    n_replay 个抽样回放向量打乱后依次切分。固定 seed 时结果确定。
    """
    if new_labels.dim() != 1 or new_labels.shape[0] != new_latents.shape[0]:
        raise ShapeError(
            f"新样本标签形状 {tuple(new_labels.shape)} 与 latent 数 {new_latents.shape[0]} 不对应"
        )
    if new_latents.shape[0] < plan.n_new:
        raise ConfigurationError(f"新样本只有 {new_latents.shape[0]} 个，少于 n_new={plan.n_new}")
    if plan.n_new and tuple(new_latents.shape[1:]) != buffer.vector_shape:
        raise ShapeError(
            f"新 latent 形状 {tuple(new_latents.shape[1:])} 与缓冲区形状 {buffer.vector_shape} 不一致"
        )
    if plan.n_replay > 0 and len(buffer) == 0:
        raise ConfigurationError(f"回放缓冲区为空，但 n_replay={plan.n_replay}")
    if batch_size < 1:
        raise ConfigurationError(f"batch_size 必须 >= 1: {batch_size}")

    generator = torch.Generator().manual_seed(seed)
    new_x = new_latents[: plan.n_new]
    new_y = new_labels[: plan.n_new].to(torch.long)
    epochs: List[List[Batch]] = []
    for _ in range(plan.epochs):
        old_x, old_y = sample_replay(buffer, plan.n_replay, generator)
        xs = torch.cat([new_x, old_x]) if plan.n_replay else new_x
        ys = torch.cat([new_y, old_y]) if plan.n_replay else new_y
        perm = torch.randperm(xs.shape[0], generator=generator)
        xs, ys = xs[perm], ys[perm]
        epochs.append(
            [(xs[s : s + batch_size], ys[s : s + batch_size]) for s in range(0, xs.shape[0], batch_size)]
        )
    return epochs
