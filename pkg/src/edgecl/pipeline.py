from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import torch

from .config import ExperimentConfig, TrainConfig
from .cost import (
    EnergyScenario,
    HwProfile,
    estimate_energy,
    estimate_latency,
    footprint,
    inference_macs,
    plan_network,
)
from .data import evaluate, per_class_accuracy, synth_dataset
from .errors import ConfigurationError
from .network import Network, NetworkDescriptor
from .replay import (
    CLBatchPlan,
    ReplayBuffer,
    compose_batches,
    insert_class,
    learn_new_class,
    load_buffer,
    save_buffer,
)
from .report import ParetoRow, pareto_front
from .train import FisherBank, train_epochs

logger = logging.getLogger(__name__)


def cmd_plan(
    net: NetworkDescriptor,
    hw: HwProfile,
    cuts: Optional[Sequence[str]] = None,
    plan: CLBatchPlan = CLBatchPlan(),
    include_frozen_forward: bool = False,
    scenario: EnergyScenario = EnergyScenario(),
) -> List[ParetoRow]:
    """
    每个切分点一行：存储开销、学习新类别的延迟与每小时能耗，
    以及网络描述中导入的准确率；最后按支配关系标记 Pareto 前沿。

    某层分块不可行时该行标记 feasible=False，延迟记为 inf。
    """
    names = list(cuts) if cuts else list(net.accuracy_by_cut) or net.cut_names()
    macs = inference_macs(net)
    accuracy = {net.layers[net.index_of(k)].name: v for k, v in net.accuracy_by_cut.items()}
    rows: List[ParetoRow] = []
    for name in names:
        mem = footprint(net, name, plan.n_replay, plan.n_new)
        schedule = plan_network(net, hw, start=net.index_of(name))
        feasible = schedule.feasible
        if feasible:
            latency = estimate_latency(net, name, plan, hw, include_frozen_forward).seconds
            logger.debug(
                "[plan] %s: %d 个 GEMM 层，共 %d 个系数块",
                mem.lr_cut,
                len(schedule.entries),
                sum(e.n_tiles for e in schedule.entries),
            )
        else:
            logger.warning("[plan] %s 不可行，L1 放不下的层: %s", mem.lr_cut, ", ".join(schedule.infeasible_layers()))
            latency = float("inf")
        energy = estimate_energy(latency, macs, hw, scenario).total_j_per_h if feasible else float("inf")
        acc = accuracy.get(mem.lr_cut)
        rows.append(
            ParetoRow(
                cut=mem.lr_cut,
                ram_bytes=mem.ram_total_bytes,
                flash_bytes=mem.flash_bytes,
                latency_s=latency,
                energy_j_per_h=energy,
                accuracy_pct=acc,
                accuracy_source="ingested" if acc is not None else "none",
                feasible=feasible,
            )
        )
    rows = pareto_front(rows)
    logger.info("[plan] %s @ %s: %d 个切分点，前沿 %d 个", net.name, hw.name, len(rows), sum(r.pareto for r in rows))
    return rows


@dataclass
class StepMetrics:
    step: int
    new_class: int
    seen_acc: float
    old_acc: float
    new_acc: float
    epoch_losses: List[float] = field(default_factory=list)

    def as_row(self) -> Dict[str, object]:
        return {
            "step": self.step,
            "new_class": self.new_class,
            "seen_acc": self.seen_acc,
            "old_acc": self.old_acc,
            "new_acc": self.new_acc,
            "final_loss": self.epoch_losses[-1] if self.epoch_losses else None,
        }


@dataclass
class TrainReport:
    """
    一次类增量实验的结果：基础训练后的准确率、每次学习新类别后的准确率，
    以及冻结层参数是否逐位保持不变。
    """

    replay: bool
    cut: str
    baseline_acc: float
    steps: List[StepMetrics] = field(default_factory=list)
    frozen_unchanged: bool = True
    replay_vectors: int = 0
    per_class_acc: Dict[int, float] = field(default_factory=dict)
    store_path: Optional[Path] = None

    @property
    def final_old_acc(self) -> float:
        return self.steps[-1].old_acc if self.steps else self.baseline_acc


class EdgeCLPipeline:
    """
    桌面规模的类增量学习实验：先在基础类别上训练整个网络，
    然后在 LR 切分点之上逐个学习新类别（可选 Latent Replay）。
    """

    def __init__(self, config: ExperimentConfig) -> None:
        self.config = config
        self.descriptor = NetworkDescriptor.from_file(config.net_path)
        if self.descriptor.num_classes < config.classes:
            raise ConfigurationError(
                f"网络 {self.descriptor.name} 只有 {self.descriptor.num_classes} 个输出，"
                f"实验需要 {config.classes} 个类别"
            )

    def datasets(self):
        cfg = self.config
        shape = tuple(self.descriptor.input_shape)
        train = synth_dataset(cfg.classes, cfg.per_class, shape, seed=cfg.seed, noise=cfg.noise)
        test = synth_dataset(
            cfg.classes, cfg.test_per_class, shape, seed=cfg.seed, noise=cfg.noise, noise_seed=cfg.seed + 7919
        )
        return train, test

    def pretrain(self, net: Network, images: torch.Tensor, labels: torch.Tensor) -> List[float]:
        """在基础类别上训练所有层（切分点为 0）。"""
        cfg = self.config
        base_cfg = TrainConfig(
            learning_rate=cfg.train.learning_rate,
            epochs=cfg.base_epochs,
            batch_size=cfg.train.batch_size,
            fisher_decay=cfg.train.fisher_decay,
            f_max_clip=cfg.train.f_max_clip,
        )
        empty = ReplayBuffer(vector_shape=tuple(images.shape[1:]), quota=0)
        plan = CLBatchPlan(n_new=images.shape[0], n_replay=0, epochs=base_cfg.epochs)
        net.set_cut(0)
        epochs = compose_batches(empty, images, labels, plan, seed=cfg.seed, batch_size=base_cfg.batch_size)
        return train_epochs(net, epochs, base_cfg, FisherBank(f_max_clip=base_cfg.f_max_clip))

    def settle_buffer(self, buffer: ReplayBuffer) -> None:
        """按总预算下调每类配额，并在配置了存储文件时写回。"""
        cfg = self.config
        if cfg.replay and cfg.replay_budget is not None:
            buffer.rebalance(cfg.replay_budget)
        if buffer.store_path is not None:
            save_buffer(buffer)

    def run(self) -> TrainReport:
        cfg = self.config
        (images, labels), (test_x, test_y) = self.datasets()
        base_ids = list(range(cfg.base_classes))
        base_mask = labels < cfg.base_classes

        net = Network(self.descriptor, seed=cfg.seed)
        losses = self.pretrain(net, images[base_mask], labels[base_mask])
        baseline = evaluate(net, test_x, test_y, base_ids)
        logger.info("[train] 基础训练完成：loss %.4f，基础类别准确率 %.1f%%", losses[-1] if losses else 0.0, baseline)

        net.set_cut(cfg.cut)
        cut = net.lr_cut
        frozen = list(range(cut))
        frozen_before = net.snapshot(frozen)

        quota = cfg.quota if cfg.replay else 0
        buffer = ReplayBuffer(
            vector_shape=self.descriptor.latent_shape(cut), quota=quota, seed=cfg.seed, store_path=cfg.store_path
        )
        for class_id in base_ids:
            class_images = images[labels == class_id][: cfg.n_new]
            insert_class(buffer, class_id, net.latents(class_images))
        self.settle_buffer(buffer)

        report = TrainReport(replay=cfg.replay, cut=self.descriptor.layers[cut].name, baseline_acc=baseline)
        fisher = FisherBank(f_max_clip=cfg.train.f_max_clip)
        seen = list(base_ids)
        for step, new_class in enumerate(range(cfg.base_classes, cfg.classes), start=1):
            mask = labels == new_class
            new_x, new_y = images[mask][: cfg.n_new], labels[mask][: cfg.n_new]
            if cfg.store_path is not None:
                buffer = load_buffer(cfg.store_path, buffer.strategy, seed=cfg.seed)
            n_replay = cfg.n_replay if cfg.replay and len(buffer) else 0
            plan = CLBatchPlan(n_new=new_x.shape[0], n_replay=n_replay, epochs=cfg.train.epochs)
            _, _, learned = learn_new_class(
                net, buffer, new_x, new_y, cfg.train, plan=plan, seed=cfg.seed + step, fisher=fisher
            )
            self.settle_buffer(buffer)
            old = list(seen)
            seen.append(new_class)
            metrics = StepMetrics(
                step=step,
                new_class=new_class,
                seen_acc=evaluate(net, test_x, test_y, seen),
                old_acc=evaluate(net, test_x, test_y, old),
                new_acc=evaluate(net, test_x, test_y, [new_class]),
                epoch_losses=learned.epoch_losses,
            )
            report.steps.append(metrics)
            logger.info(
                "[train] 第 %d 步（类别 %d）：已见 %.1f%%，旧类别 %.1f%%，新类别 %.1f%%",
                step,
                new_class,
                metrics.seen_acc,
                metrics.old_acc,
                metrics.new_acc,
            )

        frozen_after = net.snapshot(frozen)
        report.frozen_unchanged = all(
            torch.equal(before[k], after[k]) for before, after in zip(frozen_before, frozen_after) for k in before
        )
        report.replay_vectors = len(buffer)
        report.per_class_acc = per_class_accuracy(net, test_x, test_y)
        report.store_path = cfg.store_path
        return report


def cmd_train(config: ExperimentConfig) -> TrainReport:
    return EdgeCLPipeline(config).run()
