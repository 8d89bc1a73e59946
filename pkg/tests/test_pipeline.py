from __future__ import annotations

import pytest

from edgecl.config import DESK_F_MAX_CLIP, ExperimentConfig, TrainConfig
from edgecl.cost import HwProfile
from edgecl.errors import ConfigurationError
from edgecl.network import NetworkDescriptor
from edgecl.pipeline import EdgeCLPipeline, TrainReport, cmd_plan, cmd_train
from edgecl.replay import CLBatchPlan


def desk_config(**overrides) -> ExperimentConfig:
    return ExperimentConfig(**{"seed": 0, **overrides})


@pytest.fixture(scope="module")
def with_replay() -> TrainReport:
    return cmd_train(desk_config(replay=True))


@pytest.fixture(scope="module")
def without_replay() -> TrainReport:
    return cmd_train(desk_config(replay=False))


def test_plan_rows_for_ingested_cuts(mobilenet: NetworkDescriptor, octa: HwProfile) -> None:
    rows = cmd_plan(mobilenet, octa)
    assert [r.cut for r in rows] == ["conv1", "conv5_4/dw", "mid_fc7"]
    assert all(r.pareto and r.feasible for r in rows)
    assert all(r.accuracy_source == "ingested" for r in rows)
    assert rows[1].accuracy_pct == pytest.approx(72.2)


def test_plan_without_metadata(mobilenet: NetworkDescriptor, octa: HwProfile) -> None:
    rows = cmd_plan(mobilenet, octa, cuts=["pool6", "conv6"], plan=CLBatchPlan(epochs=1))
    assert {r.cut for r in rows} == {"pool6", "conv6/dw"}
    assert all(r.accuracy_pct is None and r.accuracy_source == "none" for r in rows)
    # 没有准确率时只比较内存与延迟：pool6 两项都更小
    assert [r.pareto for r in rows] == [True, False]


def test_plan_marks_infeasible_cut(mobilenet: NetworkDescriptor) -> None:
    tiny = HwProfile(name="tiny", l1_bytes=1024)
    rows = cmd_plan(mobilenet, tiny, cuts=["mid_fc7"])
    assert not rows[0].feasible
    assert rows[0].latency_s == float("inf")


def test_replay_protects_old_classes(with_replay: TrainReport, without_replay: TrainReport) -> None:
    assert with_replay.baseline_acc == without_replay.baseline_acc
    assert with_replay.baseline_acc > 60.0
    assert with_replay.final_old_acc >= without_replay.final_old_acc + 10.0


def test_new_class_is_learned(with_replay: TrainReport) -> None:
    assert with_replay.steps[-1].new_acc > 50.0


def test_frozen_layers_stay_bit_exact(with_replay: TrainReport) -> None:
    assert with_replay.frozen_unchanged
    assert with_replay.cut == "fc"


def test_replay_buffer_keeps_quota(with_replay: TrainReport, without_replay: TrainReport) -> None:
    assert with_replay.replay_vectors == 5 * 30
    assert without_replay.replay_vectors == 0


def test_zero_epochs_keeps_baseline() -> None:
    cfg = desk_config(per_class=20, test_per_class=10, n_new=20, base_epochs=5, train=TrainConfig(epochs=0, f_max_clip=DESK_F_MAX_CLIP))
    report = cmd_train(cfg)
    assert report.steps[0].old_acc == report.baseline_acc


def test_run_is_deterministic() -> None:
    cfg = desk_config(per_class=20, test_per_class=10, n_new=20, base_epochs=3, train=TrainConfig(epochs=2, f_max_clip=DESK_F_MAX_CLIP))
    a, b = cmd_train(cfg), cmd_train(cfg)
    assert [s.as_row() for s in a.steps] == [s.as_row() for s in b.steps]


def test_mid_network_cut_runs(toy_net: NetworkDescriptor) -> None:
    cfg = desk_config(cut="conv2", per_class=20, test_per_class=10, n_new=20, base_epochs=2, train=TrainConfig(epochs=1, f_max_clip=DESK_F_MAX_CLIP))
    report = EdgeCLPipeline(cfg).run()
    assert report.cut == "conv2/dw"
    assert report.frozen_unchanged


def test_too_many_classes_for_network() -> None:
    with pytest.raises(ConfigurationError):
        EdgeCLPipeline(desk_config(base_classes=6))


def test_experiment_config_validation() -> None:
    with pytest.raises(ConfigurationError):
        ExperimentConfig(n_new=100, per_class=50)
    with pytest.raises(ConfigurationError):
        ExperimentConfig(base_classes=1, new_classes=0)


def test_store_round_trips_through_flash(tmp_path) -> None:
    from edgecl.replay import load_buffer

    store = tmp_path / "replay.lrbf"
    small = {"per_class": 20, "test_per_class": 10, "n_new": 20, "base_epochs": 3, "train": TrainConfig(epochs=1, f_max_clip=DESK_F_MAX_CLIP)}
    in_memory = cmd_train(desk_config(**small))
    on_flash = cmd_train(desk_config(store_path=store, **small))
    assert on_flash.store_path == store
    assert [s.as_row() for s in on_flash.steps] == [s.as_row() for s in in_memory.steps]
    buffer = load_buffer(store)
    assert buffer.class_ids == list(range(5))
    assert len(buffer) == on_flash.replay_vectors


def test_replay_budget_shrinks_quota() -> None:
    cfg = desk_config(per_class=20, test_per_class=10, n_new=20, base_epochs=2, replay_budget=40, train=TrainConfig(epochs=1, f_max_clip=DESK_F_MAX_CLIP))
    report = cmd_train(cfg)
    assert report.replay_vectors <= 40
    assert report.replay_vectors == 5 * (40 // 5)
    with pytest.raises(ConfigurationError):
        desk_config(replay_budget=-1)


def test_report_has_per_class_accuracy(with_replay: TrainReport) -> None:
    assert sorted(with_replay.per_class_acc) == list(range(5))
    assert all(0.0 <= acc <= 100.0 for acc in with_replay.per_class_acc.values())
    assert with_replay.store_path is None
