from __future__ import annotations

import pytest

from edgecl.cli import main
from edgecl.config import DEFAULT_MCU_HW
from edgecl.report import read_pareto_csv


def test_footprint_budget(capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["footprint", "--cut", "conv1", "--cut", "conv5_4", "--cut", "mid_fc7", "--budget-mb", "32"]) == 0
    out = capsys.readouterr().out
    assert "RAM ≤ 32 MB 的切分点: mid_fc7" in out


def test_plan_writes_csv_and_dat(tmp_path, capsys: pytest.CaptureFixture[str]) -> None:
    csv_path = tmp_path / "pareto.csv"
    assert main(["plan", "--csv", str(csv_path), "--plot"]) == 0
    rows = read_pareto_csv(csv_path)
    assert [r.cut for r in rows] == ["conv1", "conv5_4/dw", "mid_fc7"]
    dat = csv_path.with_suffix(".dat").read_text(encoding="utf-8").splitlines()
    assert dat[0] == "# cut ram_bytes latency_s accuracy_pct pareto"
    assert len(dat) == 4
    assert "Pareto" in capsys.readouterr().out


def test_plot_requires_csv() -> None:
    assert main(["plan", "--plot"]) == 2


def test_unknown_kernel_is_a_usage_error() -> None:
    assert main(["bench", "--kernel", "fft", "--sizes", "4"]) == 2


def test_bad_sizes_is_a_usage_error() -> None:
    assert main(["bench", "--sizes", "a,b"]) == 2


def test_unknown_cut_is_a_configuration_error(capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["latency", "--cut", "conv42"]) == 2
    assert "配置错误" in capsys.readouterr().out


def test_missing_net_file(tmp_path) -> None:
    assert main(["footprint", "--net", str(tmp_path / "none.net")]) == 2


def test_latency_with_mcu(tmp_path, capsys: pytest.CaptureFixture[str]) -> None:
    csv_path = tmp_path / "lat.csv"
    assert main(["latency", "--cut", "conv5_4", "--mcu-hw", str(DEFAULT_MCU_HW), "--csv", str(csv_path)]) == 0
    out = capsys.readouterr().out
    assert "conv5_4/dw" in out
    header = csv_path.read_text(encoding="utf-8").splitlines()[0]
    assert header == "cut,seconds,cycles,mcu_ratio"


def test_energy(capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["energy", "--cut", "mid_fc7", "--inferences-per-s", "0", "--retrains-per-hour", "0"]) == 0
    assert "0.0 J/h" in capsys.readouterr().out


def test_bench_small(tmp_path) -> None:
    csv_path = tmp_path / "bench.csv"
    assert main(["bench", "--kernel", "conv_bwd_err", "--sizes", "4", "--workers", "2", "--repeats", "1", "--csv", str(csv_path)]) == 0
    assert len(csv_path.read_text(encoding="utf-8").splitlines()) == 3


def test_env_overrides_network(monkeypatch: pytest.MonkeyPatch, capsys: pytest.CaptureFixture[str]) -> None:
    from edgecl.config import DEFAULT_TOY_NET

    monkeypatch.setenv("EDGECL_NET", str(DEFAULT_TOY_NET))
    assert main(["footprint", "--replay", "10", "--new", "5"]) == 0
    assert "toy_cl" in capsys.readouterr().out


def test_train_small(tmp_path, capsys: pytest.CaptureFixture[str]) -> None:
    csv_path = tmp_path / "train.csv"
    assert main(["train", "--epochs", "1", "--seed", "3", "--csv", str(csv_path)]) == 0
    out = capsys.readouterr().out
    assert "冻结层参数不变: 是" in out
    assert csv_path.read_text(encoding="utf-8").startswith("step,new_class,seen_acc")


def _broken_net(tmp_path, old: str, new: str):
    from edgecl.config import DEFAULT_TOY_NET

    text = DEFAULT_TOY_NET.read_text(encoding="utf-8")
    assert old in text
    path = tmp_path / "broken.net"
    path.write_text(text.replace(old, new), encoding="utf-8")
    return path


def test_non_integer_kernel_is_a_configuration_error(tmp_path, capsys: pytest.CaptureFixture[str]) -> None:
    path = _broken_net(tmp_path, "kernel = 3", "kernel = three")
    assert main(["footprint", "--net", str(path)]) == 2
    assert "配置错误" in capsys.readouterr().out


def test_non_numeric_accuracy_is_a_configuration_error(tmp_path, capsys: pytest.CaptureFixture[str]) -> None:
    path = _broken_net(tmp_path, "[network]\n", "[network]\naccuracy.conv1 = high\n")
    assert main(["footprint", "--net", str(path)]) == 2
    assert "配置错误" in capsys.readouterr().out


def test_train_with_store(tmp_path, capsys: pytest.CaptureFixture[str]) -> None:
    from edgecl.replay import load_buffer

    store = tmp_path / "flash" / "replay.lrbf"
    assert main(["train", "--epochs", "1", "--seed", "3", "--store", str(store), "--replay-budget", "40"]) == 0
    out = capsys.readouterr().out
    assert "各类别准确率: 0:" in out
    assert f"回放存储: {store.resolve()}" in out
    buffer = load_buffer(store)
    assert len(buffer.class_ids) >= 2
    assert len(buffer) <= 40


def test_negative_replay_budget_is_a_configuration_error() -> None:
    assert main(["train", "--epochs", "1", "--replay-budget", "-1"]) == 2
