from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import asdict
from typing import List, Optional

from .bench import KERNELS, cmd_bench
from .config import DEFAULT_HW, DEFAULT_NET, ExperimentConfig, resolve_path
from .cost import (
    EnergyScenario,
    battery_hours,
    estimate_energy,
    estimate_latency,
    footprint,
    inference_macs,
    load_profile,
    mcu_ratio,
    pareto_memory,
)
from .cost.memory import MB
from .env import env_int, load_dotenv_if_present
from .errors import ArgumentError, ConfigurationError, ShapeError, UsageError
from .network import NetworkDescriptor
from .pipeline import cmd_plan, cmd_train
from .replay import CLBatchPlan
from .report import write_csv, write_dat, write_pareto_csv

EXIT_CONFIG = 2


def _add_net(parser: argparse.ArgumentParser, hw: bool = True) -> None:
    parser.add_argument(
        "--net",
        type=str,
        default=None,
        help="网络描述文件（默认: 环境变量 EDGECL_NET 或自带的 mobilenet_v1_128.net）。",
    )
    if hw:
        parser.add_argument(
            "--hw",
            type=str,
            default=None,
            help="硬件配置文件（默认: 环境变量 EDGECL_HW 或自带的 pulp_octa.hw）。",
        )


def _add_cl(parser: argparse.ArgumentParser, cut_help: str) -> None:
    parser.add_argument("--cut", action="append", default=None, help=cut_help)
    parser.add_argument("--replay", type=int, default=1500, help="回放向量数 N_LR（默认: 1500）。")
    parser.add_argument("--new", type=int, default=300, help="新图像数 N_I（默认: 300）。")
    parser.add_argument("--epochs", type=int, default=8, help="学习一个新类别的 epoch 数（默认: 8）。")


def _add_output(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--csv", type=str, default=None, help="将结果写入 CSV 文件。")
    parser.add_argument(
        "--plot",
        action="store_true",
        help="在 CSV 旁额外输出 gnuplot 数据文件（.dat），需要同时设置 --csv。",
    )


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="edgecl",
        description="edgecl: 极端边缘设备上基于 Latent Replay 的持续学习引擎与代价模型。",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    plan = sub.add_parser("plan", help="各 LR 切分点的 内存 / 延迟 / 准确率 Pareto 表。")
    _add_net(plan)
    _add_cl(plan, "切分点名称，可重复（默认: 描述文件中带准确率的切分点）。")
    plan.add_argument("--include-frozen-forward", action="store_true", help="延迟中计入新图像在冻结层上的前向。")
    _add_output(plan)

    fp = sub.add_parser("footprint", help="各切分点的 FLASH / RAM 占用。")
    _add_net(fp, hw=False)
    _add_cl(fp, "切分点名称，可重复（默认: 所有切分点）。")
    fp.add_argument("--budget-mb", type=float, default=None, help="RAM 预算（MB），输出满足预算的切分点。")
    _add_output(fp)

    lat = sub.add_parser("latency", help="学习一个新类别的延迟估计。")
    _add_net(lat)
    _add_cl(lat, "切分点名称，可重复（默认: 描述文件中带准确率的切分点）。")
    lat.add_argument("--include-frozen-forward", action="store_true", help="计入新图像在冻结层上的前向。")
    lat.add_argument("--mcu-hw", type=str, default=None, help="额外给出与该 MCU 配置的延迟之比。")
    _add_output(lat)

    en = sub.add_parser("energy", help="给定应用场景下的每小时能耗与电池续航。")
    _add_net(en)
    _add_cl(en, "切分点名称，可重复（默认: 描述文件中带准确率的切分点）。")
    en.add_argument("--include-frozen-forward", action="store_true", help="延迟中计入新图像在冻结层上的前向。")
    en.add_argument("--inferences-per-s", type=float, default=1.0, help="每秒推理次数（默认: 1）。")
    en.add_argument("--retrains-per-hour", type=float, default=1.0, help="每小时学习次数（默认: 1）。")
    en.add_argument("--battery-mah", type=float, default=3100.0, help="电池容量 mAh（默认: 3100）。")
    en.add_argument("--volts", type=float, default=2.2, help="电池电压（默认: 2.2 V）。")
    _add_output(en)

    tr = sub.add_parser("train", help="在合成数据集上运行桌面规模的类增量学习实验。")
    tr.add_argument("--net", type=str, default=None, help="网络描述文件（默认: 自带的 toy_cl.net）。")
    tr.add_argument("--cut", type=str, default=None, help="LR 切分点（默认: fc）。")
    tr.add_argument("--seed", type=int, default=None, help="随机种子（默认: EDGECL_SEED 或 0）。")
    tr.add_argument("--epochs", type=int, default=None, help="学习每个新类别的 epoch 数（默认: 8）。")
    tr.add_argument("--new", type=int, default=None, help="每个新类别的图像数（默认: 60）。")
    tr.add_argument("--replay", type=int, default=None, help="每个 epoch 的回放向量数（默认: 300）。")
    tr.add_argument("--lr", type=float, default=None, help="学习率（默认: 0.05）。")
    tr.add_argument("--no-replay", action="store_true", help="关闭 Latent Replay（消融实验）。")
    tr.add_argument("--store", type=str, default=None, help="回放缓冲区常驻的 LRBF 文件（默认: 只在内存中）。")
    tr.add_argument("--replay-budget", type=int, default=None, help="所有类别共享的回放向量总数，类别增多时每类配额随之下调。")
    _add_output(tr)

    be = sub.add_parser("bench", help="在本机测量 GEMM / 卷积内核吞吐。")
    be.add_argument("--kernel", type=str, default="gemm", help=f"内核: {' / '.join(KERNELS)}。")
    be.add_argument("--sizes", type=str, default="64,128", help="逗号分隔的尺寸列表（默认: 64,128）。")
    be.add_argument(
        "--workers",
        type=int,
        default=None,
        help="并行线程数（默认: 环境变量 EDGECL_WORKERS 或 4）。",
    )
    be.add_argument("--repeats", type=int, default=3, help="每个配置重复次数，取最短时间（默认: 3）。")
    be.add_argument("--seed", type=int, default=0, help="随机种子（默认: 0）。")
    _add_output(be)
    return parser


def _configure_logging() -> None:
    level = os.getenv("EDGECL_LOG_LEVEL", "INFO").strip().upper() or "INFO"
    logging.basicConfig(level=getattr(logging, level, logging.INFO), format="%(levelname)s %(name)s: %(message)s")


def _load_net(path: Optional[str]) -> NetworkDescriptor:
    return NetworkDescriptor.from_file(resolve_path(path, "EDGECL_NET", DEFAULT_NET))


def _cuts(net: NetworkDescriptor, requested: Optional[List[str]], all_cuts: bool = False) -> List[str]:
    if requested:
        return [net.layers[net.index_of(c)].name for c in requested]
    if all_cuts or not net.accuracy_by_cut:
        return net.cut_names()
    return [net.layers[net.index_of(c)].name for c in net.accuracy_by_cut]


def _write(rows: List[dict], args: argparse.Namespace, columns: List[str]) -> None:
    if not args.csv:
        if args.plot:
            raise UsageError("--plot 需要同时设置 --csv")
        return
    path = write_csv(rows, args.csv)
    print(f"   CSV: {path}")
    if args.plot:
        dat = write_dat(rows, path.with_suffix(".dat"), columns)
        print(f"   gnuplot: {dat}")


def _run_plan(args: argparse.Namespace) -> None:
    net = _load_net(args.net)
    hw = load_profile(resolve_path(args.hw, "EDGECL_HW", DEFAULT_HW))
    plan = CLBatchPlan(n_new=args.new, n_replay=args.replay, epochs=args.epochs)
    rows = cmd_plan(net, hw, _cuts(net, args.cut), plan, args.include_frozen_forward)
    print(f"Pareto 表（{net.name} @ {hw.name}，准确率为导入的元数据）")
    for r in rows:
        acc = "-" if r.accuracy_pct is None else f"{r.accuracy_pct:.1f}%"
        mark = "*" if r.pareto else " "
        latency = "不可行" if not r.feasible else f"{r.latency_s / 60:.2f} min"
        print(
            f" {mark} {r.cut:<14} RAM {r.ram_bytes / MB:8.2f} MB  FLASH {r.flash_bytes / MB:8.2f} MB"
            f"  延迟 {latency:>12}  能耗 {r.energy_j_per_h:9.1f} J/h  准确率 {acc}"
        )
    if args.csv:
        path = write_pareto_csv(rows, args.csv)
        print(f"   CSV: {path}")
        if args.plot:
            data = [asdict(r) for r in rows]
            dat = write_dat(data, path.with_suffix(".dat"), ["cut", "ram_bytes", "latency_s", "accuracy_pct", "pareto"])
            print(f"   gnuplot: {dat}")
    elif args.plot:
        raise UsageError("--plot 需要同时设置 --csv")


def _run_footprint(args: argparse.Namespace) -> None:
    net = _load_net(args.net)
    cuts = _cuts(net, args.cut, all_cuts=True)
    reports = [footprint(net, c, args.replay, args.new) for c in cuts]
    print(f"存储占用（{net.name}，N_LR={args.replay}，N_I={args.new}）")
    for r in reports:
        print(f"   {r.lr_cut:<16} FLASH {r.flash_bytes / MB:8.2f} MB  RAM {r.ram_total_bytes / MB:8.2f} MB")
    if args.budget_mb is not None:
        feasible = pareto_memory(net, cuts, args.budget_mb * MB, args.replay, args.new)
        print(f"   RAM ≤ {args.budget_mb:g} MB 的切分点: {', '.join(feasible) or '无'}")
    rows = [r.as_row() for r in reports]
    _write(rows, args, ["cut", "flash_bytes", "ram_total_bytes"])


def _run_latency(args: argparse.Namespace) -> None:
    net = _load_net(args.net)
    hw = load_profile(resolve_path(args.hw, "EDGECL_HW", DEFAULT_HW))
    plan = CLBatchPlan(n_new=args.new, n_replay=args.replay, epochs=args.epochs)
    mcu = load_profile(args.mcu_hw) if args.mcu_hw else None
    print(f"学习一个新类别的延迟（{net.name} @ {hw.name}，{plan.presentations} 次样本呈现）")
    rows = []
    for cut in _cuts(net, args.cut):
        report = estimate_latency(net, cut, plan, hw, args.include_frozen_forward)
        line = f"   {report.lr_cut:<16} {report.seconds:10.2f} s  ({report.minutes:.2f} min)"
        row = {"cut": report.lr_cut, "seconds": report.seconds, "cycles": report.cycles}
        if mcu is not None:
            ratio = mcu_ratio(net, cut, plan, mcu, hw, args.include_frozen_forward)
            line += f"  {mcu.name} 慢 {ratio:.1f}×"
            row["mcu_ratio"] = ratio
        print(line)
        rows.append(row)
    _write(rows, args, ["cut", "seconds"])


def _run_energy(args: argparse.Namespace) -> None:
    net = _load_net(args.net)
    hw = load_profile(resolve_path(args.hw, "EDGECL_HW", DEFAULT_HW))
    plan = CLBatchPlan(n_new=args.new, n_replay=args.replay, epochs=args.epochs)
    scenario = EnergyScenario(inferences_per_s=args.inferences_per_s, retrains_per_hour=args.retrains_per_hour)
    macs = inference_macs(net)
    print(
        f"每小时能耗（{net.name} @ {hw.name}，{scenario.inferences_per_s:g} 次推理/s，"
        f"{scenario.retrains_per_hour:g} 次学习/h）"
    )
    rows = []
    for cut in _cuts(net, args.cut):
        latency = estimate_latency(net, cut, plan, hw, args.include_frozen_forward)
        energy = estimate_energy(latency.seconds, macs, hw, scenario)
        hours = battery_hours(energy.total_j_per_h, args.battery_mah, args.volts)
        print(f"   {latency.lr_cut:<16} {energy.total_j_per_h:9.1f} J/h  电池 {hours:8.1f} h")
        rows.append(
            {
                "cut": latency.lr_cut,
                "train_j_per_h": energy.train_j_per_h,
                "inference_j_per_h": energy.inference_j_per_h,
                "total_j_per_h": energy.total_j_per_h,
                "battery_hours": hours,
            }
        )
    _write(rows, args, ["cut", "total_j_per_h", "battery_hours"])


def _run_train(args: argparse.Namespace) -> None:
    config = ExperimentConfig.from_args(
        net_path=args.net,
        cut=args.cut,
        seed=args.seed,
        epochs=args.epochs,
        n_new=args.new,
        n_replay=args.replay,
        replay=not args.no_replay,
        learning_rate=args.lr,
        store_path=args.store,
        replay_budget=args.replay_budget,
    )
    report = cmd_train(config)
    print("类增量实验完成")
    print(f"   网络: {config.net_path}")
    print(f"   LR 层: {report.cut}  回放: {'开' if report.replay else '关'}（{report.replay_vectors} 个向量）")
    print(f"   基础类别准确率: {report.baseline_acc:.1f}%")
    for step in report.steps:
        print(
            f"   第 {step.step} 步 类别 {step.new_class}: 已见 {step.seen_acc:.1f}%  "
            f"旧类别 {step.old_acc:.1f}%  新类别 {step.new_acc:.1f}%"
        )
    per_class = "  ".join(f"{c}:{acc:.1f}%" for c, acc in sorted(report.per_class_acc.items()))
    print(f"   各类别准确率: {per_class}")
    if report.store_path is not None:
        print(f"   回放存储: {report.store_path}")
    print(f"   冻结层参数不变: {'是' if report.frozen_unchanged else '否'}")
    _write([s.as_row() for s in report.steps], args, ["step", "seen_acc", "old_acc", "new_acc"])


def _run_bench(args: argparse.Namespace) -> None:
    try:
        sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    except ValueError as exc:
        raise UsageError(f"--sizes 不是整数列表: {args.sizes}") from exc
    workers = args.workers if args.workers is not None else env_int("EDGECL_WORKERS", 4)
    rows = cmd_bench(args.kernel, sizes, workers, repeats=args.repeats, seed=args.seed)
    print(f"内核吞吐（{args.kernel}，本机测量）")
    for r in rows:
        print(f"   size={r.size:<6} workers={r.workers:<3} {r.mac_per_s:12.3e} MAC/s  加速比 {r.speedup:.2f}×")
    _write([r.as_row() for r in rows], args, ["size", "workers", "mac_per_s", "speedup"])


COMMANDS = {
    "plan": _run_plan,
    "footprint": _run_footprint,
    "latency": _run_latency,
    "energy": _run_energy,
    "train": _run_train,
    "bench": _run_bench,
}


def main(argv: list[str] | None = None) -> int:
    # 确保在解析参数和使用配置之前加载 .env 中的环境变量
    load_dotenv_if_present()
    _configure_logging()
    if argv is None:
        argv = sys.argv[1:]

    parser = build_arg_parser()
    args = parser.parse_args(argv)

    try:
        COMMANDS[args.command](args)
        return 0
    except KeyboardInterrupt:
        print("\n用户中断")
        return 1
    except (ConfigurationError, UsageError, ArgumentError, ShapeError) as exc:
        print(f"配置错误: {exc}")
        return EXIT_CONFIG
    except Exception as exc:
        print(f"处理失败: {exc}")
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
