from __future__ import annotations

import csv
import logging
from dataclasses import asdict, fields
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence

from edgecl.errors import ConfigurationError

from .pareto import ParetoRow

logger = logging.getLogger(__name__)

PARETO_FIELDS = [f.name for f in fields(ParetoRow)]


def _cell(value: object) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(rows: Sequence[Mapping[str, object]], path: str | Path, fieldnames: Optional[List[str]] = None) -> Path:
    """写 CSV；浮点数用 repr 输出，读回时可精确还原。"""
    out_path = Path(path).expanduser().resolve()
    out_path.parent.mkdir(parents=True, exist_ok=True)
    names = fieldnames or (list(rows[0]) if rows else [])
    with out_path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=names)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _cell(row.get(k)) for k in names})
    logger.info("[report] 写出 %d 行: %s", len(rows), out_path)
    return out_path


def write_dat(rows: Sequence[Mapping[str, object]], path: str | Path, columns: Sequence[str]) -> Path:
    """
    gnuplot 数据文件：# 开头的表头，空白分隔，字符串列加引号。
    """
    out_path = Path(path).expanduser().resolve()
    out_path.parent.mkdir(parents=True, exist_ok=True)
    lines = ["# " + " ".join(columns)]
    for row in rows:
        cells = []
        for col in columns:
            value = row.get(col)
            if value is None:
                cells.append("NaN")
            elif isinstance(value, str):
                cells.append(f'"{value}"')
            elif isinstance(value, bool):
                cells.append("1" if value else "0")
            else:
                cells.append(_cell(value))
        lines.append(" ".join(cells))
    out_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return out_path


def write_pareto_csv(rows: Sequence[ParetoRow], path: str | Path) -> Path:
    return write_csv([asdict(r) for r in rows], path, PARETO_FIELDS)


def read_pareto_csv(path: str | Path) -> List[ParetoRow]:
    in_path = Path(path).expanduser().resolve()
    if not in_path.is_file():
        raise ConfigurationError(f"CSV 文件不存在: {in_path}")
    with in_path.open("r", newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        missing = set(PARETO_FIELDS) - set(reader.fieldnames or [])
        if missing:
            raise ConfigurationError(f"{in_path} 缺少列: {', '.join(sorted(missing))}")
        return [_parse_row(raw) for raw in reader]


def _parse_row(raw: Dict[str, str]) -> ParetoRow:
    try:
        return ParetoRow(
            cut=raw["cut"],
            ram_bytes=int(raw["ram_bytes"]),
            flash_bytes=int(raw["flash_bytes"]),
            latency_s=float(raw["latency_s"]),
            energy_j_per_h=float(raw["energy_j_per_h"]),
            accuracy_pct=float(raw["accuracy_pct"]) if raw["accuracy_pct"] else None,
            accuracy_source=raw["accuracy_source"],
            pareto=raw["pareto"] == "True",
            feasible=raw["feasible"] == "True",
        )
    except ValueError as exc:
        raise ConfigurationError(f"无法解析 CSV 行 {raw}: {exc}") from exc
