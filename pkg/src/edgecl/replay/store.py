"""
LRBF 回放存储文件（对应外部 FLASH 上常驻的 Latent Replay 数据）。

布局（小端）：
  header:  b"LRBF" | version u16 | rank u16 | dims u32×rank | quota u32 | class_count u32
  record:  class_id u32 | count u32 | count×prod(dims) 个 FP32
"""

from __future__ import annotations

import struct
from math import prod
from pathlib import Path

import numpy as np
import torch

from edgecl.errors import ConfigurationError

from .buffer import ReplayBuffer

MAGIC = b"LRBF"
VERSION = 1


def save_buffer(buffer: ReplayBuffer, path: str | Path | None = None) -> Path:
    target = Path(path) if path is not None else buffer.store_path
    if target is None:
        raise ConfigurationError("未指定回放存储文件路径")
    out_path = target.expanduser().resolve()
    out_path.parent.mkdir(parents=True, exist_ok=True)
    dims = buffer.vector_shape
    with out_path.open("wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<HH", VERSION, len(dims)))
        f.write(struct.pack(f"<{len(dims)}I", *dims))
        f.write(struct.pack("<II", buffer.quota, len(buffer.classes)))
        for class_id in buffer.class_ids:
            vectors = buffer.vectors(class_id)
            f.write(struct.pack("<II", class_id, vectors.shape[0]))
            f.write(vectors.numpy().astype("<f4", copy=False).tobytes())
    return out_path


def load_buffer(path: str | Path, strategy: str = "first_k", seed: int = 0) -> ReplayBuffer:
    in_path = Path(path).expanduser().resolve()
    if not in_path.is_file():
        raise ConfigurationError(f"回放存储文件不存在: {in_path}")
    data = in_path.read_bytes()
    if data[:4] != MAGIC:
        raise ConfigurationError(f"{in_path} 不是 LRBF 文件")
    try:
        offset = 4
        version, rank = struct.unpack_from("<HH", data, offset)
        offset += 4
        if version != VERSION:
            raise ConfigurationError(f"不支持的 LRBF 版本: {version}")
        dims = struct.unpack_from(f"<{rank}I", data, offset)
        offset += 4 * rank
        quota, class_count = struct.unpack_from("<II", data, offset)
        offset += 8

        buffer = ReplayBuffer(vector_shape=tuple(dims), quota=quota, strategy=strategy, seed=seed, store_path=in_path)  # type: ignore[arg-type]
        vector_len = prod(dims)
        for _ in range(class_count):
            class_id, count = struct.unpack_from("<II", data, offset)
            offset += 8
            payload = np.frombuffer(data, dtype="<f4", count=count * vector_len, offset=offset)
            offset += 4 * count * vector_len
            buffer.classes[class_id] = torch.from_numpy(payload.astype(np.float32)).reshape(count, *dims)
    except (struct.error, ValueError) as exc:
        if isinstance(exc, ConfigurationError):
            raise
        raise ConfigurationError(f"{in_path} 已截断或损坏: {exc}") from exc
    if offset != len(data):
        raise ConfigurationError(f"{in_path} 末尾有 {len(data) - offset} 字节多余数据")
    return buffer
