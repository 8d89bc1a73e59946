from __future__ import annotations

import os
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv


def load_dotenv_if_present(env_path: Optional[str | Path] = None) -> None:
    """
    尝试从仓库根目录加载 .env 文件（如果存在），其中可以写 EDGECL_NET、
    EDGECL_HW（默认网络描述与硬件配置文件）、EDGECL_SEED、EDGECL_WORKERS
    与 EDGECL_LOG_LEVEL。

    - 已经设置的环境变量不会被覆盖；
    - 默认查找路径为 src/edgecl/ 之上的仓库根目录下的 .env。
    """
    if env_path is None:
        root = Path(__file__).resolve().parents[2]
        env_file = root / ".env"
    else:
        env_file = Path(env_path)

    if env_file.is_file():
        load_dotenv(dotenv_path=env_file, override=False)


def env_int(name: str, default: int) -> int:
    """读取整数型 EDGECL_* 变量；未设置或不是整数时返回 default。"""
    value = os.getenv(name, "").strip()
    if not value:
        return default
    try:
        return int(value)
    except ValueError:
        return default
