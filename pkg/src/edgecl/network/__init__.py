from __future__ import annotations

from .descriptor import NetworkDescriptor
from .model import Network

__all__ = ["Network", "NetworkDescriptor"]
