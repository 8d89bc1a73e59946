from __future__ import annotations

from .buffer import ReplayBuffer, insert_class
from .batching import CLBatchPlan, compose_batches, sample_replay
from .store import load_buffer, save_buffer
from .protocol import LearnMetrics, generate_latents, learn_new_class

__all__ = [
    "CLBatchPlan",
    "LearnMetrics",
    "ReplayBuffer",
    "compose_batches",
    "generate_latents",
    "insert_class",
    "learn_new_class",
    "load_buffer",
    "sample_replay",
    "save_buffer",
]
