from __future__ import annotations

from .fisher import FisherBank, FisherState, fisher_accumulate
from .ar1 import ar1_step
from .trainer import train_batch, train_epochs

__all__ = [
    "FisherBank",
    "FisherState",
    "ar1_step",
    "fisher_accumulate",
    "train_batch",
    "train_epochs",
]
