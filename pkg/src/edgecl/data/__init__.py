from __future__ import annotations

from .synthetic import class_prototypes, synth_dataset
from .evaluate import evaluate, per_class_accuracy

__all__ = ["class_prototypes", "evaluate", "per_class_accuracy", "synth_dataset"]
