from __future__ import annotations

from .types import LayerKind, LayerSpec, LayerTape
from .base import Layer, Params
from .renorm import RenormClip, batch_renorm_forward
from .loss import softmax_xent, softmax_xent_batch
from .factory import backward_error, backward_grad, build_layer, forward

__all__ = [
    "Layer",
    "LayerKind",
    "LayerSpec",
    "LayerTape",
    "Params",
    "RenormClip",
    "backward_error",
    "backward_grad",
    "batch_renorm_forward",
    "build_layer",
    "forward",
    "softmax_xent",
    "softmax_xent_batch",
]
