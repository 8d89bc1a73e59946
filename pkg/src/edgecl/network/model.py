from __future__ import annotations

from typing import Dict, List, Optional, Sequence

import torch

from edgecl.errors import ShapeError
from edgecl.layers import Layer, LayerKind, LayerTape, Params, build_layer

from .descriptor import NetworkDescriptor


class Network:
    """
    运行期网络：层实现 + 每层参数。

    lr_cut 之下的层被冻结：只做推理模式前向，不保存 LayerTape，
    也不会被更新。
    """

    def __init__(
        self,
        descriptor: NetworkDescriptor,
        params: Optional[List[Params]] = None,
        seed: int = 0,
        lr_cut: str | int = 0,
    ) -> None:
        self.descriptor = descriptor
        self.layers: List[Layer] = [build_layer(spec, descriptor.renorm_clip) for spec in descriptor.layers]
        if params is None:
            generator = torch.Generator().manual_seed(seed)
            params = [layer.init_params(generator) for layer in self.layers]
        if len(params) != len(self.layers):
            raise ShapeError(f"参数组数 {len(params)} 与层数 {len(self.layers)} 不一致")
        self.params = params
        self.lr_cut = descriptor.index_of(lr_cut)

    def __len__(self) -> int:
        return len(self.layers)

    def set_cut(self, lr_cut: str | int) -> None:
        self.lr_cut = self.descriptor.index_of(lr_cut)

    def clone(self) -> "Network":
        params = [{k: v.clone() for k, v in p.items()} for p in self.params]
        return Network(self.descriptor, params=params, lr_cut=self.lr_cut)

    def trainable_indices(self, start: Optional[int] = None) -> List[int]:
        start = self.lr_cut if start is None else start
        return [i for i in range(start, len(self.layers)) if self.layers[i].spec.param_shapes]

    def trainable_keys(self, index: int) -> List[str]:
        return list(self.layers[index].spec.param_shapes)

    def forward(
        self,
        act_in: torch.Tensor,
        start: int = 0,
        stop: Optional[int] = None,
        training: bool = False,
        tapes: Optional[Dict[int, LayerTape]] = None,
        tiles: Optional[Dict[int, int]] = None,
    ) -> torch.Tensor:
        """
        执行 [start, stop) 区间内的层。

        tapes 不为 None 时为每一层记录 LayerTape；tiles 给出按 C_TILE 分块
        执行的层（下标 → c_tile），结果与不分块时逐位一致。
        """
        stop = len(self.layers) if stop is None else stop
        x = act_in
        for idx in range(start, stop):
            layer = self.layers[idx]
            tape = None
            if tapes is not None:
                tape = LayerTape()
                tapes[idx] = tape
            c_tile = tiles.get(idx) if tiles else None
            if c_tile is not None and layer.spec.kind.is_gemm:
                x = layer.forward(x, self.params[idx], tape=tape, training=training, c_tile=c_tile)  # type: ignore[call-arg]
            else:
                x = layer.forward(x, self.params[idx], tape=tape, training=training)
        return x

    def latents(self, images: torch.Tensor, lr_cut: Optional[str | int] = None) -> torch.Tensor:
        cut = self.lr_cut if lr_cut is None else self.descriptor.index_of(lr_cut)
        return self.forward(images, 0, cut, training=False)

    def logits(self, act_in: torch.Tensor, start: int = 0) -> torch.Tensor:
        return self.forward(act_in, start, len(self.layers), training=False)

    def predict(self, act_in: torch.Tensor, start: int = 0) -> torch.Tensor:
        return self.logits(act_in, start).argmax(dim=1)

    def loss_layer(self):
        layer = self.layers[-1]
        if layer.spec.kind is not LayerKind.SOFTMAX_XENT:
            raise ShapeError(f"网络 {self.descriptor.name} 最后一层不是 softmax_xent")
        return layer

    def backward(
        self,
        err: torch.Tensor,
        tapes: Dict[int, LayerTape],
        start: int,
    ) -> Dict[int, Params]:
        """
        从最后一层反传到 start 层，返回各可训练层的梯度。

        start 层本身不再向下传播误差（其下的层已冻结）。
        """
        grads: Dict[int, Params] = {}
        for idx in range(len(self.layers) - 1, start - 1, -1):
            layer = self.layers[idx]
            tape = tapes.get(idx)
            if layer.spec.param_shapes:
                grads[idx] = layer.backward_grad(err, self.params[idx], tape=tape)
            if idx > start:
                err = layer.backward_error(err, self.params[idx], tape=tape)
        return grads

    def snapshot(self, indices: Sequence[int]) -> List[Params]:
        return [{k: v.clone() for k, v in self.params[i].items()} for i in indices]
