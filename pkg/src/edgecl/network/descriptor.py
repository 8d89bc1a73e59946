from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from math import prod
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from edgecl.errors import ConfigurationError, EdgeCLError, GeometryError
from edgecl.layers import LayerKind, LayerSpec, RenormClip
from edgecl.layers.types import infer_out_shape
from edgecl.tensor import ConvGeometry

LAYER_PREFIX = "layer "
_TRUE = {"1", "true", "yes", "on"}


@dataclass
class NetworkDescriptor:
    """
    网络描述：有序层列表、输入形状与（可选的）各切分点准确率元数据。

    LR 切分点 cut 是第一个参与训练的层的下标：[0, cut) 冻结，
    latent 即第 cut 层的输入；cut = 0 时 latent 就是原始图像。
    """

    name: str
    input_shape: Tuple[int, ...]
    layers: List[LayerSpec]
    accuracy_by_cut: Dict[str, float] = field(default_factory=dict)
    renorm_clip: RenormClip = field(default_factory=RenormClip)

    def __post_init__(self) -> None:
        if not self.layers:
            raise ConfigurationError(f"网络 {self.name} 没有任何层")
        shape = tuple(self.input_shape)
        names = set()
        for spec in self.layers:
            if tuple(spec.in_shape) != shape:
                raise ConfigurationError(
                    f"层 {spec.name} 的输入形状 {spec.in_shape} 与上一层输出 {shape} 不衔接"
                )
            if spec.name in names:
                raise ConfigurationError(f"层名重复: {spec.name}")
            names.add(spec.name)
            shape = tuple(spec.out_shape)
        for cut in self.accuracy_by_cut:
            self.index_of(cut)

    @property
    def num_classes(self) -> int:
        return self.layers[-1].out_shape[0]

    @property
    def layer_names(self) -> List[str]:
        return [spec.name for spec in self.layers]

    def index_of(self, cut: str | int) -> int:
        """
        将切分点名称（或下标）解析为层下标。

        名称既可以是完整层名（如 conv5_4/dw），也可以是块名（如 conv5_4），
        块名解析为该块的第一层。
        """
        if isinstance(cut, int):
            if 0 <= cut < len(self.layers):
                return cut
            raise ConfigurationError(f"切分点下标越界: {cut}（共 {len(self.layers)} 层）")
        text = str(cut).strip()
        if text.isdigit():
            return self.index_of(int(text))
        for idx, spec in enumerate(self.layers):
            if spec.name == text:
                return idx
        for idx, spec in enumerate(self.layers):
            if spec.name.startswith(text + "/"):
                return idx
        raise ConfigurationError(
            f"未知的切分点: {cut}；可用名称: {', '.join(self.cut_names())}"
        )

    def cut_names(self) -> List[str]:
        """
        可作为 LR 层的名称：所有带参数的主层与池化层（不含 /bn、/relu 与损失层）。
        """
        names = []
        for spec in self.layers:
            if spec.kind in (LayerKind.RELU, LayerKind.BATCH_RENORM, LayerKind.SOFTMAX_XENT):
                continue
            names.append(spec.name)
        return names

    def latent_shape(self, cut: str | int) -> Tuple[int, ...]:
        return tuple(self.layers[self.index_of(cut)].in_shape)

    def latent_size(self, cut: str | int) -> int:
        return prod(self.latent_shape(cut))

    @classmethod
    def from_file(cls, path: str | Path) -> "NetworkDescriptor":
        path_obj = Path(path).expanduser().resolve()
        if not path_obj.is_file():
            raise ConfigurationError(f"网络描述文件不存在: {path_obj}")
        return cls.from_text(path_obj.read_text(encoding="utf-8"), source=str(path_obj))

    @classmethod
    def from_text(cls, text: str, source: str = "<text>") -> "NetworkDescriptor":
        parser = configparser.ConfigParser(interpolation=None)
        parser.optionxform = str  # 保留层名与键的大小写
        try:
            parser.read_string(text, source=source)
        except configparser.Error as exc:
            raise ConfigurationError(f"无法解析网络描述 {source}: {exc}") from exc
        if not parser.has_section("network"):
            raise ConfigurationError(f"{source} 缺少 [network] 段")
        net = parser["network"]
        input_shape = _parse_dims(net.get("input_shape", ""), "input_shape")
        try:
            clip = RenormClip(
                r_max=net.getfloat("renorm_r_max", RenormClip.r_max),
                d_max=net.getfloat("renorm_d_max", RenormClip.d_max),
                eps=net.getfloat("renorm_eps", RenormClip.eps),
                momentum=net.getfloat("renorm_momentum", RenormClip.momentum),
            )
            accuracy = {
                key[len("accuracy.") :]: float(value)
                for key, value in net.items()
                if key.startswith("accuracy.")
            }
        except ValueError as exc:
            raise ConfigurationError(f"{source} 的 [network] 段含非数值: {exc}") from exc

        layers: List[LayerSpec] = []
        shape = input_shape
        for section in parser.sections():
            if not section.startswith(LAYER_PREFIX):
                continue
            layer_name = section[len(LAYER_PREFIX) :].strip()
            for spec in _expand_layer(layer_name, parser[section], shape):
                layers.append(spec)
                shape = spec.out_shape
        return cls(
            name=net.get("name", Path(source).stem),
            input_shape=input_shape,
            layers=layers,
            accuracy_by_cut=accuracy,
            renorm_clip=clip,
        )


def _parse_dims(text: str, what: str) -> Tuple[int, ...]:
    try:
        dims = tuple(int(p) for p in text.replace("x", ",").split(",") if p.strip())
    except ValueError as exc:
        raise ConfigurationError(f"{what} 不是合法的维度列表: {text!r}") from exc
    if not dims or min(dims) < 1:
        raise ConfigurationError(f"{what} 不是合法的维度列表: {text!r}")
    return dims


def _expand_layer(
    name: str,
    section: configparser.SectionProxy,
    in_shape: Tuple[int, ...],
) -> List[LayerSpec]:
    raw_kind = section.get("kind", "").strip()
    try:
        kind = LayerKind(raw_kind)
    except ValueError as exc:
        valid = ", ".join(k.value for k in LayerKind)
        raise ConfigurationError(f"层 {name} 的 kind={raw_kind!r} 未知；可选: {valid}") from exc

    geom: Optional[ConvGeometry] = None
    out_shape: Optional[Tuple[int, ...]] = None
    try:
        if kind.is_conv:
            geom = _conv_geometry(section, in_shape[0], kind is LayerKind.DEPTHWISE)
        elif kind is LayerKind.FULLY_CONNECTED:
            out_shape = (section.getint("out", 0),)
    except EdgeCLError:
        raise
    except ValueError as exc:
        raise ConfigurationError(f"层 {name} 的参数不是整数: {exc}") from exc
    if out_shape is not None and out_shape[0] < 1:
        raise ConfigurationError(f"全连接层 {name} 需要 out >= 1")

    try:
        main = LayerSpec(
            name=name,
            kind=kind,
            in_shape=tuple(in_shape),
            out_shape=out_shape if out_shape is not None else infer_out_shape(kind, in_shape, geom),
            geom=geom,
        )
    except GeometryError as exc:
        raise ConfigurationError(f"层 {name}: {exc}") from exc

    specs = [main]
    if section.get("renorm", "false").strip().lower() in _TRUE:
        specs.append(
            LayerSpec(name=f"{name}/bn", kind=LayerKind.BATCH_RENORM, in_shape=main.out_shape, out_shape=main.out_shape)
        )
    if section.get("relu", "false").strip().lower() in _TRUE:
        specs.append(
            LayerSpec(name=f"{name}/relu", kind=LayerKind.RELU, in_shape=main.out_shape, out_shape=main.out_shape)
        )
    return specs


def _conv_geometry(section: configparser.SectionProxy, c_in: int, depthwise: bool) -> ConvGeometry:
    kernel = section.getint("kernel", 1)
    pad_end = section.get("padding_end")
    return ConvGeometry(
        c_in=c_in,
        c_out=c_in if depthwise else section.getint("c_out", c_in),
        k_h=section.getint("kernel_h", kernel),
        k_w=section.getint("kernel_w", kernel),
        stride=section.getint("stride", 1),
        padding=section.getint("padding", 0),
        padding_end=int(pad_end) if pad_end is not None else None,
        depthwise=depthwise,
    )
