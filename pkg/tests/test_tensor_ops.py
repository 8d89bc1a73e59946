from __future__ import annotations

import numpy as np
import pytest
import torch

from edgecl.errors import ConfigurationError, GeometryError, ShapeError
from edgecl.tensor import ConvGeometry, col2im, flip_coeff, gemm, gemm_parallel, gemm_tiled, im2col


def naive_gemm(a: torch.Tensor, b: torch.Tensor) -> np.ndarray:
    an, bn = a.numpy(), b.numpy()
    m, k = an.shape
    n = bn.shape[1]
    out = np.zeros((m, n), dtype=np.float32)
    for i in range(m):
        for j in range(n):
            s = np.float32(0.0)
            for p in range(k):
                s = np.float32(s + np.float32(an[i, p] * bn[p, j]))
            out[i, j] = s
    return out


def padded(x: np.ndarray, g: ConvGeometry) -> np.ndarray:
    return np.pad(x, ((0, 0), (g.padding, g.pad_end), (g.padding, g.pad_end)))


def naive_im2col(x: torch.Tensor, g: ConvGeometry) -> np.ndarray:
    xp = padded(x.numpy(), g)
    h_out, w_out = g.out_hw(x.shape[1], x.shape[2])
    cols = np.zeros((g.col_rows, h_out * w_out), dtype=np.float32)
    for c in range(g.c_in):
        for ki in range(g.k_h):
            for kj in range(g.k_w):
                row = (c * g.k_h + ki) * g.k_w + kj
                for oy in range(h_out):
                    for ox in range(w_out):
                        cols[row, oy * w_out + ox] = xp[c, oy * g.stride + ki, ox * g.stride + kj]
    return cols


def naive_conv(x: torch.Tensor, w: torch.Tensor, b: torch.Tensor, g: ConvGeometry) -> np.ndarray:
    xp = padded(x.numpy().astype(np.float64), g)
    wn, bn = w.numpy().astype(np.float64), b.numpy().astype(np.float64)
    h_out, w_out = g.out_hw(x.shape[1], x.shape[2])
    out = np.zeros((g.c_out, h_out, w_out))
    for co in range(g.c_out):
        inputs = [co] if g.depthwise else range(g.c_in)
        for oy in range(h_out):
            for ox in range(w_out):
                acc = bn[co]
                for idx, ci in enumerate(inputs):
                    wi = 0 if g.depthwise else idx
                    for ki in range(g.k_h):
                        for kj in range(g.k_w):
                            acc += wn[co, wi, ki, kj] * xp[ci, oy * g.stride + ki, ox * g.stride + kj]
                out[co, oy, ox] = acc
    return out


def random_geometry(rng: np.random.Generator, depthwise: bool = False) -> tuple[ConvGeometry, int, int]:
    while True:
        c_in = int(rng.integers(1, 5))
        k = int(rng.integers(1, 4))
        stride = int(rng.integers(1, 3))
        pad = int(rng.integers(0, 2))
        pad_end = int(rng.integers(0, 2))
        h, w = int(rng.integers(k, 7)), int(rng.integers(k, 7))
        g = ConvGeometry(
            c_in=c_in,
            c_out=c_in if depthwise else int(rng.integers(1, 5)),
            k_h=k,
            k_w=k,
            stride=stride,
            padding=pad,
            padding_end=pad_end,
            depthwise=depthwise,
        )
        try:
            g.out_hw(h, w)
        except GeometryError:
            continue
        return g, h, w


@pytest.mark.parametrize("seed", range(100))
def test_gemm_matches_naive_oracle_exactly(seed: int) -> None:
    rng = np.random.default_rng(seed)
    m, k, n = (int(v) for v in rng.integers(1, 7, size=3))
    gen = torch.Generator().manual_seed(seed)
    a, b = torch.randn(m, k, generator=gen), torch.randn(k, n, generator=gen)
    out = gemm(a, b)
    assert np.array_equal(out.numpy(), naive_gemm(a, b))


@pytest.mark.parametrize("seed", range(100))
def test_im2col_and_conv_match_oracles(seed: int) -> None:
    rng = np.random.default_rng(1000 + seed)
    g, h, w = random_geometry(rng, depthwise=bool(seed % 3 == 0))
    gen = torch.Generator().manual_seed(seed)
    x = torch.randn(g.c_in, h, w, generator=gen)
    assert np.array_equal(im2col(x, g).numpy(), naive_im2col(x, g))

    from edgecl.layers import LayerKind, LayerSpec, build_layer
    from edgecl.layers.types import infer_out_shape

    kind = LayerKind.DEPTHWISE if g.depthwise else LayerKind.CONV
    spec = LayerSpec("c", kind, (g.c_in, h, w), infer_out_shape(kind, (g.c_in, h, w), g), g)
    layer = build_layer(spec)
    params = layer.init_params(gen)
    params["bias"] = torch.randn(g.c_out, generator=gen)
    out = layer.forward(x.unsqueeze(0), params)[0]
    expected = torch.from_numpy(naive_conv(x, params["weight"], params["bias"], g)).float()
    torch.testing.assert_close(out, expected, rtol=1e-5, atol=1e-5)


@pytest.mark.parametrize("seed", range(20))
def test_flip_coeff_matches_loops(seed: int) -> None:
    gen = torch.Generator().manual_seed(seed)
    co, ci, kh, kw = (int(v) for v in torch.randint(1, 5, (4,), generator=gen))
    coeff = torch.randn(co, ci, kh, kw, generator=gen)
    flipped = flip_coeff(coeff)
    assert flipped.shape == (ci, co, kh, kw)
    for a in range(ci):
        for b in range(co):
            for i in range(kh):
                for j in range(kw):
                    assert flipped[a, b, i, j] == coeff[b, a, kh - 1 - i, kw - 1 - j]


def test_flip_coeff_rejects_non_4d() -> None:
    with pytest.raises(ShapeError):
        flip_coeff(torch.zeros(3, 3))


@pytest.mark.parametrize("seed", range(20))
def test_col2im_is_adjoint_of_im2col(seed: int) -> None:
    rng = np.random.default_rng(2000 + seed)
    g, h, w = random_geometry(rng)
    gen = torch.Generator().manual_seed(seed)
    x = torch.randn(2, g.c_in, h, w, generator=gen)
    cols = im2col(x, g)
    y = torch.randn(cols.shape, generator=gen)
    lhs = float((cols.double() * y.double()).sum())
    rhs = float((x.double() * col2im(y, g, x.shape).double()).sum())
    assert lhs == pytest.approx(rhs, rel=1e-4, abs=1e-4)


def test_pointwise_single_sample_im2col_is_a_view() -> None:
    x = torch.randn(4, 3, 3)
    cols = im2col(x, ConvGeometry(c_in=4, c_out=2))
    assert cols.data_ptr() == x.data_ptr()
    assert cols.shape == (4, 9)


def test_stride_two_same_padding_halves_extent() -> None:
    g = ConvGeometry(c_in=3, c_out=8, k_h=3, k_w=3, stride=2, padding=0, padding_end=1)
    assert g.out_hw(128, 128) == (64, 64)


def test_geometry_rejects_non_integral_output() -> None:
    g = ConvGeometry(c_in=1, c_out=1, k_h=3, k_w=3, stride=2)
    with pytest.raises(GeometryError):
        g.out_hw(6, 6)
    with pytest.raises(ConfigurationError):
        ConvGeometry(c_in=2, c_out=3, depthwise=True)


def test_gemm_accumulates_into_copy() -> None:
    a, b = torch.ones(2, 3), torch.ones(3, 2)
    acc = torch.full((2, 2), 10.0)
    out = gemm(a, b, accumulate_into=acc)
    assert torch.equal(out, torch.full((2, 2), 13.0))
    assert torch.equal(acc, torch.full((2, 2), 10.0))


def test_gemm_rejects_mismatched_inner_dims() -> None:
    with pytest.raises(ShapeError):
        gemm(torch.zeros(2, 3), torch.zeros(4, 2))


@pytest.mark.parametrize("seed", range(10))
def test_tiled_and_parallel_gemm_are_bit_identical(seed: int) -> None:
    gen = torch.Generator().manual_seed(seed)
    a, b = torch.randn(37, 19, generator=gen), torch.randn(19, 23, generator=gen)
    reference = gemm(a, b)
    for c_tile in (1, 4, 16, 64):
        assert torch.equal(gemm_tiled(a, b, c_tile), reference)
    for workers in (1, 2, 3, 8):
        assert torch.equal(gemm_parallel(a, b, workers), reference)


def test_grouped_gemm_matches_per_group() -> None:
    gen = torch.Generator().manual_seed(7)
    a, b = torch.randn(4, 1, 9, generator=gen), torch.randn(4, 9, 5, generator=gen)
    out = gemm(a, b)
    for g in range(4):
        assert torch.equal(out[g], gemm(a[g], b[g]))
