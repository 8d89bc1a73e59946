from __future__ import annotations

import pytest
import torch

from edgecl.config import TrainConfig
from edgecl.errors import ConfigurationError, ShapeError
from edgecl.layers import LayerTape
from edgecl.network import Network, NetworkDescriptor
from edgecl.train import FisherBank, FisherState, ar1_step, fisher_accumulate, train_batch, train_epochs


def test_zero_fisher_is_plain_sgd(gen: torch.Generator) -> None:
    p, g = torch.randn(5, generator=gen), torch.randn(5, generator=gen)
    out = ar1_step(p, g, FisherState.zeros((5,)), lr=0.1)
    assert torch.equal(out, p - 0.1 * g)


def test_saturated_fisher_freezes_parameters(gen: torch.Generator) -> None:
    p, g = torch.randn(5, generator=gen), torch.randn(5, generator=gen)
    state = FisherState(f=torch.full((5,), 0.001), f_max_clip=0.001)
    assert torch.equal(ar1_step(p, g, state, lr=0.5), p)


def test_partial_fisher_scales_step(gen: torch.Generator) -> None:
    p, g = torch.randn(4, generator=gen), torch.randn(4, generator=gen)
    state = FisherState(f=torch.full((4,), 0.75), f_max_clip=1.0)
    torch.testing.assert_close(ar1_step(p, g, state, lr=1.0), p - 0.25 * g)


def test_ar1_rejects_bad_arguments() -> None:
    with pytest.raises(ShapeError):
        ar1_step(torch.zeros(3), torch.zeros(4), FisherState.zeros((3,)), lr=0.1)
    with pytest.raises(ConfigurationError):
        ar1_step(torch.zeros(3), torch.zeros(3), FisherState.zeros((3,)), lr=-1.0)
    with pytest.raises(ConfigurationError):
        FisherState.zeros((3,), f_max_clip=0.0)


def test_fisher_accumulate_decays_and_clips() -> None:
    state = FisherState(f=torch.tensor([0.5, 0.0]), f_max_clip=1.0)
    out = fisher_accumulate(state, torch.tensor([1.0, 10.0]), fisher_decay=0.5)
    torch.testing.assert_close(out.f, torch.tensor([0.75, 1.0]))
    assert torch.equal(state.f, torch.tensor([0.5, 0.0]))
    with pytest.raises(ShapeError):
        fisher_accumulate(state, torch.zeros(3))
    with pytest.raises(ConfigurationError):
        fisher_accumulate(state, torch.zeros(2), fisher_decay=1.5)


def test_fisher_bank_creates_zero_states() -> None:
    bank = FisherBank(f_max_clip=0.5)
    state = bank.get(3, "weight", (2, 2))
    assert torch.equal(state.f, torch.zeros(2, 2))
    assert state.f_max_clip == 0.5
    assert bank.element_count == 4


def test_training_without_fisher_matches_sgd_trajectory(toy_net: NetworkDescriptor, gen: torch.Generator) -> None:
    net = Network(toy_net, seed=5, lr_cut="conv2")
    ref = net.clone()
    cfg = TrainConfig(learning_rate=0.05, fisher_decay=1.0, f_max_clip=1.0)
    bank = FisherBank(f_max_clip=1.0)
    cut = net.lr_cut
    for _ in range(10):
        x = torch.randn(8, *toy_net.latent_shape(cut), generator=gen)
        y = torch.randint(0, 5, (8,), generator=gen)
        train_batch(net, (x, y), cfg, bank)

        tapes: dict[int, LayerTape] = {}
        logits = ref.forward(x, start=cut, training=True, tapes=tapes)
        _, err = ref.loss_layer().loss_and_error(logits, y)
        for idx, grads in ref.backward(err, tapes, start=cut).items():
            for key, grad in grads.items():
                ref.params[idx][key] = ref.params[idx][key] - 0.05 * grad
        for idx, tape in tapes.items():
            ref.layers[idx].commit_buffers(ref.params[idx], tape, 1.0)
    for a, b in zip(net.params, ref.params):
        for key in a:
            assert torch.equal(a[key], b[key]), key


def test_training_never_touches_frozen_layers(toy_net: NetworkDescriptor, gen: torch.Generator) -> None:
    net = Network(toy_net, seed=6, lr_cut="conv2")
    frozen = list(range(net.lr_cut))
    before = net.snapshot(frozen)
    cfg = TrainConfig(learning_rate=0.1, f_max_clip=1.0)
    x = torch.randn(16, *toy_net.latent_shape(net.lr_cut), generator=gen)
    y = torch.randint(0, 5, (16,), generator=gen)
    train_epochs(net, [[(x, y)]] * 3, cfg)
    for old, new in zip(before, net.snapshot(frozen)):
        for key in old:
            assert torch.equal(old[key], new[key])


def test_training_reduces_loss(toy_net: NetworkDescriptor, gen: torch.Generator) -> None:
    net = Network(toy_net, seed=7, lr_cut="fc")
    x = torch.randn(20, *toy_net.latent_shape("fc"), generator=gen)
    y = torch.arange(20) % 5
    history = train_epochs(net, [[(x, y)]] * 30, TrainConfig(learning_rate=0.5, f_max_clip=1.0, fisher_decay=1.0))
    assert history[-1] < history[0]


def test_train_batch_rejects_wrong_latent_shape(toy_net: NetworkDescriptor) -> None:
    net = Network(toy_net, lr_cut="fc")
    with pytest.raises(ConfigurationError):
        train_batch(net, (torch.zeros(2, 3, 8, 8), torch.zeros(2, dtype=torch.long)), TrainConfig())


def test_train_config_validation() -> None:
    with pytest.raises(ConfigurationError):
        TrainConfig(epochs=-1)
    with pytest.raises(ConfigurationError):
        TrainConfig(fisher_decay=2.0)


def test_fisher_converges_to_squared_gradient(gen: torch.Generator) -> None:
    grad = torch.rand(6, generator=gen) * 0.1
    state = FisherState.zeros((6,), f_max_clip=1.0)
    for n in range(1, 21):
        state = fisher_accumulate(state, grad, fisher_decay=0.5)
        torch.testing.assert_close(state.f, (1 - 0.5**n) * grad * grad)
    for _ in range(200):
        state = fisher_accumulate(state, grad, fisher_decay=0.5)
    torch.testing.assert_close(state.f, grad * grad)


@pytest.mark.parametrize("seed", range(10))
def test_ar1_step_never_exceeds_sgd_step(seed: int) -> None:
    g = torch.Generator().manual_seed(seed)
    p, grad = torch.randn(32, generator=g), torch.randn(32, generator=g)
    state = FisherState(f=torch.rand(32, generator=g) * 2e-3, f_max_clip=1e-3)
    delta = (ar1_step(p, grad, state, lr=0.3) - p).abs()
    assert bool((delta <= 0.3 * grad.abs() + 1e-6).all())


def test_uniform_fisher_is_sgd_with_rescaled_rate(gen: torch.Generator) -> None:
    p, grad = torch.randn(8, generator=gen), torch.randn(8, generator=gen)
    state = FisherState(f=torch.full((8,), 0.25), f_max_clip=1.0)
    torch.testing.assert_close(ar1_step(p, grad, state, lr=0.2), p - (0.2 * 0.75) * grad)


def _all_params(net: Network) -> list:
    return net.snapshot(range(len(net)))


def _assert_bit_identical(before: list, after: list) -> None:
    for idx, (old, new) in enumerate(zip(before, after)):
        for key in old:
            assert torch.equal(old[key], new[key]), (idx, key)


def test_zero_learning_rate_leaves_network_bit_identical(toy_net: NetworkDescriptor, gen: torch.Generator) -> None:
    net = Network(toy_net, seed=2, lr_cut=0)
    before = _all_params(net)
    x = torch.randn(16, 3, 8, 8, generator=gen)
    y = torch.arange(16) % 5
    train_epochs(net, [[(x, y)]] * 3, TrainConfig(learning_rate=0.0, f_max_clip=1.0))
    _assert_bit_identical(before, _all_params(net))


def test_saturated_fisher_leaves_network_bit_identical(toy_net: NetworkDescriptor, gen: torch.Generator) -> None:
    net = Network(toy_net, seed=3, lr_cut=0)
    bank = FisherBank(f_max_clip=1e-3)
    for idx in net.trainable_indices():
        for key, shape in net.layers[idx].spec.param_shapes.items():
            bank.put(idx, key, FisherState(f=torch.full(shape, 1e-3), f_max_clip=1e-3))
    before = _all_params(net)
    x = torch.randn(16, 3, 8, 8, generator=gen)
    y = torch.arange(16) % 5
    cfg = TrainConfig(learning_rate=0.5, fisher_decay=1.0, f_max_clip=1e-3)
    train_epochs(net, [[(x, y)]] * 3, cfg, bank)
    _assert_bit_identical(before, _all_params(net))


def test_training_moves_running_stats_above_cut(toy_net: NetworkDescriptor, gen: torch.Generator) -> None:
    net = Network(toy_net, seed=4, lr_cut=0)
    bn = toy_net.index_of("conv1/bn")
    x = torch.randn(16, 3, 8, 8, generator=gen) + 1.0
    train_batch(net, (x, torch.arange(16) % 5), TrainConfig(learning_rate=0.1, f_max_clip=1.0))
    assert not torch.equal(net.params[bn]["running_mean"], torch.zeros(8))
