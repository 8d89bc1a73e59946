from __future__ import annotations

import pytest
import torch

from edgecl.data import class_prototypes, evaluate, per_class_accuracy, synth_dataset
from edgecl.errors import ConfigurationError
from edgecl.network import Network, NetworkDescriptor


def test_dataset_layout() -> None:
    images, labels = synth_dataset(4, 5, (3, 8, 8), seed=1)
    assert images.shape == (20, 3, 8, 8)
    assert labels.tolist() == [c for c in range(4) for _ in range(5)]


def test_dataset_is_deterministic() -> None:
    a, _ = synth_dataset(3, 4, (3, 8, 8), seed=2)
    b, _ = synth_dataset(3, 4, (3, 8, 8), seed=2)
    assert torch.equal(a, b)


def test_noise_seed_keeps_prototypes() -> None:
    train, _ = synth_dataset(3, 50, (3, 8, 8), seed=2)
    test, _ = synth_dataset(3, 50, (3, 8, 8), seed=2, noise_seed=99)
    assert not torch.equal(train, test)
    protos = class_prototypes(3, (3, 8, 8), seed=2)
    for c in range(3):
        torch.testing.assert_close(train[c * 50 : (c + 1) * 50].mean(0), protos[c], atol=0.45, rtol=0)
        torch.testing.assert_close(test[c * 50 : (c + 1) * 50].mean(0), protos[c], atol=0.45, rtol=0)


def test_zero_noise_returns_prototypes() -> None:
    images, labels = synth_dataset(2, 3, (2, 4, 4), seed=0, noise=0.0)
    protos = class_prototypes(2, (2, 4, 4), seed=0)
    assert torch.equal(images, protos[labels])


def test_pooled_prototypes_are_distinct() -> None:
    pooled = class_prototypes(5, (3, 8, 8), seed=0).mean(dim=(2, 3))
    assert torch.cdist(pooled, pooled).add(torch.eye(5)).min() > 0.1


@pytest.mark.parametrize(
    "kwargs",
    [
        {"classes": 1, "per_class": 2, "input_shape": (3, 4, 4)},
        {"classes": 2, "per_class": 0, "input_shape": (3, 4, 4)},
        {"classes": 2, "per_class": 2, "input_shape": (3, 4, 4), "noise": -1.0},
        {"classes": 2, "per_class": 2, "input_shape": (16,)},
    ],
)
def test_invalid_arguments(kwargs: dict) -> None:
    with pytest.raises(ConfigurationError):
        synth_dataset(**kwargs)


def test_evaluate_restricts_to_classes(toy_net: NetworkDescriptor) -> None:
    net = Network(toy_net, seed=0)
    images, labels = synth_dataset(5, 4, (3, 8, 8), seed=0)
    predicted = net.predict(images)
    hits = predicted == labels
    assert evaluate(net, images, labels) == pytest.approx(100.0 * hits.float().mean().item())
    assert evaluate(net, images, labels, [0]) == pytest.approx(100.0 * hits[:4].float().mean().item())
    assert evaluate(net, images, labels, []) == 0.0
    per_class = per_class_accuracy(net, images, labels)
    assert sorted(per_class) == [0, 1, 2, 3, 4]
