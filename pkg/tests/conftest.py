from __future__ import annotations

import pytest
import torch

from edgecl.config import DEFAULT_HW, DEFAULT_MCU_HW, DEFAULT_NET, DEFAULT_SINGLE_HW, DEFAULT_TOY_NET
from edgecl.cost import HwProfile, load_profile
from edgecl.network import NetworkDescriptor


@pytest.fixture(scope="session")
def mobilenet() -> NetworkDescriptor:
    return NetworkDescriptor.from_file(DEFAULT_NET)


@pytest.fixture(scope="session")
def toy_net() -> NetworkDescriptor:
    return NetworkDescriptor.from_file(DEFAULT_TOY_NET)


@pytest.fixture(scope="session")
def octa() -> HwProfile:
    return load_profile(DEFAULT_HW)


@pytest.fixture(scope="session")
def single() -> HwProfile:
    return load_profile(DEFAULT_SINGLE_HW)


@pytest.fixture(scope="session")
def mcu() -> HwProfile:
    return load_profile(DEFAULT_MCU_HW)


@pytest.fixture
def gen() -> torch.Generator:
    return torch.Generator().manual_seed(1234)
