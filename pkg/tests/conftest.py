import numpy as np
import pytest
import torch

from brdfspace import synthetic
from brdfspace.model import BrdfVAE, Checkpoint, ModelConfig, encode_single
from brdfspace.preprocess import to_network_input

# Small architecture that closes the conv chain (10 -> 5 -> 3 -> 2 -> ... -> 10);
# used wherever training dynamics are under test and full scale would be waste.
TINY_CONFIG = ModelConfig(
    latent_dim=4,
    in_channels=6,
    spatial=10,
    conv_channels=(8, 8, 8),
    fc_dims=(32, 16),
    res_blocks_encoder=2,
    res_blocks_decoder=1,
)


class FakeInput:
    """Stand-in for NetworkInput at non-standard shapes (duck-typed)."""

    def __init__(self, values, mask, name):
        self.values = np.ascontiguousarray(values, dtype=np.float32)
        self.mask = np.ascontiguousarray(mask, dtype=bool)
        self.name = name


def make_tiny_dataset(n=4, seed=0):
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n):
        values = rng.uniform(0, 1.2, size=(6, 10, 10))
        mask = rng.random((2, 10, 10)) > 0.2
        values[~np.repeat(mask, 3, axis=0)] = 0.0
        out.append(FakeInput(values, mask, f"tiny-{i}"))
    return out


@pytest.fixture(scope="session")
def micro_materials():
    return synthetic.micro_overfit_set()


@pytest.fixture(scope="session")
def micro_inputs(micro_materials):
    return [to_network_input(m) for m in micro_materials]


@pytest.fixture(scope="session")
def rand_model():
    """Full-size architecture with seeded random weights; quality-agnostic
    tests (shapes, determinism, channel algebra) run against this."""
    torch.manual_seed(123)
    model = BrdfVAE(ModelConfig())
    model.eval()
    return model


@pytest.fixture(scope="session")
def rand_checkpoint(rand_model, micro_inputs):
    table = {ni.name: encode_single(rand_model, ni.values) for ni in micro_inputs}
    return Checkpoint.from_model(rand_model, latent_table=table)


@pytest.fixture()
def tiny_dataset():
    return make_tiny_dataset()


def pytest_runtest_logreport(report):
    # one visible pass/fail line per acceptance criterion
    if report.when == "call" and "test_acceptance" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        status = "PASS" if report.passed else "FAIL"
        print(f"\n[ACCEPTANCE] {name}: {status}", flush=True)
