import math

import numpy as np
import pytest

from zkfinger.circuit import build_threshold_circuit
from zkfinger.constraints import QAP
from zkfinger.groth16 import setup
from zkfinger.minutiae import Minutia, MinutiaKind


@pytest.fixture
def rng():
    return np.random.default_rng(0xF1A9)


@pytest.fixture
def small_minutiae():
    return [
        Minutia(100.0, 100.0, 0.5, MinutiaKind.RIDGE_ENDING),
        Minutia(140.0, 110.0, 2.1, MinutiaKind.BIFURCATION),
        Minutia(120.0, 150.0, 4.0, MinutiaKind.RIDGE_ENDING),
        Minutia(90.0, 135.0, 1.0, MinutiaKind.BIFURCATION),
    ]


def random_minutiae(rng, count, width=400.0, height=400.0):
    kinds = (MinutiaKind.RIDGE_ENDING, MinutiaKind.BIFURCATION)
    return [
        Minutia(
            float(rng.uniform(0, width)),
            float(rng.uniform(0, height)),
            float(rng.uniform(0, 2 * math.pi)),
            kinds[int(rng.integers(2))],
        )
        for _ in range(count)
    ]


@pytest.fixture(scope="session")
def keys_1x1():
    """One ceremony for the 1x1 threshold circuit, shared across tests."""
    tc = build_threshold_circuit(1, 1)
    qap = QAP(tc.circuit.to_r1cs())
    pk, vk, transcript = setup(qap, tc.circuit.digest(), seeds=[b"a", b"b", b"c"])
    return tc, qap, pk, vk, transcript
