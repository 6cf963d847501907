import numpy as np
import pytest

from berezin_lab.algebra.selfdual import SelfDualOperator, SelfDualSpace, random_hamiltonian


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def scaled_hamiltonian(m, rng, norm=0.8):
    """Random self-dual Hamiltonian on the canonical space with the given operator norm."""
    space = SelfDualSpace.canonical(m)
    h = random_hamiltonian(space, rng).H
    return SelfDualOperator(space, norm * h / np.linalg.norm(h, 2))


@pytest.fixture
def make_hamiltonian(rng):
    def make(m, norm=0.8):
        return scaled_hamiltonian(m, rng, norm)
    return make
