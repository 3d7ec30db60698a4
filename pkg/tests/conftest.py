import numpy as np
import pytest

from ssvqe import Observable, PauliTerm

_OPS = ("X", "Y", "Z")


def random_observable(n_qubits: int, n_terms: int, rng: np.random.Generator) -> Observable:
    """Random real-weighted Pauli sum (terms may merge during canonicalization)."""
    terms = []
    for _ in range(n_terms):
        k = int(rng.integers(1, n_qubits + 1))
        qubits = rng.choice(n_qubits, size=k, replace=False)
        ops = {int(q): _OPS[rng.integers(0, 3)] for q in qubits}
        terms.append(PauliTerm(float(rng.uniform(-1.0, 1.0)), ops))
    return Observable(n_qubits, terms)


def random_state(n_qubits: int, rng: np.random.Generator) -> np.ndarray:
    amps = rng.normal(size=2**n_qubits) + 1j * rng.normal(size=2**n_qubits)
    return amps / np.linalg.norm(amps)


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
