import numpy as np
import pytest

from ssvqe import (
    Gate,
    Statevector,
    apply_gate,
    apply_gates,
    basis_state,
    cz,
    inner_product,
    ry,
    rz,
    states_allclose,
    superposition_state,
)

from conftest import random_state


def test_basis_state_examples():
    assert np.array_equal(basis_state(2, 3).amplitudes, [0, 0, 0, 1])
    zeros = basis_state(4, 0)
    assert zeros.amplitudes[0] == 1.0
    assert np.count_nonzero(zeros.amplitudes) == 1
    with pytest.raises(ValueError):
        basis_state(1, 2)


def test_qubit_zero_is_most_significant_bit():
    # |q0 q1> = |10> has index 2
    state = apply_gate(basis_state(2, 0), ry(0, np.pi))
    assert abs(state.amplitudes[2]) == pytest.approx(1.0, abs=1e-12)


def test_apply_gate_examples():
    flipped = apply_gate(basis_state(1, 0), ry(0, np.pi))
    assert np.allclose(flipped.amplitudes, [0, 1], atol=1e-12)

    psi = superposition_state(1, 0, 1, "plus_y")
    assert states_allclose(apply_gate(psi, rz(0, 0.0)), psi)

    assert np.allclose(
        apply_gate(basis_state(2, 3), cz(0, 1)).amplitudes, [0, 0, 0, -1]
    )


def test_rotation_conventions():
    # RY(t)|0> = cos(t/2)|0> + sin(t/2)|1>; RZ(t)|0> = exp(-it/2)|0>
    t = 0.7321
    out = apply_gate(basis_state(1, 0), ry(0, t))
    assert np.allclose(out.amplitudes, [np.cos(t / 2), np.sin(t / 2)], atol=1e-14)
    out = apply_gate(basis_state(1, 0), rz(0, t))
    assert np.allclose(out.amplitudes, [np.exp(-0.5j * t), 0], atol=1e-14)


def test_inner_product_examples():
    assert inner_product(basis_state(1, 0), basis_state(1, 0)) == 1
    assert inner_product(basis_state(1, 0), basis_state(1, 1)) == 0
    plus_y = superposition_state(1, 0, 1, "plus_y")
    assert inner_product(basis_state(1, 0), plus_y) == pytest.approx(1 / np.sqrt(2))


def test_inner_product_conjugate_linear_in_first_argument():
    plus_y = superposition_state(1, 0, 1, "plus_y")
    assert inner_product(plus_y, basis_state(1, 1)) == pytest.approx(-1j / np.sqrt(2))


def test_inner_product_dimension_mismatch():
    with pytest.raises(ValueError):
        inner_product(basis_state(1, 0), basis_state(2, 0))


def test_superposition_state_examples():
    s = 1 / np.sqrt(2)
    assert np.allclose(superposition_state(1, 0, 1, "plus_x").amplitudes, [s, s])
    assert np.allclose(superposition_state(1, 0, 1, "plus_y").amplitudes, [s, 1j * s])
    with pytest.raises(ValueError):
        superposition_state(2, 1, 1, "plus_x")
    with pytest.raises(ValueError):
        superposition_state(2, 0, 1, "plus_z")


def _random_gates(n_qubits, count, rng):
    gates = []
    for _ in range(count):
        kind = rng.integers(0, 3)
        q = int(rng.integers(0, n_qubits))
        if kind == 0:
            gates.append(ry(q, float(rng.uniform(0, 2 * np.pi))))
        elif kind == 1:
            gates.append(rz(q, float(rng.uniform(0, 2 * np.pi))))
        else:
            c = int(rng.integers(0, n_qubits))
            if c == q:
                c = (q + 1) % n_qubits
            gates.append(cz(c, q))
    return gates


def test_norm_preserved_over_random_gate_sequences(rng):
    for n_qubits in (2, 3, 5):
        state = Statevector(n_qubits, random_state(n_qubits, rng))
        state = apply_gates(state, _random_gates(n_qubits, 100, rng))
        assert abs(state.norm() ** 2 - 1.0) <= 1e-12


def test_rotations_invert_and_cz_is_self_inverse(rng):
    state = Statevector(3, random_state(3, rng))
    for fwd, back in [
        (ry(1, 0.83), ry(1, -0.83)),
        (rz(2, -1.37), rz(2, 1.37)),
        (cz(0, 2), cz(0, 2)),
    ]:
        result = apply_gate(apply_gate(state, fwd), back)
        assert np.allclose(result.amplitudes, state.amplitudes, atol=1e-12)


def test_gates_preserve_inner_products(rng):
    a = Statevector(3, random_state(3, rng))
    b = Statevector(3, random_state(3, rng))
    before = inner_product(a, b)
    for gate in _random_gates(3, 20, rng):
        a = apply_gate(a, gate)
        b = apply_gate(b, gate)
    assert abs(inner_product(a, b) - before) <= 1e-12


def test_rz_on_basis_state_is_a_global_phase():
    state = basis_state(3, 5)
    out = apply_gate(state, rz(1, 1.234))
    assert states_allclose(out, state, up_to_global_phase=True)
    assert not states_allclose(out, state)  # the phase is really there


def test_gate_validation():
    with pytest.raises(ValueError):
        Gate("CZ", 1, control=1)
    with pytest.raises(ValueError):
        Gate("RX", 0)
    with pytest.raises(ValueError):
        Gate("RY", 0, control=1)
    with pytest.raises(ValueError):
        apply_gate(basis_state(2, 0), ry(2, 0.1))
    with pytest.raises(ValueError):
        apply_gate(basis_state(2, 0), cz(4, 1))


def test_statevector_is_immutable():
    state = basis_state(2, 0)
    with pytest.raises(ValueError):
        state.amplitudes[0] = 0.0
