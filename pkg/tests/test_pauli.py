import numpy as np
import pytest

from ssvqe import (
    Observable,
    ObservableParseError,
    PauliTerm,
    apply_observable,
    basis_state,
    dense_matrix,
    exact_spectrum,
    expectation,
    parse_observable,
    random_transverse_ising,
    serialize_observable,
    Statevector,
)

from conftest import random_observable, random_state

_SIGMA = {
    "I": np.eye(2),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def kron_matrix(obs: Observable) -> np.ndarray:
    """Independent dense materialization via explicit Kronecker products."""
    dim = 2**obs.n_qubits
    total = np.zeros((dim, dim), dtype=complex)
    for term in obs.terms:
        ops = term.as_dict()
        mat = np.eye(1)
        for q in range(obs.n_qubits):  # qubit 0 is the leftmost factor
            mat = np.kron(mat, _SIGMA[ops.get(q, "I")])
        total += term.coefficient * mat
    return total


def test_expectation_examples():
    z0 = Observable(1, [PauliTerm(1.0, {0: "Z"})])
    x0 = Observable(1, [PauliTerm(1.0, {0: "X"})])
    assert expectation(z0, basis_state(1, 0)) == pytest.approx(1.0)
    assert expectation(x0, basis_state(1, 0)) == pytest.approx(0.0)
    zz = Observable(2, [PauliTerm(1.0, {0: "Z", 1: "Z"})])
    assert expectation(zz, basis_state(2, 1)) == pytest.approx(-1.0)


def test_apply_observable_examples():
    x0 = Observable(1, [PauliTerm(1.0, {0: "X"})])
    assert np.allclose(apply_observable(x0, basis_state(1, 0)), [0, 1])
    two_z = Observable(1, [PauliTerm(2.0, {0: "Z"})])
    assert np.allclose(apply_observable(two_z, basis_state(1, 1)), [0, -2])
    empty = Observable(2, [])
    assert np.allclose(apply_observable(empty, basis_state(2, 2)), np.zeros(4))


def test_expectation_dimension_mismatch():
    z0 = Observable(1, [PauliTerm(1.0, {0: "Z"})])
    with pytest.raises(ValueError):
        expectation(z0, basis_state(2, 0))


def test_expectation_matches_kron_matrix_on_random_observables(rng):
    for _ in range(20):
        obs = random_observable(3, 6, rng)
        psi = random_state(3, rng)
        state = Statevector(3, psi)
        dense = kron_matrix(obs)
        expected = np.real(psi.conj() @ dense @ psi)
        assert expectation(obs, state) == pytest.approx(expected, abs=1e-10)
        assert np.allclose(apply_observable(obs, state), dense @ psi, atol=1e-10)
        assert np.allclose(dense_matrix(obs), dense, atol=1e-12)


def test_expectation_linear_in_observable(rng):
    a = random_observable(3, 4, rng)
    b = random_observable(3, 4, rng)
    alpha, beta = 0.7, -1.3
    combined = Observable(
        3,
        [PauliTerm(alpha * t.coefficient, t.operators) for t in a.terms]
        + [PauliTerm(beta * t.coefficient, t.operators) for t in b.terms],
    )
    psi = Statevector(3, random_state(3, rng))
    assert expectation(combined, psi) == pytest.approx(
        alpha * expectation(a, psi) + beta * expectation(b, psi), abs=1e-12
    )


def test_duplicate_terms_merge_and_zero_terms_drop():
    obs = Observable(
        2,
        [PauliTerm(0.5, {0: "X"}), PauliTerm(0.25, {0: "X"}), PauliTerm(0.0, {1: "Z"})],
    )
    assert len(obs.terms) == 1
    assert obs.terms[0].coefficient == 0.75


def test_term_validation():
    with pytest.raises(ValueError):
        PauliTerm(1.0, [(0, "X"), (0, "Z")])
    with pytest.raises(ValueError):
        PauliTerm(float("nan"), {0: "X"})
    with pytest.raises(ValueError):
        Observable(1, [PauliTerm(1.0, {3: "X"})])


def test_random_transverse_ising_single_qubit():
    obs = random_transverse_ising(1, 9)
    assert len(obs.terms) == 1
    (term,) = obs.terms
    assert term.as_dict() == {0: "X"}
    spectrum = exact_spectrum(obs)
    assert np.allclose(
        spectrum.eigenvalues, [-term.coefficient, term.coefficient], atol=1e-12
    )


def test_random_transverse_ising_term_counts():
    obs = random_transverse_ising(4, 0)
    singles = [t for t in obs.terms if len(t.operators) == 1]
    pairs = [t for t in obs.terms if len(t.operators) == 2]
    assert len(singles) == 4 and all(
        op == "X" for t in singles for _, op in t.operators
    )
    assert len(pairs) == 6 and all(
        op == "Z" for t in pairs for _, op in t.operators
    )
    assert all(0.0 <= t.coefficient < 1.0 for t in obs.terms)


def test_random_transverse_ising_deterministic():
    assert random_transverse_ising(4, 42) == random_transverse_ising(4, 42)
    assert random_transverse_ising(4, 42) != random_transverse_ising(4, 43)


def test_parse_observable_examples():
    obs = parse_observable("0.5 X0 Z2")
    assert obs.n_qubits == 3
    assert obs.terms[0].coefficient == 0.5
    assert obs.terms[0].as_dict() == {0: "X", 2: "Z"}

    identity = parse_observable("1.0 I")
    assert identity.terms[0].operators == ()
    assert identity.identity_coefficient() == 1.0

    with pytest.raises(ObservableParseError) as err:
        parse_observable("0.3 X0 X0")
    assert err.value.line_number == 1


def test_parse_observable_comments_blanks_and_scientific_notation():
    text = "# header\n\n-2.5e-3 Y1  # trailing comment\n1e2 Z0\n"
    obs = parse_observable(text)
    coeffs = {t.as_dict()[1] if 1 in t.as_dict() else t.as_dict()[0]: t.coefficient
              for t in obs.terms}
    assert coeffs == {"Y": -2.5e-3, "Z": 100.0}


def test_parse_observable_error_line_numbers():
    with pytest.raises(ObservableParseError) as err:
        parse_observable("1.0 X0\nbogus X1\n")
    assert err.value.line_number == 2
    with pytest.raises(ObservableParseError) as err:
        parse_observable("1.0 X0\n\n2.0 W3\n")
    assert err.value.line_number == 3
    with pytest.raises(ObservableParseError):
        parse_observable("inf X0")
    with pytest.raises(ObservableParseError):
        parse_observable("1.0")


def test_serialize_round_trip(rng):
    for _ in range(10):
        obs = random_observable(4, 8, rng)
        again = parse_observable(serialize_observable(obs), n_qubits=4)
        assert again.n_qubits == obs.n_qubits
        assert len(again.terms) == len(obs.terms)
        for t1, t2 in zip(again.terms, obs.terms):
            assert t1.operators == t2.operators
            assert t1.coefficient == pytest.approx(t2.coefficient, rel=1e-15)


def test_exact_spectrum_frozen_two_qubit_case():
    # H = Z0 Z1 + 0.5 X0 couples |00>~|10> and |01>~|11> into 2x2 blocks
    # [[1, .5], [.5, -1]] and [[-1, .5], [.5, 1]]; both have eigenvalues
    # +/- sqrt(1.25)
    obs = parse_observable("1.0 Z0 Z1\n0.5 X0\n")
    root = np.sqrt(1.25)
    spectrum = exact_spectrum(obs)
    assert np.allclose(spectrum.eigenvalues, [-root, -root, root, root], atol=1e-12)
    # cross-check against the independent Kronecker oracle
    assert np.allclose(
        spectrum.eigenvalues, np.linalg.eigvalsh(kron_matrix(obs)), atol=1e-12
    )


def test_exact_spectrum_z0():
    spectrum = exact_spectrum(Observable(1, [PauliTerm(1.0, {0: "Z"})]))
    assert np.allclose(spectrum.eigenvalues, [-1.0, 1.0])
    assert abs(spectrum.eigenvector(0).amplitudes[1]) == pytest.approx(1.0)
    assert abs(spectrum.eigenvector(1).amplitudes[0]) == pytest.approx(1.0)


def test_eigenvalue_sum_equals_identity_trace(rng):
    for _ in range(5):
        obs = random_observable(3, 5, rng)
        with_offset = Observable(
            3, list(obs.terms) + [PauliTerm(0.375, {})]
        )
        spectrum = exact_spectrum(with_offset)
        assert spectrum.eigenvalues.sum() == pytest.approx(
            8 * with_offset.identity_coefficient(), abs=1e-9
        )


def test_exact_spectrum_eigenpairs_are_consistent(rng):
    obs = random_observable(3, 7, rng)
    spectrum = exact_spectrum(obs)
    dense = dense_matrix(obs)
    vecs = spectrum.eigenvectors
    for k in range(8):
        residual = dense @ vecs[:, k] - spectrum.eigenvalues[k] * vecs[:, k]
        assert np.linalg.norm(residual) <= 1e-9
        assert expectation(obs, spectrum.eigenvector(k)) == pytest.approx(
            spectrum.eigenvalues[k], abs=1e-9
        )
    assert np.allclose(vecs.conj().T @ vecs, np.eye(8), atol=1e-9)
    assert np.all(np.diff(spectrum.eigenvalues) >= 0)


def test_variational_bound(rng):
    obs = random_observable(3, 6, rng)
    spectrum = exact_spectrum(obs)
    for _ in range(25):
        value = expectation(obs, Statevector(3, random_state(3, rng)))
        assert spectrum.eigenvalues[0] - 1e-10 <= value <= spectrum.eigenvalues[-1] + 1e-10


def test_exact_spectrum_capacity_error():
    obs = Observable(13, [PauliTerm(1.0, {0: "Z"})])
    with pytest.raises(ValueError):
        exact_spectrum(obs)


def test_degenerate_clusters():
    obs = parse_observable("1.0 Z0 Z1\n0.5 X0\n")
    spectrum = exact_spectrum(obs)
    assert spectrum.clusters() == [(0, 2), (2, 4)]
    assert spectrum.cluster_of(1) == (0, 2)
    assert spectrum.cluster_of(2) == (2, 4)
