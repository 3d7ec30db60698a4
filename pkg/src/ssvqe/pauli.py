"""Pauli-string observables, expectation values, the random transverse Ising
builder, observable file ingestion, and the dense exact-diagonalization oracle.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .statevector import Statevector

_PAULI_OPS = ("X", "Y", "Z")
_TOKEN_RE = re.compile(r"^([XYZ])(\d+)$")

DENSE_QUBIT_LIMIT = 12


class ObservableParseError(ValueError):
    """Malformed observable file; carries the 1-based offending line number."""

    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


@dataclass(frozen=True)
class PauliTerm:
    """One real-weighted Pauli string, e.g. 0.5 * X0 Z2.

    ``operators`` maps qubit index -> 'X'|'Y'|'Z'; identity factors are
    implicit. The empty map is the identity term (an energy offset).
    """

    coefficient: float
    operators: tuple[tuple[int, str], ...]

    def __init__(self, coefficient, operators=()):
        if isinstance(operators, dict):
            items = operators.items()
        else:
            items = tuple(operators)
        ops = tuple(sorted((int(q), str(op)) for q, op in items))
        qubits = [q for q, _ in ops]
        if len(set(qubits)) != len(qubits):
            raise ValueError(f"repeated qubit index in term: {qubits}")
        for q, op in ops:
            if q < 0:
                raise ValueError(f"negative qubit index {q}")
            if op not in _PAULI_OPS:
                raise ValueError(f"unknown Pauli operator {op!r}")
        coefficient = float(coefficient)
        if not np.isfinite(coefficient):
            raise ValueError(f"non-finite coefficient {coefficient}")
        object.__setattr__(self, "coefficient", coefficient)
        object.__setattr__(self, "operators", ops)

    def as_dict(self) -> dict[int, str]:
        return dict(self.operators)

    @property
    def max_qubit(self) -> int:
        return max((q for q, _ in self.operators), default=-1)


class Observable:
    """Hermitian real-weighted sum of Pauli strings on ``n_qubits`` qubits.

    Terms are canonicalized on construction: duplicates (same operator map)
    are merged by coefficient addition, exact zeros dropped, and the term
    list sorted deterministically. Instances are immutable.
    """

    __slots__ = ("n_qubits", "terms", "_packed", "_weakref_unused")

    def __init__(self, n_qubits: int, terms=()):
        if n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        merged: dict[tuple, float] = {}
        for term in terms:
            if not isinstance(term, PauliTerm):
                term = PauliTerm(*term)
            if term.max_qubit >= n_qubits:
                raise ValueError(
                    f"term acts on qubit {term.max_qubit} but observable has "
                    f"{n_qubits} qubits"
                )
            merged[term.operators] = merged.get(term.operators, 0.0) + term.coefficient
        canonical = tuple(
            PauliTerm(c, ops)
            for ops, c in sorted(merged.items())
            if c != 0.0
        )
        object.__setattr__(self, "n_qubits", n_qubits)
        object.__setattr__(self, "terms", canonical)
        object.__setattr__(self, "_packed", None)

    def __setattr__(self, name, value):
        raise AttributeError("Observable is immutable")

    def __eq__(self, other):
        return (
            isinstance(other, Observable)
            and self.n_qubits == other.n_qubits
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.n_qubits, self.terms))

    def __repr__(self):
        return f"Observable(n_qubits={self.n_qubits}, n_terms={len(self.terms)})"

    def __neg__(self):
        return self.scaled(-1.0)

    def scaled(self, factor: float) -> "Observable":
        return Observable(
            self.n_qubits,
            [PauliTerm(factor * t.coefficient, t.operators) for t in self.terms],
        )

    def identity_coefficient(self) -> float:
        for t in self.terms:
            if not t.operators:
                return t.coefficient
        return 0.0

    def packed(self):
        """Flat (coeffs, flips, phase_masks, iphases) arrays for the kernels."""
        if self._packed is None:
            n = self.n_qubits
            coeffs = np.empty(len(self.terms), dtype=np.float64)
            flips = np.zeros(len(self.terms), dtype=np.int64)
            pmasks = np.zeros(len(self.terms), dtype=np.int64)
            iphases = np.empty(len(self.terms), dtype=np.complex128)
            for t, term in enumerate(self.terms):
                coeffs[t] = term.coefficient
                n_y = 0
                for q, op in term.operators:
                    bit = 1 << (n - 1 - q)
                    if op == "X":
                        flips[t] |= bit
                    elif op == "Y":
                        flips[t] |= bit
                        pmasks[t] |= bit
                        n_y += 1
                    else:
                        pmasks[t] |= bit
                iphases[t] = 1.0j ** (n_y % 4)
            object.__setattr__(self, "_packed", (coeffs, flips, pmasks, iphases))
        return self._packed


def _check_dims(obs: Observable, state: Statevector):
    if obs.n_qubits != state.n_qubits:
        raise ValueError(
            f"qubit count mismatch: observable has {obs.n_qubits}, "
            f"state has {state.n_qubits}"
        )


def expectation(obs: Observable, state: Statevector) -> float:
    """<state|obs|state>; guaranteed real for Hermitian observables."""
    _check_dims(obs, state)
    psi = state.amplitudes.reshape(1, -1)
    value = complex(_kernels.pauli_expectations(psi, *obs.packed())[0])
    scale = max(1.0, float(sum(abs(t.coefficient) for t in obs.terms)))
    if abs(value.imag) > 1e-12 * scale:
        raise ArithmeticError(
            f"expectation has non-negligible imaginary part {value.imag}"
        )
    return value.real


def apply_observable(obs: Observable, state: Statevector) -> np.ndarray:
    """obs|state> as a raw (generally unnormalized) amplitude array."""
    _check_dims(obs, state)
    psi = state.amplitudes.reshape(1, -1)
    return _kernels.pauli_apply(psi, *obs.packed()).reshape(-1)


def dense_matrix(obs: Observable) -> np.ndarray:
    """Materialize the full 2**n x 2**n Hermitian matrix of the observable."""
    if obs.n_qubits > DENSE_QUBIT_LIMIT:
        raise ValueError(
            f"dense materialization limited to {DENSE_QUBIT_LIMIT} qubits, "
            f"got {obs.n_qubits}"
        )
    dim = 2**obs.n_qubits
    idx = np.arange(dim, dtype=np.int64)
    mat = np.zeros((dim, dim), dtype=np.complex128)
    coeffs, flips, pmasks, iphases = obs.packed()
    for t in range(len(coeffs)):
        signs = 1.0 - 2.0 * _kernels._parity_of(idx & pmasks[t])
        mat[idx ^ flips[t], idx] += coeffs[t] * iphases[t] * signs
    return mat


def random_transverse_ising(n_qubits: int, seed: int) -> Observable:
    """Fully connected random transverse Ising model.

    Builds sum_i a_i X_i + sum_{i>j} J_ij Z_i Z_j with every coefficient
    drawn uniformly from [0, 1). The PRNG is numpy's default (PCG64) seeded
    with ``seed``; the stream order is fixed as one vectorized uniform draw
    of length n + n*(n-1)/2 assigned to a_0..a_{n-1} first, then to J_ij in
    row-major order over i > j (i outer ascending, j inner ascending), so a
    given seed always yields the identical observable.
    """
    if n_qubits < 1:
        raise ValueError("n_qubits must be positive")
    rng = np.random.default_rng(seed)
    count = n_qubits + n_qubits * (n_qubits - 1) // 2
    draws = rng.uniform(0.0, 1.0, count)
    terms = [PauliTerm(draws[i], {i: "X"}) for i in range(n_qubits)]
    pos = n_qubits
    for i in range(1, n_qubits):
        for j in range(i):
            terms.append(PauliTerm(draws[pos], {i: "Z", j: "Z"}))
            pos += 1
    return Observable(n_qubits, terms)


def parse_observable(text: str, n_qubits: int | None = None) -> Observable:
    """Parse the one-term-per-line observable file format.

    Each non-blank, non-comment line is ``<coefficient> <op><qubit> ...``
    with ops in {X, Y, Z}, or ``<coefficient> I`` for the identity term.
    ``#`` starts a comment. When ``n_qubits`` is omitted it is inferred as
    (highest qubit index + 1), or 1 for identity-only observables.
    """
    terms = []
    max_qubit = -1
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        try:
            coeff = float(tokens[0])
        except ValueError:
            raise ObservableParseError(
                lineno, f"cannot parse coefficient {tokens[0]!r}"
            ) from None
        if not np.isfinite(coeff):
            raise ObservableParseError(lineno, f"non-finite coefficient {tokens[0]!r}")
        body = tokens[1:]
        if not body:
            raise ObservableParseError(lineno, "missing operators (use 'I' for identity)")
        if body == ["I"]:
            terms.append(PauliTerm(coeff, {}))
            continue
        ops: dict[int, str] = {}
        for tok in body:
            m = _TOKEN_RE.match(tok)
            if m is None:
                raise ObservableParseError(lineno, f"malformed operator token {tok!r}")
            op, qubit = m.group(1), int(m.group(2))
            if qubit in ops:
                raise ObservableParseError(
                    lineno, f"repeated qubit index {qubit} within a term"
                )
            ops[qubit] = op
            max_qubit = max(max_qubit, qubit)
        terms.append(PauliTerm(coeff, ops))
    if n_qubits is None:
        n_qubits = max(max_qubit + 1, 1)
    return Observable(n_qubits, terms)


def serialize_observable(obs: Observable) -> str:
    """Inverse of :func:`parse_observable` on canonicalized observables."""
    lines = []
    for term in obs.terms:
        if term.operators:
            body = " ".join(f"{op}{q}" for q, op in term.operators)
        else:
            body = "I"
        lines.append(f"{term.coefficient!r} {body}")
    return "\n".join(lines) + ("\n" if lines else "")


@dataclass(frozen=True)
class ExactSpectrum:
    """Dense-diagonalization oracle: full sorted eigendecomposition.

    ``eigenvalues`` ascend (index 0 is the ground energy) and column k of
    ``eigenvectors`` is the eigenvector for ``eigenvalues[k]``.
    """

    n_qubits: int
    eigenvalues: np.ndarray = field(repr=False)
    eigenvectors: np.ndarray = field(repr=False)

    def eigenvector(self, k: int) -> Statevector:
        return Statevector(self.n_qubits, self.eigenvectors[:, k].copy())

    def clusters(self, tol: float = 1e-10) -> list[tuple[int, int]]:
        """Half-open (start, stop) index ranges of degenerate eigenvalues."""
        out = []
        start = 0
        vals = self.eigenvalues
        for k in range(1, len(vals) + 1):
            if k == len(vals) or vals[k] - vals[k - 1] > tol:
                out.append((start, k))
                start = k
        return out

    def cluster_of(self, index: int, tol: float = 1e-10) -> tuple[int, int]:
        """The degenerate cluster containing eigenvalue slot ``index``."""
        for start, stop in self.clusters(tol):
            if start <= index < stop:
                return (start, stop)
        raise ValueError(f"eigenvalue index {index} out of range")


def exact_spectrum(obs: Observable) -> ExactSpectrum:
    """Full dense eigendecomposition; the validation oracle for everything."""
    if obs.n_qubits > DENSE_QUBIT_LIMIT:
        raise ValueError(
            f"exact_spectrum limited to {DENSE_QUBIT_LIMIT} qubits, "
            f"got {obs.n_qubits}"
        )
    mat = dense_matrix(obs)
    eigenvalues, eigenvectors = np.linalg.eigh(mat)
    return ExactSpectrum(obs.n_qubits, eigenvalues, eigenvectors)
