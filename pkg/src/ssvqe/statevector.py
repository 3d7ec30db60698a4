"""Exact complex statevector representation and gate application.

Qubit ordering convention: qubit 0 is the most significant bit of the basis
index, so on four qubits ``|q0 q1 q2 q3>`` has index ``8*q0 + 4*q1 + 2*q2 + q3``.
Gates are RY(a) = exp(-i*a*Y/2), RZ(a) = exp(-i*a*Z/2) and CZ = diag(1,1,1,-1)
on the (control, target) pair.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels

GATE_KINDS = ("RY", "RZ", "CZ")

_KIND_CODE = {"RY": _kernels.OP_RY, "RZ": _kernels.OP_RZ, "CZ": _kernels.OP_CZ}


@dataclass(frozen=True)
class Gate:
    """One gate of the RY/RZ/CZ gate set.

    ``angle`` is in radians and only meaningful for rotations; ``control``
    is only meaningful for CZ.
    """

    kind: str
    target: int
    control: int | None = None
    angle: float = 0.0

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if self.kind == "CZ":
            if self.control is None:
                raise ValueError("CZ requires a control qubit")
            if self.control == self.target:
                raise ValueError("CZ control and target must differ")
        elif self.control is not None:
            raise ValueError(f"{self.kind} takes no control qubit")


def ry(target: int, angle: float) -> Gate:
    return Gate("RY", target, angle=angle)


def rz(target: int, angle: float) -> Gate:
    return Gate("RZ", target, angle=angle)


def cz(control: int, target: int) -> Gate:
    return Gate("CZ", target, control=control)


@dataclass(frozen=True)
class Statevector:
    """Immutable n-qubit state: 2**n complex amplitudes with unit norm."""

    n_qubits: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        amps = np.array(self.amplitudes, dtype=np.complex128, order="C", copy=True)
        if amps.shape != (2**self.n_qubits,):
            raise ValueError(
                f"expected {2**self.n_qubits} amplitudes, got shape {amps.shape}"
            )
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def basis_state(n_qubits: int, index: int) -> Statevector:
    """Computational basis state |index> on ``n_qubits`` qubits."""
    if n_qubits < 1:
        raise ValueError("n_qubits must be positive")
    dim = 2**n_qubits
    if not 0 <= index < dim:
        raise ValueError(f"basis index {index} out of range for {n_qubits} qubits")
    amps = np.zeros(dim, dtype=np.complex128)
    amps[index] = 1.0
    return Statevector(n_qubits, amps)


def superposition_state(n_qubits: int, i: int, j: int, phase: str) -> Statevector:
    """Equal superposition of two basis states.

    ``phase="plus_x"`` gives (|i> + |j>)/sqrt(2), ``"plus_y"`` gives
    (|i> + 1j*|j>)/sqrt(2).
    """
    if phase not in ("plus_x", "plus_y"):
        raise ValueError(f"phase must be 'plus_x' or 'plus_y', got {phase!r}")
    if i == j:
        raise ValueError("superposition requires distinct basis indices")
    dim = 2**n_qubits
    if not (0 <= i < dim and 0 <= j < dim):
        raise ValueError("basis index out of range")
    amps = np.zeros(dim, dtype=np.complex128)
    amps[i] = 1.0 / np.sqrt(2.0)
    amps[j] = (1.0 if phase == "plus_x" else 1.0j) / np.sqrt(2.0)
    return Statevector(n_qubits, amps)


def _gate_arrays(gates, n_qubits):
    """Pack a gate sequence into the flat arrays the kernels consume."""
    n_ops = len(gates)
    kinds = np.empty(n_ops, dtype=np.int64)
    bits1 = np.empty(n_ops, dtype=np.int64)
    bits2 = np.full(n_ops, -1, dtype=np.int64)
    pidx = np.full(n_ops, -1, dtype=np.int64)
    params = []
    for t, g in enumerate(gates):
        if not 0 <= g.target < n_qubits:
            raise ValueError(f"gate target {g.target} out of range")
        kinds[t] = _KIND_CODE[g.kind]
        bits1[t] = n_qubits - 1 - g.target
        if g.kind == "CZ":
            if not 0 <= g.control < n_qubits:
                raise ValueError(f"gate control {g.control} out of range")
            bits2[t] = n_qubits - 1 - g.control
        else:
            pidx[t] = len(params)
            params.append(g.angle)
    return kinds, bits1, bits2, pidx, np.asarray(params, dtype=np.float64)


def apply_gates(state: Statevector, gates) -> Statevector:
    """Apply a sequence of gates, returning a new Statevector."""
    kinds, bits1, bits2, pidx, params = _gate_arrays(gates, state.n_qubits)
    psi = state.amplitudes.copy().reshape(1, -1)
    _kernels.run_circuit(psi, kinds, bits1, bits2, pidx, params)
    return Statevector(state.n_qubits, psi.reshape(-1))


def apply_gate(state: Statevector, gate: Gate) -> Statevector:
    """Apply one gate's unitary to the state; norm is preserved."""
    return apply_gates(state, [gate])


def inner_product(a: Statevector, b: Statevector) -> complex:
    """<a|b>, conjugate-linear in ``a``."""
    if a.n_qubits != b.n_qubits:
        raise ValueError(
            f"qubit count mismatch: {a.n_qubits} vs {b.n_qubits}"
        )
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def states_allclose(a: Statevector, b: Statevector, tol: float = 1e-12,
                    up_to_global_phase: bool = False) -> bool:
    """Componentwise comparison, optionally modulo a global phase."""
    if a.n_qubits != b.n_qubits:
        return False
    if up_to_global_phase:
        ov = np.vdot(a.amplitudes, b.amplitudes)
        if abs(ov) < 1e-15:
            return False
        phase = ov / abs(ov)
        return bool(np.allclose(a.amplitudes * phase, b.amplitudes, atol=tol, rtol=0.0))
    return bool(np.allclose(a.amplitudes, b.amplitudes, atol=tol, rtol=0.0))
