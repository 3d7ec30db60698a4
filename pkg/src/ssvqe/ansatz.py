"""Parameterized circuits: the subspace rotation V(phi) and global ansatz U(theta).

Layer structure (hardware-efficient): one layer applies RY then RZ on every
participating qubit, followed by a CZ entangling stage. The U block repeats
this ``d2`` times and ends with one extra rotation layer after the final
entangling stage; the V block repeats it ``d1`` times on ``subspace_qubits``
only, with no trailing rotation layer. The full circuit applies V first,
then U. Parameters are consumed in gate order: layer by layer, qubit by
qubit, RY angle before RZ angle.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from . import _kernels
from .statevector import Gate, Statevector, basis_state, superposition_state

ENTANGLERS = ("chain", "all_to_all")


@dataclass(frozen=True)
class AnsatzSpec:
    """Static description of the V/U circuit pair.

    ``subspace_qubits`` are the qubits V acts on; ``d1`` and ``d2`` are the
    layer repetition counts of the V and U blocks.
    """

    n_qubits: int
    subspace_qubits: tuple[int, ...]
    d1: int
    d2: int
    entangler: str = "chain"

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        sq = tuple(self.subspace_qubits)
        object.__setattr__(self, "subspace_qubits", sq)
        if len(set(sq)) != len(sq):
            raise ValueError(f"subspace_qubits not distinct: {sq}")
        for q in sq:
            if not 0 <= q < self.n_qubits:
                raise ValueError(f"subspace qubit {q} out of range")
        if self.d1 < 0 or self.d2 < 0:
            raise ValueError("circuit depths must be non-negative")
        if self.entangler not in ENTANGLERS:
            raise ValueError(f"entangler must be one of {ENTANGLERS}")


def default_subspace_qubits(n_qubits: int, n_inputs: int) -> tuple[int, ...]:
    """The trailing ceil(log2(n_inputs)) qubits, enough for V to span the
    default input states |0...00>, |0...01>, ..."""
    if not 1 <= n_inputs <= 2**n_qubits:
        raise ValueError(f"need 1..2^n input states, got {n_inputs}")
    width = max(int(np.ceil(np.log2(n_inputs))), 1) if n_inputs > 1 else 0
    return tuple(range(n_qubits - width, n_qubits))


def parameter_count(spec: AnsatzSpec, block: str) -> int:
    """Angle count of one block: V holds 2*|subspace|*d1, U holds
    2*n*(d2+1) thanks to its final rotation layer."""
    if block == "V":
        return 2 * len(spec.subspace_qubits) * spec.d1
    if block == "U":
        return 2 * spec.n_qubits * (spec.d2 + 1)
    raise ValueError(f"block must be 'V' or 'U', got {block!r}")


def _entangler_pairs(qubits, entangler):
    if len(qubits) < 2:
        return []
    if entangler == "chain":
        return [(qubits[i], qubits[i + 1]) for i in range(len(qubits) - 1)]
    return [
        (qubits[a], qubits[b])
        for a in range(len(qubits))
        for b in range(a + 1, len(qubits))
    ]


def _block_ops(spec: AnsatzSpec, block: str):
    """Yield ("RY"|"RZ"|"CZ", target, control|None, param_index|None)."""
    if block == "V":
        qubits = spec.subspace_qubits
        depth, final_layer = spec.d1, False
    else:
        qubits = tuple(range(spec.n_qubits))
        depth, final_layer = spec.d2, True
    pairs = _entangler_pairs(qubits, spec.entangler)
    p = 0
    for _ in range(depth):
        for q in qubits:
            yield ("RY", q, None, p)
            yield ("RZ", q, None, p + 1)
            p += 2
        for ctrl, tgt in pairs:
            yield ("CZ", tgt, ctrl, None)
    if final_layer:
        for q in qubits:
            yield ("RY", q, None, p)
            yield ("RZ", q, None, p + 1)
            p += 2


def block_gates(spec: AnsatzSpec, block: str, angles) -> list[Gate]:
    """The block as an explicit gate list with angles bound."""
    angles = _check_angles(spec, block, angles)
    gates = []
    for kind, target, control, pidx in _block_ops(spec, block):
        if kind == "CZ":
            gates.append(Gate("CZ", target, control=control))
        else:
            gates.append(Gate(kind, target, angle=float(angles[pidx])))
    return gates


class Program(NamedTuple):
    """Packed circuit for the kernels; pidx indexes a flat parameter vector."""

    kinds: np.ndarray
    bits1: np.ndarray
    bits2: np.ndarray
    pidx: np.ndarray
    n_params: int


_KIND_CODE = {"RY": _kernels.OP_RY, "RZ": _kernels.OP_RZ, "CZ": _kernels.OP_CZ}


def _pack(ops, n_qubits, n_params, param_offset=0):
    n_ops = len(ops)
    kinds = np.empty(n_ops, dtype=np.int64)
    bits1 = np.empty(n_ops, dtype=np.int64)
    bits2 = np.full(n_ops, -1, dtype=np.int64)
    pidx = np.full(n_ops, -1, dtype=np.int64)
    for t, (kind, target, control, p) in enumerate(ops):
        kinds[t] = _KIND_CODE[kind]
        bits1[t] = n_qubits - 1 - target
        if control is not None:
            bits2[t] = n_qubits - 1 - control
        if p is not None:
            pidx[t] = p + param_offset
    return Program(kinds, bits1, bits2, pidx, n_params)


@lru_cache(maxsize=None)
def block_program(spec: AnsatzSpec, block: str) -> Program:
    """Packed single block; parameters indexed within the block."""
    ops = list(_block_ops(spec, block))
    return _pack(ops, spec.n_qubits, parameter_count(spec, block))


@lru_cache(maxsize=None)
def combined_program(spec: AnsatzSpec) -> Program:
    """Packed V-then-U circuit over the concatenated [phi, theta] vector."""
    p_v = parameter_count(spec, "V")
    p_u = parameter_count(spec, "U")
    ops = list(_block_ops(spec, "V"))
    packed_v = _pack(ops, spec.n_qubits, p_v + p_u)
    ops_u = list(_block_ops(spec, "U"))
    packed_u = _pack(ops_u, spec.n_qubits, p_v + p_u, param_offset=p_v)
    return Program(
        np.concatenate([packed_v.kinds, packed_u.kinds]),
        np.concatenate([packed_v.bits1, packed_u.bits1]),
        np.concatenate([packed_v.bits2, packed_u.bits2]),
        np.concatenate([packed_v.pidx, packed_u.pidx]),
        p_v + p_u,
    )


def execute_program(program: Program, params: np.ndarray, psi: np.ndarray):
    """Run a packed circuit in place on a (batch, 2**n) amplitude array."""
    params = np.ascontiguousarray(params, dtype=np.float64)
    if params.shape != (program.n_params,):
        raise ValueError(
            f"expected {program.n_params} parameters, got {params.shape}"
        )
    _kernels.run_circuit(
        psi, program.kinds, program.bits1, program.bits2, program.pidx, params
    )


def _check_angles(spec, block, angles):
    angles = np.asarray(angles, dtype=np.float64).reshape(-1)
    expected = parameter_count(spec, block)
    if angles.shape[0] != expected:
        raise ValueError(
            f"{block} block of {spec} takes {expected} angles, "
            f"got {angles.shape[0]}"
        )
    return angles


def _prepare(spec, phi, theta, state: Statevector) -> Statevector:
    phi = _check_angles(spec, "V", phi)
    theta = _check_angles(spec, "U", theta)
    psi = state.amplitudes.copy().reshape(1, -1)
    execute_program(combined_program(spec), np.concatenate([phi, theta]), psi)
    return Statevector(spec.n_qubits, psi.reshape(-1))


def prepare_state(spec: AnsatzSpec, phi, theta, input_index: int) -> Statevector:
    """U(theta) V(phi) |input_index>."""
    return _prepare(spec, phi, theta, basis_state(spec.n_qubits, input_index))


def prepare_superposition(spec: AnsatzSpec, phi, theta, i: int, j: int,
                          phase: str) -> Statevector:
    """U(theta) V(phi) applied to (|i> + |j>)/sqrt(2) or (|i> + 1j|j>)/sqrt(2)."""
    return _prepare(spec, phi, theta,
                    superposition_state(spec.n_qubits, i, j, phase))
