"""Hot numeric kernels for statevector simulation.

Every kernel exists twice: a plain-Python loop version that numba compiles
with ``@njit`` and a vectorized pure-numpy version. The active backend is
chosen at import time from the ``SSVQE_KERNEL_BACKEND`` environment variable
(``"numba"`` or ``"numpy"``); by default numba is used when importable and
numpy otherwise. Both backends implement identical semantics and are compared
in the test suite and in ``benchmarks/bench_kernels.py``.

All kernels operate on batches of statevectors stored as a C-contiguous
complex128 array of shape ``(batch, 2**n)``; row ``b`` is one state. Gate
opcodes: 0 = RY, 1 = RZ, 2 = CZ. Bit positions follow the package-wide
convention that qubit 0 is the most significant bit of the basis index,
so qubit ``q`` lives at bit position ``n - 1 - q``.
"""

from __future__ import annotations

import math
import os
from types import SimpleNamespace

import numpy as np

OP_RY = 0
OP_RZ = 1
OP_CZ = 2


# ---------------------------------------------------------------------------
# loop implementations (numba-compilable)
# ---------------------------------------------------------------------------

def _run_circuit_loop(psi, kinds, bits1, bits2, pidx, params):
    batch, dim = psi.shape
    for t in range(kinds.shape[0]):
        kind = kinds[t]
        if kind == 2:
            mask = (1 << bits1[t]) | (1 << bits2[t])
            for b in range(batch):
                for i in range(dim):
                    if i & mask == mask:
                        psi[b, i] = -psi[b, i]
        else:
            half = 0.5 * params[pidx[t]]
            stride = 1 << bits1[t]
            if kind == 0:
                c = math.cos(half)
                s = math.sin(half)
                for b in range(batch):
                    base = 0
                    while base < dim:
                        for off in range(stride):
                            i0 = base + off
                            i1 = i0 + stride
                            a0 = psi[b, i0]
                            a1 = psi[b, i1]
                            psi[b, i0] = c * a0 - s * a1
                            psi[b, i1] = s * a0 + c * a1
                        base += 2 * stride
            else:
                ph0 = complex(math.cos(half), -math.sin(half))
                ph1 = complex(math.cos(half), math.sin(half))
                for b in range(batch):
                    for i in range(dim):
                        if i & stride:
                            psi[b, i] = psi[b, i] * ph1
                        else:
                            psi[b, i] = psi[b, i] * ph0


def _pauli_expectations_loop(psi, coeffs, flips, phase_masks, iphases):
    batch, dim = psi.shape
    out = np.zeros(batch, dtype=np.complex128)
    for t in range(coeffs.shape[0]):
        flip = flips[t]
        pmask = phase_masks[t]
        weight = coeffs[t] * iphases[t]
        for b in range(batch):
            acc = 0.0 + 0.0j
            for i in range(dim):
                v = i & pmask
                parity = 0
                while v:
                    parity ^= 1
                    v &= v - 1
                term = np.conj(psi[b, i ^ flip]) * psi[b, i]
                if parity:
                    acc -= term
                else:
                    acc += term
            out[b] += weight * acc
    return out


def _pauli_apply_loop(psi, coeffs, flips, phase_masks, iphases):
    batch, dim = psi.shape
    out = np.zeros((batch, dim), dtype=np.complex128)
    for t in range(coeffs.shape[0]):
        flip = flips[t]
        pmask = phase_masks[t]
        weight = coeffs[t] * iphases[t]
        for b in range(batch):
            for i in range(dim):
                v = i & pmask
                parity = 0
                while v:
                    parity ^= 1
                    v &= v - 1
                amp = weight * psi[b, i]
                if parity:
                    out[b, i ^ flip] -= amp
                else:
                    out[b, i ^ flip] += amp
    return out


# ---------------------------------------------------------------------------
# vectorized numpy implementations
# ---------------------------------------------------------------------------

def _parity_of(indices):
    # parity of set bits, folded; indices are int64 and < 2**63
    x = indices.copy()
    x ^= x >> 32
    x ^= x >> 16
    x ^= x >> 8
    x ^= x >> 4
    x ^= x >> 2
    x ^= x >> 1
    return x & 1


def _run_circuit_numpy(psi, kinds, bits1, bits2, pidx, params):
    batch, dim = psi.shape
    idx = np.arange(dim, dtype=np.int64)
    for t in range(kinds.shape[0]):
        kind = kinds[t]
        if kind == 2:
            mask = (1 << int(bits1[t])) | (1 << int(bits2[t]))
            psi[:, (idx & mask) == mask] *= -1.0
            continue
        half = 0.5 * params[pidx[t]]
        stride = 1 << int(bits1[t])
        view = psi.reshape(batch, dim // (2 * stride), 2, stride)
        if kind == 0:
            c = math.cos(half)
            s = math.sin(half)
            a0 = view[:, :, 0, :].copy()
            a1 = view[:, :, 1, :]
            view[:, :, 0, :] = c * a0 - s * a1
            view[:, :, 1, :] = s * a0 + c * a1
        else:
            view[:, :, 0, :] *= complex(math.cos(half), -math.sin(half))
            view[:, :, 1, :] *= complex(math.cos(half), math.sin(half))


def _pauli_expectations_numpy(psi, coeffs, flips, phase_masks, iphases):
    batch, dim = psi.shape
    idx = np.arange(dim, dtype=np.int64)
    out = np.zeros(batch, dtype=np.complex128)
    for t in range(coeffs.shape[0]):
        signs = 1.0 - 2.0 * _parity_of(idx & phase_masks[t])
        bra = np.conj(psi[:, idx ^ flips[t]])
        out += (coeffs[t] * iphases[t]) * np.einsum("bi,bi,i->b", bra, psi, signs)
    return out


def _pauli_apply_numpy(psi, coeffs, flips, phase_masks, iphases):
    batch, dim = psi.shape
    idx = np.arange(dim, dtype=np.int64)
    out = np.zeros((batch, dim), dtype=np.complex128)
    for t in range(coeffs.shape[0]):
        signs = 1.0 - 2.0 * _parity_of(idx & phase_masks[t])
        out[:, idx ^ flips[t]] += (coeffs[t] * iphases[t]) * signs * psi
    return out


# ---------------------------------------------------------------------------
# backend selection
# ---------------------------------------------------------------------------

_NUMPY_BACKEND = SimpleNamespace(
    name="numpy",
    run_circuit=_run_circuit_numpy,
    pauli_expectations=_pauli_expectations_numpy,
    pauli_apply=_pauli_apply_numpy,
)

_BACKENDS = {"numpy": _NUMPY_BACKEND}

try:  # pragma: no cover - exercised indirectly via backend tests
    import numba

    _BACKENDS["numba"] = SimpleNamespace(
        name="numba",
        run_circuit=numba.njit(cache=True)(_run_circuit_loop),
        pauli_expectations=numba.njit(cache=True)(_pauli_expectations_loop),
        pauli_apply=numba.njit(cache=True)(_pauli_apply_loop),
    )
except ImportError:  # pragma: no cover
    pass


def available_backends():
    """Names of the kernel backends importable in this environment."""
    return tuple(sorted(_BACKENDS))


def get_kernels(name):
    """Return the kernel namespace for an explicit backend name."""
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(
            f"unknown kernel backend {name!r}; available: {available_backends()}"
        ) from None


def _select_default():
    requested = os.environ.get("SSVQE_KERNEL_BACKEND", "").strip().lower()
    if requested:
        return get_kernels(requested)
    return _BACKENDS.get("numba", _NUMPY_BACKEND)


_ACTIVE = _select_default()


def active_backend():
    """Name of the backend the module-level kernels dispatch to."""
    return _ACTIVE.name


run_circuit = _ACTIVE.run_circuit
pauli_expectations = _ACTIVE.pauli_expectations
pauli_apply = _ACTIVE.pauli_apply
