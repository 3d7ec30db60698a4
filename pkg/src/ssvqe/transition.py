"""Transition matrix elements <E_i|A|E_j> from optimized SSVQE circuits.

The off-diagonal element is assembled from six separate expectation values:
with W the optimized circuit and B = W^dag A W,

    Re <i|B|j> = <+x|B|+x> - (1/2) <i|B|i> - (1/2) <j|B|j>
    Im <i|B|j> = (1/2) <i|B|i> + (1/2) <j|B|j> - <+y|B|+y>

where |+x> = (|i> + |j>)/sqrt(2) and |+y> = (|i> + 1j|j>)/sqrt(2) are
superpositions of the input basis states. Each term is evaluated as its own
circuit run, mirroring how the quantities would be measured separately on
hardware and summed classically. The identity is exact and is checked
against :func:`direct_matrix_element`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ansatz import execute_program
from .core import SSVQEResult, _Evaluator
from .pauli import Observable, apply_observable, expectation
from .statevector import Statevector, basis_state, superposition_state


@dataclass(frozen=True)
class TransitionRequest:
    """Matrix element request between two optimized SSVQE output states.

    ``i`` and ``j`` index the result's state slots; ``i == j`` reduces to a
    plain expectation value.
    """

    operator_a: Observable
    result: SSVQEResult
    i: int
    j: int

    def __post_init__(self):
        n_slots = self.result.problem.n_inputs
        if not (0 <= self.i < n_slots and 0 <= self.j < n_slots):
            raise ValueError(
                f"state indices ({self.i}, {self.j}) out of range [0, {n_slots})"
            )
        if self.operator_a.n_qubits != self.result.problem.n_qubits:
            raise ValueError(
                f"operator acts on {self.operator_a.n_qubits} qubits, "
                f"problem has {self.result.problem.n_qubits}"
            )


def _optimized_state(request: TransitionRequest, base: Statevector) -> Statevector:
    ev = _Evaluator(request.result.problem)
    psi = base.amplitudes.copy().reshape(1, -1)
    params = np.concatenate([request.result.optimal_phi, request.result.optimal_theta])
    execute_program(ev.prog_combined, params, psi)
    return Statevector(base.n_qubits, psi.reshape(-1))


def _term(request: TransitionRequest, base: Statevector) -> float:
    return expectation(request.operator_a, _optimized_state(request, base))


def transition_terms(request: TransitionRequest) -> dict[str, float]:
    """The six separately-measured expectation values of the decomposition."""
    problem = request.result.problem
    n = problem.n_qubits
    idx_i = problem.input_indices[request.i]
    idx_j = problem.input_indices[request.j]
    return {
        "plus_x": _term(request, superposition_state(n, idx_i, idx_j, "plus_x")),
        "plus_y": _term(request, superposition_state(n, idx_i, idx_j, "plus_y")),
        "diag_i_for_re": _term(request, basis_state(n, idx_i)),
        "diag_j_for_re": _term(request, basis_state(n, idx_j)),
        "diag_i_for_im": _term(request, basis_state(n, idx_i)),
        "diag_j_for_im": _term(request, basis_state(n, idx_j)),
    }


def transition_amplitude(request: TransitionRequest) -> complex:
    """<E_i|A|E_j> assembled from the six-term decomposition."""
    if request.i == request.j:
        problem = request.result.problem
        value = _term(
            request, basis_state(problem.n_qubits, problem.input_indices[request.i])
        )
        return complex(value, 0.0)
    terms = transition_terms(request)
    re = terms["plus_x"] - 0.5 * terms["diag_i_for_re"] - 0.5 * terms["diag_j_for_re"]
    im = 0.5 * terms["diag_i_for_im"] + 0.5 * terms["diag_j_for_im"] - terms["plus_y"]
    return complex(re, im)


def direct_matrix_element(request: TransitionRequest) -> complex:
    """<prepared_i|A|prepared_j> computed directly on the statevectors; the
    validation oracle for the decomposition."""
    problem = request.result.problem
    n = problem.n_qubits
    bra = _optimized_state(request, basis_state(n, problem.input_indices[request.i]))
    ket = _optimized_state(request, basis_state(n, problem.input_indices[request.j]))
    amps = apply_observable(request.operator_a, ket)
    return complex(np.vdot(bra.amplitudes, amps))
