"""SSVQE cost functions, drivers, and fidelity metrics.

Three variants are implemented:

* ``two_stage``: minimize the summed subspace energy L1 over the global
  ansatz U, then maximize the single-state energy L2 over the subspace
  rotation V with U frozen at its optimum. The maximization runs through the
  minimizer on the negated cost.
* ``weighted_kth``: single optimization of w*<k-th input energy> + sum of the
  lower input energies over the combined V+U circuit, 0 < w < 1.
* ``weighted_all``: single optimization of the strictly-decreasing-weighted
  energy sum over the combined circuit; input j converges to the j-th
  excited state.

For the weighted variants the optimized parameter vector is the
concatenation [phi, theta] of the V and U block angles. The ``reflection``
flag mirrors a two_stage problem onto -H to reach states in the upper half
of the spectrum with fewer input states.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import _kernels, ansatz
from .ansatz import AnsatzSpec, default_subspace_qubits, parameter_count
from .optimizer import (
    MultistartResult,
    OptimizerConfig,
    gradient_for,
    minimize,
    multistart,
)
from .pauli import ExactSpectrum, Observable
from .statevector import Statevector

VARIANTS = ("two_stage", "weighted_kth", "weighted_all")


@dataclass(frozen=True)
class SSVQEProblem:
    """One SSVQE instance: Hamiltonian, ansatz, variant, and its knobs.

    ``input_indices`` are the computational-basis inputs; their pairwise
    distinctness is the orthogonality condition on the input states. For
    ``reflection`` runs (two_stage only, k >= 2^(n-1)) the problem is solved
    on -H with 2^n - k input states and re-indexed outputs.
    """

    hamiltonian: Observable
    ansatz: AnsatzSpec
    k: int
    variant: str
    input_indices: tuple[int, ...]
    weight_w: Optional[float] = None
    weight_vector: Optional[tuple[float, ...]] = None
    s: Optional[int] = None
    reflection: bool = False

    def __post_init__(self):
        object.__setattr__(self, "input_indices", tuple(self.input_indices))
        if self.weight_vector is not None:
            object.__setattr__(
                self, "weight_vector", tuple(float(w) for w in self.weight_vector)
            )
        errors = self.validate()
        if errors:
            raise ValueError("invalid SSVQE problem: " + "; ".join(errors))

    @property
    def n_qubits(self) -> int:
        return self.hamiltonian.n_qubits

    @property
    def n_inputs(self) -> int:
        return len(self.input_indices)

    def effective_k(self) -> int:
        """Excitation index in the optimized (possibly mirrored) frame."""
        if self.reflection:
            return 2**self.n_qubits - 1 - self.k
        return self.k

    def stage2_slot(self) -> int:
        return self.s if self.s is not None else self.effective_k()

    def weights(self) -> Optional[np.ndarray]:
        """Per-input cost weights; None for the unweighted two_stage L1."""
        if self.variant == "weighted_kth":
            w = np.ones(self.n_inputs)
            w[-1] = self.weight_w
            return w
        if self.variant == "weighted_all":
            return np.asarray(self.weight_vector, dtype=np.float64)
        return None

    def validate(self) -> list[str]:
        """All constraint violations, exhaustively (empty when valid)."""
        errors = []
        n = self.n_qubits
        dim = 2**n
        if self.variant not in VARIANTS:
            errors.append(f"variant must be one of {VARIANTS}, got {self.variant!r}")
            return errors
        # k = 0 (plain ground-state VQE) is permitted so the reflection
        # mirror of k = 2^n - 1 stays expressible as a standard problem
        if not 0 <= self.k <= dim - 1:
            errors.append(f"k must be in [0, 2^n - 1] = [0, {dim - 1}], got {self.k}")
            return errors
        if self.reflection:
            if self.variant != "two_stage":
                errors.append("reflection shortcut is only defined for two_stage")
            if self.k < dim // 2:
                errors.append(
                    f"reflection requires k >= 2^(n-1) = {dim // 2}, got {self.k}"
                )
            expected_inputs = dim - self.k
        else:
            expected_inputs = self.k + 1
        if len(self.input_indices) != expected_inputs:
            errors.append(
                f"expected {expected_inputs} input states, got {len(self.input_indices)}"
            )
        if len(set(self.input_indices)) != len(self.input_indices):
            errors.append("input_indices must be pairwise distinct")
        bad = [i for i in self.input_indices if not 0 <= i < dim]
        if bad:
            errors.append(f"input indices out of range: {bad}")

        if self.variant == "weighted_kth":
            if self.weight_w is None:
                errors.append("weighted_kth requires weight_w")
            elif not 0.0 < self.weight_w < 1.0:
                errors.append(f"weight_w must lie in (0, 1), got {self.weight_w}")
            if self.weight_vector is not None:
                errors.append("weight_vector is only valid for weighted_all")
        elif self.variant == "weighted_all":
            if self.weight_w is not None:
                errors.append("weight_w is only valid for weighted_kth")
            wv = self.weight_vector
            if wv is None:
                errors.append("weighted_all requires weight_vector")
            else:
                if len(wv) != len(self.input_indices):
                    errors.append(
                        f"weight_vector length {len(wv)} != input count "
                        f"{len(self.input_indices)}"
                    )
                if any(w <= 0 for w in wv):
                    errors.append("weights must be positive")
                if any(wv[i] <= wv[i + 1] for i in range(len(wv) - 1)):
                    errors.append("weights must be strictly decreasing")
        else:
            if self.weight_w is not None or self.weight_vector is not None:
                errors.append("two_stage takes no weights")

        if self.s is not None:
            if self.variant != "two_stage":
                errors.append("stage-2 index s is only valid for two_stage")
            elif not 0 <= self.s <= self.effective_k():
                errors.append(
                    f"s must lie in [0, {self.effective_k()}], got {self.s}"
                )

        spec = self.ansatz
        if spec.n_qubits != n:
            errors.append(
                f"ansatz has {spec.n_qubits} qubits, Hamiltonian has {n}"
            )
        if 2 ** len(spec.subspace_qubits) < len(self.input_indices):
            errors.append(
                f"2^|subspace_qubits| = {2 ** len(spec.subspace_qubits)} cannot "
                f"span {len(self.input_indices)} input states"
            )
        if spec.d1 > 0 and spec.n_qubits == n and not bad:
            # V must not leak outside span{inputs}: all inputs must agree on
            # every bit outside the subspace block
            sub_mask = 0
            for q in spec.subspace_qubits:
                sub_mask |= 1 << (n - 1 - q)
            outside = {idx & ~sub_mask for idx in self.input_indices}
            if len(outside) > 1:
                errors.append(
                    "input states differ outside subspace_qubits; V(phi) could "
                    "not act within their span"
                )
        return errors


def build_problem(hamiltonian: Observable, variant: str, k: int, *,
                  d1: int = 2, d2: Optional[int] = None,
                  entangler: str = "chain",
                  input_indices=None, subspace_qubits=None,
                  weight_w: Optional[float] = None,
                  weight_vector=None, s: Optional[int] = None,
                  reflection: bool = False) -> SSVQEProblem:
    """Problem factory applying the experiment-protocol defaults.

    Input states default to the first k+1 computational basis states,
    subspace_qubits to the trailing ceil(log2(#inputs)) qubits, d2 to 8 for
    weighted_all and 6 otherwise, w to 0.5 and the weight vector to
    (k+1, k, ..., 1).
    """
    n = hamiltonian.n_qubits
    if d2 is None:
        d2 = 8 if variant == "weighted_all" else 6
    n_inputs = (2**n - k) if reflection else (k + 1)
    if input_indices is None:
        input_indices = tuple(range(n_inputs))
    if subspace_qubits is None:
        subspace_qubits = default_subspace_qubits(n, len(tuple(input_indices)))
    if variant == "weighted_kth" and weight_w is None:
        weight_w = 0.5
    if variant == "weighted_all" and weight_vector is None:
        weight_vector = tuple(float(w) for w in range(n_inputs, 0, -1))
    spec = AnsatzSpec(n, tuple(subspace_qubits), d1, d2, entangler)
    return SSVQEProblem(
        hamiltonian=hamiltonian,
        ansatz=spec,
        k=k,
        variant=variant,
        input_indices=tuple(input_indices),
        weight_w=weight_w,
        weight_vector=weight_vector,
        s=s,
        reflection=reflection,
    )


class _Evaluator:
    """Batched circuit evaluation for one problem; states are rows."""

    def __init__(self, problem: SSVQEProblem):
        self.problem = problem
        spec = problem.ansatz
        dim = 2**spec.n_qubits
        base = np.zeros((problem.n_inputs, dim), dtype=np.complex128)
        for row, idx in enumerate(problem.input_indices):
            base[row, idx] = 1.0
        self.base = base
        self.packed = problem.hamiltonian.packed()
        self.prog_u = ansatz.block_program(spec, "U")
        self.prog_combined = ansatz.combined_program(spec)
        self.p_v = parameter_count(spec, "V")
        self.p_u = parameter_count(spec, "U")

    def states_u(self, theta) -> np.ndarray:
        psi = self.base.copy()
        ansatz.execute_program(self.prog_u, np.asarray(theta, float), psi)
        return psi

    def states_combined(self, params) -> np.ndarray:
        psi = self.base.copy()
        ansatz.execute_program(self.prog_combined, np.asarray(params, float), psi)
        return psi

    def state_slot(self, phi, theta, slot: int) -> np.ndarray:
        psi = self.base[slot : slot + 1].copy()
        params = np.concatenate([np.asarray(phi, float), np.asarray(theta, float)])
        ansatz.execute_program(self.prog_combined, params, psi)
        return psi

    def energies_of(self, psi) -> np.ndarray:
        return _kernels.pauli_expectations(psi, *self.packed).real.copy()


def _require_variant(problem, *variants):
    if problem.variant not in variants:
        raise ValueError(
            f"cost is defined for {variants}, problem is {problem.variant!r}"
        )
    if problem.reflection:
        raise ValueError(
            "cost functions operate on the mirrored problem; run() handles "
            "reflection problems"
        )


def cost_L1(theta, problem: SSVQEProblem) -> float:
    """Stage-1 cost: sum of the input-state energies after U(theta)."""
    _require_variant(problem, "two_stage")
    ev = _Evaluator(problem)
    return float(ev.energies_of(ev.states_u(theta)).sum())


def cost_L2(phi, problem: SSVQEProblem, theta_star) -> float:
    """Stage-2 cost: energy of U(theta*) V(phi) |input_s>. The driver
    maximizes this by minimizing its negation."""
    _require_variant(problem, "two_stage")
    ev = _Evaluator(problem)
    psi = ev.state_slot(phi, theta_star, problem.stage2_slot())
    return float(ev.energies_of(psi)[0])


def cost_weighted_kth(theta, problem: SSVQEProblem) -> float:
    """Single-stage cost w*E_k + sum_{j<k} E_j over the combined circuit;
    ``theta`` is the concatenated [phi, theta] vector."""
    _require_variant(problem, "weighted_kth")
    ev = _Evaluator(problem)
    return float(problem.weights() @ ev.energies_of(ev.states_combined(theta)))


def cost_weighted_all(theta, problem: SSVQEProblem) -> float:
    """Single-stage cost sum_j w_j E_j with strictly decreasing weights over
    the combined circuit; ``theta`` is the concatenated [phi, theta] vector."""
    _require_variant(problem, "weighted_all")
    ev = _Evaluator(problem)
    return float(problem.weights() @ ev.energies_of(ev.states_combined(theta)))


def _cluster_columns(oracle: ExactSpectrum, indices, tol: float = 1e-10):
    """Eigenvector column set covering every degenerate cluster that
    intersects ``indices`` (gauge-invariant under degeneracy)."""
    cols: set[int] = set()
    wanted = set(indices)
    for start, stop in oracle.clusters(tol):
        if wanted.intersection(range(start, stop)):
            cols.update(range(start, stop))
    return sorted(cols)


def _projection_weight(basis: np.ndarray, psi: np.ndarray) -> float:
    overlaps = basis.conj().T @ psi
    return float(np.real(np.vdot(overlaps, overlaps)))


def subspace_fidelity(theta, problem: SSVQEProblem,
                      oracle: ExactSpectrum) -> float:
    """Mean squared overlap of the U(theta)-evolved input states with the
    lowest-(k+1) oracle eigenspace, degeneracy-projected."""
    ev = _Evaluator(problem)
    psi = ev.states_u(theta)
    cols = _cluster_columns(oracle, range(problem.n_inputs))
    basis = oracle.eigenvectors[:, cols]
    total = sum(_projection_weight(basis, psi[row]) for row in range(psi.shape[0]))
    return total / psi.shape[0]


def state_fidelity(theta, phi, problem: SSVQEProblem, oracle: ExactSpectrum,
                   j: int) -> float:
    """Squared overlap of U(theta) V(phi) |input_j> with the oracle
    eigenstate of index j (projected onto its degenerate cluster)."""
    if not 0 <= j < problem.n_inputs:
        raise ValueError(f"state index {j} out of range")
    ev = _Evaluator(problem)
    psi = ev.state_slot(phi, theta, j)[0]
    cols = _cluster_columns(oracle, [j])
    return _projection_weight(oracle.eigenvectors[:, cols], psi)


@dataclass
class SSVQEResult:
    """Optimized parameters, per-input energies, and diagnostics.

    ``states[j]`` is U(theta*) V(phi*) applied to input j (pairwise
    orthonormal by unitarity) and ``energies[j]`` its energy under the
    problem Hamiltonian. ``state_indices[j]`` is the eigen-index slot j
    targets: 0..k for standard runs, descending 2^n-1..k for reflection
    runs. ``traces`` holds every start of every optimization stage.
    """

    problem: SSVQEProblem
    optimal_phi: np.ndarray
    optimal_theta: np.ndarray
    energies: np.ndarray
    state_indices: tuple[int, ...]
    states: list[Statevector]
    traces: dict[str, MultistartResult]
    converged: bool
    target_index: int
    target_energy: float
    metrics: Optional[dict] = None


def _final_metrics(ev, problem, oracle, phi_star, theta_star):
    psi = ev.states_combined(np.concatenate([phi_star, theta_star]))
    fidelities = []
    for slot in range(problem.n_inputs):
        cols = _cluster_columns(oracle, [slot])
        fidelities.append(
            _projection_weight(oracle.eigenvectors[:, cols], psi[slot])
        )
    metrics = {"state_fidelities": fidelities}
    if problem.variant == "two_stage":
        metrics["subspace_fidelity"] = subspace_fidelity(theta_star, problem, oracle)
    return metrics


def run(problem: SSVQEProblem, config: Optional[OptimizerConfig] = None,
        n_starts: int = 10, seed=0,
        oracle: Optional[ExactSpectrum] = None) -> SSVQEResult:
    """Execute the variant's full protocol with seeded multistart.

    Start m of stage t draws its uniform-[0, 2pi) initial angles from the
    (seed, t, m) child stream, so runs are fully reproducible. When
    ``oracle`` is given, per-iteration fidelity (and for weighted variants,
    per-input energy) snapshots are recorded into the traces.
    """
    config = config or OptimizerConfig()
    if problem.reflection:
        return _run_reflection(problem, config, n_starts, seed, oracle)

    ev = _Evaluator(problem)
    n_qubits = problem.n_qubits
    k = problem.k

    if oracle is not None:
        sub_cols = _cluster_columns(oracle, range(problem.n_inputs))
        sub_basis = oracle.eigenvectors[:, sub_cols]
        slot_bases = [
            oracle.eigenvectors[:, _cluster_columns(oracle, [slot])]
            for slot in range(problem.n_inputs)
        ]

    if problem.variant == "two_stage":
        def stage1_cost(theta):
            return float(ev.energies_of(ev.states_u(theta)).sum())

        stage1_grad = gradient_for(stage1_cost, config)

        stage1_cb = None
        if oracle is not None:
            def stage1_cb(iteration, x, cost, gnorm):
                psi = ev.states_u(x)
                total = sum(
                    _projection_weight(sub_basis, psi[r])
                    for r in range(psi.shape[0])
                )
                return {"subspace_fidelity": total / psi.shape[0]}

        ms1 = multistart(
            lambda x0: minimize(stage1_cost, stage1_grad, x0, config, stage1_cb),
            ev.p_u, n_starts, _stage_seed(seed, 0),
        )
        theta_star = ms1.best.x
        slot = problem.stage2_slot()

        def stage2_cost(phi):
            return -float(ev.energies_of(ev.state_slot(phi, theta_star, slot))[0])

        stage2_grad = gradient_for(stage2_cost, config)

        stage2_cb = None
        if oracle is not None:
            target_basis = slot_bases[problem.effective_k()]

            def stage2_cb(iteration, x, cost, gnorm):
                psi = ev.state_slot(x, theta_star, slot)[0]
                return {"state_fidelity": _projection_weight(target_basis, psi)}

        ms2 = multistart(
            lambda x0: minimize(stage2_cost, stage2_grad, x0, config, stage2_cb),
            ev.p_v, n_starts, _stage_seed(seed, 1),
        )
        phi_star = ms2.best.x
        traces = {"stage1": ms1, "stage2": ms2}
        converged = ms1.best.converged and ms2.best.converged
        target_slot = slot
    else:
        weights = problem.weights()

        def combined_cost(params):
            return float(weights @ ev.energies_of(ev.states_combined(params)))

        combined_grad = gradient_for(combined_cost, config)

        combined_cb = None
        if oracle is not None:
            def combined_cb(iteration, x, cost, gnorm):
                psi = ev.states_combined(x)
                snap = {}
                for r in range(psi.shape[0]):
                    snap[f"energy_{r}"] = float(
                        ev.energies_of(psi[r : r + 1])[0]
                    )
                    snap[f"fidelity_{r}"] = _projection_weight(
                        slot_bases[r], psi[r]
                    )
                return snap

        ms = multistart(
            lambda x0: minimize(combined_cost, combined_grad, x0, config, combined_cb),
            ev.p_v + ev.p_u, n_starts, _stage_seed(seed, 0),
        )
        phi_star = ms.best.x[: ev.p_v]
        theta_star = ms.best.x[ev.p_v :]
        traces = {"combined": ms}
        converged = ms.best.converged
        target_slot = problem.n_inputs - 1

    psi = ev.states_combined(np.concatenate([phi_star, theta_star]))
    energies = ev.energies_of(psi)
    states = [Statevector(n_qubits, psi[r].copy()) for r in range(psi.shape[0])]
    metrics = None
    if oracle is not None:
        metrics = _final_metrics(ev, problem, oracle, phi_star, theta_star)

    return SSVQEResult(
        problem=problem,
        optimal_phi=phi_star,
        optimal_theta=theta_star,
        energies=energies,
        state_indices=tuple(range(problem.n_inputs)),
        states=states,
        traces=traces,
        converged=converged,
        target_index=k,
        target_energy=float(energies[target_slot]),
        metrics=metrics,
    )


def result_from_parameters(problem: SSVQEProblem, phi, theta,
                           oracle: Optional[ExactSpectrum] = None) -> SSVQEResult:
    """Rebuild a result shell from stored optimal parameters (no optimization);
    states, energies, and fidelity metrics are recomputed."""
    phi = np.asarray(phi, dtype=np.float64).reshape(-1)
    theta = np.asarray(theta, dtype=np.float64).reshape(-1)
    base = mirrored_problem(problem) if problem.reflection else problem
    ev = _Evaluator(problem)
    if phi.shape[0] != ev.p_v or theta.shape[0] != ev.p_u:
        raise ValueError(
            f"expected {ev.p_v} phi and {ev.p_u} theta parameters, "
            f"got {phi.shape[0]} and {theta.shape[0]}"
        )
    psi = ev.states_combined(np.concatenate([phi, theta]))
    energies = ev.energies_of(psi)
    states = [Statevector(problem.n_qubits, psi[r].copy()) for r in range(psi.shape[0])]
    if problem.reflection:
        dim = 2**problem.n_qubits
        state_indices = tuple(dim - 1 - j for j in range(problem.n_inputs))
    else:
        state_indices = tuple(range(problem.n_inputs))
    target_slot = base.stage2_slot() if base.variant == "two_stage" \
        else problem.n_inputs - 1
    metrics = None
    if oracle is not None and not problem.reflection:
        metrics = _final_metrics(ev, problem, oracle, phi, theta)
    return SSVQEResult(
        problem=problem,
        optimal_phi=phi,
        optimal_theta=theta,
        energies=energies,
        state_indices=state_indices,
        states=states,
        traces={},
        converged=True,
        target_index=problem.k,
        target_energy=float(energies[target_slot]),
        metrics=metrics,
    )


def _stage_seed(seed, stage_id: int):
    parts = (seed,) if isinstance(seed, int) else tuple(seed)
    return (*parts, stage_id)


def mirrored_problem(problem: SSVQEProblem) -> SSVQEProblem:
    """The standard-path problem on -H realizing a reflection run."""
    if not problem.reflection:
        raise ValueError("problem is not a reflection problem")
    n = problem.n_qubits
    return replace(
        problem,
        hamiltonian=-problem.hamiltonian,
        k=2**n - 1 - problem.k,
        reflection=False,
    )


def _run_reflection(problem, config, n_starts, seed, oracle):
    mirrored = mirrored_problem(problem)
    mirrored_oracle = None
    if oracle is not None:
        # -H has the same eigenvectors with negated, order-reversed values
        mirrored_oracle = ExactSpectrum(
            oracle.n_qubits,
            -oracle.eigenvalues[::-1].copy(),
            oracle.eigenvectors[:, ::-1].copy(),
        )
    res = run(mirrored, config, n_starts, seed, oracle=mirrored_oracle)
    dim = 2**problem.n_qubits
    # slot j of the mirrored run targets eigen-index 2^n-1-j of H
    state_indices = tuple(dim - 1 - j for j in res.state_indices)
    ev = _Evaluator(problem)
    psi = ev.states_combined(np.concatenate([res.optimal_phi, res.optimal_theta]))
    energies = ev.energies_of(psi)
    target_slot = mirrored.stage2_slot()
    return SSVQEResult(
        problem=problem,
        optimal_phi=res.optimal_phi,
        optimal_theta=res.optimal_theta,
        energies=energies,
        state_indices=state_indices,
        states=res.states,
        traces=res.traces,
        converged=res.converged,
        target_index=problem.k,
        target_energy=float(energies[target_slot]),
        metrics=res.metrics,
    )
