"""Subspace-search variational quantum eigensolver on an exact statevector
simulator, with dense-diagonalization validation oracles throughout."""

from ._kernels import active_backend, available_backends
from .ansatz import (
    AnsatzSpec,
    block_gates,
    default_subspace_qubits,
    parameter_count,
    prepare_state,
    prepare_superposition,
)
from .core import (
    SSVQEProblem,
    SSVQEResult,
    build_problem,
    cost_L1,
    cost_L2,
    cost_weighted_all,
    cost_weighted_kth,
    mirrored_problem,
    result_from_parameters,
    run,
    state_fidelity,
    subspace_fidelity,
)
from .optimizer import (
    MinimizeResult,
    MultistartResult,
    OptimizationError,
    OptimizationTrace,
    OptimizerConfig,
    central_difference_gradient,
    initial_angles,
    minimize,
    multistart,
    parameter_shift_gradient,
)
from .pauli import (
    ExactSpectrum,
    Observable,
    ObservableParseError,
    PauliTerm,
    apply_observable,
    dense_matrix,
    exact_spectrum,
    expectation,
    parse_observable,
    random_transverse_ising,
    serialize_observable,
)
from .statevector import (
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
from .transition import (
    TransitionRequest,
    direct_matrix_element,
    transition_amplitude,
    transition_terms,
)

__version__ = "0.1.0"
