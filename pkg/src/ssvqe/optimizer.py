"""Deterministic BFGS minimization with a strong-Wolfe line search, analytic
parameter-shift gradients, and seeded multistart.

The in-repo implementation (rather than a library wrapper) exists because the
surrounding drivers rely on guarantees a generic minimizer does not expose:
configurable Wolfe constants, a per-iteration trace with monotone accepted
costs, explicit curvature-skip annotations, and a fixed convergence-flag
vocabulary.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

STATUS_CONVERGED = "converged"
STATUS_MAX_ITERATIONS = "max_iterations"
STATUS_LINE_SEARCH_FAILURE = "line_search_failure"

_MAX_LINE_SEARCH_TRIALS = 30
_MAX_ZOOM_STEPS = 40


class OptimizationError(RuntimeError):
    """Non-finite objective or gradient; carries the offending iterate."""

    def __init__(self, message: str, iterate=None):
        super().__init__(message)
        self.iterate = None if iterate is None else np.array(iterate)


@dataclass(frozen=True)
class OptimizerConfig:
    gradient_tolerance: float = 1e-6
    max_iterations: int = 10000
    wolfe_c1: float = 1e-4
    wolfe_c2: float = 0.9
    gradient_mode: str = "parameter_shift"  # or "central_difference"
    fd_step: float = 1e-4

    def __post_init__(self):
        if not 0.0 < self.wolfe_c1 < self.wolfe_c2 < 1.0:
            raise ValueError("need 0 < wolfe_c1 < wolfe_c2 < 1")
        if self.gradient_tolerance <= 0 or self.fd_step <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")
        if self.gradient_mode not in ("parameter_shift", "central_difference"):
            raise ValueError(f"unknown gradient_mode {self.gradient_mode!r}")


@dataclass
class TraceRecord:
    iteration: int
    cost: float
    grad_inf_norm: float
    metrics: Optional[dict] = None


@dataclass
class OptimizationTrace:
    """Accepted-iterate history; costs are non-increasing by construction."""

    records: list[TraceRecord] = field(default_factory=list)
    annotations: list[str] = field(default_factory=list)

    def costs(self) -> np.ndarray:
        return np.array([r.cost for r in self.records])


@dataclass
class MinimizeResult:
    x: np.ndarray
    fun: float
    status: str
    n_iterations: int
    trace: OptimizationTrace

    @property
    def converged(self) -> bool:
        return self.status == STATUS_CONVERGED


def _check_finite(name, value, iterate):
    if not np.all(np.isfinite(value)):
        raise OptimizationError(f"non-finite {name} encountered", iterate=iterate)


def parameter_shift_gradient(cost: Callable, params) -> np.ndarray:
    """Exact gradient for costs built from single-rotation parameters:
    component i is [cost(p + pi/2 e_i) - cost(p - pi/2 e_i)] / 2."""
    params = np.asarray(params, dtype=np.float64)
    grad = np.empty_like(params)
    work = params.copy()
    for i in range(params.shape[0]):
        theta = work[i]
        work[i] = theta + 0.5 * np.pi
        plus = cost(work)
        work[i] = theta - 0.5 * np.pi
        minus = cost(work)
        work[i] = theta
        grad[i] = 0.5 * (plus - minus)
    return grad


def central_difference_gradient(cost: Callable, params, step: float = 1e-4) -> np.ndarray:
    params = np.asarray(params, dtype=np.float64)
    grad = np.empty_like(params)
    work = params.copy()
    for i in range(params.shape[0]):
        theta = work[i]
        work[i] = theta + step
        plus = cost(work)
        work[i] = theta - step
        minus = cost(work)
        work[i] = theta
        grad[i] = (plus - minus) / (2.0 * step)
    return grad


def gradient_for(cost: Callable, config: OptimizerConfig) -> Callable:
    """The gradient callable selected by ``config.gradient_mode``."""
    if config.gradient_mode == "parameter_shift":
        return lambda p: parameter_shift_gradient(cost, p)
    return lambda p: central_difference_gradient(cost, p, config.fd_step)


def _cubic_step(a_lo, f_lo, d_lo, a_hi, f_hi):
    """Minimizer of the cubic fitting (f_lo, d_lo) at a_lo and f_hi at a_hi,
    safeguarded to the interior of the interval."""
    span = a_hi - a_lo
    lo, hi = (a_lo, a_hi) if span > 0 else (a_hi, a_lo)
    width = hi - lo
    # quadratic interpolation using phi(lo), phi'(lo), phi(hi)
    denom = f_hi - f_lo - d_lo * span
    if abs(denom) > 1e-16:
        trial = a_lo - 0.5 * d_lo * span * span / denom
    else:
        trial = a_lo + 0.5 * span
    if not np.isfinite(trial) or trial < lo + 0.1 * width or trial > hi - 0.1 * width:
        trial = 0.5 * (lo + hi)
    return trial


def _line_search(phi, phi_grad, f0, df0, c1, c2):
    """Strong-Wolfe line search (bracketing plus zoom).

    ``phi(a)`` evaluates the objective along the ray; ``phi_grad(a)`` returns
    (directional derivative, full gradient). Returns (alpha, f, grad) or None.
    """

    def zoom(a_lo, f_lo, d_lo, a_hi, f_hi):
        for _ in range(_MAX_ZOOM_STEPS):
            a = _cubic_step(a_lo, f_lo, d_lo, a_hi, f_hi)
            f = phi(a)
            if f > f0 + c1 * a * df0 or f >= f_lo:
                a_hi, f_hi = a, f
            else:
                d, grad = phi_grad(a)
                if abs(d) <= -c2 * df0:
                    return a, f, grad
                if d * (a_hi - a_lo) >= 0:
                    a_hi, f_hi = a_lo, f_lo
                a_lo, f_lo, d_lo = a, f, d
            if abs(a_hi - a_lo) < 1e-14:
                break
        return None

    a_prev, f_prev, d_prev = 0.0, f0, df0
    a = 1.0
    for trial in range(_MAX_LINE_SEARCH_TRIALS):
        f = phi(a)
        if f > f0 + c1 * a * df0 or (trial > 0 and f >= f_prev):
            return zoom(a_prev, f_prev, d_prev, a, f)
        d, grad = phi_grad(a)
        if abs(d) <= -c2 * df0:
            return a, f, grad
        if d >= 0:
            return zoom(a, f, d, a_prev, f_prev)
        a_prev, f_prev, d_prev = a, f, d
        a *= 2.0
    return None


def minimize(objective: Callable, gradient: Callable, start,
             config: OptimizerConfig | None = None,
             callback: Callable | None = None) -> MinimizeResult:
    """BFGS with a strong-Wolfe line search.

    Stops when the gradient infinity-norm drops below
    ``config.gradient_tolerance`` (status ``converged``), at
    ``config.max_iterations``, or when the line search cannot satisfy the
    Wolfe conditions. ``callback(iteration, x, cost, grad_inf_norm)`` runs on
    every accepted iterate; a returned dict is stored in the trace record.
    """
    config = config or OptimizerConfig()
    x = np.array(start, dtype=np.float64).reshape(-1)
    _check_finite("start point", x, x)
    n = x.shape[0]

    f = float(objective(x))
    _check_finite("objective", f, x)
    g = np.asarray(gradient(x), dtype=np.float64)
    _check_finite("gradient", g, x)

    trace = OptimizationTrace()

    def record(iteration, cost, grad_norm):
        metrics = callback(iteration, x, cost, grad_norm) if callback else None
        trace.records.append(TraceRecord(iteration, cost, grad_norm, metrics))

    gnorm = float(np.max(np.abs(g))) if n else 0.0
    record(0, f, gnorm)
    if gnorm <= config.gradient_tolerance:
        return MinimizeResult(x, f, STATUS_CONVERGED, 0, trace)

    h_inv = np.eye(n)
    status = STATUS_MAX_ITERATIONS
    iteration = 0
    for iteration in range(1, config.max_iterations + 1):
        p = -h_inv @ g
        df0 = float(g @ p)
        if df0 >= 0:
            # numerical loss of descent; restart from steepest descent
            trace.annotations.append(
                f"iteration {iteration}: non-descent direction, resetting H"
            )
            h_inv = np.eye(n)
            p = -g
            df0 = float(g @ p)

        def phi(a, _p=p):
            val = float(objective(x + a * _p))
            _check_finite("objective", val, x + a * _p)
            return val

        def phi_grad(a, _p=p):
            grad = np.asarray(gradient(x + a * _p), dtype=np.float64)
            _check_finite("gradient", grad, x + a * _p)
            return float(grad @ _p), grad

        hit = _line_search(phi, phi_grad, f, df0, config.wolfe_c1, config.wolfe_c2)
        if hit is None:
            status = STATUS_LINE_SEARCH_FAILURE
            iteration -= 1
            break
        alpha, f_new, g_new = hit

        s = alpha * p
        y = g_new - g
        x = x + s
        f = f_new
        g = g_new
        gnorm = float(np.max(np.abs(g)))
        record(iteration, f, gnorm)

        if gnorm <= config.gradient_tolerance:
            status = STATUS_CONVERGED
            break

        sy = float(s @ y)
        if sy <= 1e-10 * np.linalg.norm(s) * np.linalg.norm(y):
            trace.annotations.append(
                f"iteration {iteration}: curvature condition s.y > 0 violated, "
                "inverse-Hessian update skipped"
            )
            continue
        if iteration == 1:
            h_inv *= sy / float(y @ y)
        rho = 1.0 / sy
        hy = h_inv @ y
        # BFGS inverse update: (I - rho s y^T) H (I - rho y s^T) + rho s s^T
        h_inv -= rho * (np.outer(s, hy) + np.outer(hy, s))
        h_inv += rho * rho * float(y @ hy) * np.outer(s, s) + rho * np.outer(s, s)

    return MinimizeResult(x, f, status, iteration, trace)


@dataclass
class MultistartResult:
    best_index: int
    results: list[Optional[MinimizeResult]]
    failures: list[tuple[int, str]]

    @property
    def best(self) -> MinimizeResult:
        return self.results[self.best_index]


def _entropy(seed) -> tuple[int, ...]:
    parts = (seed,) if isinstance(seed, int) else tuple(int(s) for s in seed)
    if any(s < 0 for s in parts):
        raise ValueError(f"seeds must be non-negative, got {parts}")
    return parts


def initial_angles(seed, start_index: int, n_params: int) -> np.ndarray:
    """Start ``start_index``'s initial point: uniform [0, 2*pi) angles drawn
    from numpy's default generator seeded with (*seed, start_index), so
    adding starts never perturbs earlier ones."""
    rng = np.random.default_rng((*_entropy(seed), start_index))
    return rng.uniform(0.0, 2.0 * np.pi, n_params)


def multistart(run_one: Callable[[np.ndarray], MinimizeResult], n_params: int,
               n_starts: int, seed) -> MultistartResult:
    """Run ``run_one`` from ``n_starts`` seeded uniform-[0, 2pi) initial
    points; the best result is the lowest final cost (ties broken by start
    index). Per-start failures propagate only if every start fails."""
    if n_starts < 1:
        raise ValueError("n_starts must be >= 1")
    results: list[Optional[MinimizeResult]] = []
    failures: list[tuple[int, str]] = []
    for m in range(n_starts):
        try:
            results.append(run_one(initial_angles(seed, m, n_params)))
        except OptimizationError as err:
            results.append(None)
            failures.append((m, str(err)))
    best_index = -1
    for m, res in enumerate(results):
        if res is None:
            continue
        if best_index < 0 or res.fun < results[best_index].fun:
            best_index = m
    if best_index < 0:
        raise OptimizationError(
            f"all {n_starts} starts failed: {failures}"
        )
    return MultistartResult(best_index, results, failures)
