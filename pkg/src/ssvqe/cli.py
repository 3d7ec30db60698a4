"""Command-line surface: generate Hamiltonians, run SSVQE variants, compute
transition amplitudes, export oracle spectra, and sweep over Hamiltonian files.

Subcommands
-----------
generate    write a seeded random transverse Ising observable file
exact       dense-diagonalize an observable and list its spectrum
run         execute one SSVQE run and write a structured report
transition  evaluate <E_i|A|E_j> from a stored report or an inline run
sweep       run the configured variant over many observable files

Configuration is a JSON document mirroring the flags (see
``example_config()``); explicit flags override file values. Everything
random is fixed by the config plus the master seed: builtin Hamiltonian
coefficients come from their own seed, and start m of optimization stage t
draws its initial angles from the (seed, t, m) child stream.

Exit codes: 0 success/converged, 2 validation error, 3 optimization did not
converge (results still written), 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .core import SSVQEProblem, build_problem, result_from_parameters, run
from .optimizer import OptimizerConfig
from .pauli import (
    DENSE_QUBIT_LIMIT,
    ObservableParseError,
    exact_spectrum,
    parse_observable,
    random_transverse_ising,
    serialize_observable,
)
from .transition import (
    TransitionRequest,
    direct_matrix_element,
    transition_amplitude,
    transition_terms,
)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NOT_CONVERGED = 3
EXIT_IO = 4

REPORT_SCHEMA = "ssvqe-run-report/1"


class ValidationFailure(Exception):
    """Aggregated config problems, reported before any compute."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


def example_config() -> dict:
    """A fully-populated config document with the default values."""
    return {
        "hamiltonian": {"builtin_ising": {"n_qubits": 4, "seed": 0}},
        "variant": "two_stage",
        "k": 1,
        "weight_w": None,
        "weight_vector": None,
        "s": None,
        "reflection": False,
        "ansatz": {
            "d1": 2,
            "d2": None,
            "entangler": "chain",
            "subspace_qubits": None,
        },
        "optimizer": {
            "gradient_tolerance": 1e-6,
            "max_iterations": 10000,
            "wolfe_c1": 1e-4,
            "wolfe_c2": 0.9,
            "gradient_mode": "parameter_shift",
            "fd_step": 1e-4,
        },
        "n_starts": 10,
        "seed": 0,
        "oracle": "auto",
    }


def _merge_config(base: dict, override: dict, errors: list, path="") -> dict:
    merged = dict(base)
    for key, value in override.items():
        if key not in base:
            errors.append(f"unknown config key {path + key!r}")
            continue
        if isinstance(base[key], dict) and isinstance(value, dict) and key != "hamiltonian":
            merged[key] = _merge_config(base[key], value, errors, path=f"{key}.")
        else:
            merged[key] = value
    return merged


def load_config(path: str | None, overrides: dict) -> dict:
    """File config merged under flag overrides on top of the defaults."""
    errors: list[str] = []
    config = example_config()
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                file_cfg = json.load(fh)
        except OSError as err:
            raise ValidationFailure([f"cannot read config {path}: {err}"])
        except json.JSONDecodeError as err:
            raise ValidationFailure([f"config {path} is not valid JSON: {err}"])
        if not isinstance(file_cfg, dict):
            raise ValidationFailure([f"config {path} must be a JSON object"])
        config = _merge_config(config, file_cfg, errors)
    config = _merge_config(config, overrides, errors)
    if errors:
        raise ValidationFailure(errors)
    return config


def _load_hamiltonian(source, errors):
    if not isinstance(source, dict) or len(source) != 1:
        errors.append(
            'hamiltonian must be {"builtin_ising": {"n_qubits", "seed"}} '
            'or {"file": path}'
        )
        return None
    if "builtin_ising" in source:
        params = source["builtin_ising"]
        n = params.get("n_qubits")
        seed = params.get("seed")
        if not isinstance(n, int) or n < 1:
            errors.append(f"builtin_ising.n_qubits must be a positive integer, got {n}")
            return None
        if not isinstance(seed, int) or seed < 0:
            errors.append(f"builtin_ising.seed must be a non-negative integer, got {seed}")
            return None
        return random_transverse_ising(n, seed)
    if "file" in source:
        path = source["file"]
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as err:
            errors.append(f"cannot read hamiltonian file {path}: {err}")
            return None
        try:
            return parse_observable(text)
        except ObservableParseError as err:
            errors.append(f"{path}: {err}")
            return None
    errors.append(f"unknown hamiltonian source {sorted(source)}")
    return None


def materialize(config: dict):
    """Resolve a config into (problem, optimizer config, effective echo).

    Every validation problem is collected and raised at once; the echo has
    all defaulted values filled in.
    """
    errors: list[str] = []
    if config.get("hamiltonian") is None:
        errors.append("a hamiltonian source is required")
        raise ValidationFailure(errors)
    hamiltonian = _load_hamiltonian(config["hamiltonian"], errors)
    if hamiltonian is None:
        raise ValidationFailure(errors)

    if not isinstance(config["k"], int) or config["k"] < 1:
        errors.append(f"k must be a positive integer, got {config['k']}")
    if not isinstance(config["n_starts"], int) or config["n_starts"] < 1:
        errors.append(f"n_starts must be a positive integer, got {config['n_starts']}")
    if not isinstance(config["seed"], int) or config["seed"] < 0:
        errors.append(f"seed must be a non-negative integer, got {config['seed']}")
    if config["oracle"] not in ("on", "off", "auto"):
        errors.append(f"oracle must be on/off/auto, got {config['oracle']!r}")
    if errors:
        raise ValidationFailure(errors)

    try:
        opt_config = OptimizerConfig(**config["optimizer"])
    except (TypeError, ValueError) as err:
        raise ValidationFailure([f"optimizer config: {err}"])

    a = config["ansatz"]
    weight_vector = config["weight_vector"]
    if weight_vector is not None:
        weight_vector = tuple(float(w) for w in weight_vector)
    subspace = a["subspace_qubits"]
    try:
        problem = build_problem(
            hamiltonian,
            config["variant"],
            config["k"],
            d1=a["d1"],
            d2=a["d2"],
            entangler=a["entangler"],
            subspace_qubits=None if subspace is None else tuple(subspace),
            weight_w=config["weight_w"],
            weight_vector=weight_vector,
            s=config["s"],
            reflection=config["reflection"],
            input_indices=None,
        )
    except ValueError as err:
        raise ValidationFailure(str(err).split("; "))

    use_oracle = config["oracle"] == "on" or (
        config["oracle"] == "auto" and problem.n_qubits <= DENSE_QUBIT_LIMIT
    )
    if use_oracle and problem.n_qubits > DENSE_QUBIT_LIMIT:
        raise ValidationFailure(
            [f"oracle requires n_qubits <= {DENSE_QUBIT_LIMIT}, got {problem.n_qubits}"]
        )

    echo = json.loads(json.dumps(config))  # deep copy, JSON-clean
    echo["ansatz"]["d1"] = problem.ansatz.d1
    echo["ansatz"]["d2"] = problem.ansatz.d2
    echo["ansatz"]["entangler"] = problem.ansatz.entangler
    echo["ansatz"]["subspace_qubits"] = list(problem.ansatz.subspace_qubits)
    echo["weight_w"] = problem.weight_w
    echo["weight_vector"] = (
        None if problem.weight_vector is None else list(problem.weight_vector)
    )
    echo["s"] = problem.s
    echo["input_indices"] = list(problem.input_indices)
    echo["oracle"] = "on" if use_oracle else "off"
    return problem, opt_config, use_oracle, echo


# ---------------------------------------------------------------------------
# report assembly
# ---------------------------------------------------------------------------

def _trace_payload(trace):
    return {
        "records": [
            [r.iteration, r.cost, r.grad_inf_norm, r.metrics]
            for r in trace.records
        ],
        "annotations": list(trace.annotations),
    }


def _stage_payload(ms):
    starts = []
    for index, res in enumerate(ms.results):
        if res is None:
            starts.append({"start": index, "failed": True})
            continue
        starts.append(
            {
                "start": index,
                "status": res.status,
                "final_cost": res.fun,
                "n_iterations": res.n_iterations,
                "trace": _trace_payload(res.trace),
            }
        )
    return {
        "best_start": ms.best_index,
        "failures": [[i, msg] for i, msg in ms.failures],
        "starts": starts,
    }


def build_report(echo: dict, result, oracle, wall_clock: float) -> dict:
    problem = result.problem
    report = {
        "schema": REPORT_SCHEMA,
        "config": echo,
        "n_qubits": problem.n_qubits,
        "variant": problem.variant,
        "energies": [float(e) for e in result.energies],
        "state_indices": list(result.state_indices),
        "target_index": result.target_index,
        "target_energy": result.target_energy,
        "converged": result.converged,
        "optimal_parameters": {
            "phi": [float(v) for v in result.optimal_phi],
            "theta": [float(v) for v in result.optimal_theta],
        },
        "stages": {name: _stage_payload(ms) for name, ms in result.traces.items()},
        "wall_clock_seconds": wall_clock,
    }
    if oracle is not None:
        exact = [float(oracle.eigenvalues[i]) for i in result.state_indices]
        errors = [abs(e - x) for e, x in zip(report["energies"], exact)]
        report["oracle"] = {
            "eigenvalues": exact,
            "per_state_error": errors,
            "max_abs_error": max(errors),
            "target_error": abs(
                result.target_energy - oracle.eigenvalues[result.target_index]
            ),
        }
    if result.metrics is not None:
        report["fidelities"] = result.metrics
    return report


def report_table(report: dict) -> str:
    """Flat per-iteration CSV: one row per accepted iterate of every start."""
    metric_keys: list[str] = []
    for stage in report["stages"].values():
        for start in stage["starts"]:
            if start.get("failed"):
                continue
            for rec in start["trace"]["records"]:
                if rec[3]:
                    for key in rec[3]:
                        if key not in metric_keys:
                            metric_keys.append(key)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["stage", "start", "iteration", "cost", "grad_inf_norm", *metric_keys])
    for name, stage in report["stages"].items():
        for start in stage["starts"]:
            if start.get("failed"):
                continue
            for it, cost, gnorm, metrics in start["trace"]["records"]:
                extra = [
                    (metrics or {}).get(key, "") for key in metric_keys
                ]
                writer.writerow([name, start["start"], it, repr(cost), repr(gnorm),
                                 *[x if x == "" else repr(x) for x in extra]])
    return buf.getvalue()


def _write_output(payload: str, out: str | None) -> int:
    if out is None:
        sys.stdout.write(payload)
        if not payload.endswith("\n"):
            sys.stdout.write("\n")
        return EXIT_OK
    try:
        Path(out).write_text(payload, encoding="utf-8")
    except OSError as err:
        print(f"error: cannot write {out}: {err}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def _dump_report(report: dict, fmt: str, out: str | None) -> int:
    payload = json.dumps(report, indent=2) if fmt == "report" else report_table(report)
    return _write_output(payload, out)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_generate(args) -> int:
    if args.n_qubits < 1:
        print("error: --n-qubits must be >= 1", file=sys.stderr)
        return EXIT_VALIDATION
    if args.seed < 0:
        print("error: --seed must be non-negative", file=sys.stderr)
        return EXIT_VALIDATION
    obs = random_transverse_ising(args.n_qubits, args.seed)
    header = (
        f"# fully connected random transverse Ising model\n"
        f"# n_qubits={args.n_qubits} seed={args.seed}\n"
    )
    return _write_output(header + serialize_observable(obs), args.out)


def cmd_exact(args) -> int:
    try:
        text = Path(args.hamiltonian).read_text(encoding="utf-8")
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_IO
    try:
        obs = parse_observable(text, n_qubits=args.n_qubits)
    except (ObservableParseError, ValueError) as err:
        print(f"error: {args.hamiltonian}: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    if obs.n_qubits > DENSE_QUBIT_LIMIT:
        print(
            f"error: dense diagonalization limited to {DENSE_QUBIT_LIMIT} qubits, "
            f"got {obs.n_qubits}",
            file=sys.stderr,
        )
        return EXIT_VALIDATION
    spectrum = exact_spectrum(obs)
    for value in spectrum.eigenvalues:
        print(repr(float(value)))
    if args.out is not None:
        payload = json.dumps(
            {
                "n_qubits": obs.n_qubits,
                "eigenvalues": [float(v) for v in spectrum.eigenvalues],
            },
            indent=2,
        )
        return _write_output(payload, args.out)
    return EXIT_OK


def _config_overrides(args) -> dict:
    over: dict = {}
    if getattr(args, "hamiltonian", None) is not None:
        over["hamiltonian"] = {"file": args.hamiltonian}
    if getattr(args, "builtin_ising", None) is not None:
        over["hamiltonian"] = {
            "builtin_ising": {
                "n_qubits": args.builtin_ising,
                "seed": args.ham_seed if args.ham_seed is not None else 0,
            }
        }
    simple = {
        "variant": "variant",
        "k": "k",
        "weight_w": "weight_w",
        "s": "s",
        "n_starts": "n_starts",
        "seed": "seed",
        "oracle": "oracle",
    }
    for key, attr in simple.items():
        value = getattr(args, attr, None)
        if value is not None:
            over[key] = value
    if getattr(args, "weights", None) is not None:
        over["weight_vector"] = [float(w) for w in args.weights.split(",")]
    if getattr(args, "reflection", False):
        over["reflection"] = True
    ansatz_over = {}
    for key in ("d1", "d2", "entangler"):
        value = getattr(args, key, None)
        if value is not None:
            ansatz_over[key] = value
    if getattr(args, "subspace_qubits", None) is not None:
        ansatz_over["subspace_qubits"] = [
            int(q) for q in args.subspace_qubits.split(",")
        ]
    if ansatz_over:
        over["ansatz"] = ansatz_over
    opt_over = {}
    for key in ("gradient_tolerance", "max_iterations", "gradient_mode", "fd_step"):
        value = getattr(args, key, None)
        if value is not None:
            opt_over[key] = value
    if opt_over:
        over["optimizer"] = opt_over
    return over


def _execute_run(config: dict):
    problem, opt_config, use_oracle, echo = materialize(config)
    oracle = exact_spectrum(problem.hamiltonian) if use_oracle else None
    started = time.perf_counter()
    result = run(
        problem,
        opt_config,
        n_starts=config["n_starts"],
        seed=config["seed"],
        oracle=oracle,
    )
    wall_clock = time.perf_counter() - started
    return build_report(echo, result, oracle, wall_clock), result, oracle


def cmd_run(args) -> int:
    try:
        config = load_config(args.config, _config_overrides(args))
        report, result, _ = _execute_run(config)
    except ValidationFailure as err:
        for line in err.errors:
            print(f"error: {line}", file=sys.stderr)
        return EXIT_VALIDATION
    status = _dump_report(report, args.format, args.out)
    if status != EXIT_OK:
        return status
    if args.out is not None:
        oracle_note = ""
        if "oracle" in report:
            oracle_note = f", max oracle error {report['oracle']['max_abs_error']:.2e}"
        print(
            f"{report['variant']}: target E_{report['target_index']} = "
            f"{report['target_energy']:.8f}{oracle_note} -> {args.out}"
        )
    return EXIT_OK if result.converged else EXIT_NOT_CONVERGED


def cmd_transition(args) -> int:
    try:
        operator_text = Path(args.operator).read_text(encoding="utf-8")
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_IO
    try:
        if args.report is not None:
            try:
                stored = json.loads(Path(args.report).read_text(encoding="utf-8"))
            except OSError as err:
                print(f"error: {err}", file=sys.stderr)
                return EXIT_IO
            if stored.get("schema") != REPORT_SCHEMA:
                raise ValidationFailure(
                    [f"{args.report} is not a {REPORT_SCHEMA} document"]
                )
            stored_cfg = dict(stored["config"])
            stored_cfg.pop("input_indices", None)  # echo-only key
            merge_errors: list[str] = []
            config = _merge_config(example_config(), stored_cfg, merge_errors)
            if merge_errors:
                raise ValidationFailure(merge_errors)
            problem, _, use_oracle, _ = materialize(config)
            result = result_from_parameters(
                problem,
                stored["optimal_parameters"]["phi"],
                stored["optimal_parameters"]["theta"],
            )
        else:
            config = load_config(args.config, _config_overrides(args))
            _, result, _ = _execute_run(config)
        operator = parse_observable(operator_text, n_qubits=result.problem.n_qubits)
        request = TransitionRequest(operator, result, args.i, args.j)
    except ValidationFailure as err:
        for line in err.errors:
            print(f"error: {line}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ObservableParseError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_VALIDATION

    amplitude = transition_amplitude(request)
    direct = direct_matrix_element(request)
    payload = {
        "schema": "ssvqe-transition-report/1",
        "i": args.i,
        "j": args.j,
        "operator_file": args.operator,
        "terms": transition_terms(request) if args.i != args.j else None,
        "amplitude": {"re": amplitude.real, "im": amplitude.imag},
        "direct": {"re": direct.real, "im": direct.imag},
        "abs_difference": abs(amplitude - direct),
    }
    return _write_output(json.dumps(payload, indent=2), args.out)


def _sweep_one(payload):
    """Worker for one sweep entry; must stay importable for process pools."""
    label, path, base_config = payload
    try:
        config = json.loads(json.dumps(base_config))
        config["hamiltonian"] = {"file": path}
        report, result, oracle = _execute_run(config)
        return label, report, None
    except ValidationFailure as err:
        return label, None, "; ".join(err.errors)
    except Exception as err:  # per-file failures recorded, sweep continues
        return label, None, f"{type(err).__name__}: {err}"


def cmd_sweep(args) -> int:
    if not args.files:
        print("error: sweep requires at least one hamiltonian file", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        base_config = load_config(args.config, _config_overrides(args))
    except ValidationFailure as err:
        for line in err.errors:
            print(f"error: {line}", file=sys.stderr)
        return EXIT_VALIDATION

    out_dir = None
    if args.out is not None:
        out_dir = Path(args.out)
        try:
            out_dir.mkdir(parents=True, exist_ok=True)
        except OSError as err:
            print(f"error: cannot create {out_dir}: {err}", file=sys.stderr)
            return EXIT_IO

    jobs = [(Path(f).stem, f, base_config) for f in args.files]
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            outcomes = list(pool.map(_sweep_one, jobs))
    else:
        outcomes = [_sweep_one(job) for job in jobs]

    rows = []
    failures = 0
    any_unconverged = False
    for label, report, failure in outcomes:
        if failure is not None:
            failures += 1
            rows.append({"file": label, "error": failure})
            continue
        row = {
            "file": label,
            "converged": report["converged"],
            "target_energy": report["target_energy"],
        }
        for slot, energy in zip(report["state_indices"], report["energies"]):
            row[f"E_{slot}"] = energy
        if "oracle" in report:
            row["max_oracle_error"] = report["oracle"]["max_abs_error"]
        rows.append(row)
        any_unconverged = any_unconverged or not report["converged"]
        if out_dir is not None:
            (out_dir / f"{label}.report.json").write_text(
                json.dumps(report, indent=2), encoding="utf-8"
            )

    columns = ["file"]
    for row in rows:
        for key in row:
            if key not in columns:
                columns.append(key)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([row.get(c, "") for c in columns])
    table = buf.getvalue()
    print(table, end="")
    if out_dir is not None:
        (out_dir / "summary.csv").write_text(table, encoding="utf-8")

    if failures == len(jobs):
        return EXIT_VALIDATION
    return EXIT_NOT_CONVERGED if (any_unconverged or failures) else EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _add_common_run_flags(p):
    p.add_argument("--config", help="JSON config file (flags override it)")
    p.add_argument("--hamiltonian", help="observable file path")
    p.add_argument("--builtin-ising", type=int, metavar="N",
                   help="use the built-in random transverse Ising model on N qubits")
    p.add_argument("--ham-seed", type=int, help="seed for the built-in Hamiltonian")
    p.add_argument("--variant", choices=("two_stage", "weighted_kth", "weighted_all"))
    p.add_argument("--k", type=int, help="target excitation index")
    p.add_argument("--weight-w", dest="weight_w", type=float,
                   help="weight on the k-th input (weighted_kth)")
    p.add_argument("--weights", help="comma-separated weight vector (weighted_all)")
    p.add_argument("--s", type=int, help="stage-2 input index (two_stage)")
    p.add_argument("--reflection", action="store_true",
                   help="use the k >= 2^(n-1) mirrored path")
    p.add_argument("--d1", type=int, help="V block depth")
    p.add_argument("--d2", type=int, help="U block depth")
    p.add_argument("--entangler", choices=("chain", "all_to_all"))
    p.add_argument("--subspace-qubits", help="comma-separated qubit indices for V")
    p.add_argument("--n-starts", dest="n_starts", type=int)
    p.add_argument("--seed", type=int, help="master seed for all random starts")
    p.add_argument("--oracle", choices=("on", "off", "auto"))
    p.add_argument("--gradient-tolerance", dest="gradient_tolerance", type=float)
    p.add_argument("--max-iterations", dest="max_iterations", type=int)
    p.add_argument("--gradient-mode", dest="gradient_mode",
                   choices=("parameter_shift", "central_difference"))
    p.add_argument("--fd-step", dest="fd_step", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ssvqe",
        description="Subspace-search VQE on an exact statevector simulator.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a random transverse Ising observable")
    p.add_argument("--n-qubits", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output path (default: stdout)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("exact", help="dense-diagonalize an observable file")
    p.add_argument("hamiltonian", help="observable file")
    p.add_argument("--n-qubits", type=int,
                   help="override the inferred qubit count")
    p.add_argument("--out", help="also write a JSON spectrum here")
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("run", help="run one SSVQE optimization")
    _add_common_run_flags(p)
    p.add_argument("--format", choices=("report", "table"), default="report")
    p.add_argument("--out", help="output path (default: stdout)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("transition", help="transition amplitude <E_i|A|E_j>")
    _add_common_run_flags(p)
    p.add_argument("--report", help="prior run report with stored parameters")
    p.add_argument("--operator", required=True, help="observable file for A")
    p.add_argument("--i", type=int, required=True)
    p.add_argument("--j", type=int, required=True)
    p.add_argument("--out", help="output path (default: stdout)")
    p.set_defaults(func=cmd_transition)

    p = sub.add_parser("sweep", help="run the configured variant per file")
    _add_common_run_flags(p)
    p.add_argument("files", nargs="*", help="observable files")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="output directory for reports and summary.csv")
    p.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
