"""Benchmark the numba kernels against the pure-numpy fallback.

Runs the two hot paths (circuit execution and Pauli expectation) on a small
(acceptance-scale) and a large statevector, checks that both backends agree
to near machine precision, and prints per-call timings.

Usage: python benchmarks/bench_kernels.py [--large-n 16] [--repeats 30]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from ssvqe import _kernels, ansatz, pauli


def _workload(n_qubits, d2, batch, seed):
    spec = ansatz.AnsatzSpec(n_qubits, (n_qubits - 2, n_qubits - 1), 2, d2)
    program = ansatz.combined_program(spec)
    rng = np.random.default_rng(seed)
    params = rng.uniform(0, 2 * np.pi, program.n_params)
    psi0 = np.zeros((batch, 2**n_qubits), dtype=np.complex128)
    for b in range(batch):
        psi0[b, b] = 1.0
    packed = pauli.random_transverse_ising(n_qubits, seed).packed()
    return program, params, psi0, packed


def _time(fn, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_case(label, n_qubits, d2, batch, repeats, seed=0):
    program, params, psi0, packed = _workload(n_qubits, d2, batch, seed)
    rows = {}
    states = {}
    for name in _kernels.available_backends():
        kernels = _kernels.get_kernels(name)

        def run_circuit():
            psi = psi0.copy()
            kernels.run_circuit(
                psi, program.kinds, program.bits1, program.bits2,
                program.pidx, params,
            )
            return psi

        psi = run_circuit()  # warm-up (numba compiles here)
        states[name] = psi
        kernels.pauli_expectations(psi, *packed)
        t_circuit = _time(run_circuit, repeats)
        t_expect = _time(lambda: kernels.pauli_expectations(psi, *packed), repeats)
        rows[name] = (t_circuit, t_expect)

    names = sorted(rows)
    if len(names) == 2:
        a, b = states[names[0]], states[names[1]]
        agreement = float(np.max(np.abs(a - b)))
    else:
        agreement = 0.0

    print(f"\n{label}: n={n_qubits}, d2={d2}, batch={batch}, "
          f"{len(program.kinds)} ops, {len(packed[0])} Pauli terms")
    print(f"  cross-backend max |delta psi| = {agreement:.2e}")
    print(f"  {'backend':<8} {'circuit':>12} {'expectation':>12}")
    for name in names:
        t_c, t_e = rows[name]
        print(f"  {name:<8} {t_c * 1e6:>10.1f}us {t_e * 1e6:>10.1f}us")
    if "numba" in rows and "numpy" in rows:
        print(f"  numba speedup: circuit x{rows['numpy'][0] / rows['numba'][0]:.1f}, "
              f"expectation x{rows['numpy'][1] / rows['numba'][1]:.1f}")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--large-n", type=int, default=16)
    parser.add_argument("--repeats", type=int, default=30)
    args = parser.parse_args()

    print(f"available backends: {_kernels.available_backends()}")
    print(f"module default: {_kernels.active_backend()} "
          f"(override with SSVQE_KERNEL_BACKEND)")

    bench_case("acceptance scale", 4, 6, 4, max(args.repeats, 200))
    bench_case("large statevector", args.large_n, 4, 1, args.repeats)


if __name__ == "__main__":
    main()
