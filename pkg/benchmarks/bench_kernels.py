"""Timing comparison of the ensemble propagation kernels.

Runs the same workload (canonical two-qubit circuits under correlated
dephasing, plus an optional wider register built from repeated gates)
through every available backend and reports realizations/second.

Usage:
    python3 benchmarks/bench_kernels.py
    python3 benchmarks/bench_kernels.py --realizations 20000 --repeats 5
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from corrnoise import canonical_circuits, two_qubit_model
from corrnoise._kernels import available_backends, get_backend
from corrnoise.circuits import Circuit, GateOp
from corrnoise.core import z_diagonals
from corrnoise.noise import NoiseModel, sample_offsets
from corrnoise.simulate import build_schedule


def _wide_circuit(n_qubits: int) -> Circuit:
    ops = [GateOp("RY", (q,), 0.7, 1.0) for q in range(1, n_qubits + 1)]
    for q in range(1, n_qubits):
        ops.append(GateOp("CNOT", (q, q + 1), None, 1.0))
    ops.append(GateOp("WAIT", (), None, 2.0))
    return Circuit(n_qubits, tuple(ops), label=f"chain_{n_qubits}q")


def _workloads(n_qubits_wide: int) -> list[tuple[str, Circuit, NoiseModel]]:
    loads = []
    model2 = two_qubit_model(1.0, 0.8, 0.5)
    for label, circ in canonical_circuits().items():
        loads.append((label, circ, model2))
    if n_qubits_wide > 2:
        n = n_qubits_wide
        sig = np.full(n, 0.5)
        corr = np.full((n, n), 0.3)
        np.fill_diagonal(corr, 1.0)
        loads.append((f"chain_{n}q", _wide_circuit(n), NoiseModel(sig, corr)))
    return loads


def bench_one(kernel, circ: Circuit, model: NoiseModel, n_real: int, repeats: int) -> float:
    sched = build_schedule(circ, 8)
    dim = 1 << circ.n_qubits
    psi0 = np.zeros(dim, dtype=np.complex128)
    psi0[0] = 1.0
    h0 = np.zeros(dim)
    zd = z_diagonals(circ.n_qubits)
    offs = sample_offsets(model, 0, 0, n_real)
    out = np.zeros((sched.slice_dts.size + 1, dim, dim), dtype=np.complex128)
    best = float("inf")
    for _ in range(repeats):
        out[:] = 0.0
        t0 = time.perf_counter()
        kernel(psi0, h0, zd, offs, sched.slice_dts, sched.gate_idx, sched.gates, out)
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--realizations", type=int, default=8000)
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--wide-qubits", type=int, default=6,
                    help="extra workload size; 0 disables the wide register")
    args = ap.parse_args()

    names = available_backends()
    print(f"backends: {', '.join(names)}   realizations per run: {args.realizations}")
    header = f"{'workload':<16}" + "".join(f"{n:>14}" for n in names)
    if len(names) > 1:
        header += f"{'speedup':>10}"
    print(header)
    print("-" * len(header))

    for label, circ, model in _workloads(args.wide_qubits):
        times = {}
        for name in names:
            _, kernel = get_backend(name)
            times[name] = bench_one(kernel, circ, model, args.realizations, args.repeats)
        row = f"{label:<16}"
        for name in names:
            rate = args.realizations / times[name]
            row += f"{rate:>12.0f}/s"
        if "python" in times and "cython" in times:
            row += f"{times['python'] / times['cython']:>9.1f}x"
        print(row)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
