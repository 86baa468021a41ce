#!/usr/bin/env python3
"""Benchmark the compiled gate kernels against the numpy fallback.

Times whole-program application on random circuits at several register
sizes, plus the parameter-shift gradient of the default 8-qubit layout
(the training hot loop).

Usage:
    python benchmarks/bench_backends.py [--repeats 200]
"""
import argparse
import time

import numpy as np

from qfleet.backend import available_backends
from qfleet.qsim import CompiledCircuit, Gate, GateSpec, new_zero_state
from qfleet import vqc


def random_program(rng, qubits, gates):
    specs = []
    for _ in range(gates):
        kind = Gate(int(rng.integers(0, 8)))
        target = int(rng.integers(0, qubits))
        control = None
        angle = None
        if kind in (Gate.CZ, Gate.CNOT):
            if qubits < 2:
                kind = Gate.X
            else:
                control = (target + 1 + int(rng.integers(0, qubits - 1))) % qubits
        if kind in (Gate.RX, Gate.RY, Gate.RZ):
            angle = float(rng.uniform(0, 2 * np.pi))
        specs.append(GateSpec(kind, target, control=control, angle=angle))
    return CompiledCircuit(qubits, specs)


def time_backend(module, program, qubits, repeats):
    base = new_zero_state(qubits).amplitudes
    buf = np.empty_like(base)
    start = time.perf_counter()
    for _ in range(repeats):
        np.copyto(buf, base)
        module.apply_ops(buf, program.kinds, program.targets, program.controls, program.angles)
        module.expect_z(buf, 0)
    return (time.perf_counter() - start) / repeats


def time_gradient(repeats):
    """Parameter-shift gradient of the default actor layout per backend."""
    from qfleet import backend as active

    layout = vqc.default_layout("actor")
    rng = np.random.default_rng(0)
    params = rng.uniform(-np.pi, np.pi, layout.parameter_count)
    encoded = vqc.encode_actor_observation(rng.uniform(0, np.pi, 6), 8)
    upstream = rng.uniform(-1, 1, 5)
    results = {}
    for name, module in available_backends().items():
        active.apply_ops, active.expect_z = module.apply_ops, module.expect_z
        start = time.perf_counter()
        for _ in range(repeats):
            vqc.parameter_shift_gradient(layout, params, encoded, upstream)
        results[name] = (time.perf_counter() - start) / repeats
    # restore the default selection
    default = available_backends().get("compiled") or available_backends()["python"]
    active.apply_ops, active.expect_z = default.apply_ops, default.expect_z
    return results


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=200)
    args = parser.parse_args()

    backends = available_backends()
    print(f"backends: {', '.join(backends)}")
    rng = np.random.default_rng(42)
    print(f"{'qubits':>6} {'gates':>6} " + " ".join(f"{name:>12}" for name in backends))
    for qubits, gates in ((2, 20), (4, 40), (8, 70), (10, 70), (12, 70)):
        program = random_program(rng, qubits, gates)
        times = [time_backend(backends[name], program, qubits, args.repeats) for name in backends]
        cells = " ".join(f"{t * 1e6:>10.1f}us" for t in times)
        ratio = f"  ({times[0] / times[-1]:.1f}x)" if len(times) > 1 else ""
        print(f"{qubits:>6} {gates:>6} {cells}{ratio}")

    print("\nparameter-shift gradient, default 8-qubit 54-parameter layout:")
    for name, per_call in time_gradient(max(1, args.repeats // 20)).items():
        print(f"  {name:>10}: {per_call * 1e3:.1f} ms per gradient")


if __name__ == "__main__":
    main()
