"""Dense statevector simulation of small qubit registers.

Wire convention: qubit 0 is the least-significant bit of the basis index,
so basis state |b_{q-1} ... b_1 b_0> lives at index sum_k b_k 2^k.

All public operations have value semantics: they return a new ``StateVector``
and never mutate their inputs, so independent circuit evaluations can run
concurrently with no shared state.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from . import backend

MAX_QUBITS = 12


class ConfigError(ValueError):
    """Invalid register configuration (e.g. out-of-range qubit count)."""


class GateError(ValueError):
    """Malformed gate: missing angle/control, bad wire, unknown kind."""


class Gate(IntEnum):
    """Gate opcodes; values match the kernel backends."""

    X = 0
    Y = 1
    Z = 2
    RX = 3
    RY = 4
    RZ = 5
    CZ = 6
    CNOT = 7


ROTATION_GATES = frozenset({Gate.RX, Gate.RY, Gate.RZ})
CONTROLLED_GATES = frozenset({Gate.CZ, Gate.CNOT})


@dataclass(frozen=True)
class GateSpec:
    """One gate application: kind, target wire, optional control and angle.

    Rotations follow R(delta) = exp(-i * delta * P / 2) for Pauli P, so e.g.
    RY(delta)|0> = cos(delta/2)|0> + sin(delta/2)|1>.
    """

    kind: Gate
    target: int
    control: int | None = None
    angle: float | None = None

    def validate(self, num_qubits: int) -> None:
        if not 0 <= self.target < num_qubits:
            raise GateError(
                f"{self.kind.name}: target {self.target} out of range for "
                f"{num_qubits} qubits"
            )
        if self.kind in CONTROLLED_GATES:
            if self.control is None:
                raise GateError(f"{self.kind.name} requires a control wire")
            if not 0 <= self.control < num_qubits:
                raise GateError(
                    f"{self.kind.name}: control {self.control} out of range for "
                    f"{num_qubits} qubits"
                )
            if self.control == self.target:
                raise GateError(f"{self.kind.name}: control equals target")
        elif self.control is not None:
            raise GateError(f"{self.kind.name} takes no control wire")
        if self.kind in ROTATION_GATES:
            if self.angle is None:
                raise GateError(f"{self.kind.name} requires an angle")
            if not np.isfinite(self.angle):
                raise GateError(f"{self.kind.name}: angle must be finite")
        elif self.angle is not None:
            raise GateError(f"{self.kind.name} takes no angle")


def x(target: int) -> GateSpec:
    return GateSpec(Gate.X, target)


def y(target: int) -> GateSpec:
    return GateSpec(Gate.Y, target)


def z(target: int) -> GateSpec:
    return GateSpec(Gate.Z, target)


def rx(target: int, angle: float) -> GateSpec:
    return GateSpec(Gate.RX, target, angle=angle)


def ry(target: int, angle: float) -> GateSpec:
    return GateSpec(Gate.RY, target, angle=angle)


def rz(target: int, angle: float) -> GateSpec:
    return GateSpec(Gate.RZ, target, angle=angle)


def cz(control: int, target: int) -> GateSpec:
    return GateSpec(Gate.CZ, target, control=control)


def cnot(control: int, target: int) -> GateSpec:
    return GateSpec(Gate.CNOT, target, control=control)


@dataclass
class StateVector:
    """2^num_qubits complex amplitudes of a qubit register."""

    num_qubits: int
    amplitudes: np.ndarray

    def copy(self) -> "StateVector":
        return StateVector(self.num_qubits, self.amplitudes.copy())

    def norm_squared(self) -> float:
        return float(np.sum(self.amplitudes.real ** 2 + self.amplitudes.imag ** 2))


def new_zero_state(num_qubits: int) -> StateVector:
    """|0>^(x)num_qubits: amplitude 1 at basis index 0."""
    if not isinstance(num_qubits, (int, np.integer)) or not 1 <= num_qubits <= MAX_QUBITS:
        raise ConfigError(f"num_qubits must be in 1..{MAX_QUBITS}, got {num_qubits!r}")
    amps = np.zeros(1 << num_qubits, dtype=np.complex128)
    amps[0] = 1.0
    return StateVector(int(num_qubits), amps)


class CompiledCircuit:
    """A gate list lowered to flat arrays; one kernel call runs the program.

    Wire validity is checked once here, so repeated execution pays no
    per-gate Python overhead.
    """

    def __init__(self, num_qubits: int, gates):
        gates = tuple(gates)
        for i, gate in enumerate(gates):
            try:
                gate.validate(num_qubits)
            except GateError as exc:
                raise GateError(f"gate {i}: {exc}") from None
        self.num_qubits = num_qubits
        self.num_gates = len(gates)
        self.kinds = np.array([g.kind for g in gates], dtype=np.intc)
        self.targets = np.array([g.target for g in gates], dtype=np.intc)
        self.controls = np.array(
            [-1 if g.control is None else g.control for g in gates], dtype=np.intc
        )
        self.angles = np.array(
            [0.0 if g.angle is None else g.angle for g in gates], dtype=np.float64
        )

    def run_into(self,amplitudes: np.ndarray) -> None:
        """Apply the program to ``amplitudes`` in place."""
        backend.apply_ops(amplitudes, self.kinds, self.targets, self.controls, self.angles)


def apply_gate(state: StateVector, gate: GateSpec) -> StateVector:
    """U |psi> for one gate; returns a new state."""
    return apply_circuit(state, (gate,))


def apply_circuit(state: StateVector, gates) -> StateVector:
    """Apply gates left to right; equals the fold of apply_gate."""
    program = CompiledCircuit(state.num_qubits, gates)
    out = state.copy()
    program.run_into(out.amplitudes)
    return out


def expectation_z(state: StateVector, wire: int) -> float:
    """<psi| Z_wire |psi>, in [-1, 1]."""
    if not 0 <= wire < state.num_qubits:
        raise GateError(f"wire {wire} out of range for {state.num_qubits} qubits")
    return backend.expect_z(state.amplitudes, wire)
