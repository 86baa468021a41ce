"""Fixed-template variational circuits.

Provides the observation/state encoders, a deterministic multi-block
parameterized circuit layout, Pauli-Z observable evaluation, and exact
gradients via the parameter-shift rule. Layouts are static data: the same
construction arguments always yield the same gate template, so every circuit
evaluation is exactly reproducible.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import backend
from .qsim import (
    CompiledCircuit,
    Gate,
    GateSpec,
    StateVector,
    new_zero_state,
)

SHIFT = np.pi / 2  # parameter-shift offset; exact for exp(-i*theta*P/2) gates

DEFAULT_QUBITS = 8
DEFAULT_PARAMETERS = 54
ACTOR_MEASURED_WIRES = (0, 1, 2, 3, 4)  # one logit per discrete action
CRITIC_MEASURED_WIRES = (0,)


class EncodingError(ValueError):
    """More input entries than the register can hold."""


class LayoutError(ValueError):
    """Layout/parameter/state dimension mismatch or bad layout request."""


class NumericError(ArithmeticError):
    """Non-finite values fed into a gradient computation."""


@dataclass(frozen=True)
class CircuitLayout:
    """A fixed parameterized gate template.

    ``gates`` holds every gate in execution order with rotation angles left
    at 0; ``slot_gate_indices[i]`` is the position in ``gates`` whose angle
    is taken from trainable parameter i.
    """

    num_qubits: int
    gates: tuple[GateSpec, ...]
    slot_gate_indices: tuple[int, ...]
    measured_wires: tuple[int, ...]

    def __post_init__(self):
        if len(set(self.measured_wires)) != len(self.measured_wires):
            raise LayoutError("measured wires must be distinct")
        for w in self.measured_wires:
            if not 0 <= w < self.num_qubits:
                raise LayoutError(f"measured wire {w} out of range")
        program = CompiledCircuit(self.num_qubits, self.gates)
        object.__setattr__(self, "_program", program)
        object.__setattr__(
            self, "_slot_pos", np.array(self.slot_gate_indices, dtype=np.intp)
        )

    @property
    def parameter_count(self) -> int:
        return len(self.slot_gate_indices)

    def run_into(self, amplitudes: np.ndarray, angles: np.ndarray) -> None:
        """Apply the template with the given per-gate angle array, in place."""
        prog = self._program
        backend.apply_ops(amplitudes, prog.kinds, prog.targets, prog.controls, angles)

    def gate_angles(self, params: np.ndarray) -> np.ndarray:
        """Per-gate angle array with the parameter slots filled in."""
        angles = self._program.angles.copy()
        angles[self._slot_pos] = params
        return angles

    def describe(self) -> str:
        """Structured text listing of the template (for experiment logs)."""
        lines = [
            f"qubits={self.num_qubits} parameters={self.parameter_count} "
            f"measured={list(self.measured_wires)}"
        ]
        slot_of = {g: i for i, g in enumerate(self.slot_gate_indices)}
        for i, gate in enumerate(self.gates):
            if gate.kind in (Gate.CZ, Gate.CNOT):
                lines.append(f"{i:3d} {gate.kind.name} control={gate.control} target={gate.target}")
            elif i in slot_of:
                lines.append(f"{i:3d} {gate.kind.name} wire={gate.target} slot={slot_of[i]}")
            else:
                lines.append(f"{i:3d} {gate.kind.name} wire={gate.target} angle={gate.angle}")
        return "\n".join(lines)


def _entangler_ring(num_qubits: int) -> list[GateSpec]:
    # CZ ring (w, w+1 mod q); a 2-qubit ring collapses to a single CZ
    if num_qubits < 2:
        return []
    if num_qubits == 2:
        return [GateSpec(Gate.CZ, 1, control=0)]
    return [GateSpec(Gate.CZ, (w + 1) % num_qubits, control=w) for w in range(num_qubits)]


def layered_layout(
    num_qubits: int,
    parameter_count: int,
    measured_wires,
    trailing_kind: Gate = Gate.RY,
) -> CircuitLayout:
    """Blocks of full RX/RY/RZ rotation layers, each followed by a CZ ring,
    then a trailing partial layer of ``trailing_kind`` rotations to land on
    the requested parameter count exactly."""
    if parameter_count < 1:
        raise LayoutError("parameter_count must be >= 1")
    gates: list[GateSpec] = []
    slots: list[int] = []
    remaining = parameter_count
    block = 3 * num_qubits
    while remaining >= block:
        for kind in (Gate.RX, Gate.RY, Gate.RZ):
            for w in range(num_qubits):
                slots.append(len(gates))
                gates.append(GateSpec(kind, w, angle=0.0))
        gates.extend(_entangler_ring(num_qubits))
        remaining -= block
    for j in range(remaining):
        slots.append(len(gates))
        gates.append(GateSpec(trailing_kind, j % num_qubits, angle=0.0))
    return CircuitLayout(num_qubits, tuple(gates), tuple(slots), tuple(measured_wires))


def default_layout(role: str) -> CircuitLayout:
    """The 8-qubit, 54-parameter template shared by actor and critic.

    Two full blocks (RX+RY+RZ on every wire, 24 slots each, CZ ring after)
    plus a trailing RY layer on wires 0-5. Only the measured wires differ:
    the actor reads five logits, the critic a single value wire.
    """
    if role == "actor":
        measured = ACTOR_MEASURED_WIRES
    elif role == "critic":
        measured = CRITIC_MEASURED_WIRES
    else:
        raise LayoutError(f"unknown role {role!r} (expected 'actor' or 'critic')")
    return layered_layout(DEFAULT_QUBITS, DEFAULT_PARAMETERS, measured)


# Encoder gate templates are static per entry count; cache the lowered arrays.
_RY_LADDER_CACHE: dict[int, CompiledCircuit] = {}
_PAIR_LADDER_CACHE: dict[int, CompiledCircuit] = {}


def encode_actor_observation(angles, num_qubits: int) -> StateVector:
    """One RY rotation per qubit: qubit k gets RY(angles[k]); the rest stay |0>."""
    angles = np.asarray(angles, dtype=np.float64)
    if angles.size > num_qubits:
        raise EncodingError(
            f"{angles.size} entries do not fit on {num_qubits} qubits (one per qubit)"
        )
    state = new_zero_state(num_qubits)
    prog = _RY_LADDER_CACHE.get(angles.size)
    if prog is None or prog.num_qubits < num_qubits:
        prog = CompiledCircuit(
            max(num_qubits, 1), [GateSpec(Gate.RY, k, angle=0.0) for k in range(angles.size)]
        )
        _RY_LADDER_CACHE[angles.size] = prog
    backend.apply_ops(state.amplitudes, prog.kinds, prog.targets, prog.controls, angles)
    return state


def encode_critic_state(values, num_qubits: int) -> StateVector:
    """Two-variable dense encoding: qubit k gets RX(values[2k]) then
    RY(values[2k+1]); an odd leftover entry is encoded with a lone RX."""
    values = np.asarray(values, dtype=np.float64)
    if values.size > 2 * num_qubits:
        raise EncodingError(
            f"{values.size} entries do not fit on {num_qubits} qubits (two per qubit)"
        )
    state = new_zero_state(num_qubits)
    prog = _PAIR_LADDER_CACHE.get(values.size)
    if prog is None or prog.num_qubits < num_qubits:
        gates = []
        for i in range(values.size):
            kind = Gate.RX if i % 2 == 0 else Gate.RY
            gates.append(GateSpec(kind, i // 2, angle=0.0))
        prog = CompiledCircuit(max(num_qubits, 1), gates)
        _PAIR_LADDER_CACHE[values.size] = prog
    backend.apply_ops(state.amplitudes, prog.kinds, prog.targets, prog.controls, values)
    return state


def _check_inputs(layout: CircuitLayout, params: np.ndarray, encoded: StateVector) -> np.ndarray:
    params = np.asarray(params, dtype=np.float64)
    if params.size != layout.parameter_count:
        raise LayoutError(
            f"expected {layout.parameter_count} parameters, got {params.size}"
        )
    if not np.all(np.isfinite(params)):
        raise LayoutError("parameters must be finite")
    if encoded.num_qubits != layout.num_qubits:
        raise LayoutError(
            f"encoded register has {encoded.num_qubits} qubits, layout needs "
            f"{layout.num_qubits}"
        )
    return params


def evaluate_observables(layout: CircuitLayout, params, encoded: StateVector) -> np.ndarray:
    """Apply the parameterized template to the encoded state; return <Z> per
    measured wire, in measured-wire order."""
    params = _check_inputs(layout, params, encoded)
    amps = encoded.amplitudes.copy()
    layout.run_into(amps, layout.gate_angles(params))
    return np.array([backend.expect_z(amps, w) for w in layout.measured_wires])


def parameter_shift_gradient(layout: CircuitLayout, params, encoded: StateVector, upstream) -> np.ndarray:
    """d(upstream . observables)/d(params) via +-pi/2 shifted evaluations.

    grad[i] = sum_j upstream[j] * (O_j(params + pi/2 e_i) - O_j(params - pi/2 e_i)) / 2,
    costing exactly 2 * parameter_count circuit evaluations.
    """
    params = _check_inputs(layout, params, encoded)
    upstream = np.asarray(upstream, dtype=np.float64)
    if upstream.size != len(layout.measured_wires):
        raise LayoutError(
            f"upstream has {upstream.size} entries, layout measures "
            f"{len(layout.measured_wires)} wires"
        )
    if not np.all(np.isfinite(upstream)):
        raise NumericError("upstream cotangent contains non-finite values")
    angles = layout.gate_angles(params)
    slot_pos = layout._slot_pos
    wires = layout.measured_wires
    buf = np.empty_like(encoded.amplitudes)
    grad = np.zeros(params.size)
    for i in range(params.size):
        pos = slot_pos[i]
        delta = 0.0
        for sign in (1.0, -1.0):
            angles[pos] = params[i] + sign * SHIFT
            np.copyto(buf, encoded.amplitudes)
            layout.run_into(buf, angles)
            for j, w in enumerate(wires):
                delta += sign * upstream[j] * backend.expect_z(buf, w)
        angles[pos] = params[i]
        grad[i] = 0.5 * delta
    return grad
