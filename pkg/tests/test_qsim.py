"""Statevector simulator tests: known states, invariants, and agreement with
the kron-matrix reference."""
import numpy as np
import pytest

from qfleet.backend import available_backends
from qfleet.qsim import (
    ConfigError,
    Gate,
    GateSpec,
    StateVector,
    apply_circuit,
    apply_gate,
    cnot,
    cz,
    expectation_z,
    new_zero_state,
    rx,
    ry,
    rz,
    x,
    y,
    z,
)

import reference


# --- zero state ---------------------------------------------------------------


def test_zero_state_one_qubit():
    state = new_zero_state(1)
    assert np.allclose(state.amplitudes, [1, 0])


def test_zero_state_two_qubits():
    state = new_zero_state(2)
    assert np.allclose(state.amplitudes, [1, 0, 0, 0])


def test_zero_state_eight_qubits():
    state = new_zero_state(8)
    assert state.amplitudes.shape == (256,)
    assert state.amplitudes[0] == 1.0
    assert np.count_nonzero(state.amplitudes) == 1


@pytest.mark.parametrize("bad", [0, 13, -3])
def test_zero_state_rejects_bad_sizes(bad):
    with pytest.raises(ConfigError):
        new_zero_state(bad)


# --- single gates -------------------------------------------------------------


def test_ry_pi_flips_to_one():
    state = apply_gate(new_zero_state(1), ry(0, np.pi))
    assert np.allclose(state.amplitudes, [0, 1], atol=1e-15)


def test_cz_negates_one_one():
    state = apply_circuit(new_zero_state(2), [x(0), x(1), cz(0, 1)])
    assert np.allclose(state.amplitudes, [0, 0, 0, -1])


def test_x_swaps_superposition():
    start = StateVector(1, np.array([0.6, 0.8j], dtype=complex))
    state = apply_gate(start, x(0))
    assert np.allclose(state.amplitudes, [0.8j, 0.6])
    assert np.allclose(start.amplitudes, [0.6, 0.8j])  # input untouched


def test_bell_circuit():
    # RY(pi/2) then CNOT: (|00> + |11>)/sqrt(2)
    state = apply_circuit(new_zero_state(2), [ry(0, np.pi / 2), cnot(0, 1)])
    inv = 1 / np.sqrt(2)
    assert np.allclose(state.amplitudes, [inv, 0, 0, inv])


def test_empty_circuit_is_identity():
    start = apply_gate(new_zero_state(2), ry(1, 1.23))
    state = apply_circuit(start, [])
    assert np.array_equal(state.amplitudes, start.amplitudes)


def test_ry_half_pi_uniform():
    state = apply_circuit(new_zero_state(1), [ry(0, np.pi / 2)])
    assert np.allclose(state.amplitudes, [np.sqrt(0.5), np.sqrt(0.5)])


def test_x_twice_is_identity():
    state = apply_circuit(new_zero_state(1), [x(0), x(0)])
    assert np.allclose(state.amplitudes, [1, 0])


# --- gate spec validation -----------------------------------------------------


def test_rotation_without_angle_rejected():
    with pytest.raises(ValueError, match="angle"):
        apply_gate(new_zero_state(1), GateSpec(Gate.RX, 0))


def test_controlled_without_control_rejected():
    with pytest.raises(ValueError, match="control"):
        apply_gate(new_zero_state(2), GateSpec(Gate.CZ, 0))


def test_control_equal_target_rejected():
    with pytest.raises(ValueError, match="control equals target"):
        apply_gate(new_zero_state(2), GateSpec(Gate.CNOT, 1, control=1))


def test_wire_out_of_range_rejected():
    with pytest.raises(ValueError, match="out of range"):
        apply_gate(new_zero_state(2), x(2))


def test_circuit_error_carries_gate_index():
    with pytest.raises(ValueError, match="gate 1"):
        apply_circuit(new_zero_state(2), [x(0), x(5)])


# --- expectation values ---------------------------------------------------------


def test_expectation_z_computational_states():
    assert expectation_z(new_zero_state(1), 0) == 1.0
    one = apply_gate(new_zero_state(1), x(0))
    assert expectation_z(one, 0) == -1.0


def test_expectation_z_analytic_cosine():
    # <Z> after RY(delta)|0> equals cos(delta)
    for delta in np.linspace(0, 2 * np.pi, 100):
        state = apply_gate(new_zero_state(1), ry(0, delta))
        assert abs(expectation_z(state, 0) - np.cos(delta)) < 1e-12


def test_expectation_z_bounds_random_states():
    rng = np.random.default_rng(7)
    for _ in range(50):
        n = int(rng.integers(1, 5))
        gates = [reference.random_gate(rng, n) for _ in range(int(rng.integers(0, 20)))]
        state = apply_circuit(new_zero_state(n), gates)
        for w in range(n):
            assert -1.0 - 1e-12 <= expectation_z(state, w) <= 1.0 + 1e-12


# --- invariants ----------------------------------------------------------------


def test_norm_conservation_random_circuits():
    rng = np.random.default_rng(11)
    for _ in range(200):
        n = int(rng.integers(1, 9))
        gates = [reference.random_gate(rng, n) for _ in range(int(rng.integers(1, 65)))]
        state = apply_circuit(new_zero_state(n), gates)
        assert abs(state.norm_squared() - 1.0) < 1e-10


def test_unitarity_round_trip():
    # every gate followed by its inverse restores the state
    rng = np.random.default_rng(13)
    for _ in range(100):
        n = int(rng.integers(1, 5))
        prep = [reference.random_gate(rng, n) for _ in range(5)]
        state = apply_circuit(new_zero_state(n), prep)
        gate = reference.random_gate(rng, n)
        if gate.kind in (Gate.RX, Gate.RY, Gate.RZ):
            inverse = GateSpec(gate.kind, gate.target, angle=-gate.angle)
        else:
            inverse = gate  # Paulis, CZ and CNOT are involutions
        back = apply_circuit(state, [gate, inverse])
        assert np.allclose(back.amplitudes, state.amplitudes, atol=1e-12)


# --- agreement with the kron reference ------------------------------------------


def test_matches_matrix_reference_on_random_circuits():
    rng = np.random.default_rng(17)
    for _ in range(60):
        n = int(rng.integers(1, 5))
        gates = [reference.random_gate(rng, n) for _ in range(int(rng.integers(1, 25)))]
        state = apply_circuit(new_zero_state(n), gates)
        expected = reference.apply_reference(new_zero_state(n).amplitudes, gates, n)
        assert np.allclose(state.amplitudes, expected, atol=1e-12)


def test_expectation_matches_density_matrix_trace():
    rng = np.random.default_rng(19)
    for _ in range(40):
        n = int(rng.integers(1, 5))
        gates = [reference.random_gate(rng, n) for _ in range(12)]
        state = apply_circuit(new_zero_state(n), gates)
        for w in range(n):
            dm = reference.expectation_z_density(state.amplitudes, w, n)
            assert abs(expectation_z(state, w) - dm) < 1e-12


# --- backend equivalence ----------------------------------------------------------


def test_backends_agree_bitwise_close():
    backends = available_backends()
    if len(backends) < 2:
        pytest.skip("compiled backend not built")
    rng = np.random.default_rng(23)
    from qfleet.qsim import CompiledCircuit

    for _ in range(40):
        n = int(rng.integers(1, 9))
        gates = [reference.random_gate(rng, n) for _ in range(30)]
        program = CompiledCircuit(n, gates)
        results = {}
        for name, module in backends.items():
            amps = new_zero_state(n).amplitudes
            module.apply_ops(amps, program.kinds, program.targets, program.controls, program.angles)
            results[name] = (amps, module.expect_z(amps, 0))
        a, b = results["python"], results["compiled"]
        assert np.allclose(a[0], b[0], atol=1e-13)
        assert abs(a[1] - b[1]) < 1e-13
