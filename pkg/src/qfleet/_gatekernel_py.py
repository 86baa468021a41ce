"""Pure-numpy gate kernels.

Drop-in fallback for the compiled ``_gatekernel`` extension: same functions,
same opcode table (X=0 Y=1 Z=2 RX=3 RY=4 RZ=5 CZ=6 CNOT=7), same in-place
semantics. Qubit 0 is the least-significant bit of the basis index.
"""
import numpy as np

_PAULI = {
    0: np.array([[0, 1], [1, 0]], dtype=complex),
    1: np.array([[0, -1j], [1j, 0]], dtype=complex),
    2: np.array([[1, 0], [0, -1]], dtype=complex),
}


def _rotation(kind, angle):
    c, s = np.cos(angle / 2), np.sin(angle / 2)
    if kind == 3:  # RX
        return np.array([[c, -1j * s], [-1j * s, c]])
    if kind == 4:  # RY
        return np.array([[c, -s], [s, c]], dtype=complex)
    # RZ
    return np.array([[c - 1j * s, 0], [0, c + 1j * s]])


def _apply_one_qubit(amps, wire, m):
    view = amps.reshape(-1, 2, 1 << wire)
    lo = view[:, 0, :].copy()
    hi = view[:, 1, :]
    view[:, 0, :] = m[0, 0] * lo + m[0, 1] * hi
    view[:, 1, :] = m[1, 0] * lo + m[1, 1] * hi


def apply_ops(amps, kinds, targets, controls, angles):
    """Run the whole gate program on ``amps`` in place."""
    n = amps.shape[0]
    idx = np.arange(n)
    for g in range(len(kinds)):
        kind = int(kinds[g])
        t = int(targets[g])
        if kind <= 2:
            _apply_one_qubit(amps, t, _PAULI[kind])
        elif kind <= 5:
            _apply_one_qubit(amps, t, _rotation(kind, float(angles[g])))
        elif kind == 6:  # CZ
            c = int(controls[g])
            amps[((idx >> t) & (idx >> c) & 1) == 1] *= -1
        elif kind == 7:  # CNOT
            c = int(controls[g])
            src = idx[(((idx >> c) & 1) == 1) & (((idx >> t) & 1) == 0)]
            dst = src | (1 << t)
            amps[src], amps[dst] = amps[dst], amps[src]
        else:
            raise ValueError(f"unknown gate opcode {kind}")


def expect_z(amps, wire):
    """<Z> on one wire: sum of |amp|^2 signed by the wire's basis bit."""
    probs = (amps.real ** 2 + amps.imag ** 2).reshape(-1, 2, 1 << wire)
    return float(probs[:, 0, :].sum() - probs[:, 1, :].sum())
