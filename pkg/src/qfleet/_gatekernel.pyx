# cython: boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled gate kernels.

Applies a lowered gate program (flat arrays of opcodes/wires/angles) to a
statevector in place. Opcode values match ``qfleet.qsim.Gate``:
X=0 Y=1 Z=2 RX=3 RY=4 RZ=5 CZ=6 CNOT=7. Qubit 0 is the least-significant
bit of the basis index.

Amplitudes are processed through a float64 view (interleaved re/im) so the
inner loops stay plain real arithmetic.
"""
from libc.math cimport cos, sin

import numpy as np


cdef void _rot_xyz(double[::1] a, Py_ssize_t n, int wire, int kind, double angle):
    # RX: (c, -i s; -i s, c)   RY: (c, -s; s, c)   RZ: diag(c - i s, c + i s)
    cdef Py_ssize_t stride = (<Py_ssize_t> 1) << wire
    cdef Py_ssize_t step = stride * 2
    cdef Py_ssize_t base, i, j, k
    cdef double c = cos(angle * 0.5)
    cdef double s = sin(angle * 0.5)
    cdef double lr, li, hr, hi
    for base in range(0, n, step):
        for i in range(base, base + stride):
            j = 2 * i
            k = 2 * (i + stride)
            lr = a[j]
            li = a[j + 1]
            hr = a[k]
            hi = a[k + 1]
            if kind == 3:    # RX
                a[j] = c * lr + s * hi
                a[j + 1] = c * li - s * hr
                a[k] = s * li + c * hr
                a[k + 1] = -s * lr + c * hi
            elif kind == 4:  # RY
                a[j] = c * lr - s * hr
                a[j + 1] = c * li - s * hi
                a[k] = s * lr + c * hr
                a[k + 1] = s * li + c * hi
            else:            # RZ
                a[j] = c * lr + s * li
                a[j + 1] = c * li - s * lr
                a[k] = c * hr - s * hi
                a[k + 1] = c * hi + s * hr


cdef void _pauli(double[::1] a, Py_ssize_t n, int wire, int kind):
    cdef Py_ssize_t stride = (<Py_ssize_t> 1) << wire
    cdef Py_ssize_t step = stride * 2
    cdef Py_ssize_t base, i, j, k
    cdef double lr, li, hr, hi
    for base in range(0, n, step):
        for i in range(base, base + stride):
            j = 2 * i
            k = 2 * (i + stride)
            lr = a[j]
            li = a[j + 1]
            hr = a[k]
            hi = a[k + 1]
            if kind == 0:    # X: swap
                a[j] = hr
                a[j + 1] = hi
                a[k] = lr
                a[k + 1] = li
            elif kind == 1:  # Y: lo <- -i hi, hi <- i lo
                a[j] = hi
                a[j + 1] = -hr
                a[k] = -li
                a[k + 1] = lr
            else:            # Z: hi <- -hi
                a[k] = -hr
                a[k + 1] = -hi


def apply_ops(amps, int[::1] kinds, int[::1] targets, int[::1] controls,
              double[::1] angles):
    """Run the whole gate program on ``amps`` (complex128, contiguous) in place."""
    cdef double[::1] a = amps.view(np.float64)
    cdef Py_ssize_t n = a.shape[0] // 2
    cdef Py_ssize_t g, i, j, k, stride
    cdef int kind, t, c
    cdef double tr, ti
    for g in range(kinds.shape[0]):
        kind = kinds[g]
        t = targets[g]
        if kind <= 2:
            _pauli(a, n, t, kind)
        elif kind <= 5:
            _rot_xyz(a, n, t, kind, angles[g])
        elif kind == 6:  # CZ
            c = controls[g]
            for i in range(n):
                if ((i >> t) & 1) and ((i >> c) & 1):
                    a[2 * i] = -a[2 * i]
                    a[2 * i + 1] = -a[2 * i + 1]
        elif kind == 7:  # CNOT
            c = controls[g]
            stride = (<Py_ssize_t> 1) << t
            for i in range(n):
                if ((i >> c) & 1) and not ((i >> t) & 1):
                    j = 2 * i
                    k = 2 * (i | stride)
                    tr = a[j]
                    ti = a[j + 1]
                    a[j] = a[k]
                    a[j + 1] = a[k + 1]
                    a[k] = tr
                    a[k + 1] = ti
        else:
            raise ValueError(f"unknown gate opcode {kind}")


def expect_z(amps, int wire):
    """<Z> on one wire: sum of |amp|^2 signed by the wire's basis bit."""
    cdef double[::1] a = amps.view(np.float64)
    cdef Py_ssize_t n = a.shape[0] // 2
    cdef Py_ssize_t i
    cdef double acc = 0.0
    cdef double p
    for i in range(n):
        p = a[2 * i] * a[2 * i] + a[2 * i + 1] * a[2 * i + 1]
        if (i >> wire) & 1:
            acc -= p
        else:
            acc += p
    return acc
