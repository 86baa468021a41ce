"""Kernel backend selection.

Imports the compiled extension when it was built, otherwise the numpy
fallback. Both expose the same two functions (``apply_ops``, ``expect_z``)
with identical semantics; ``BACKEND_NAME`` records which one is active.
"""
try:
    from . import _gatekernel as _active

    BACKEND_NAME = "compiled"
except ImportError:
    from . import _gatekernel_py as _active

    BACKEND_NAME = "python"

apply_ops = _active.apply_ops
expect_z = _active.expect_z


def available_backends():
    """All importable kernel backends, name -> module (for tests/benchmarks)."""
    from . import _gatekernel_py

    backends = {"python": _gatekernel_py}
    try:
        from . import _gatekernel

        backends["compiled"] = _gatekernel
    except ImportError:
        pass
    return backends
