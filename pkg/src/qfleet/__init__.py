"""Quantum multi-agent actor-critic coordination for factory robot fleets.

Statevector circuit simulation, variational actor/critic circuits trained
with parameter-shift gradients, a multi-robot warehouse POMDP, classical
comparison schemes, and a seeded experiment harness.
"""
from .backend import BACKEND_NAME

__all__ = ["BACKEND_NAME"]
__version__ = "0.1.0"
