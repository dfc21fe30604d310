"""Solvers and verification tools for conservative solutions of the
modified Camassa-Holm equation: an Eulerian method-of-lines solver valid
up to wave breaking, a characteristic-coordinate solver that continues
through it, and the characteristic-tracing machinery tying them together.
"""
from ._backend import active_backend, available_backends, use_backend

__version__ = "0.1.0"

__all__ = ["active_backend", "available_backends", "use_backend", "__version__"]
