"""Selects the compiled kernel extension when available, numpy otherwise.

``use_backend`` exists for tests and benchmarks that want to pin one
implementation; normal code just calls the module-level functions.
"""
from . import _kernels_py

try:
    from . import _kernels as _ext
except ImportError:  # extension not built; the fallback is feature-complete
    _ext = None

_active = _ext if _ext is not None else _kernels_py


def active_backend():
    return "ext" if _active is _ext else "python"


def available_backends():
    return ("ext", "python") if _ext is not None else ("python",)


def use_backend(name):
    """Switch the kernel implementation ('ext' or 'python')."""
    global _active
    if name == "ext":
        if _ext is None:
            raise ValueError("compiled kernel extension is not available")
        _active = _ext
    elif name == "python":
        _active = _kernels_py
    else:
        raise ValueError(f"unknown backend {name!r}")


def pwl_weights(h):
    return _active.pwl_weights(h)


def pwl_passes(xs, f):
    return _active.pwl_passes(xs, f)


def pwl_passes_uniform(h, f):
    return _active.pwl_passes_uniform(h, f)


def point_mass_passes(s, w):
    return _active.point_mass_passes(s, w)
