"""Change of unknown between the original variable gamma and the working
variable m, related by gamma = m' - m.

Inverting (d/dx - 1) on the line has a one-parameter family of solutions;
the decaying-at-+infinity branch

    m(x) = -int_x^inf exp(x - y) gamma(y) dy

is the unique one mapping L^2 data into H^1, so that is the branch
implemented. Numerically it is the backward one-sided kernel pass, exact
for piecewise-linear integrands.
"""
from dataclasses import dataclass

import numpy as np

from . import _backend
from .errors import BoundaryDecayError, InvalidInputError
from .grids import UniformGrid, centered_diff

__all__ = ["EulerianState", "gamma_to_m", "m_to_gamma", "inversion_residual"]


@dataclass(frozen=True)
class EulerianState:
    """Values of m (or gamma) sampled on a uniform grid at one time."""

    grid: UniformGrid
    m_values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        v = np.asarray(self.m_values, dtype=np.float64)
        if v.ndim != 1 or v.shape[0] != self.grid.count:
            raise InvalidInputError("value array does not match the grid")
        if not np.all(np.isfinite(v)):
            raise InvalidInputError("non-finite state values")
        if self.time < 0:
            raise InvalidInputError("time must be nonnegative")
        object.__setattr__(self, "m_values", v)

    @property
    def x(self):
        return self.grid.x

    def with_values(self, values, time=None):
        return EulerianState(self.grid, values, self.time if time is None else time)


def gamma_to_m(gamma: EulerianState, boundary_tol=1e-6) -> EulerianState:
    """Solve m' - m = gamma with decay at +infinity.

    gamma must itself decay at both grid edges (values outside are taken
    as zero); edge values above boundary_tol relative to the max raise
    BoundaryDecayError since the truncated primitive would be meaningless.
    """
    g = gamma.m_values
    scale = max(float(np.max(np.abs(g))), 1e-300)
    edge = max(abs(float(g[0])), abs(float(g[-1])))
    if edge > boundary_tol * max(scale, 1.0):
        raise BoundaryDecayError(
            f"gamma does not decay at the grid edges (edge {edge:.3e}, scale {scale:.3e})"
        )
    _, jplus = _backend.pwl_passes_uniform(gamma.grid.spacing, g)
    return gamma.with_values(-jplus)


def m_to_gamma(m: EulerianState) -> EulerianState:
    """gamma = m' - m with the second-order difference for m'."""
    return m.with_values(centered_diff(m.m_values, m.grid.spacing) - m.m_values)


def inversion_residual(gamma: EulerianState, m: EulerianState) -> float:
    """Sup-norm of m' - m - gamma; O(dx^2) for smooth decaying data."""
    d = centered_diff(m.m_values, m.grid.spacing) - m.m_values - gamma.m_values
    return float(np.max(np.abs(d)))
