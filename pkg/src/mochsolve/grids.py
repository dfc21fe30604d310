"""Uniform grids, finite differences, and discrete norms."""
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError


@dataclass(frozen=True)
class UniformGrid:
    origin: float
    spacing: float
    count: int

    def __post_init__(self):
        if self.count < 2:
            raise InvalidInputError("grid needs at least two points")
        if not (np.isfinite(self.origin) and np.isfinite(self.spacing)) or self.spacing <= 0:
            raise InvalidInputError("grid spacing must be positive and finite")

    @classmethod
    def symmetric(cls, half_width, count):
        """Grid covering [-half_width, half_width] inclusive."""
        return cls(-float(half_width), 2.0 * float(half_width) / (count - 1), int(count))

    @property
    def x(self):
        return self.origin + self.spacing * np.arange(self.count)

    @property
    def width(self):
        return self.spacing * (self.count - 1)


def centered_diff(values, spacing):
    """Second-order derivative: centered inside, one-sided at the edges."""
    v = np.asarray(values, dtype=np.float64)
    d = np.empty_like(v)
    d[1:-1] = (v[2:] - v[:-2]) / (2.0 * spacing)
    d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * spacing)
    d[-1] = (3.0 * v[-1] - 4.0 * v[-2] + v[-3]) / (2.0 * spacing)
    return d


def trapz(values, spacing):
    v = np.asarray(values, dtype=np.float64)
    return float(spacing * (v.sum() - 0.5 * (v[0] + v[-1])))


def cumtrapz0(values, spacing):
    """Cumulative trapezoid starting at zero, same length as the input."""
    v = np.asarray(values, dtype=np.float64)
    out = np.empty_like(v)
    out[0] = 0.0
    np.cumsum(0.5 * spacing * (v[1:] + v[:-1]), out=out[1:])
    return out


def l1_norm(values, spacing):
    return trapz(np.abs(values), spacing)


def l2_norm(values, spacing):
    return float(np.sqrt(trapz(np.square(values), spacing)))


def h1_norm(values, spacing):
    v = np.asarray(values, dtype=np.float64)
    dv = centered_diff(v, spacing)
    return float(np.sqrt(trapz(v * v + dv * dv, spacing)))
