"""Numpy fallback for the exponential-kernel recurrences.

Mirrors the compiled ``_kernels`` module. Uniform grids map onto a
first-order IIR filter (scipy.signal.lfilter); nonuniform grids use a
block-rescaled scan: within a block whose accumulated decay span stays
below _BLOCK_SPAN the recurrence unrolls into a cumulative sum with
exponential factors bounded by exp(_BLOCK_SPAN), so nothing overflows
and roundoff amplification stays near exp(_BLOCK_SPAN) * eps.
"""
import numpy as np
from scipy.signal import lfilter

_BLOCK_SPAN = 6.0


def _pwl_weights_array(h):
    """Segment weights (far, near) for an array of interval lengths."""
    h = np.asarray(h, dtype=np.float64)
    small = h < 0.1
    hs = np.where(small, 1.0, h)
    eh = np.exp(-hs)
    c0_closed = (1.0 - (1.0 + hs) * eh) / hs
    c1_closed = (hs - 1.0 + eh) / hs
    # Horner series, relative truncation < 1e-15 for h < 0.1
    c0_series = h * (0.5 + h * (-1.0 / 3.0 + h * (0.125 + h * (-1.0 / 30.0
                + h * (1.0 / 144.0 + h * (-1.0 / 840.0 + h * (1.0 / 5760.0
                + h * (-1.0 / 45360.0 + h * (1.0 / 403200.0)))))))))
    c1_series = h * (0.5 + h * (-1.0 / 6.0 + h * (1.0 / 24.0 + h * (-1.0 / 120.0
                + h * (1.0 / 720.0 + h * (-1.0 / 5040.0 + h * (1.0 / 40320.0
                + h * (-1.0 / 362880.0 + h * (1.0 / 3628800.0)))))))))
    return np.where(small, c0_series, c0_closed), np.where(small, c1_series, c1_closed)


def pwl_weights(h):
    c0, c1 = _pwl_weights_array(np.array([float(h)]))
    return float(c0[0]), float(c1[0])


def _recurrence(spans, d):
    """Solve j[i] = exp(-spans[i]) * j[i-1] + d[i] with j[-1] = 0.

    spans must be nonnegative. Runs as a sequence of rescaled cumulative
    sums over blocks of bounded total span.
    """
    n = d.shape[0]
    out = np.empty(n, dtype=np.float64)
    t = np.cumsum(spans)
    start = 0
    carry = 0.0
    base = 0.0
    while start < n:
        stop = int(np.searchsorted(t, base + _BLOCK_SPAN, side="right"))
        stop = min(max(stop, start + 1), n)
        rel = np.minimum(t[start:stop] - base, 700.0)
        grow = np.exp(rel)
        block = (carry + np.cumsum(d[start:stop] * grow)) / grow
        out[start:stop] = block
        carry = block[-1]
        base = t[stop - 1]
        start = stop
    return out


def pwl_passes(xs, f):
    xs = np.ascontiguousarray(xs, dtype=np.float64)
    f = np.ascontiguousarray(f, dtype=np.float64)
    h = np.diff(xs)
    c0, c1 = _pwl_weights_array(h)
    dm = np.concatenate(([0.0], c0 * f[:-1] + c1 * f[1:]))
    spans = np.concatenate(([0.0], h))
    jm = _recurrence(spans, dm)
    fr = f[::-1]
    hr = h[::-1]
    c0r, c1r = c0[::-1], c1[::-1]
    dp = np.concatenate(([0.0], c0r * fr[:-1] + c1r * fr[1:]))
    jp = _recurrence(np.concatenate(([0.0], hr)), dp)[::-1]
    return jm, jp


def pwl_passes_uniform(h, f):
    f = np.ascontiguousarray(f, dtype=np.float64)
    c0, c1 = pwl_weights(h)
    a = np.exp(-h)
    dm = np.concatenate(([0.0], c0 * f[:-1] + c1 * f[1:]))
    jm = lfilter([1.0], [1.0, -a], dm)
    fr = f[::-1]
    dp = np.concatenate(([0.0], c0 * fr[:-1] + c1 * fr[1:]))
    jp = lfilter([1.0], [1.0, -a], dp)[::-1]
    return jm, jp


def point_mass_passes(s, w):
    s = np.ascontiguousarray(s, dtype=np.float64)
    w = np.ascontiguousarray(w, dtype=np.float64)
    gaps = np.diff(s)
    a = np.exp(-gaps)
    dm = np.concatenate(([0.0], a * w[:-1]))
    jm = _recurrence(np.concatenate(([0.0], gaps)), dm)
    ar = a[::-1]
    wr = w[::-1]
    dp = np.concatenate(([0.0], ar * wr[:-1]))
    jp = _recurrence(np.concatenate(([0.0], gaps[::-1])), dp)[::-1]
    return jm, jp
