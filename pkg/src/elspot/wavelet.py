"""Decimated orthogonal DWT with half-sample symmetric boundary extension."""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import InsufficientData


@lru_cache(maxsize=None)
def daubechies_filters(order=24):
    """(dec_lo, dec_hi, rec_lo, rec_hi) of the Daubechies wavelet with ``2*order`` taps."""
    import pywt  # only the published coefficient tables are taken from here

    w = pywt.Wavelet(f"db{order}")
    return tuple(np.array(f, dtype=float) for f in w.filter_bank)


def dwt(x, filters):
    dec_lo, dec_hi = filters[0], filters[1]
    L = dec_lo.size
    x = np.asarray(x, dtype=float)
    m = (x.size + L - 1) // 2
    ext = np.pad(x, L - 1, mode="symmetric")
    a = np.convolve(ext, dec_lo)[L:L + 2 * m:2]
    d = np.convolve(ext, dec_hi)[L:L + 2 * m:2]
    return a, d


def idwt(a, d, filters):
    rec_lo, rec_hi = filters[2], filters[3]
    L = rec_lo.size
    m = a.size
    up_a = np.zeros(2 * m)
    up_a[::2] = a
    up_d = np.zeros(2 * m)
    up_d[::2] = d
    y = np.convolve(up_a, rec_lo) + np.convolve(up_d, rec_hi)
    return y[L - 2:L - 2 + 2 * m - L + 2]


def wavedec(x, level, order=24):
    """Coefficients ``[a_level, d_level, ..., d_1]``."""
    filters = daubechies_filters(order)
    a = np.asarray(x, dtype=float)
    details = []
    for _ in range(level):
        a, d = dwt(a, filters)
        details.append(d)
    return [a] + details[::-1]


def waverec(coeffs, order=24):
    filters = daubechies_filters(order)
    a = coeffs[0]
    for d in coeffs[1:]:
        if a.size == d.size + 1:
            a = a[:-1]
        a = idwt(a, d, filters)
    return a


def approximation(x, level=8, order=24):
    """Reconstruction from the level-``level`` approximation band alone."""
    x = np.asarray(x, dtype=float)
    if x.size < 2**level:
        raise InsufficientData(f"need >= {2**level} points for level {level}, got {x.size}")
    coeffs = wavedec(x, level, order)
    coeffs = [coeffs[0]] + [np.zeros_like(c) for c in coeffs[1:]]
    return waverec(coeffs, order)[: x.size]
