"""Exact fractional Gaussian noise via circulant embedding (Davies-Harte)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmbeddingError, EmptyInput, InvalidHurst
from .rng import make_rng

NEG_EIG_TOL = 1e-9


@dataclass(frozen=True)
class FgnSpec:
    hurst: float
    length: int
    seed: int | None = None

    def __post_init__(self):
        _check_hurst(self.hurst)
        if self.length < 1:
            raise ValueError("length must be >= 1")


def _check_hurst(H):
    if not 0.0 < H < 1.0:
        raise InvalidHurst(f"Hurst exponent must lie in (0, 1), got {H}")


def fgn_autocovariance(H, lag):
    """Autocovariance of unit-step fGn at integer ``lag`` (scalar or array)."""
    _check_hurst(H)
    k = np.abs(np.asarray(lag, dtype=float))
    h2 = 2.0 * H
    out = 0.5 * (np.abs(k + 1.0) ** h2 - 2.0 * k**h2 + np.abs(k - 1.0) ** h2)
    return float(out) if out.ndim == 0 else out


def _embedding_size(n):
    m = 2
    while m < 2 * (n - 1):
        m *= 2
    return m


def circulant_eigenvalues(H, n):
    """Eigenvalues of the circulant matrix embedding the n x n fGn covariance."""
    m = _embedding_size(n)
    j = np.arange(m)
    row = fgn_autocovariance(H, np.minimum(j, m - j))
    eig = np.fft.fft(row).real
    lowest = eig.min()
    if lowest < -NEG_EIG_TOL:
        raise EmbeddingError(f"negative circulant eigenvalue {lowest:.3e} for H={H}, n={n}")
    return np.clip(eig, 0.0, None)


def sample_fgn_batch(H, n, size, rng=None):
    """``size`` independent fGn vectors of length ``n``, shape (size, n)."""
    _check_hurst(H)
    rng = make_rng(rng)
    if n == 1:
        return rng.standard_normal((size, 1))
    eig = circulant_eigenvalues(H, n)
    m = eig.size
    # real and imaginary parts of one transform are independent draws
    n_complex = (size + 1) // 2
    z = rng.standard_normal((n_complex, m)) + 1j * rng.standard_normal((n_complex, m))
    w = np.fft.fft(np.sqrt(eig / m) * z, axis=1)[:, :n]
    out = np.concatenate([w.real, w.imag], axis=0)[:size]
    return out


def sample_fgn(spec: FgnSpec) -> np.ndarray:
    return sample_fgn_batch(spec.hurst, spec.length, 1, make_rng(spec.seed))[0]


def fbm_from_fgn(increments):
    """Cumulative fBm path B(1..n) from its increments (B(0) = 0 is implicit)."""
    x = np.asarray(increments, dtype=float)
    if x.size == 0:
        raise EmptyInput("no increments")
    return np.cumsum(x)
