"""Estimators for the fOU base component: Hurst exponent, diffusion, mean reversion."""
from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np
from scipy.special import comb, gamma

from .errors import DegenerateInput, DomainError, InsufficientData

H_MIN, H_MAX = 0.01, 0.99

# Root of the p=2 variation statistic is sigma/sqrt(2) under the rho_{k,H}
# normalization; one global factor restores sigma (Monte-Carlo verified in
# tests/test_fracest.py).
SIGMA_CORRECTION = math.sqrt(2.0)


@dataclass
class FracEstimates:
    hurst_hat: float
    sigma_hat: float
    alpha1_hat: float
    diagnostics: dict = field(default_factory=dict)


def second_differences(x, step=1):
    x = np.asarray(x, dtype=float)[::step]
    return x[2:] - 2.0 * x[1:-1] + x[:-2]


def estimate_hurst(series):
    """Hurst exponent from second differences on the step-1 and step-2 grids.

    Returns ``(H, diagnostics)``; H is clamped to [0.01, 0.99] and
    ``diagnostics["clamped"]`` is set when that happens.
    """
    x = np.asarray(series, dtype=float)
    if x.size < 16:
        raise InsufficientData(f"need >= 16 points, got {x.size}")
    fine = np.sum(second_differences(x, 1) ** 2)
    coarse = np.sum(second_differences(x, 2) ** 2)
    scale = max(np.max(np.abs(x)), 1.0)
    if fine <= 1e-24 * scale**2 * x.size or coarse <= 0:
        raise DegenerateInput("second differences vanish (affine series)")
    raw = 0.5 - math.log(fine / coarse) / (2.0 * math.log(2.0))
    h = min(max(raw, H_MIN), H_MAX)
    diag = {"hurst_raw": raw, "v_fine": fine, "v_coarse": coarse, "clamped": h != raw}
    return h, diag


def rho(k, H):
    j = np.arange(-k, k + 1)
    terms = (-1.0) ** (1 - j) * comb(2 * k, k - j) * np.abs(j) ** (2 * H)
    return float(np.sum(terms))


def c_kp(k, p, H):
    r = rho(k, H)
    if r <= 0:
        raise DomainError(f"rho_{{{k},H}} = {r} <= 0")
    return 2 ** (p / 2) * gamma((p + 1) / 2) / gamma(0.5) * r ** (p / 2)


def estimate_sigma(series, H):
    """Diffusion coefficient from the 2nd-order quadratic variation (n=1, T=N)."""
    x = np.asarray(series, dtype=float)
    if x.size < 4:
        raise InsufficientData(f"need >= 4 points, got {x.size}")
    N = x.size
    V = float(np.sum(second_differences(x) ** 2))
    c = c_kp(2, 2, H)
    raw = math.sqrt(V / (c * N))
    sigma = SIGMA_CORRECTION * raw
    return sigma, {"V": V, "c_22": c, "rho_2H": rho(2, H), "sigma_raw": raw,
                   "correction": SIGMA_CORRECTION}


def delta(H):
    return 1.0 / math.sqrt(1.0 + H)


def step_schedule(n, N, H):
    """Sampling step h(n) = (N/n)**delta(H); h(N) = 1."""
    return (N / n) ** delta(H)


def estimate_alpha1(series, H, sigma):
    """Ergodic mean-reversion estimator at the final step h(N) = 1."""
    x = np.asarray(series, dtype=float)
    if x.size < 30:
        raise InsufficientData(f"need >= 30 points, got {x.size}")
    if not sigma > 0:
        raise DomainError(f"sigma must be > 0, got {sigma}")
    N = x.size
    ss = float(np.sum(x**2))
    if ss == 0.0:
        raise DegenerateInput("all-zero series")
    ratio = ss / (sigma**2 * H * math.gamma(2 * H) * N)
    return ratio ** (-1.0 / (2 * H))


def estimate_all(series, hurst=None):
    """Run the three estimators in sequence; ``hurst`` pins H instead of estimating it."""
    if hurst is None:
        H, hdiag = estimate_hurst(series)
    else:
        H, hdiag = float(hurst), {"pinned": True}
    sigma, sdiag = estimate_sigma(series, H)
    alpha = estimate_alpha1(series, H, sigma)
    return FracEstimates(H, sigma, alpha, {**hdiag, **sdiag, "n": len(series)})
