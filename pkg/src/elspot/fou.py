"""Fractional Ornstein-Uhlenbeck base component."""
from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np
from scipy import integrate

from .errors import InvalidHurst, InvalidTime, UnstableStep


@dataclass(frozen=True)
class FouParams:
    alpha1: float
    sigma: float
    hurst: float
    x0: float = 0.0

    def __post_init__(self):
        if not self.alpha1 > 0:
            raise ValueError(f"alpha1 must be > 0, got {self.alpha1}")
        if self.sigma < 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")
        if not 0.0 < self.hurst < 1.0:
            raise InvalidHurst(f"Hurst exponent must lie in (0, 1), got {self.hurst}")


def simulate_fou(params: FouParams, n_days, dt, fgn_increments, exact_drift=False):
    """Euler-Maruyama path of the fOU on a grid of step ``dt``.

    ``fgn_increments`` are unit-variance fGn; they are scaled by ``dt**H`` here.
    Works on a single path (1-d increments) or a batch (2-d, one path per row).
    Returns ``n_days / dt + 1`` points including ``x0``.

    With ``exact_drift`` the drift factor 1 - alpha1*dt becomes exp(-alpha1*dt)
    (exponential integrator), which is stable for any step.
    """
    if not exact_drift and params.alpha1 * dt >= 1.0:
        raise UnstableStep(f"alpha1*dt = {params.alpha1 * dt:.3g} >= 1")
    g = np.asarray(fgn_increments, dtype=float)
    n_steps = int(round(n_days / dt))
    if g.shape[-1] != n_steps:
        raise ValueError(f"expected {n_steps} increments, got {g.shape[-1]}")
    decay = math.exp(-params.alpha1 * dt) if exact_drift else 1.0 - params.alpha1 * dt
    shocks = params.sigma * dt**params.hurst * g
    x = np.empty(g.shape[:-1] + (n_steps + 1,))
    x[..., 0] = params.x0
    for k in range(n_steps):
        x[..., k + 1] = decay * x[..., k] + shocks[..., k]
    return x


def fou_stationary_variance(params: FouParams):
    H = params.hurst
    return params.alpha1 ** (-2 * H) * H * params.sigma**2 * math.gamma(2 * H)


def fou_variance(params: FouParams, t):
    """Marginal variance at time ``t`` by quadrature.

    Substituting u = s**(2H) removes the s**(2H-1) endpoint singularity:
    H sigma^2 int_0^t s^(2H-1) g(s) ds = sigma^2/2 int_0^(t^2H) g(u^(1/2H)) du.
    """
    if t < 0:
        raise InvalidTime(f"t must be >= 0, got {t}")
    if t == 0:
        return 0.0
    a, H = params.alpha1, params.hurst
    inv = 1.0 / (2 * H)

    def g(u):
        s = u**inv
        return math.exp(-a * s) + math.exp(-a * (2 * t - s))

    upper = t ** (2 * H)
    val, _ = integrate.quad(g, 0.0, upper, epsabs=0.0, epsrel=1e-10, limit=500)
    return 0.5 * params.sigma**2 * val
