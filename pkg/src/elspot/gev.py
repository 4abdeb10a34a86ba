"""Generalized Extreme Value law for jump sizes."""
from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np
from scipy import optimize
from scipy.special import gamma as gamma_fn

from .errors import FitError, InsufficientData, InvalidProbability

XI_ZERO = 1e-8
XI_MAX = 5.0


@dataclass(frozen=True)
class GevParams:
    mu: float
    sigma: float
    xi: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"GEV scale must be > 0, got {self.sigma}")

    @property
    def lower_bound(self):
        return self.mu - self.sigma / self.xi if self.xi > XI_ZERO else -math.inf

    @property
    def upper_bound(self):
        return self.mu - self.sigma / self.xi if self.xi < -XI_ZERO else math.inf


def _t(p: GevParams, x):
    """t(x) of the GEV density; NaN outside the support."""
    z = (np.asarray(x, dtype=float) - p.mu) / p.sigma
    if abs(p.xi) < XI_ZERO:
        with np.errstate(over="ignore"):
            return np.exp(-z)
    arg = 1.0 + p.xi * z
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(arg > 0, np.abs(arg) ** (-1.0 / p.xi), np.nan)


def gev_density(p: GevParams, x):
    t = _t(p, x)
    with np.errstate(invalid="ignore", over="ignore"):
        f = np.where(np.isnan(t), 0.0, t ** (p.xi + 1.0) * np.exp(-t) / p.sigma)
    f = np.nan_to_num(f, nan=0.0, posinf=0.0)
    return float(f) if f.ndim == 0 else f


def gev_cdf(p: GevParams, x):
    x = np.asarray(x, dtype=float)
    t = _t(p, x)
    below = x <= p.lower_bound if p.xi > 0 else np.zeros(x.shape, bool)
    F = np.where(np.isnan(t), np.where(below, 0.0, 1.0), np.exp(-np.nan_to_num(t)))
    return float(F) if F.ndim == 0 else F


def gev_quantile(p: GevParams, u):
    u_arr = np.asarray(u, dtype=float)
    if np.any((u_arr <= 0) | (u_arr >= 1)):
        raise InvalidProbability("probability must lie in (0, 1)")
    y = -np.log(u_arr)
    if abs(p.xi) < XI_ZERO:
        q = p.mu - p.sigma * np.log(y)
    else:
        q = p.mu + p.sigma * np.expm1(-p.xi * np.log(y)) / p.xi
    return float(q) if q.ndim == 0 else q


def gev_sample(p: GevParams, size, rng):
    return gev_quantile(p, rng.uniform(size=size))


def gev_median(p: GevParams):
    if abs(p.xi) < XI_ZERO:
        return p.mu - p.sigma * math.log(math.log(2.0))
    return p.mu + p.sigma * (math.log(2.0) ** (-p.xi) - 1.0) / p.xi


def gev_loglik(p: GevParams, x):
    x = np.asarray(x, dtype=float)
    t = _t(p, x)
    if np.any(np.isnan(t)) or np.any(t <= 0):
        return -math.inf
    return float(np.sum((p.xi + 1.0) * np.log(t) - t) - x.size * math.log(p.sigma))


def gev_pwm_init(x) -> GevParams:
    """Probability-weighted-moment estimate (Hosking, Wallis & Wood)."""
    x = np.sort(np.asarray(x, dtype=float))
    n = x.size
    j = np.arange(n)
    b0 = x.mean()
    b1 = np.sum(j / (n - 1) * x) / n
    b2 = np.sum(j * (j - 1) / ((n - 1) * (n - 2)) * x) / n
    l2 = 2 * b1 - b0
    if not l2 > 1e-12 * max(abs(b0), 1.0):
        raise FitError("degenerate sample: zero spread")
    t3 = (6 * b2 - 6 * b1 + b0) / l2
    c = 2.0 / (3.0 + t3) - math.log(2) / math.log(3)
    k = 7.8590 * c + 2.9554 * c * c  # Hosking's k = -xi
    k = min(max(k, -0.99 * XI_MAX), 0.99 * XI_MAX)
    if abs(k) < 1e-6:
        scale = l2 / math.log(2)
        loc = b0 - 0.5772156649015329 * scale
    else:
        scale = l2 * k / ((1 - 2 ** (-k)) * gamma_fn(1 + k))
        loc = b0 - scale * (1 - gamma_fn(1 + k)) / k
    return GevParams(loc, max(scale, 1e-8), -k)


def gev_fit_mle(samples, maxiter=4000) -> GevParams:
    """Maximum-likelihood fit by Nelder-Mead on (mu, log sigma, xi), |xi| < 5."""
    x = np.asarray(samples, dtype=float)
    if x.size < 5:
        raise InsufficientData(f"need >= 5 samples, got {x.size}")
    init = gev_pwm_init(x)
    n = x.size

    def nll(theta):
        # same value as -gev_loglik, inlined: this is the hot loop of a backtest
        mu, ls, xi = theta
        if abs(xi) >= XI_MAX or ls < -50:
            return math.inf
        z = (x - mu) * math.exp(-ls)
        if abs(xi) < XI_ZERO:
            log_t = -z
        else:
            arg = 1.0 + xi * z
            if arg.min() <= 0:
                return math.inf
            log_t = np.log(arg) * (-1.0 / xi)
        val = n * ls - float((xi + 1.0) * log_t.sum() - np.exp(log_t).sum())
        return val if math.isfinite(val) else math.inf

    starts = [init, GevParams(init.mu, init.sigma, 0.1)]
    # a start guaranteed to contain every sample in its support
    spread = float(np.std(x))
    starts.append(GevParams(float(np.median(x)), max(spread, 1e-6), 0.0))
    best = None
    for s in starts:
        x0 = np.array([s.mu, math.log(s.sigma), s.xi])
        if not np.isfinite(nll(x0)):
            continue
        res = optimize.minimize(nll, x0, method="Nelder-Mead",
                                options={"maxiter": maxiter, "maxfev": 2 * maxiter,
                                         "xatol": 1e-8, "fatol": 1e-10})
        if best is None or res.fun < best.fun:
            best = res
    if best is None or not np.isfinite(best.fun):
        raise FitError("GEV likelihood is not finite at any start")
    mu, ls, xi = best.x
    fitted = GevParams(float(mu), math.exp(ls), float(xi))
    if not best.success:
        raise FitError("GEV fit did not converge", best=fitted)
    return fitted
