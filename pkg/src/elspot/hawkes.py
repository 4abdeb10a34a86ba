"""Marked exponential-kernel Hawkes process and the mean-reverting jump component."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
import math

import numpy as np
from scipy import optimize

from .errors import DomainError, FitError, InsufficientData, NonStationary
from .gev import GevParams, gev_quantile
from .rng import make_rng


@dataclass(frozen=True)
class HawkesParams:
    lambda0: float
    gamma: float = 0.0
    beta: float = 0.0

    def __post_init__(self):
        if not self.lambda0 > 0:
            raise ValueError(f"background intensity must be > 0, got {self.lambda0}")
        if self.gamma < 0 or self.beta < 0:
            raise ValueError("gamma and beta must be >= 0")

    @property
    def stationary(self):
        return self.gamma == 0 or self.gamma < self.beta

    @property
    def branching_ratio(self):
        return self.gamma / self.beta if self.gamma > 0 else 0.0

    @property
    def mean_rate(self):
        if not self.stationary:
            return math.inf
        return self.lambda0 / (1.0 - self.branching_ratio)


@dataclass(frozen=True)
class EventStream:
    times: np.ndarray
    marks: np.ndarray
    horizon: float

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float).reshape(-1)
        z = np.asarray(self.marks, dtype=float).reshape(-1)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "marks", z)
        if t.size != z.size:
            raise ValueError("times and marks differ in length")
        if t.size:
            if t[0] <= 0 or np.any(np.diff(t) <= 0) or t[-1] > self.horizon:
                raise ValueError("times must be strictly increasing in (0, horizon]")
            if not np.all(np.isfinite(z)) or np.any(z == 0):
                raise ValueError("marks must be finite and nonzero")

    def __len__(self):
        return int(self.times.size)

    @classmethod
    def empty(cls, horizon=0.0):
        return cls(np.empty(0), np.empty(0), horizon)

    def select(self, mask):
        return EventStream(self.times[mask], self.marks[mask], self.horizon)

    def to_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["time", "mark"])
            for t, z in zip(self.times, self.marks):
                w.writerow([repr(float(t)), repr(float(z))])

    @classmethod
    def from_csv(cls, path, horizon=None):
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
        t = np.array([float(r["time"]) for r in rows])
        z = np.array([float(r["mark"]) for r in rows])
        if horizon is None:
            horizon = float(t[-1]) if t.size else 0.0
        return cls(t, z, horizon)


@dataclass(frozen=True)
class Jump2Params:
    alpha2: float
    hawkes: HawkesParams
    mark_dist: GevParams

    def __post_init__(self):
        if not self.alpha2 > 0:
            raise ValueError(f"alpha2 must be > 0, got {self.alpha2}")


def intensity_at(p: HawkesParams, events: EventStream, t, lambda_star=None):
    """Left-continuous intensity: events at exactly ``t`` are not counted.

    ``lambda_star`` switches on the transient form started from
    lambda(0) = lambda_star instead of the stationary form.
    """
    tt = events.times[events.times < t]
    val = p.lambda0 + p.gamma * float(np.sum(np.exp(-p.beta * (t - tt))))
    if lambda_star is not None:
        val += math.exp(-p.beta * t) * (lambda_star - p.lambda0)
    return val


def intensity_trace(p: HawkesParams, events: EventStream, grid):
    return np.array([intensity_at(p, events, t) for t in np.asarray(grid, dtype=float)])


def simulate_hawkes(p: HawkesParams, mark_dist: GevParams, horizon, seed=None,
                    history=None, lambda_star=None):
    """Ogata thinning on (0, horizon].

    ``history`` are past event times (<= 0) whose excitation carries into the
    window; they are not part of the returned stream.
    """
    if not p.stationary:
        raise NonStationary(f"gamma={p.gamma} >= beta={p.beta}")
    rng = make_rng(seed)
    if horizon <= 0:
        return EventStream.empty(max(horizon, 0.0))
    # excitation above baseline, tracked just after the current time
    excess = 0.0
    if history is not None and p.gamma > 0:
        h = np.asarray(history, dtype=float)
        excess = p.gamma * float(np.sum(np.exp(p.beta * h)))
    transient = 0.0 if lambda_star is None else lambda_star - p.lambda0
    times = []
    t = 0.0
    while True:
        # intensity is nonincreasing between events, so its current value bounds it
        bound = p.lambda0 + excess + max(transient * math.exp(-p.beta * t), 0.0)
        w = rng.exponential(1.0 / bound)
        s = t + w
        if s > horizon:
            break
        excess *= math.exp(-p.beta * w)
        lam = p.lambda0 + excess + transient * math.exp(-p.beta * s)
        if rng.uniform() * bound <= lam:
            times.append(s)
            excess += p.gamma
        t = s
    u = rng.uniform(size=len(times))
    marks = np.array([gev_quantile(mark_dist, ui) for ui in u]) if times else np.empty(0)
    return EventStream(np.array(times), marks, horizon)


# ---------------------------------------------------------------------------
# likelihood

def _abc(times, beta, order=0):
    """Recursions A(j), B(j), C(j) (C only when order >= 2, B when >= 1)."""
    n = times.size
    A = np.zeros(n)
    B = np.zeros(n) if order >= 1 else None
    C = np.zeros(n) if order >= 2 else None
    for j in range(1, n):
        d = times[j] - times[j - 1]
        e = math.exp(-beta * d)
        a1 = 1.0 + A[j - 1]
        A[j] = e * a1
        if order >= 1:
            B[j] = e * (B[j - 1] + d * a1)
        if order >= 2:
            C[j] = e * (C[j - 1] + 2.0 * d * B[j - 1] + d * d * a1)
    return A, B, C


def _check_events(events):
    if len(events) < 1:
        raise InsufficientData("log-likelihood needs at least one event")
    return events.times


def hawkes_loglik(p: HawkesParams, events: EventStream):
    """Log-likelihood on [0, T_n] via the O(n) recursion."""
    t = _check_events(events)
    lam, g, b = p.lambda0, p.gamma, p.beta
    A, _, _ = _abc(t, b)
    D = lam + g * A
    if np.any(D <= 0):
        raise DomainError("intensity is not positive at an event time")
    Tn = t[-1]
    comp = 0.0
    if g != 0.0:
        comp = (g / b) * float(np.sum(np.expm1(-b * (Tn - t))))
    return -lam * Tn + comp + float(np.sum(np.log(D)))


def hawkes_loglik_derivatives(p: HawkesParams, events: EventStream):
    """Analytic gradient and Hessian w.r.t. (lambda, gamma, beta)."""
    t = _check_events(events)
    lam, g, b = p.lambda0, p.gamma, p.beta
    if b <= 0:
        raise DomainError("derivatives need beta > 0")
    A, B, C = _abc(t, b, order=2)
    D = lam + g * A
    if np.any(D <= 0):
        raise DomainError("intensity is not positive at an event time")
    u = t[-1] - t
    e = np.exp(-b * u)
    om = -np.expm1(-b * u)  # 1 - e
    inv = 1.0 / D

    # compensator pieces: K(beta) = sum (1-e)/beta and its beta-derivatives
    K = om.sum() / b
    K1 = float(np.sum(u * e / b - om / b**2))
    K2 = float(np.sum(-u * u * e / b - 2 * u * e / b**2 + 2 * om / b**3))

    grad = np.array([
        -t[-1] + inv.sum(),
        -K + float(np.sum(A * inv)),
        -g * K1 - g * float(np.sum(B * inv)),
    ])
    h_ll = -float(np.sum(inv**2))
    h_lg = -float(np.sum(A * inv**2))
    h_lb = g * float(np.sum(B * inv**2))
    h_gg = -float(np.sum((A * inv) ** 2))
    h_gb = -K1 + float(np.sum(-B * inv + g * A * B * inv**2))
    h_bb = -g * K2 + float(np.sum(g * C * inv - (g * B * inv) ** 2))
    hess = np.array([[h_ll, h_lg, h_lb], [h_lg, h_gg, h_gb], [h_lb, h_gb, h_bb]])
    return grad, hess


def hawkes_loglik_bruteforce(p: HawkesParams, events: EventStream):
    """O(n^2) evaluation straight from the intensity and its compensator."""
    t = events.times
    lam, g, b = p.lambda0, p.gamma, p.beta
    total = 0.0
    for j in range(t.size):
        s = 0.0
        for i in range(j):
            s += math.exp(-b * (t[j] - t[i]))
        total += math.log(lam + g * s)
    Tn = t[-1]
    comp = lam * Tn
    if g != 0.0:
        for j in range(t.size):
            comp += g / b * (1.0 - math.exp(-b * (Tn - t[j])))
    return total - comp


# ---------------------------------------------------------------------------
# estimation

LOG_FLOOR = -40.0
# (gamma0 / lambda0, (beta0 - gamma0) / gamma0) multipliers of the multi-start
_STARTS = ((0.5, 1.0), (1.5, 0.5), (0.2, 10.0))


@dataclass
class HawkesFit:
    params: HawkesParams
    loglik: float
    converged: bool
    starts: list = field(default_factory=list)


def _unpack(theta):
    lam = math.exp(theta[0])
    g = math.exp(theta[1])
    return lam, g, g + math.exp(theta[2])


def _objective(theta, events):
    lam, g, b = _unpack(theta)
    try:
        ll = hawkes_loglik(HawkesParams(lam, g, b), events)
        grad, _ = hawkes_loglik_derivatives(HawkesParams(lam, g, b), events)
    except DomainError:
        return math.inf, np.zeros(3)
    # chain rule into (log lambda, log gamma, log(beta - gamma))
    jac = np.array([lam * grad[0], g * (grad[1] + grad[2]), (b - g) * grad[2]])
    return -ll, -jac


def hawkes_fit(events: EventStream, maxiter=500) -> HawkesFit:
    n = len(events)
    if n < 3:
        raise InsufficientData(f"need >= 3 events, got {n}")
    Tn = events.times[-1]
    lam0 = n / Tn
    poisson = HawkesParams(lam0, 0.0, 0.0)
    poisson_ll = hawkes_loglik(poisson, events)
    bounds = [(LOG_FLOOR, 20.0)] * 3
    best, best_ll, results = None, -math.inf, []
    any_ok = False
    for gr, br in _STARTS:
        g0 = gr * lam0
        b0 = g0 * (1.0 + br)
        x0 = np.log([lam0, g0, b0 - g0])
        res = optimize.minimize(_objective, x0, args=(events,), jac=True,
                                method="L-BFGS-B", bounds=bounds,
                                options={"maxiter": maxiter})
        ll = -float(res.fun)
        results.append((res.success, ll))
        any_ok |= bool(res.success)
        if np.isfinite(ll) and ll > best_ll:
            best_ll, best = ll, HawkesParams(*_unpack(res.x))
    if best is None or poisson_ll >= best_ll:
        b = best.beta if best is not None else 0.0
        best, best_ll = HawkesParams(lam0, 0.0, b), poisson_ll
    if not any_ok:
        raise FitError("Hawkes likelihood maximization did not converge", best=best)
    return HawkesFit(best, best_ll, any_ok, results)


def hawkes_fit_mle(events: EventStream) -> HawkesParams:
    return hawkes_fit(events).params


# ---------------------------------------------------------------------------
# jump component

def simulate_x2(p: Jump2Params, events: EventStream, n_days, x0=0.0):
    """Daily samples X2(0), ..., X2(n_days - 1) of the jump component.

    Between events the path decays at rate alpha2; it jumps by each mark at
    its event time (right-continuous, so an event at day k shows at index k).
    """
    return jump_path(events.times, events.marks, p.alpha2, n_days, x0)


def jump_path(times, marks, alpha2, n_days, x0=0.0):
    grid = np.arange(n_days, dtype=float)
    out = x0 * np.exp(-alpha2 * grid)
    times = np.asarray(times, dtype=float)
    marks = np.asarray(marks, dtype=float)
    for tau, z in zip(times, marks):
        on = grid >= tau
        out[on] += z * np.exp(-alpha2 * (grid[on] - tau))
    return out


def simulate_x2_batch(p: Jump2Params, horizon, n_paths, seed=None, history=None, x0=0.0):
    """X2(horizon) for ``n_paths`` independent continuations, by vectorized thinning.

    ``history`` holds past event times (<= 0) feeding the intensity; ``x0`` is
    the jump component at time 0, which decays deterministically.
    """
    hp = p.hawkes
    if not hp.stationary:
        raise NonStationary(f"gamma={hp.gamma} >= beta={hp.beta}")
    rng = make_rng(seed)
    out = np.full(n_paths, x0 * math.exp(-p.alpha2 * horizon))
    excess = np.zeros(n_paths)
    if history is not None and hp.gamma > 0 and len(history):
        excess[:] = hp.gamma * float(np.sum(np.exp(hp.beta * np.asarray(history, float))))
    t = np.zeros(n_paths)
    idx = np.arange(n_paths)
    while idx.size:
        bound = hp.lambda0 + excess[idx]
        s = t[idx] + rng.exponential(1.0 / bound)
        alive = s <= horizon
        idx, s, bound = idx[alive], s[alive], bound[alive]
        if not idx.size:
            break
        excess[idx] *= np.exp(-hp.beta * (s - t[idx]))
        t[idx] = s
        accept = rng.uniform(size=idx.size) * bound <= hp.lambda0 + excess[idx]
        hit = idx[accept]
        if hit.size:
            z = gev_quantile(p.mark_dist, rng.uniform(size=hit.size))
            out[hit] += z * np.exp(-p.alpha2 * (horizon - t[hit]))
            excess[hit] += hp.gamma
    return out
