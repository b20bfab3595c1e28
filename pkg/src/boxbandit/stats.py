"""Run statistics: counts, empirical estimates, GLRT, stopping threshold.

The tally is the sufficient statistic of a run: how often each
(box, arm) pair occurred and the per-arm reward totals.  The pairwise
statistic z_ab compares two arms through their pooled empirical mean;
the global statistic is its max-min over arms.  The stopping threshold
is zeta(t) = log(C t^(1+rho) / delta) with C fixed by a series
inequality in K and rho.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gamma as gamma_fn
from scipy.special import gammaincc


class UndefinedEstimate(ValueError):
    def __init__(self, arm):
        self.arm = arm
        super().__init__(f"arm {arm} has no pulls; empirical mean undefined")


class NoFiniteC(RuntimeError):
    pass


class TallyState:
    """Triple-indexed counts N(t, m, k) plus per-arm reward sums.

    Owned by a single run loop; ``record`` mutates in place and returns
    self so call sites can treat it functionally.
    """

    __slots__ = ("n_mk", "n_m", "n_k", "reward_sum_k", "t")

    def __init__(self, num_boxes, num_arms):
        self.n_mk = np.zeros((num_boxes, num_arms), dtype=np.int64)
        self.n_m = np.zeros(num_boxes, dtype=np.int64)
        self.n_k = np.zeros(num_arms, dtype=np.int64)
        self.reward_sum_k = np.zeros(num_arms)
        self.t = 0

    def record(self, box, arm, reward):
        self.n_mk[box, arm] += 1
        self.n_m[box] += 1
        self.n_k[arm] += 1
        self.reward_sum_k[arm] += reward
        self.t += 1
        return self

    def mu_hat(self):
        """Per-arm empirical means and a defined-mask (unpulled arms masked)."""
        mask = self.n_k > 0
        mu = np.zeros(len(self.n_k))
        mu[mask] = self.reward_sum_k[mask] / self.n_k[mask]
        return mu, mask

    def q_hat(self):
        """Empirical box rows and a defined-mask (unselected boxes masked)."""
        mask = self.n_m > 0
        q = np.zeros_like(self.n_mk, dtype=float)
        q[mask] = self.n_mk[mask] / self.n_m[mask, None]
        return q, mask


def record(state, box, arm, reward):
    return state.record(box, arm, reward)


def z_ab(state, a, b):
    """Pairwise GLRT statistic; >= 0 exactly when mu_hat[a] >= mu_hat[b]."""
    na, nb = state.n_k[a], state.n_k[b]
    if na == 0:
        raise UndefinedEstimate(a)
    if nb == 0:
        raise UndefinedEstimate(b)
    ma = state.reward_sum_k[a] / na
    mb = state.reward_sum_k[b] / nb
    pooled = (na * ma + nb * mb) / (na + nb)
    z = na * (ma - pooled) ** 2 / 2.0 + nb * (mb - pooled) ** 2 / 2.0
    return z if ma >= mb else -z


def z_global(state, rng=None):
    """Max over arms of the min pairwise statistic, with the attaining arm.

    The attaining arm coincides with the empirical-mean argmax; exact
    argmax ties are resolved uniformly at random from ``rng`` (lowest
    index if no generator is supplied).
    """
    k = len(state.n_k)
    if np.any(state.n_k == 0):
        raise UndefinedEstimate(int(np.argmin(state.n_k)))
    mu = state.reward_sum_k / state.n_k
    top = np.max(mu)
    ties = np.nonzero(mu == top)[0]
    if len(ties) > 1 and rng is not None:
        leader = int(rng.choice(ties))
    else:
        leader = int(ties[0])
    z = min(z_ab(state, leader, b) for b in range(k) if b != leader)
    return z, leader


def leader_z_min(n_k, reward_sum_k, leader):
    """min_b z_{leader,b}, vectorized; leader must be an empirical argmax."""
    mu = reward_sum_k / n_k
    na = n_k[leader]
    ma = mu[leader]
    nb = np.delete(n_k, leader)
    mb = np.delete(mu, leader)
    pooled = (na * ma + nb * mb) / (na + nb)
    z = na * (ma - pooled) ** 2 / 2.0 + nb * (mb - pooled) ** 2 / 2.0
    return float(np.min(z))


# ---------------------------------------------------------------------------
# stopping threshold


@dataclass(frozen=True)
class Threshold:
    c_const: float
    rho: float
    delta: float


def make_threshold(num_arms, delta, rho, mode="paper"):
    """Build the stopping threshold.

    mode="paper" computes the series constant C (typically enormous);
    mode="practical" uses C=1 for exploratory runs and does not carry
    the correctness certificate.
    """
    if mode == "paper":
        c = compute_c(num_arms, rho)
    elif mode == "practical":
        c = 1.0
    else:
        raise ValueError(f"unknown threshold mode {mode!r}")
    return Threshold(c_const=c, rho=rho, delta=delta)


def zeta(threshold, t):
    """log(C t^(1+rho) / delta) for t >= 1."""
    if t < 1:
        raise ValueError("zeta is defined for t >= 1")
    return (
        math.log(threshold.c_const)
        + (1.0 + threshold.rho) * math.log(t)
        + math.log(1.0 / threshold.delta)
    )


def threshold_series(c, num_arms, rho, t_max=100_000):
    """S(C): the K-th power series the constant C must dominate.

    Summed directly (compensated, in chunks) up to t_max or until the
    summand drops below 1e-16 of the running sum, then closed with an
    analytic integral tail bound in incomplete-gamma form.
    """
    k = num_arms
    pref = math.exp(k + 1) / k**k
    logc = math.log(c)
    total = 0.0
    t_stop = t_max
    chunk = 4096
    t = 2
    while t <= t_max:
        hi = min(t + chunk, t_max + 1)
        ts = np.arange(t, hi, dtype=float)
        lt = np.log(ts)
        summand = ((logc + (1.0 + rho) * lt) ** 2 * lt) ** k / ts ** (1.0 + rho)
        total += math.fsum(summand)
        if summand[-1] < 1e-16 * total:
            t_stop = hi - 1
            break
        t = hi
    # Tail: sum_{t > t_stop} f(t) <= int_{t_stop}^inf f = int_u (L+cu)^{2K} u^K e^{-rho u} du
    # with u = log t, expanded by the binomial theorem into incomplete gammas.
    u0 = math.log(t_stop)
    cc = 1.0 + rho
    tail = 0.0
    for j in range(2 * k + 1):
        n = k + j
        tail += (
            math.comb(2 * k, j)
            * logc ** (2 * k - j)
            * cc**j
            * gammaincc(n + 1, rho * u0)
            * gamma_fn(n + 1)
            / rho ** (n + 1)
        )
    return pref * (total + tail)


@lru_cache(maxsize=None)
def compute_c(num_arms, rho):
    """Smallest C (by bisection) with S(C) <= C, cached per (K, rho)."""
    if num_arms < 2:
        raise ValueError("the threshold constant is defined for K >= 2")
    if rho <= 0:
        raise ValueError("rho must be positive")
    lo = 1.0
    hi = 2.0
    while threshold_series(hi, num_arms, rho) > hi:
        lo = hi
        hi *= 8.0
        if hi > 1e300:
            raise NoFiniteC(f"no C <= 1e300 satisfies the series bound (K={num_arms})")
    for _ in range(200):
        mid = math.sqrt(lo * hi)
        if threshold_series(mid, num_arms, rho) <= mid:
            hi = mid
        else:
            lo = mid
        if hi / lo < 1.0 + 1e-12:
            break
    return hi
