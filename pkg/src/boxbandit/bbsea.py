"""Successive elimination for the partition setting, with bound calculators.

Applies when the arms are split disjointly across boxes.  The
algorithm proceeds in rounds: each active box is selected until every
active arm it hosts has been pulled at least n times, confidence
bounds are recomputed, and any active arm whose UCB falls strictly
below the best active LCB is eliminated.  The stopping time equals the
total number of box selections.

The bound calculators evaluate the non-asymptotic guarantees: per-arm
elimination rounds alpha_{m,k}, per-arm selection budgets beta_{m,k},
their per-box maxima, the resulting stopping-time upper bound
sum_m beta_m, and the matching lower bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import instance as inst
from .bbmts import CapExceeded, RunOutcome


class NonpositiveGap(ValueError):
    pass


@dataclass
class EliminationState:
    """Snapshot of one elimination round (kept for diagnostics/tests)."""

    round: int
    t: int
    active_arms: frozenset
    active_boxes: frozenset
    pulls: np.ndarray
    lcb: np.ndarray
    ucb: np.ndarray


@dataclass(frozen=True)
class TheoryBounds:
    alpha_mk: np.ndarray
    beta_mk: np.ndarray
    beta_m: np.ndarray
    upper_bound: float
    lower_bound: float


def alpha_delta(x, num_arms, delta):
    """Confidence radius sqrt(2 log(8 K x^2 / delta) / x) after x pulls."""
    return math.sqrt(2.0 * math.log(8.0 * num_arms * x * x / delta) / x)


def run(problem, delta, seed, max_steps=10**8, keep_rounds=False):
    """One trial of boxed-bandit successive elimination.

    Requires a partition instance (``arm_sets`` present).  Returns a
    RunOutcome; with ``keep_rounds`` the outcome's ``trace`` holds an
    EliminationState per round.

    Raises
    ------
    CapExceeded
        If elimination has not finished within max_steps selections.
    """
    if problem.arm_sets is None:
        raise ValueError("successive elimination needs partition metadata (arm_sets)")
    m_boxes, k_arms = problem.num_boxes, problem.num_arms
    ss = np.random.SeedSequence(seed)
    arm_ss, reward_ss = ss.spawn(2)
    rng_arm = np.random.default_rng(arm_ss)
    rng_reward = np.random.default_rng(reward_ss)

    active = [set(s) for s in problem.arm_sets]
    n_active = k_arms
    pulls = np.zeros(k_arms, dtype=np.int64)
    sums = np.zeros(k_arms)
    t = 0
    n = 0
    rounds = [] if keep_rounds else None

    while n_active > 1:
        n += 1
        for m in range(m_boxes):
            if not active[m]:
                continue
            arm_list = list(active[m])
            while min(pulls[a] for a in arm_list) < n:
                arm, reward = inst.sample_box(problem, m, rng_arm, rng_reward)
                pulls[arm] += 1
                sums[arm] += reward
                t += 1
                if t > max_steps:
                    raise CapExceeded(max_steps)
        # Round-boundary bounds over the active arms only.
        act = sorted(a for s in active for a in s)
        radius = np.array([alpha_delta(pulls[a], k_arms, delta) for a in act])
        means = sums[act] / pulls[act]
        lcb = means - radius
        ucb = means + radius
        max_lcb = lcb.max()
        drop = {a for a, u in zip(act, ucb) if u < max_lcb}
        if drop:
            for m in range(m_boxes):
                active[m] -= drop
            n_active -= len(drop)
        if keep_rounds:
            lcb_full = np.full(k_arms, np.nan)
            ucb_full = np.full(k_arms, np.nan)
            lcb_full[act] = lcb
            ucb_full[act] = ucb
            rounds.append(
                EliminationState(
                    round=n,
                    t=t,
                    active_arms=frozenset(a for s in active for a in s),
                    active_boxes=frozenset(m for m in range(m_boxes) if active[m]),
                    pulls=pulls.copy(),
                    lcb=lcb_full,
                    ucb=ucb_full,
                )
            )

    declared = next(a for s in active for a in s)
    return RunOutcome(
        declared_arm=declared,
        tau=t,
        correct=declared == problem.best_arm,
        trace=rounds,
    )


# ---------------------------------------------------------------------------
# non-asymptotic bound calculators


def theory_alpha(gap, num_arms, delta):
    """Elimination-round budget 1 + (102/gap^2) log(64 sqrt(8K/delta) / gap^2)."""
    if gap <= 0:
        raise NonpositiveGap(f"gap must be positive, got {gap}")
    return 1.0 + (102.0 / gap**2) * math.log(
        64.0 * math.sqrt(8.0 * num_arms / delta) / gap**2
    )


def theory_beta(q_mk, alpha_mk, num_arms, delta):
    """Box-selection budget for one arm: (1/q)[alpha + 2L + 2 sqrt(L(L+alpha))]."""
    ell = math.log(2.0 * num_arms / delta)
    return (alpha_mk + 2.0 * ell + 2.0 * math.sqrt(ell * (ell + alpha_mk))) / q_mk


def theory_bounds(problem, delta):
    """All Theorem-style quantities for a partition instance at confidence delta."""
    if problem.arm_sets is None:
        raise ValueError("bounds are defined for partition instances")
    k_arms = problem.num_arms
    delta_k = inst.gaps(problem).delta
    alpha_mk = np.array([theory_alpha(delta_k[a], k_arms, delta) for a in range(k_arms)])
    beta_mk = np.zeros(k_arms)
    beta_m = np.zeros(problem.num_boxes)
    for m, s in enumerate(problem.arm_sets):
        for a in s:
            beta_mk[a] = theory_beta(problem.q[m, a], alpha_mk[a], k_arms, delta)
        beta_m[m] = max(beta_mk[a] for a in s)
    return TheoryBounds(
        alpha_mk=alpha_mk,
        beta_mk=beta_mk,
        beta_m=beta_m,
        upper_bound=float(beta_m.sum()),
        lower_bound=partition_lower_bound(problem, delta),
    )


def partition_lower_bound(problem, delta):
    """log(1/(2.4 delta)) * sum_m max_k 1/(q_{m,k} gap_{m,k}^2)."""
    if problem.arm_sets is None:
        raise ValueError("bound is defined for partition instances")
    delta_k = inst.gaps(problem).delta
    total = 0.0
    for m, s in enumerate(problem.arm_sets):
        total += max(1.0 / (problem.q[m, a] * delta_k[a] ** 2) for a in s)
    return math.log(1.0 / (2.4 * delta)) * total


def order_check(problem, delta):
    """Tightness diagnostics: upper/lower ratio and normalized per-arm budgets.

    The normalization divides each beta_{m,k} by its leading order
    log(K / (delta * gap)) / (q * gap^2); a bounded ratio across a
    delta sweep is what "tight up to multiplicative factors" means.
    """
    bounds = theory_bounds(problem, delta)
    delta_k = inst.gaps(problem).delta
    k_arms = problem.num_arms
    normalized = np.zeros(k_arms)
    for m, s in enumerate(problem.arm_sets):
        for a in s:
            lead = math.log(k_arms / (delta * delta_k[a])) / (
                problem.q[m, a] * delta_k[a] ** 2
            )
            normalized[a] = bounds.beta_mk[a] / lead
    return {
        "delta": delta,
        "upper_bound": bounds.upper_bound,
        "lower_bound": bounds.lower_bound,
        "ratio": bounds.upper_bound / bounds.lower_bound,
        "normalized_beta": normalized,
    }
