"""Modified track-and-stop for boxed bandits.

Box selection follows the modified D-tracking rule: forced round-robin
whenever some box has been selected fewer than sqrt(t/M) times,
otherwise the box with the largest deficit against the running sum of
the per-step optimal allocations.  Each step's allocation may be an
arbitrary member of the maximizer set of the estimated instance, which
is what makes the rule robust to non-unique optima.  Stopping is by
the max-min GLRT statistic against the zeta threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import allocation, stats
from .instance import RewardModel, sample_box


class CapExceeded(RuntimeError):
    """The run hit max_steps without stopping; diagnostic, never silent."""

    def __init__(self, max_steps):
        self.max_steps = max_steps
        super().__init__(f"run did not stop within {max_steps} box selections")


@dataclass
class TrackerState:
    """State of the modified D-tracking rule for M boxes."""

    num_boxes: int
    i_ptr: int = 0
    allocations_issued: int = 0
    w_cumsum: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.w_cumsum is None:
            self.w_cumsum = np.zeros(self.num_boxes)


@dataclass
class RunOutcome:
    declared_arm: int
    tau: int
    correct: bool
    trace: list | None = None
    box_freq: np.ndarray | None = None


def next_box(tracker, tally, solver_output_w):
    """Select the next box and fold the step's allocation into the tracker.

    The cumulative allocation is updated before the deficit computation.
    Forced selections return the round-robin pointer and advance it;
    otherwise the argmin of N(t, m) - cumulative allocation over the
    support of the cumulative allocation is returned (lowest index on
    ties).
    """
    tracker.w_cumsum += solver_output_w
    tracker.allocations_issued += 1
    t = tally.t
    m = tracker.num_boxes
    if t == 0 or tally.n_m.min() < math.sqrt(t / m):
        box = tracker.i_ptr
        tracker.i_ptr = (tracker.i_ptr + 1) % m
        return box
    deficit = tally.n_m - tracker.w_cumsum
    deficit = np.where(tracker.w_cumsum > 0, deficit, np.inf)
    return int(np.argmin(deficit))


def _estimated_parameters(tally, num_boxes, num_arms):
    """Plug-in (q, mu) for the solver, with undefined entries imputed.

    Unselected boxes get a uniform row; unpulled arms get the minimum
    defined mean minus 1, which keeps exploration weight on them while
    psi stays well defined.
    """
    q, q_mask = tally.q_hat()
    if not q_mask.all():
        q = q.copy()
        q[~q_mask] = 1.0 / num_arms
    mu, mu_mask = tally.mu_hat()
    if not mu_mask.all():
        mu = mu.copy()
        mu[~mu_mask] = (mu[mu_mask].min() - 1.0) if mu_mask.any() else 0.0
    return q, mu


def _pick_leader(tally, rng):
    """argmax of mu_hat with unpulled arms scored 0, ties uniform at random."""
    mu = np.zeros(len(tally.n_k))
    mask = tally.n_k > 0
    mu[mask] = tally.reward_sum_k[mask] / tally.n_k[mask]
    top = np.max(mu)
    ties = np.nonzero(mu == top)[0]
    return int(rng.choice(ties)) if len(ties) > 1 else int(ties[0])


def run(
    instance,
    delta,
    rho,
    seed,
    threshold_mode="paper",
    strict_resolve=True,
    max_steps=10**7,
    horizon=None,
    trace_every=0,
    trace_members=None,
    solver_tol=1e-8,
    wstar_selector=None,
):
    """One trial of the track-and-stop algorithm.

    Parameters
    ----------
    threshold_mode : {"paper", "practical"}
        "paper" uses the computed series constant C; "practical" uses
        C=1 (no correctness certificate).
    strict_resolve : bool
        Re-solve the allocation every step.  When False, solves are
        thinned after t=1000 to every ceil(t/100) steps with the last
        allocation reused in between.
    horizon : int, optional
        Run exactly this many selections with the stopping rule
        disabled (tracking experiments); declares the final leader.
    trace_every : int
        When positive, append (t, dist, z, zeta) every that many steps.
        ``trace_members`` supplies maximizer-set representatives of the
        true instance for the distance column (else NaN).
    wstar_selector : callable, optional
        Maps (q_hat, mu_hat, t_star, w_star) to the allocation actually
        issued; defaults to the solver's maximizer.  Must return a
        member of the maximizer set.

    Raises
    ------
    CapExceeded
        If the stopping rule has not fired within max_steps.
    """
    if instance.num_arms < 2:
        raise ValueError("best arm identification needs at least two arms")
    if instance.reward_model is not RewardModel.GAUSSIAN_UNIT_VARIANCE:
        raise ValueError("track-and-stop assumes unit-variance Gaussian rewards")
    m, k = instance.num_boxes, instance.num_arms
    ss = np.random.SeedSequence(seed)
    arm_ss, reward_ss, policy_ss = ss.spawn(3)
    rng_arm = np.random.default_rng(arm_ss)
    rng_reward = np.random.default_rng(reward_ss)
    rng_policy = np.random.default_rng(policy_ss)

    threshold = stats.make_threshold(k, delta, rho, mode=threshold_mode)
    log_c_term = math.log(threshold.c_const) + math.log(1.0 / delta)
    one_rho = 1.0 + rho

    tally = stats.TallyState(m, k)
    tracker = TrackerState(m)
    w = np.full(m, 1.0 / m)
    last_solve_t = -1
    trace = [] if trace_every else None
    limit = horizon if horizon is not None else max_steps

    while True:
        t = tally.t
        all_pulled = tally.n_k.min() > 0
        if horizon is None and all_pulled:
            leader = _pick_leader(tally, rng_policy)
            z = stats.leader_z_min(tally.n_k, tally.reward_sum_k, leader)
            if z >= log_c_term + one_rho * math.log(t):
                return _finish(tally, leader, instance, trace)
        if t >= limit:
            if horizon is not None:
                leader = _pick_leader(tally, rng_policy)
                return _finish(tally, leader, instance, trace)
            raise CapExceeded(max_steps)

        if strict_resolve or t <= 1000 or t - last_solve_t >= math.ceil(t / 100):
            q_est, mu_est = _estimated_parameters(tally, m, k)
            t_star_est, w = allocation.solve_qmu(q_est, mu_est, tol=solver_tol)
            if wstar_selector is not None:
                w = wstar_selector(q_est, mu_est, t_star_est, w)
            last_solve_t = t

        box = next_box(tracker, tally, w)
        arm, reward = sample_box(instance, box, rng_arm, rng_reward)
        tally.record(box, arm, reward)

        if trace_every and tally.t % trace_every == 0:
            dist = float("nan")
            if trace_members is not None:
                freq = tally.n_m / tally.t
                dist = float(np.min(np.max(np.abs(trace_members - freq), axis=1)))
            z_now = float("nan")
            if tally.n_k.min() > 0:
                lead = int(np.argmax(tally.reward_sum_k / tally.n_k))
                z_now = stats.leader_z_min(tally.n_k, tally.reward_sum_k, lead)
            trace.append(
                (tally.t, dist, z_now, log_c_term + one_rho * math.log(tally.t))
            )


def _finish(tally, leader, instance, trace):
    return RunOutcome(
        declared_arm=leader,
        tau=tally.t,
        correct=leader == instance.best_arm,
        trace=trace,
        box_freq=tally.n_m / tally.t,
    )


def tracking_distance(tally, instance, result=None, eps=1e-6):
    """Max-norm distance from empirical box frequencies to the optimal set."""
    if tally.t == 0:
        raise ValueError("tracking distance needs at least one selection")
    freq = tally.n_m / tally.t
    return allocation.dinf_to_set(freq, instance, eps, result=result)
