"""Boxed-bandit problem instances: validation, gaps, and box sampling.

An instance is a pair (q, mu): an M x K row-stochastic matrix of
box-to-arm selection probabilities and a length-K vector of arm mean
rewards.  Selecting a box draws an arm from the box's row of q and
then a reward from the arm's reward distribution.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

ROW_SUM_TOL = 1e-12


class InstanceError(ValueError):
    """Base class for instance validation failures."""


class RowNotStochastic(InstanceError):
    def __init__(self, box):
        self.box = box
        super().__init__(f"row {box} of q is not a probability vector")


class TiedBestArm(InstanceError):
    def __init__(self, arms):
        self.arms = arms
        super().__init__(f"best arm is not unique: arms {arms} tie for the maximum mean")


class PartitionViolation(InstanceError):
    def __init__(self, detail):
        super().__init__(f"arm_sets do not form a valid partition: {detail}")


class RewardModel(enum.Enum):
    GAUSSIAN_UNIT_VARIANCE = "gaussian"
    BERNOULLI_LIKE = "bernoulli"


@dataclass(frozen=True)
class ProblemInstance:
    """A validated boxed-bandit instance.

    Parameters
    ----------
    q : (M, K) array
        q[m, k] is the probability that selecting box m pulls arm k.
        Rows must sum to 1 within 1e-12; no renormalization is applied.
    mu : (K,) array
        Arm mean rewards.  The argmax must be unique.
    reward_model : RewardModel
        Gaussian unit variance, or Bernoulli (means in [0, 1]).
    arm_sets : list of lists of int, optional
        Partition metadata: arm_sets[m] lists the arms reachable from
        box m.  Required by the elimination algorithm.  When present,
        the sets must be disjoint, cover all arms, and agree with the
        support of q.
    """

    q: np.ndarray
    mu: np.ndarray
    reward_model: RewardModel = RewardModel.GAUSSIAN_UNIT_VARIANCE
    arm_sets: tuple | None = None
    _q_cumsum: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float)
        mu = np.asarray(self.mu, dtype=float)
        if q.ndim != 2 or mu.ndim != 1 or q.shape[1] != mu.shape[0]:
            raise InstanceError(
                f"shape mismatch: q is {q.shape}, mu has length {mu.shape}"
            )
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "mu", mu)
        if self.arm_sets is not None:
            object.__setattr__(
                self, "arm_sets", tuple(tuple(int(a) for a in s) for s in self.arm_sets)
            )
        _check_instance(self)
        # Inverse-CDF tables, one per row; built once so a draw is a searchsorted.
        object.__setattr__(self, "_q_cumsum", np.cumsum(q, axis=1))

    @property
    def num_boxes(self) -> int:
        return self.q.shape[0]

    @property
    def num_arms(self) -> int:
        return self.q.shape[1]

    @property
    def best_arm(self) -> int:
        return int(np.argmax(self.mu))


@dataclass(frozen=True)
class Gaps:
    """Sub-optimality gaps relative to the unique best arm.

    ``delta[k]`` is mu_best - mu[k] for suboptimal arms; the entry for
    the best arm itself is the minimum gap over all other arms.
    """

    delta: np.ndarray
    delta_best: float


def _check_instance(instance: ProblemInstance):
    q, mu = instance.q, instance.mu
    M, K = q.shape
    if np.any(q < 0.0) or np.any(q > 1.0):
        bad = int(np.argwhere((q < 0.0) | (q > 1.0))[0][0])
        raise RowNotStochastic(bad)
    row_sums = q.sum(axis=1)
    bad_rows = np.nonzero(np.abs(row_sums - 1.0) > ROW_SUM_TOL)[0]
    if bad_rows.size:
        raise RowNotStochastic(int(bad_rows[0]))

    best = np.max(mu)
    ties = np.nonzero(mu == best)[0]
    if ties.size > 1:
        raise TiedBestArm(ties.tolist())

    if instance.reward_model is RewardModel.BERNOULLI_LIKE:
        if np.any(mu < 0.0) or np.any(mu > 1.0):
            raise InstanceError("Bernoulli means must lie in [0, 1]")

    if instance.arm_sets is not None:
        sets = instance.arm_sets
        if len(sets) != M:
            raise PartitionViolation(f"{len(sets)} sets for {M} boxes")
        seen = set()
        for m, s in enumerate(sets):
            for a in s:
                if a < 0 or a >= K:
                    raise PartitionViolation(f"arm {a} out of range in set {m}")
                if a in seen:
                    raise PartitionViolation(f"arm {a} appears in more than one set")
                seen.add(a)
        if len(seen) != K:
            missing = sorted(set(range(K)) - seen)
            raise PartitionViolation(f"arms {missing} not covered")
        for m in range(M):
            in_set = np.zeros(K, dtype=bool)
            in_set[list(sets[m])] = True
            if np.any((q[m] > 0) != in_set):
                raise PartitionViolation(f"support of q row {m} disagrees with set {m}")


def validate(instance: ProblemInstance) -> ProblemInstance:
    """Re-check all instance invariants; returns the instance unchanged.

    Construction already validates, so this is useful mainly after
    deserialization or for defensive call sites.
    """
    _check_instance(instance)
    return instance


def gaps(instance: ProblemInstance) -> Gaps:
    """Per-arm sub-optimality gaps; the best arm gets the minimum gap."""
    mu = instance.mu
    best = instance.best_arm
    delta = mu[best] - mu
    others = np.delete(delta, best)
    delta = delta.copy()
    delta[best] = others.min()
    return Gaps(delta=delta, delta_best=float(others.min()))


def sample_box(instance, box, rng_arm, rng_reward, size=None):
    """Simulate selecting a box: draw an arm, then a reward.

    Parameters
    ----------
    box : int
        Box index in [0, M).
    rng_arm, rng_reward : numpy.random.Generator
        Separate streams for the arm draw and the reward draw, so
        reward-model changes do not perturb the arm sequence.
    size : int, optional
        When given, draw that many (arm, reward) pairs vectorized.

    Returns
    -------
    (arm, reward) for scalar draws, or (arms, rewards) arrays.
    """
    cdf = instance._q_cumsum[box]
    if size is None:
        arm = int(np.searchsorted(cdf, rng_arm.random(), side="right"))
        arm = min(arm, instance.num_arms - 1)  # guard cdf[-1] rounding below 1
        return arm, _draw_reward(instance, instance.mu[arm], rng_reward)
    arms = np.searchsorted(cdf, rng_arm.random(size), side="right")
    np.minimum(arms, instance.num_arms - 1, out=arms)
    rewards = _draw_reward(instance, instance.mu[arms], rng_reward)
    return arms, rewards


def _draw_reward(instance, mean, rng):
    if instance.reward_model is RewardModel.GAUSSIAN_UNIT_VARIANCE:
        if np.ndim(mean) == 0:
            return rng.standard_normal() + mean
        return rng.standard_normal(len(mean)) + mean
    # Bernoulli with the arm's mean.
    if np.ndim(mean) == 0:
        return 1.0 if rng.random() < mean else 0.0
    return (rng.random(len(mean)) < mean).astype(float)
