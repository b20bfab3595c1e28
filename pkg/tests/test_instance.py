import math

import numpy as np
import pytest

from boxbandit.instance import (
    PartitionViolation,
    ProblemInstance,
    RewardModel,
    RowNotStochastic,
    TiedBestArm,
    gaps,
    sample_box,
    validate,
)


def test_paper_instance_valid(paper_instance):
    assert validate(paper_instance) is paper_instance
    assert paper_instance.num_boxes == 2
    assert paper_instance.num_arms == 4
    assert paper_instance.best_arm == 0


def test_degenerate_single_box_single_arm():
    p = ProblemInstance(q=np.array([[1.0]]), mu=np.array([0.0]))
    assert p.num_boxes == p.num_arms == 1


def test_tied_best_arm_rejected():
    with pytest.raises(TiedBestArm):
        ProblemInstance(q=np.array([[0.5, 0.5]]), mu=np.array([0.5, 0.5]))


def test_row_not_stochastic_rejected():
    with pytest.raises(RowNotStochastic) as exc:
        ProblemInstance(q=np.array([[0.6, 0.3]]), mu=np.array([1.0, 0.0]))
    assert exc.value.box == 0
    with pytest.raises(RowNotStochastic):
        ProblemInstance(q=np.array([[1.2, -0.2]]), mu=np.array([1.0, 0.0]))
    # No silent renormalization: off by more than 1e-12 fails.
    with pytest.raises(RowNotStochastic):
        ProblemInstance(q=np.array([[0.5, 0.5 + 1e-9]]), mu=np.array([1.0, 0.0]))


def test_partition_violations():
    q = np.array([[0.5, 0.5, 0.0], [0.0, 0.0, 1.0]])
    mu = np.array([1.0, 0.0, 0.5])
    # Valid partition.
    ProblemInstance(q=q, mu=mu, arm_sets=[[0, 1], [2]])
    with pytest.raises(PartitionViolation):  # arm in two sets
        ProblemInstance(q=q, mu=mu, arm_sets=[[0, 1], [1, 2]])
    with pytest.raises(PartitionViolation):  # arm not covered
        ProblemInstance(q=q, mu=mu, arm_sets=[[0], [2]])
    with pytest.raises(PartitionViolation):  # support mismatch
        ProblemInstance(q=q, mu=mu, arm_sets=[[0, 1, 2], []])


def test_bernoulli_means_must_be_probabilities():
    with pytest.raises(ValueError):
        ProblemInstance(
            q=np.array([[0.5, 0.5]]),
            mu=np.array([1.5, 0.0]),
            reward_model=RewardModel.BERNOULLI_LIKE,
        )


def test_gaps_paper_means(paper_instance):
    g = gaps(paper_instance)
    assert np.allclose(g.delta, [0.1, 0.1, 0.2, 0.2])
    assert g.delta_best == pytest.approx(0.1)


def test_gaps_two_and_three_arms():
    p = ProblemInstance(q=np.eye(2), mu=np.array([1.0, 0.0]))
    assert np.allclose(gaps(p).delta, [1.0, 1.0])
    p3 = ProblemInstance(q=np.eye(3), mu=np.array([1.0, 0.5, 0.25]))
    assert np.allclose(gaps(p3).delta, [0.5, 0.5, 0.75])


def _streams(seed):
    a, r = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(a), np.random.default_rng(r)


def test_degenerate_row_always_same_arm():
    p = ProblemInstance(q=np.array([[1.0, 0.0, 0.0]]), mu=np.array([1.0, 0.0, 0.5]))
    rng_a, rng_r = _streams(0)
    arms, _ = sample_box(p, 0, rng_a, rng_r, size=1000)
    assert np.all(arms == 0)


def test_arm_frequencies_match_row(paper_instance):
    rng_a, rng_r = _streams(1)
    arms, _ = sample_box(paper_instance, 0, rng_a, rng_r, size=10**6)
    freq = np.bincount(arms, minlength=4) / 10**6
    assert np.max(np.abs(freq - paper_instance.q[0])) < 0.005


def test_arm_frequencies_hoeffding():
    # 3x the Hoeffding radius at confidence 0.01 should hold comfortably.
    p = ProblemInstance(
        q=np.array([[0.2, 0.5, 0.2, 0.1]]), mu=np.array([0.0, 1.0, 2.0, 3.0])
    )
    n, k = 10**5, 4
    bound = 3.0 * math.sqrt(math.log(2 * k / 0.01) / (2 * n))
    rng_a, rng_r = _streams(2)
    arms, _ = sample_box(p, 0, rng_a, rng_r, size=n)
    freq = np.bincount(arms, minlength=k) / n
    assert np.max(np.abs(freq - p.q[0])) <= bound


def test_reward_sample_mean():
    p = ProblemInstance(q=np.array([[1.0, 0.0]]), mu=np.array([0.5, 0.0]))
    rng_a, rng_r = _streams(3)
    _, rewards = sample_box(p, 0, rng_a, rng_r, size=10**6)
    assert abs(rewards.mean() - 0.5) < 0.005


def test_conditional_reward_means_per_arm(paper_instance):
    rng_a, rng_r = _streams(4)
    arms, rewards = sample_box(paper_instance, 1, rng_a, rng_r, size=200_000)
    for k in range(4):
        sel = arms == k
        assert abs(rewards[sel].mean() - paper_instance.mu[k]) < 0.02


def test_bernoulli_rewards_are_binary():
    p = ProblemInstance(
        q=np.array([[0.5, 0.5]]),
        mu=np.array([0.7, 0.2]),
        reward_model=RewardModel.BERNOULLI_LIKE,
    )
    rng_a, rng_r = _streams(5)
    arms, rewards = sample_box(p, 0, rng_a, rng_r, size=50_000)
    assert set(np.unique(rewards)) <= {0.0, 1.0}
    assert abs(rewards[arms == 0].mean() - 0.7) < 0.02


def test_same_seed_identical_trajectory(paper_instance):
    for _ in range(2):
        runs = []
        for _rep in range(2):
            rng_a, rng_r = _streams(99)
            runs.append(sample_box(paper_instance, 0, rng_a, rng_r, size=1000))
        assert np.array_equal(runs[0][0], runs[1][0])
        assert np.array_equal(runs[0][1], runs[1][1])


def test_scalar_and_vector_draws_agree(paper_instance):
    rng_a, rng_r = _streams(7)
    scalar = [sample_box(paper_instance, 0, rng_a, rng_r) for _ in range(50)]
    rng_a, rng_r = _streams(7)
    arms, rewards = sample_box(paper_instance, 0, rng_a, rng_r, size=50)
    assert [a for a, _ in scalar] == list(arms)
    assert np.allclose([r for _, r in scalar], rewards)
