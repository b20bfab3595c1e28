import numpy as np
import pytest

from boxbandit.instance import ProblemInstance, RewardModel


@pytest.fixture
def paper_instance():
    """2-box / 4-arm instance whose optimal allocation set is the whole simplex."""
    return ProblemInstance(
        q=np.array([[0.3, 0.3, 0.3, 0.1], [0.3, 0.3, 0.1, 0.3]]),
        mu=np.array([0.5, 0.4, 0.3, 0.3]),
    )


@pytest.fixture
def two_arm_identity():
    return ProblemInstance(q=np.eye(2), mu=np.array([1.0, 0.0]))


@pytest.fixture
def mts_instance():
    """3-arm / 2-box Gaussian instance used for the track-and-stop experiments."""
    return ProblemInstance(
        q=np.array([[0.6, 0.3, 0.1], [0.1, 0.3, 0.6]]),
        mu=np.array([1.0, 0.5, 0.25]),
    )


@pytest.fixture
def partition_instance():
    """2-box partition instance for successive elimination."""
    return ProblemInstance(
        q=np.array([[0.5, 0.5, 0.0, 0.0], [0.0, 0.0, 0.5, 0.5]]),
        mu=np.array([1.0, 0.3, 0.5, 0.0]),
        reward_model=RewardModel.BERNOULLI_LIKE,
        arm_sets=[[0, 1], [2, 3]],
    )


def random_instance(rng, num_boxes, num_arms, min_gap=0.01):
    """Random full-support instance with a clearly unique best arm."""
    q = rng.dirichlet(np.ones(num_arms), size=num_boxes)
    while True:
        mu = rng.normal(0.0, 1.0, num_arms)
        order = np.sort(mu)
        if order[-1] - order[-2] >= min_gap:
            return ProblemInstance(q=q, mu=mu)
