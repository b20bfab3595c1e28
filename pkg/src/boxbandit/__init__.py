"""Best arm identification when arms can only be sampled through boxes.

Selecting a box pulls a random arm according to an unknown
box-specific distribution.  The package provides the characteristic
time solver over box allocations, a track-and-stop algorithm that is
robust to non-unique optimal allocations, a successive-elimination
algorithm for the partitioned setting with non-asymptotic bound
calculators, and a reproducible Monte Carlo experiment harness.
"""

from .allocation import (
    NonConvergence,
    SolverResult,
    classical_characteristic_time,
    dinf_point,
    dinf_to_set,
    effective_arm_weights,
    psi,
    solve,
    wstar_membership,
)
from .bbmts import CapExceeded, RunOutcome, TrackerState, next_box, tracking_distance
from .bbsea import TheoryBounds, alpha_delta, order_check, partition_lower_bound
from .instance import (
    Gaps,
    InstanceError,
    PartitionViolation,
    ProblemInstance,
    RewardModel,
    RowNotStochastic,
    TiedBestArm,
    gaps,
    sample_box,
    validate,
)
from .stats import TallyState, Threshold, compute_c, make_threshold, z_ab, z_global, zeta

__all__ = [
    "CapExceeded",
    "Gaps",
    "InstanceError",
    "NonConvergence",
    "PartitionViolation",
    "ProblemInstance",
    "RewardModel",
    "RowNotStochastic",
    "RunOutcome",
    "SolverResult",
    "TallyState",
    "TheoryBounds",
    "Threshold",
    "TiedBestArm",
    "TrackerState",
    "alpha_delta",
    "classical_characteristic_time",
    "compute_c",
    "dinf_point",
    "dinf_to_set",
    "effective_arm_weights",
    "gaps",
    "make_threshold",
    "next_box",
    "order_check",
    "partition_lower_bound",
    "psi",
    "sample_box",
    "solve",
    "tracking_distance",
    "validate",
    "wstar_membership",
    "z_ab",
    "z_global",
    "zeta",
]

__version__ = "0.1.0"
