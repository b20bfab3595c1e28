"""Demo: an instance whose optimal box allocation is the entire simplex.

With boxes q = [[0.3, 0.3, 0.3, 0.1], [0.3, 0.3, 0.1, 0.3]] and means
mu = (0.5, 0.4, 0.3, 0.3), the binding comparison is always between
arms 0 and 1, which both boxes reach with probability 0.3 regardless
of how selection effort is split.  The characteristic-time objective
psi is therefore constant on the whole simplex and every allocation is
optimal -- the degenerate case that motivates tracking the cumulative
sum of (arbitrary) optimizers rather than any single one.
"""

import numpy as np

from boxbandit import allocation
from boxbandit.instance import ProblemInstance


def main():
    p = ProblemInstance(
        q=np.array([[0.3, 0.3, 0.3, 0.1], [0.3, 0.3, 0.1, 0.3]]),
        mu=np.array([0.5, 0.4, 0.3, 0.3]),
    )

    print("psi along the simplex (w1, 1 - w1):")
    for w1 in (0.0, 0.25, 0.5, 0.75, 1.0):
        print(f"  w = ({w1:.2f}, {1 - w1:.2f})  psi = {allocation.psi(p, [w1, 1 - w1]):.6e}")

    res = allocation.solve(p)
    print(f"\nsolver t_star = {res.t_star:.6e}  (characteristic time {1 / res.t_star:.1f})")
    print("returned maximizer:", np.round(res.w_star, 4))

    print("\nmembership of arbitrary points in the optimal set:")
    for w in ([0.123, 0.877], [1.0, 0.0], [0.5, 0.5]):
        member = allocation.wstar_membership(p, w, res, eps=1e-9)
        print(f"  {w} -> {'in W*' if member else 'not in W*'}")

    # Contrast: a generic instance has a unique optimizer.
    generic = ProblemInstance(
        q=np.array([[0.6, 0.3, 0.1], [0.1, 0.3, 0.6]]),
        mu=np.array([1.0, 0.5, 0.25]),
    )
    res_g = allocation.solve(generic)
    print(
        f"\ngeneric 3-arm instance: t_star = {res_g.t_star:.6f}, "
        f"unique w_star = {np.round(res_g.w_star, 4)}"
    )
    d = allocation.dinf_to_set([0.5, 0.5], generic, 1e-9, result=res_g)
    print(f"distance of the uniform allocation to its W*: {d:.4f}")


if __name__ == "__main__":
    main()
