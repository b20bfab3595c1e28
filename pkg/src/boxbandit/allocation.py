"""Characteristic-time optimization over the box simplex.

The central object is the concave function

    psi(q, mu, w) = min_{k != a*} g(wA_k, wA_a*) * (mu_k - mu_a*)^2 / 2,

where wA = w @ q are the induced arm-sampling frequencies and
g(x, y) = x*y/(x+y).  Its supremum over the simplex is the
characteristic value T*; the (convex, possibly non-singleton) set of
maximizers is the target of the tracking rule.

Raw-array helpers (suffix ``_qmu``) skip instance validation so the
run loop can feed in estimated parameters, which may be degenerate.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

# x*y/(x+y) is treated as 0 when x+y underflows; avoids 0/0 at the boundary.
_G_FLOOR = 1e-300


class DimensionMismatch(ValueError):
    pass


class NonConvergence(RuntimeError):
    def __init__(self, iterations, residual):
        self.iterations = iterations
        self.residual = residual
        super().__init__(
            f"simplex maximization stalled after {iterations} iterations "
            f"(residual {residual:.3e})"
        )


@dataclass(frozen=True)
class SolverResult:
    """Output of :func:`solve`: the characteristic value and one maximizer.

    ``certificate_gap`` is |psi(w_star) - best grid psi| on a
    verification grid for M <= 3, or the final polish residual for
    larger M.
    """

    t_star: float
    w_star: np.ndarray
    certificate_gap: float


# ---------------------------------------------------------------------------
# psi and its supergradient


def arm_weights(q, w):
    """Induced arm-sampling frequencies wA_a = sum_m w_m q_{m,a}."""
    return np.asarray(w, dtype=float) @ np.asarray(q, dtype=float)


def effective_arm_weights(instance, w):
    return arm_weights(instance.q, w)


def psi_qmu(q, mu, w, best=None):
    """Evaluate psi for raw parameters; tied means simply give psi = 0."""
    mu = np.asarray(mu, dtype=float)
    if best is None:
        best = int(np.argmax(mu))
    wa = arm_weights(q, w)
    return float(np.min(_pair_terms(wa, mu, best)))


def psi_many(q, mu, W, best=None):
    """Vectorized psi over the rows of W (n, M) -> (n,)."""
    mu = np.asarray(mu, dtype=float)
    if best is None:
        best = int(np.argmax(mu))
    WA = np.asarray(W, dtype=float) @ np.asarray(q, dtype=float)
    x = np.delete(WA, best, axis=1)
    y = WA[:, best][:, None]
    s = x + y
    g = np.where(s > _G_FLOOR, x * y / np.where(s > _G_FLOOR, s, 1.0), 0.0)
    gapsq = (np.delete(mu, best) - mu[best]) ** 2 / 2.0
    return np.min(g * gapsq, axis=1)


def _pair_terms(wa, mu, best):
    x = np.delete(wa, best)
    y = wa[best]
    s = x + y
    g = np.where(s > _G_FLOOR, x * y / np.where(s > _G_FLOOR, s, 1.0), 0.0)
    gapsq = (np.delete(mu, best) - mu[best]) ** 2 / 2.0
    return g * gapsq


def psi(instance, w):
    """psi of a validated instance at allocation w."""
    return psi_qmu(instance.q, instance.mu, w, best=instance.best_arm)


def _supergradient(q, mu, w, best):
    """A supergradient of psi at w: the gradient of the active min term."""
    wa = arm_weights(q, w)
    terms = _pair_terms(wa, mu, best)
    k_off = int(np.argmin(terms))  # index among arms != best
    others = [a for a in range(len(mu)) if a != best]
    k = others[k_off]
    x, y = wa[k], wa[best]
    s = x + y
    if s <= _G_FLOOR:
        # Degenerate corner: push uniformly toward positive mass.
        return np.full(len(w), 1.0 / len(w))
    gapsq = (mu[k] - mu[best]) ** 2 / 2.0
    dgdx = (y / s) ** 2
    dgdy = (x / s) ** 2
    return gapsq * (dgdx * q[:, k] + dgdy * q[:, best])


# ---------------------------------------------------------------------------
# simplex utilities


def project_simplex(v):
    """Euclidean projection onto the probability simplex."""
    v = np.asarray(v, dtype=float)
    n = v.size
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    rho = np.nonzero(u * np.arange(1, n + 1) > css)[0][-1]
    theta = css[rho] / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


def simplex_grid(m, step):
    """All points of the M-simplex with coordinates that are multiples of step."""
    n = int(round(1.0 / step))
    pts = []
    for comp in itertools.combinations(range(n + m - 1), m - 1):
        prev = -1
        row = []
        for c in comp:
            row.append(c - prev - 1)
            prev = c
        row.append(n + m - 2 - prev)
        pts.append(row)
    return np.asarray(pts, dtype=float) / n


def dinf_point(u, v):
    """Max-coordinate absolute difference between two vectors."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise DimensionMismatch(f"{u.shape} vs {v.shape}")
    return float(np.max(np.abs(u - v)))


# ---------------------------------------------------------------------------
# solver


def solve(instance, tol=1e-8):
    """Maximize psi over the simplex; returns T* and one maximizer.

    Deterministic for fixed inputs: a fixed multi-start ascent schedule
    followed by an SLSQP polish, with a verification grid for M <= 3.

    Raises
    ------
    NonConvergence
        If the verification grid (M <= 3) beats the returned value by
        more than 10x tol.
    """
    t_star, w_star = solve_qmu(instance.q, instance.mu, tol=tol)
    m = instance.num_boxes
    if m <= 3:
        grid = simplex_grid(m, 1.0 / 200)
        grid_best = float(np.max(psi_many(instance.q, instance.mu, grid)))
        gap = abs(t_star - grid_best)
        if grid_best - t_star > 10 * tol:
            raise NonConvergence(iterations=0, residual=grid_best - t_star)
    else:
        gap = _polish_residual(instance.q, instance.mu, w_star, t_star)
    return SolverResult(t_star=t_star, w_star=w_star, certificate_gap=gap)


def solve_qmu(q, mu, tol=1e-8):
    """Raw-array solve: (t_star, w_star).  Tied best means give (0, uniform)."""
    q = np.asarray(q, dtype=float)
    mu = np.asarray(mu, dtype=float)
    m = q.shape[0]
    top = np.max(mu)
    if np.count_nonzero(mu == top) > 1:
        # psi vanishes identically; any allocation is optimal.
        return 0.0, np.full(m, 1.0 / m)
    best = int(np.argmax(mu))
    if m == 1:
        w = np.ones(1)
        return psi_qmu(q, mu, w, best), w
    if m == 2:
        return _solve_two_boxes(q, mu, best)
    return _solve_general(q, mu, best, tol)


def _solve_two_boxes(q, mu, best):
    """1-D concave maximization by iterated grid refinement (fast path)."""
    lo, hi = 0.0, 1.0
    for _ in range(12):
        xs = np.linspace(lo, hi, 65)
        W = np.column_stack([xs, 1.0 - xs])
        vals = psi_many(q, mu, W, best)
        i = int(np.argmax(vals))
        h = xs[1] - xs[0]
        lo = max(0.0, xs[i] - h)
        hi = min(1.0, xs[i] + h)
        if h < 1e-14:
            break
    x = 0.5 * (lo + hi)
    w = np.array([x, 1.0 - x])
    return psi_qmu(q, mu, w, best), w


def _solve_general(q, mu, best, tol):
    m = q.shape[0]
    starts = [np.full(m, 1.0 / m)] + [np.eye(m)[i] for i in range(m)]
    best_w = starts[0]
    best_val = psi_qmu(q, mu, best_w, best)
    iterates = []
    for w0 in starts:
        w = w0.copy()
        for it in range(1, 301):
            g = _supergradient(q, mu, w, best)
            norm = np.max(np.abs(g))
            if norm <= 0:
                break
            w = project_simplex(w + (0.3 / np.sqrt(it)) * g / norm)
            val = psi_qmu(q, mu, w, best)
            if val > best_val:
                best_val, best_w = val, w.copy()
        iterates.append((psi_qmu(q, mu, w, best), w.copy()))
    iterates.sort(key=lambda p: -p[0])
    for _, w0 in [(best_val, best_w)] + iterates[:2]:
        val, w = _slsqp_polish(q, mu, best, w0)
        if val > best_val:
            best_val, best_w = val, w
    return best_val, best_w


def _slsqp_polish(q, mu, best, w0):
    """Epigraph reformulation: maximize s subject to each pair term >= s."""
    m = q.shape[0]
    others = [a for a in range(len(mu)) if a != best]
    gapsq = (mu[others] - mu[best]) ** 2 / 2.0

    def term(z, j):
        wa = arm_weights(q, z[:m])
        x, y = wa[others[j]], wa[best]
        s = x + y
        g = x * y / s if s > _G_FLOOR else 0.0
        return g * gapsq[j] - z[m]

    def term_jac(z, j):
        wa = arm_weights(q, z[:m])
        x, y = wa[others[j]], wa[best]
        s = x + y
        jac = np.zeros(m + 1)
        if s > _G_FLOOR:
            jac[:m] = gapsq[j] * (
                (y / s) ** 2 * q[:, others[j]] + (x / s) ** 2 * q[:, best]
            )
        jac[m] = -1.0
        return jac

    cons = [
        {"type": "ineq", "fun": term, "jac": term_jac, "args": (j,)}
        for j in range(len(others))
    ]
    cons.append(
        {
            "type": "eq",
            "fun": lambda z: np.sum(z[:m]) - 1.0,
            "jac": lambda z: np.concatenate([np.ones(m), [0.0]]),
        }
    )
    z0 = np.concatenate([w0, [psi_qmu(q, mu, w0, best)]])
    res = minimize(
        lambda z: -z[m],
        z0,
        jac=lambda z: np.concatenate([np.zeros(m), [-1.0]]),
        method="SLSQP",
        bounds=[(0.0, 1.0)] * m + [(None, None)],
        constraints=cons,
        options={"maxiter": 300, "ftol": 1e-14},
    )
    w = project_simplex(res.x[:m])
    return psi_qmu(q, mu, w, best), w


def _polish_residual(q, mu, w_star, t_star):
    best = int(np.argmax(mu))
    val, _ = _slsqp_polish(q, mu, best, w_star)
    return abs(val - t_star)


# ---------------------------------------------------------------------------
# maximizer-set diagnostics


def wstar_membership(instance, w, result, eps):
    """True iff psi(w) >= t_star - eps, i.e. w is an eps-optimal allocation."""
    return psi(instance, w) >= result.t_star - eps


def dinf_to_set(u, instance, eps, result=None, resolution=1.0 / 200):
    """Max-norm distance from u to the eps-optimal allocation set.

    The set is sampled on a simplex grid at the given resolution
    (M <= 3 only) with the solver's maximizer always included, so the
    sample is never empty.
    """
    u = np.asarray(u, dtype=float)
    m = instance.num_boxes
    if u.shape != (m,):
        raise DimensionMismatch(f"point has shape {u.shape}, simplex dimension {m}")
    if m > 3:
        raise ValueError("set-distance grid is limited to M <= 3")
    if result is None:
        result = solve(instance)
    grid = simplex_grid(m, resolution)
    vals = psi_many(instance.q, instance.mu, grid)
    members = grid[vals >= result.t_star - eps]
    members = np.vstack([members, result.w_star]) if members.size else result.w_star[None]
    return float(np.min(np.max(np.abs(members - u), axis=1)))


# ---------------------------------------------------------------------------
# independent grid oracle


def grid_characteristic_time(q, mu, step=None):
    """Brute-force T* by simplex grid search plus pairwise-transfer refinement.

    Kept free of the ascent/SLSQP machinery so it can serve as an
    independent cross-check of :func:`solve`.
    """
    q = np.asarray(q, dtype=float)
    mu = np.asarray(mu, dtype=float)
    m = q.shape[0]
    best = int(np.argmax(mu))
    if step is None:
        step = 1e-3 if m <= 3 else 0.02
    if m == 1:
        w = np.ones(1)
        return psi_qmu(q, mu, w, best), w
    grid = simplex_grid(m, step)
    vals = psi_many(q, mu, grid, best)
    w = grid[int(np.argmax(vals))].copy()
    # Local refinement: derivative-free Nelder-Mead from the grid argmax,
    # on an unnormalized parametrization so the simplex constraint is
    # implicit.  Robust at kinks of the min, where coordinate moves and
    # gradient steps both stall.
    def neg_psi(z):
        z = np.abs(z)
        s = z.sum()
        if s <= 0.0:
            return 0.0
        return -psi_qmu(q, mu, z / s, best)

    res = minimize(
        neg_psi,
        w,
        method="Nelder-Mead",
        options={"xatol": 1e-13, "fatol": 1e-15, "maxiter": 20000, "maxfev": 20000},
    )
    z = np.abs(res.x)
    w = z / z.sum()
    return psi_qmu(q, mu, w, best), w


def classical_characteristic_time(mu):
    """T* of the classical (one box per arm) Gaussian problem, by grid oracle."""
    mu = np.asarray(mu, dtype=float)
    val, _ = grid_characteristic_time(np.eye(len(mu)), mu)
    return val
