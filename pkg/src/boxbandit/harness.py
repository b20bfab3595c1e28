"""Experiment harness: config files, seeded Monte Carlo sweeps, CSV output.

Config files are line oriented ``key = value`` with Python-style list
literals for the matrix and vector fields; values may continue across
lines until brackets balance.  Trial i of every delta uses seed
base_seed + i, so outputs are reproducible byte for byte and identical
under any worker count (results are folded in seed order).
"""

from __future__ import annotations

import ast
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import allocation, bbmts, bbsea
from .bbmts import CapExceeded
from .instance import InstanceError, ProblemInstance, RewardModel

TRIAL_COLUMNS = "seed,delta,tau,declared,correct,final_tracking_distance,capped"
SUMMARY_COLUMNS = (
    "delta,trials,error_rate,mean_tau,stddev_tau,slope,t_star_or_bounds,"
    "tracking_distance"
)


class ParseError(ValueError):
    def __init__(self, line, detail):
        self.line = line
        super().__init__(f"line {line}: {detail}")


class ValidationError(ValueError):
    def __init__(self, fieldname, detail=""):
        self.field = fieldname
        super().__init__(f"invalid config field {fieldname!r}" + (f": {detail}" if detail else ""))


@dataclass
class ExperimentConfig:
    instance: ProblemInstance
    algorithm: str
    delta_grid: list
    trials: int
    base_seed: int
    rho: float | None = None
    threshold_mode: str = "paper"
    strict_resolve: bool = True
    max_steps: int | None = None
    trace_every: int = 0
    output_path: str | None = None


@dataclass
class AggregateRow:
    delta: float
    trials: int
    error_rate: float
    mean_tau: float
    stddev_tau: float
    slope: float
    t_star_or_bounds: float
    tracking_distance: float
    capped: int = field(default=0)


_REWARD_MODELS = {
    "gaussian": RewardModel.GAUSSIAN_UNIT_VARIANCE,
    "bernoulli": RewardModel.BERNOULLI_LIKE,
}


def _parse_kv_lines(text):
    """Yield (lineno, key, raw_value); list values may span lines."""
    items = []
    pending_key = None
    pending_val = ""
    pending_line = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if pending_key is not None:
            pending_val += " " + line.strip()
            if pending_val.count("[") == pending_val.count("]"):
                items.append((pending_line, pending_key, pending_val.strip()))
                pending_key = None
            continue
        if not line.strip():
            continue
        if "=" not in line:
            raise ParseError(lineno, f"expected 'key = value', got {line.strip()!r}")
        key, val = line.split("=", 1)
        key = key.strip()
        val = val.strip()
        if val.count("[") != val.count("]"):
            pending_key, pending_val, pending_line = key, val, lineno
            continue
        items.append((lineno, key, val))
    if pending_key is not None:
        raise ParseError(pending_line, f"unterminated list for key {pending_key!r}")
    return items


def load_config(path) -> ExperimentConfig:
    """Parse and validate an experiment config file."""
    with open(path) as fh:
        text = fh.read()
    raw = {}
    for lineno, key, val in _parse_kv_lines(text):
        if key in raw:
            raise ParseError(lineno, f"duplicate key {key!r}")
        raw[key] = (lineno, val)

    def take(key, default=None, required=False):
        if key in raw:
            return raw.pop(key)[1]
        if required:
            raise ValidationError(key, "missing")
        return default

    algorithm = take("algorithm", required=True)
    if algorithm not in ("bbmts", "bbsea"):
        raise ValidationError("algorithm", f"unknown algorithm {algorithm!r}")

    try:
        q = np.asarray(ast.literal_eval(take("q", required=True)), dtype=float)
        mu = np.asarray(ast.literal_eval(take("mu", required=True)), dtype=float)
    except (ValueError, SyntaxError) as exc:
        raise ValidationError("q/mu", str(exc)) from exc
    reward_model = take("reward_model", default="gaussian")
    if reward_model not in _REWARD_MODELS:
        raise ValidationError("reward_model", f"unknown model {reward_model!r}")
    arm_sets_raw = take("arm_sets")
    arm_sets = ast.literal_eval(arm_sets_raw) if arm_sets_raw is not None else None
    try:
        problem = ProblemInstance(
            q=q, mu=mu, reward_model=_REWARD_MODELS[reward_model], arm_sets=arm_sets
        )
    except InstanceError as exc:
        raise ValidationError("instance", str(exc)) from exc

    try:
        delta_grid = [float(x) for x in ast.literal_eval(take("delta_grid", required=True))]
    except (ValueError, SyntaxError, TypeError) as exc:
        raise ValidationError("delta_grid", str(exc)) from exc
    if not delta_grid or any(not (0.0 < d < 1.0) for d in delta_grid):
        raise ValidationError("delta_grid", "deltas must lie in (0, 1)")
    if any(a <= b for a, b in zip(delta_grid, delta_grid[1:])):
        raise ValidationError("delta_grid", "grid must be sorted descending")

    trials = int(take("trials", required=True))
    if trials < 1:
        raise ValidationError("trials", "need at least one trial")
    base_seed = int(take("base_seed", default="0"))

    rho = take("rho")
    if algorithm == "bbmts":
        if rho is None:
            raise ValidationError("rho", "required for bbmts")
        rho = float(rho)
        if rho <= 0:
            raise ValidationError("rho", "must be positive")
    elif rho is not None:
        rho = float(rho)

    threshold_mode = take("threshold_mode", default="paper")
    if threshold_mode not in ("paper", "practical"):
        raise ValidationError("threshold_mode", threshold_mode)
    strict_raw = take("strict_resolve", default="true").lower()
    if strict_raw not in ("true", "false"):
        raise ValidationError("strict_resolve", strict_raw)
    max_steps_raw = take("max_steps")
    trace_every = int(take("trace_every", default="0"))
    output_path = take("output_path")
    if raw:
        key = next(iter(raw))
        raise ValidationError(key, "unknown key")

    return ExperimentConfig(
        instance=problem,
        algorithm=algorithm,
        delta_grid=delta_grid,
        trials=trials,
        base_seed=base_seed,
        rho=rho,
        threshold_mode=threshold_mode,
        strict_resolve=strict_raw == "true",
        max_steps=int(max_steps_raw) if max_steps_raw is not None else None,
        trace_every=trace_every,
        output_path=output_path,
    )


# ---------------------------------------------------------------------------
# execution


def _run_trial(args):
    (problem, algorithm, delta, rho, seed, threshold_mode, strict, max_steps,
     members) = args
    capped = 0
    try:
        if algorithm == "bbmts":
            outcome = bbmts.run(
                problem,
                delta,
                rho,
                seed,
                threshold_mode=threshold_mode,
                strict_resolve=strict,
                max_steps=max_steps,
            )
        else:
            outcome = bbsea.run(problem, delta, seed, max_steps=max_steps)
    except CapExceeded:
        return {
            "seed": seed,
            "delta": delta,
            "tau": max_steps,
            "declared": -1,
            "correct": 0,
            "final_tracking_distance": float("nan"),
            "capped": 1,
        }
    dist = float("nan")
    if members is not None and outcome.box_freq is not None:
        dist = float(np.min(np.max(np.abs(members - outcome.box_freq), axis=1)))
    return {
        "seed": seed,
        "delta": delta,
        "tau": outcome.tau,
        "declared": outcome.declared_arm,
        "correct": int(outcome.correct),
        "final_tracking_distance": dist,
        "capped": capped,
    }


def wstar_representatives(problem, result=None, eps=1e-9, resolution=1.0 / 200):
    """Grid sample of the optimal-allocation set, solver point included."""
    if result is None:
        result = allocation.solve(problem)
    if problem.num_boxes > 3:
        return result.w_star[None, :]
    grid = allocation.simplex_grid(problem.num_boxes, resolution)
    vals = allocation.psi_many(problem.q, problem.mu, grid)
    members = grid[vals >= result.t_star - eps]
    return np.vstack([members, result.w_star]) if members.size else result.w_star[None]


def run_experiment(config, workers=1):
    """Run the full (delta x trials) sweep.

    Returns (aggregate_rows, trial_rows).  Capped trials become flagged
    rows, never dropped.  Output is independent of the worker count.
    """
    problem = config.instance
    if config.algorithm == "bbmts":
        result = allocation.solve(problem)
        reference = result.t_star
        members = (
            wstar_representatives(problem, result) if problem.num_boxes <= 3 else None
        )
        default_cap = 10**7
    else:
        reference = bbsea.theory_bounds(problem, config.delta_grid[0]).upper_bound
        members = None
        default_cap = 10**8
    max_steps = config.max_steps if config.max_steps is not None else default_cap

    jobs = [
        (
            problem,
            config.algorithm,
            delta,
            config.rho,
            config.base_seed + i,
            config.threshold_mode,
            config.strict_resolve,
            max_steps,
            members,
        )
        for delta in config.delta_grid
        for i in range(config.trials)
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_trial, jobs, chunksize=8))
    else:
        results = [_run_trial(j) for j in jobs]
    order = {d: i for i, d in enumerate(config.delta_grid)}
    results.sort(key=lambda r: (order[r["delta"]], r["seed"]))

    agg = []
    for delta in config.delta_grid:
        rows = [r for r in results if r["delta"] == delta]
        taus = np.array([r["tau"] for r in rows], dtype=float)
        errors = np.array([1 - r["correct"] for r in rows], dtype=float)
        dists = np.array([r["final_tracking_distance"] for r in rows])
        finite = dists[~np.isnan(dists)]
        if config.algorithm == "bbsea":
            reference = bbsea.theory_bounds(problem, delta).upper_bound
        agg.append(
            AggregateRow(
                delta=delta,
                trials=len(rows),
                error_rate=float(errors.mean()),
                mean_tau=float(taus.mean()),
                stddev_tau=float(taus.std(ddof=1)) if len(rows) > 1 else 0.0,
                slope=float(taus.mean() / math.log(1.0 / delta)),
                t_star_or_bounds=float(reference),
                tracking_distance=float(finite.mean()) if finite.size else float("nan"),
                capped=int(sum(r["capped"] for r in rows)),
            )
        )
    return agg, results


# ---------------------------------------------------------------------------
# output


def _fmt(x):
    if isinstance(x, int):
        return str(x)
    return format(x, ".6g")


def trials_csv(rows):
    lines = [TRIAL_COLUMNS]
    for r in rows:
        lines.append(
            ",".join(
                [
                    str(r["seed"]),
                    _fmt(float(r["delta"])),
                    str(int(r["tau"])),
                    str(r["declared"]),
                    str(r["correct"]),
                    _fmt(float(r["final_tracking_distance"])),
                    str(r["capped"]),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def emit_summary(rows):
    """Aggregate rows -> (human-readable table, CSV text)."""
    if not rows:
        raise ValueError("no rows to summarize")
    csv_lines = [SUMMARY_COLUMNS]
    for r in rows:
        csv_lines.append(
            ",".join(
                [
                    _fmt(r.delta),
                    str(r.trials),
                    _fmt(r.error_rate),
                    _fmt(r.mean_tau),
                    _fmt(r.stddev_tau),
                    _fmt(r.slope),
                    _fmt(r.t_star_or_bounds),
                    _fmt(r.tracking_distance),
                ]
            )
        )
    csv_text = "\n".join(csv_lines) + "\n"
    headers = SUMMARY_COLUMNS.split(",")
    table_rows = [headers] + [line.split(",") for line in csv_lines[1:]]
    widths = [max(len(row[i]) for row in table_rows) for i in range(len(headers))]
    table = "\n".join(
        "  ".join(cell.rjust(w) for cell, w in zip(row, widths)) for row in table_rows
    )
    return table, csv_text


def write_outputs(agg_rows, trial_rows, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    _, summary = emit_summary(agg_rows)
    with open(os.path.join(out_dir, "summary.csv"), "w") as fh:
        fh.write(summary)
    with open(os.path.join(out_dir, "trials.csv"), "w") as fh:
        fh.write(trials_csv(trial_rows))
