import textwrap

import numpy as np
import pytest

from boxbandit import cli, harness


BBSEA_CONFIG = textwrap.dedent(
    """
    # partition instance, successive elimination
    algorithm = bbsea
    q = [[0.5, 0.5, 0.0, 0.0],
         [0.0, 0.0, 0.5, 0.5]]
    mu = [1.0, 0.3, 0.5, 0.0]
    reward_model = bernoulli
    arm_sets = [[0, 1], [2, 3]]
    delta_grid = [0.3, 0.1]
    trials = 5
    base_seed = 42
    """
)

BBMTS_CONFIG = textwrap.dedent(
    """
    algorithm = bbmts
    q = [[0.6, 0.3, 0.1], [0.1, 0.3, 0.6]]
    mu = [1.0, 0.5, 0.25]
    delta_grid = [0.2]
    trials = 3
    base_seed = 0
    rho = 1.0
    threshold_mode = practical
    """
)


def _write(tmp_path, text, name="exp.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


# ---------------------------------------------------------------------------
# config parsing


def test_load_config_full(tmp_path):
    cfg = harness.load_config(_write(tmp_path, BBSEA_CONFIG))
    assert cfg.algorithm == "bbsea"
    assert cfg.instance.num_boxes == 2
    assert [list(s) for s in cfg.instance.arm_sets] == [[0, 1], [2, 3]]
    assert cfg.delta_grid == [0.3, 0.1]
    assert cfg.trials == 5
    assert cfg.base_seed == 42


def test_multiline_matrix_and_comments(tmp_path):
    cfg = harness.load_config(_write(tmp_path, BBMTS_CONFIG))
    assert cfg.instance.q.shape == (2, 3)
    assert cfg.rho == 1.0
    assert cfg.threshold_mode == "practical"
    assert cfg.strict_resolve is True


@pytest.mark.parametrize(
    "mangle,err",
    [
        (lambda s: s.replace("algorithm = bbsea", "algorithm bbsea"), harness.ParseError),
        (lambda s: s + "\ntrials = 9\n", harness.ParseError),  # duplicate key
        (lambda s: s + "\nbogus_key = 1\n", harness.ValidationError),
        (lambda s: s.replace("[0.3, 0.1]", "[0.1, 0.3]"), harness.ValidationError),
        (lambda s: s.replace("[0.3, 0.1]", "[1.5]"), harness.ValidationError),
        (lambda s: s.replace("trials = 5", "trials = 0"), harness.ValidationError),
        (lambda s: s.replace("algorithm = bbsea", "algorithm = lucb"), harness.ValidationError),
        (lambda s: s.replace("0.5, 0.5, 0.0, 0.0", "0.5, 0.6, 0.0, 0.0"), harness.ValidationError),
    ],
)
def test_config_rejects(tmp_path, mangle, err):
    with pytest.raises(err):
        harness.load_config(_write(tmp_path, mangle(BBSEA_CONFIG)))


def test_bbmts_requires_rho(tmp_path):
    text = BBMTS_CONFIG.replace("rho = 1.0\n", "")
    with pytest.raises(harness.ValidationError):
        harness.load_config(_write(tmp_path, text))


def test_unterminated_list(tmp_path):
    with pytest.raises(harness.ParseError):
        harness.load_config(_write(tmp_path, "algorithm = bbsea\nq = [[0.5, 0.5\n"))


# ---------------------------------------------------------------------------
# experiment execution


def test_run_experiment_bbsea(tmp_path):
    cfg = harness.load_config(_write(tmp_path, BBSEA_CONFIG))
    agg, trials = harness.run_experiment(cfg)
    assert [r.delta for r in agg] == [0.3, 0.1]
    assert all(r.trials == 5 for r in agg)
    assert len(trials) == 10
    # Seeds are base_seed + i within each delta block.
    assert [t["seed"] for t in trials[:5]] == [42, 43, 44, 45, 46]
    # bbsea reference column carries the per-delta upper bound.
    assert agg[0].t_star_or_bounds != agg[1].t_star_or_bounds
    assert all(r.capped == 0 for r in agg)


def test_run_experiment_bbmts_reference_is_t_star(tmp_path):
    from boxbandit import allocation

    cfg = harness.load_config(_write(tmp_path, BBMTS_CONFIG))
    agg, trials = harness.run_experiment(cfg)
    res = allocation.solve(cfg.instance)
    assert agg[0].t_star_or_bounds == pytest.approx(res.t_star, rel=1e-6)
    assert np.isfinite(agg[0].tracking_distance)
    assert agg[0].mean_tau >= cfg.instance.num_boxes


def test_worker_count_does_not_change_output(tmp_path):
    cfg = harness.load_config(_write(tmp_path, BBSEA_CONFIG))
    agg1, trials1 = harness.run_experiment(cfg, workers=1)
    agg2, trials2 = harness.run_experiment(cfg, workers=2)
    assert harness.trials_csv(trials1) == harness.trials_csv(trials2)
    assert harness.emit_summary(agg1) == harness.emit_summary(agg2)


def test_capped_trials_flagged_not_dropped(tmp_path):
    text = BBSEA_CONFIG + "max_steps = 5\n"
    cfg = harness.load_config(_write(tmp_path, text))
    agg, trials = harness.run_experiment(cfg)
    assert all(t["capped"] == 1 for t in trials)
    assert all(t["declared"] == -1 for t in trials)
    assert all(r.capped == r.trials for r in agg)


# ---------------------------------------------------------------------------
# output formats


def test_csv_shapes_and_rerun_stability(tmp_path):
    cfg = harness.load_config(_write(tmp_path, BBSEA_CONFIG))
    agg, trials = harness.run_experiment(cfg)
    csv1 = harness.trials_csv(trials)
    lines = csv1.strip().split("\n")
    assert lines[0] == harness.TRIAL_COLUMNS
    assert len(lines) == 1 + len(trials)
    table, summary_csv = harness.emit_summary(agg)
    assert summary_csv.startswith(harness.SUMMARY_COLUMNS)
    assert len(table.splitlines()) == 1 + len(agg)
    # Byte-identical on rerun.
    agg2, trials2 = harness.run_experiment(cfg)
    assert harness.trials_csv(trials2) == csv1


def test_write_outputs(tmp_path):
    cfg = harness.load_config(_write(tmp_path, BBSEA_CONFIG))
    agg, trials = harness.run_experiment(cfg)
    out = tmp_path / "out"
    harness.write_outputs(agg, trials, str(out))
    assert (out / "summary.csv").read_text().startswith(harness.SUMMARY_COLUMNS)
    assert (out / "trials.csv").read_text().startswith(harness.TRIAL_COLUMNS)


# ---------------------------------------------------------------------------
# CLI


def test_cli_run_writes_outputs(tmp_path, capsys):
    path = _write(tmp_path, BBSEA_CONFIG)
    out = tmp_path / "cli_out"
    rc = cli.main(["run", path, "--out", str(out)])
    captured = capsys.readouterr()
    assert rc == 0
    assert "delta" in captured.out
    assert (out / "summary.csv").exists()
    assert (out / "trials.csv").exists()


def test_cli_solve(tmp_path, capsys):
    rc = cli.main(["solve", _write(tmp_path, BBMTS_CONFIG)])
    captured = capsys.readouterr()
    assert rc == 0
    assert "t_star" in captured.out
    assert "w_star" in captured.out


def test_cli_bounds(tmp_path, capsys):
    rc = cli.main(["bounds", _write(tmp_path, BBSEA_CONFIG)])
    captured = capsys.readouterr()
    assert rc == 0
    assert "upper bound" in captured.out
    # bounds on a non-partition instance is a usage error
    rc = cli.main(["bounds", _write(tmp_path, BBMTS_CONFIG, name="m.cfg")])
    assert rc == 2


def test_cli_bad_config_exit_code(tmp_path, capsys):
    path = _write(tmp_path, "algorithm = lucb\n")
    rc = cli.main(["run", path])
    assert rc == 2
    assert "error" in capsys.readouterr().err


def test_cli_capped_exit_code(tmp_path, capsys):
    path = _write(tmp_path, BBSEA_CONFIG + "max_steps = 5\n")
    rc = cli.main(["run", path])
    capsys.readouterr()
    assert rc == 3
