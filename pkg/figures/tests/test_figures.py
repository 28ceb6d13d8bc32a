"""Figure-component tests: every kind renders from checked-in fixtures."""

import csv
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from bqfigures.cli import main
from bqfigures.render import ols, render
from bqfigures.schemas import KINDS, SchemaMismatch, load_table

FIXTURES = Path(__file__).parent / "fixtures"

KIND_DIRS = {
    "ci-entropy": "entropy",
    "ci-signal": "entropy",
    "price-scatter": "entropy",
    "market-share": "entropy",
    "welfare-heatmap": "entropy",
    "correlation-heatmap": "entropy",
    "alpha-beta-heatmap": "note_alpha_beta",
    "trace": "trace",
    "min-action": "note_min_action",
}


def test_every_kind_has_a_fixture():
    assert set(KIND_DIRS) == set(KINDS)


@pytest.mark.parametrize("kind", KINDS)
def test_render_each_kind(tmp_path, kind):
    out = tmp_path / f"{kind}.png"
    code = main(
        ["render", "--kind", kind, "--in", str(FIXTURES / KIND_DIRS[kind]),
         "--out", str(out)]
    )
    assert code == 0
    assert out.exists() and out.stat().st_size > 0


def test_render_is_deterministic(tmp_path):
    a = render("ci-entropy", FIXTURES / "entropy", tmp_path / "a.png")
    b = render("ci-entropy", FIXTURES / "entropy", tmp_path / "b.png")
    assert a.read_bytes() == b.read_bytes()


def test_render_does_not_mutate_inputs(tmp_path):
    src = FIXTURES / "entropy" / "sessions.csv"
    before = src.read_bytes()
    render("price-scatter", FIXTURES / "entropy", tmp_path / "p.png")
    assert src.read_bytes() == before


def test_regression_sidecar_matches_independent_ols(tmp_path):
    out = tmp_path / "fig9.png"
    render("ci-signal", FIXTURES / "entropy", out)
    sidecar = tmp_path / "fig9_regression.csv"
    with open(sidecar, newline="") as f:
        row = next(csv.DictReader(f))
    frame = pd.read_csv(FIXTURES / "entropy" / "per_signal.csv")
    means = frame.groupby("signal")["ci"].mean()
    want_slope, want_intercept = np.polyfit(means.index, means.to_numpy(), 1)
    assert abs(float(row["slope"]) - want_slope) < 1e-9
    assert abs(float(row["intercept"]) - want_intercept) < 1e-9
    assert int(row["points"]) == 4


def test_ols_against_numpy():
    rng = np.random.default_rng(3)
    x = rng.normal(size=30)
    y = 2.5 * x - 1.0 + rng.normal(scale=0.1, size=30)
    slope, intercept = ols(x, y)
    np_slope, np_intercept = np.polyfit(x, y, 1)
    assert abs(slope - np_slope) < 1e-9
    assert abs(intercept - np_intercept) < 1e-9
    with pytest.raises(ValueError):
        ols([1.0], [2.0])
    with pytest.raises(ValueError):
        ols([1.0, 1.0], [1.0, 2.0])


def test_schema_mismatch_reports_column_diff(tmp_path, capsys):
    code = main(
        ["render", "--kind", "ci-entropy", "--in", str(FIXTURES / "bad"),
         "--out", str(tmp_path / "x.png")]
    )
    assert code == 1
    err = capsys.readouterr().err
    assert "schema mismatch" in err
    assert "ci" in err
    assert "surprise" in err
    with pytest.raises(SchemaMismatch) as exc:
        load_table("ci-entropy", FIXTURES / "bad")
    assert exc.value.missing == ["ci"]
    assert exc.value.unexpected == ["surprise"]


def test_missing_input_exits_2(tmp_path, capsys):
    code = main(
        ["render", "--kind", "trace", "--in", str(tmp_path),
         "--out", str(tmp_path / "t.png")]
    )
    assert code == 2
    assert "error:" in capsys.readouterr().err


def test_unknown_kind_rejected(tmp_path):
    with pytest.raises(SystemExit):
        main(["render", "--kind", "pie", "--in", ".", "--out", "x.png"])


def test_acceptance_a14(tmp_path, capsys):
    ok = True
    for kind in KINDS:
        out = tmp_path / f"{kind}.png"
        code = main(
            ["render", "--kind", kind, "--in",
             str(FIXTURES / KIND_DIRS[kind]), "--out", str(out)]
        )
        ok = ok and code == 0 and out.exists()
    capsys.readouterr()
    render("ci-signal", FIXTURES / "entropy", tmp_path / "a9.png")
    with open(tmp_path / "a9_regression.csv", newline="") as f:
        row = next(csv.DictReader(f))
    frame = pd.read_csv(FIXTURES / "entropy" / "per_signal.csv")
    means = frame.groupby("signal")["ci"].mean()
    want = np.polyfit(means.index, means.to_numpy(), 1)[0]
    ok = ok and abs(float(row["slope"]) - want) < 1e-9
    print(f"A14: {'PASS' if ok else 'FAIL'}")
    assert ok
