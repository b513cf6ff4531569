"""
End-to-end tests for the hjortic command line
"""
import argparse
import json
import os
import sys

import pandas as pd
import pytest

# Add the project root to the path so modules can be imported properly
project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, project_root)

from main import EXIT_FAILURE, EXIT_OK, EXIT_USAGE, build_parser, run  # noqa: E402
from cli.commands import nested_candidates, parse_spec  # noqa: E402
from tsmodel.argauss import ArxSpec  # noqa: E402

KOLA_INTERVALS = ["2.44,5.06", "2.58,5.16", "2.62,5.29", "3.02,5.64"]


def _run(*argv):
    return run(["--no-log-file", *argv])


def _load(path):
    with open(path, encoding="utf-8") as f:
        return json.load(f)


@pytest.fixture
def ar2_csv(tmp_path):
    out = str(tmp_path)
    assert _run("synth", "--model", "ar2", "--seed", "7", "--out", out) == EXIT_OK
    return os.path.join(out, "synth_ar2.csv")


def test_parse_spec_descriptor():
    spec = parse_spec("ar=2;trend;kola:1;length", "hsi")
    assert spec == ArxSpec(response="hsi", regressors=(("kola", 1), ("length", 0)),
                           include_linear_trend=True, ar_order=2)
    with pytest.raises(ValueError):
        parse_spec("ar=x", "hsi")


def test_nested_candidates_count_and_limit():
    wide = ArxSpec(response="y", regressors=(("x", 0), ("w", 1)), include_linear_trend=True, ar_order=1)
    assert len(nested_candidates(wide, 256)) == 4 * 2 * 2
    with pytest.raises(ValueError):
        nested_candidates(wide, 10)


def test_synth_writes_table(tmp_path, ar2_csv):
    table = pd.read_csv(ar2_csv)
    assert list(table.columns) == ["year", "hsi"]
    assert len(table) == 154
    assert table["year"].iloc[0] == 1859
    summary = _load(tmp_path / "synth.json")
    assert summary["subcommand"] == "synth"
    assert summary["config_echo"]["args"]["seed"] == 7
    assert summary["config_echo"]["config"]["seed"] == 7


def test_select_on_synthetic_ar2(tmp_path, ar2_csv):
    out = str(tmp_path)
    assert _run("select", "--input", ar2_csv, "--out", out) == EXIT_OK
    table = _load(tmp_path / "select.json")["result"]["table"]
    assert [row["spec"]["ar_order"] for row in table] == [0, 1, 2, 3, 4]
    assert sum(row["best_aic"] for row in table) == 1
    scores = pd.read_csv(tmp_path / "select_scores.csv")
    assert len(scores) == 5


def test_rerun_is_byte_identical(tmp_path, ar2_csv):
    out = str(tmp_path)
    assert _run("fit", "--input", ar2_csv, "--ar-order", "2", "--out", out) == EXIT_OK
    first = (tmp_path / "fit.json").read_bytes()
    assert _run("fit", "--input", ar2_csv, "--ar-order", "2", "--out", out) == EXIT_OK
    assert (tmp_path / "fit.json").read_bytes() == first


def test_fit_writes_confidence_distribution(tmp_path, ar2_csv):
    out = str(tmp_path)
    assert _run("fit", "--input", ar2_csv, "--ar-order", "2", "--focus", "pred:1", "--out", out) == EXIT_OK
    cd = _load(tmp_path / "cd_1.json")
    assert cd["focus_label"] == "pred:1"
    assert cd["spread"] > 0
    assert _run("combine", "--cd", str(tmp_path / "cd_1.json"), "--cd", str(tmp_path / "cd_1.json"),
                "--out", out) == EXIT_OK
    combined = _load(tmp_path / "combine.json")["result"]["combined"]
    assert combined["spread"] == pytest.approx(cd["spread"] / 2 ** 0.5, rel=1e-9)


def test_combine_reported_intervals(tmp_path):
    argv = ["combine", "--label", "kola", "--out", str(tmp_path)]
    for text in KOLA_INTERVALS:
        argv += ["--interval", text]
    assert _run(*argv) == EXIT_OK
    lo, hi = _load(tmp_path / "combine.json")["result"]["interval"]
    assert lo == pytest.approx(3.32, abs=0.05)
    assert hi == pytest.approx(4.63, abs=0.05)
    assert os.path.exists(tmp_path / "combine.csv")


def test_every_subcommand_documents_arguments_and_examples():
    parser = build_parser()
    subparsers = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    for name, sub in subparsers.choices.items():
        text = sub.format_help()
        assert "Contoh:" in text, name
        assert f"python main.py {name}" in text, name
        for action in sub._actions:
            assert action.help, f"{name} {action.dest}"


def test_usage_errors_exit_2(tmp_path):
    assert _run("fit") == EXIT_USAGE
    assert _run("no-such-command") == EXIT_USAGE
    assert _run("--threads", "0", "combine", "--interval", "1,2", "--interval", "1,3",
                "--out", str(tmp_path)) == EXIT_USAGE


def test_threads_flag_overrides_environment(tmp_path, monkeypatch):
    from tsmodel.parallel import set_thread_count, thread_count

    monkeypatch.setenv("HJORTIC_THREADS", "4")
    args = ["combine", "--interval", KOLA_INTERVALS[0], "--interval", KOLA_INTERVALS[1], "--out", str(tmp_path)]
    try:
        assert _run("--threads", "2", *args) == EXIT_OK
        assert thread_count() == 2
        assert _run(*args) == EXIT_OK
        assert thread_count() == 4
    finally:
        set_thread_count(None)


def test_computation_errors_exit_1(tmp_path):
    out = str(tmp_path)
    assert _run("select", "--input", str(tmp_path / "absent.csv"), "--out", out) == EXIT_FAILURE
    assert _run("combine", "--interval", "1,2", "--out", out) == EXIT_FAILURE
    assert _run("combine", "--interval", "2,1", "--interval", "1,3", "--out", out) == EXIT_FAILURE


def test_kola_winter_from_monthly(tmp_path):
    out = str(tmp_path)
    assert _run("synth", "--model", "kola-monthly", "--n", "5", "--out", out) == EXIT_OK
    monthly = os.path.join(out, "synth_kola-monthly.csv")
    assert _run("kola-winter", "--input", monthly, "--out", out) == EXIT_OK
    result = _load(tmp_path / "kola_winter.json")["result"]
    assert result["n_complete"] == 4
    winter = pd.read_csv(tmp_path / "kola_winter.csv")
    assert list(winter.columns) == ["year", "kola"]


def test_copula_simulate_and_translate(tmp_path):
    out = str(tmp_path)
    assert _run("copula", "simulate", "--n-fish", "50", "--n-reps", "20", "--out", out) == EXIT_OK
    sim = _load(tmp_path / "copula_simulate.json")["result"]["simulation"]
    assert sim["n_reps"] == 20
    assert len(pd.read_csv(tmp_path / "copula_simulate.csv")) == 20

    assert _run("copula", "translate", "--n-fish", "50", "--n-reps", "150", "--apply", "5.0",
                "--out", out) == EXIT_OK
    result = _load(tmp_path / "copula_translate.json")["result"]
    assert result["translation"]["slope"] > 0
    assert result["applied"][0]["hsi_ind"] == 5.0


def test_copula_fit_from_synthetic_pairs(tmp_path):
    out = str(tmp_path)
    assert _run("synth", "--model", "pairs", "--n", "200", "--seed", "3", "--out", out) == EXIT_OK
    pairs = os.path.join(out, "synth_pairs.csv")
    assert _run("copula", "fit", "--pairs", pairs, "--out", out) == EXIT_OK
    model = _load(tmp_path / "copula_fit.json")["result"]["model"]
    assert 0.6 < model["rho"] < 0.95
