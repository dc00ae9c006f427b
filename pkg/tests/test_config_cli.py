import csv
import json
import subprocess
import sys

import pytest
from hypothesis import given, strategies as st

from hgelfand.cli import main
from hgelfand.config import ConfigError, RunConfig

configs = st.builds(
    RunConfig,
    group=st.sampled_from(["un:1", "un:2", "un:3", "tn:1", "tn:2", "tn:3"]),
    nt=st.integers(2, 400),
    n_lambda=st.integers(2, 200),
    t_max=st.none() | st.floats(0.1, 100),
    lambda_min=st.floats(-10, -0.01),
    lambda_max=st.floats(0.01, 10),
    xi_cut=st.none() | st.floats(1e-3, 1e4),
    tail_tol=st.floats(1e-12, 0.5),
    lam=st.floats(-50, 50),
    label=st.none() | st.lists(st.integers(0, 30), min_size=1, max_size=3).map(tuple),
    orbit=st.none() | st.lists(st.floats(-5, 5), min_size=1, max_size=3).map(tuple),
    seed=st.integers(0, 2 ** 32),
)


@given(configs)
def test_config_json_round_trip(cfg):
    assert RunConfig.from_json(cfg.to_json()) == cfg


@pytest.mark.parametrize("changes", [
    {"group": "sp:2"}, {"nt": 1}, {"grid": 10 ** 6}, {"order": 5}, {"lambda_min": 1.0, "lambda_max": 1.0},
    {"xi_cut": -1.0}, {"tail_tol": 0.0}, {"label": (1, -1)}, {"quotient": "sym"}, {"quotient": "alt"},
])
def test_config_validation(changes):
    with pytest.raises(ConfigError):
        RunConfig(**changes)


def test_unknown_config_keys():
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"group": "un:1", "colour": "red"})


@pytest.mark.parametrize("argv", [[], ["frobnicate"], ["spectrum", "--no-such-flag"],
                                  ["spectrum", "--group", "sp:3"], ["transform", "--function", "nonsense(1)"],
                                  ["invert", "--table", "/nonexistent/table.csv"], ["verify", "--suite", "nope"]])
def test_usage_errors_exit_2(argv, capsys):
    assert main(argv) == 2


def test_eigentable_output(capsys):
    assert main(["eigentable", "--group", "tn:2", "--degree-max", "2"]) == 0
    data = json.loads(capsys.readouterr().out)
    rows = {tuple(r["alpha"]): r["values"] for r in data["table"]}
    assert rows[(1, 0)] == [7, 5] and data["N"] == 2


def test_spectrum_csv(tmp_path):
    out = tmp_path / "fan.csv"
    assert main(["spectrum", "--group", "un:1", "--alpha-max", "2", "--lambda-range", "-1", "1",
                 "--lambda-samples", "3", "--orbit-samples", "2", "--out", str(out)]) == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["lambda", "xi_1", "label_kind", "alpha"]
    assert len(rows) == 1 + 2 + 6


def test_transform_is_deterministic(tmp_path):
    args = ["transform", "--group", "tn:2", "--function", "gaussian(1,1)", "--alpha-max", "4",
            "--lambda-grid", "4", "--nt", "40", "--nr", "40"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_transform_invert_round_trip(tmp_path):
    table = tmp_path / "table.csv"
    common = ["--group", "un:1", "--function", "gaussian(1,1)", "--lambda-range", "-11", "11",
              "--xi-cut", "300", "--lambda-grid", "96"]
    assert main(["transform", *common, "--out", str(table)]) == 0
    prof = tmp_path / "inv.csv"
    assert main(["invert", *common, "--table", str(table), "--grid", "5", "--out", str(prof)]) == 0
    rows = list(csv.reader(prof.open()))
    assert rows[0] == ["t", "r", "re", "im"]
    import math
    err = max(abs(float(re) - math.exp(-float(t) ** 2 - float(r) ** 2)) for t, r, re, _ in rows[1:])
    assert err < 1e-8


def test_config_file_and_flag_precedence(tmp_path, capsys):
    path = tmp_path / "cfg.json"
    path.write_text(RunConfig(group="tn:2", degree_max=1).to_json())
    assert main(["eigentable", "--config", str(path)]) == 0
    data = json.loads(capsys.readouterr().out)
    assert len(data["table"]) == 3
    assert main(["eigentable", "--config", str(path), "--group", "un:1"]) == 0
    assert json.loads(capsys.readouterr().out)["N"] == 2


def test_verify_exit_codes(tmp_path):
    report = tmp_path / "r.json"
    assert main(["verify", "--suite", "sublaplacian", "--suite", "quotient", "--report", str(report)]) == 0
    data = json.loads(report.read_text())
    assert data["all_passed"] and [c["criterion"] for c in data["checks"]] == [2, 10]
    assert main(["verify", "--suite", "roundtrip"]) == 1


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "hgelfand", "quotient", "--alpha-max", "2"],
                          capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[0].startswith("lambda")
