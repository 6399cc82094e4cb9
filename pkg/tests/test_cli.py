from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fraccauchy.cli import main
from fraccauchy.config import ProblemConfig, load_config
from fraccauchy.errors import ConfigError

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def config_file(tmp_path, name, **patch):
    data = json.loads((CONFIGS / name).read_text())
    for dotted, value in patch.items():
        block, _, key = dotted.partition("__")
        if value is None:
            data[block].pop(key)
        else:
            data[block][key] = value
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return path


def run(tmp_path, *args):
    return main([*map(str, args), "--out", str(tmp_path / "out")])


def read_rows(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], dtype=float)


def report(tmp_path, prefix, command):
    return json.loads((tmp_path / "out" / f"{prefix}_{command}_report.json").read_text())


# -- analyze -------------------------------------------------------------------------


def test_analyze_cos_sqrt(tmp_path):
    assert run(tmp_path, "analyze", CONFIGS / "cos_sqrt_analyze.json") == 0
    prefix = load_config(CONFIGS / "cos_sqrt_analyze.json").output.prefix
    header, rows = read_rows(tmp_path / "out" / f"{prefix}_indicator.csv")
    assert header == ["psi", "H"]
    assert np.allclose(rows[:, 1], np.sin(np.abs(rows[:, 0]) / 2), atol=1e-6)
    rep = report(tmp_path, prefix, "analyze")
    assert abs(rep["growth_estimate"]["order"] - 0.5) <= 0.05


def test_analyze_neg_cube(tmp_path):
    assert run(tmp_path, "analyze", CONFIGS / "neg_cube_analyze.json") == 0
    prefix = load_config(CONFIGS / "neg_cube_analyze.json").output.prefix
    rep = report(tmp_path, prefix, "analyze")
    assert rep["function"]["genus"] == 0
    assert rep["function"]["convergence_exponent"] == pytest.approx(1 / 3, abs=1e-6)


def test_missing_genus_names_key(tmp_path, capsys):
    path = config_file(tmp_path, "neg_cube_analyze.json", function__genus=None)
    assert run(tmp_path, "analyze", path) == 2
    assert "function.genus" in capsys.readouterr().err


def test_unknown_key_rejected(tmp_path, capsys):
    path = config_file(tmp_path, "diag_demo.json", equation__colour="blue")
    assert run(tmp_path, "solve", path) == 2
    assert "equation.colour" in capsys.readouterr().err


def test_unreadable_config(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(tmp_path, "solve", bad) == 2
    assert run(tmp_path, "solve", tmp_path / "missing.json") == 2


# -- solve -------------------------------------------------------------------------------


def test_solve_diag_demo(tmp_path):
    assert run(tmp_path, "solve", CONFIGS / "diag_demo.json") == 0
    header, rows = read_rows(tmp_path / "out" / "diag_trajectory.csv")
    assert header == ["t", "re_u1", "im_u1", "re_u2", "im_u2"]
    t = rows[:, 0]
    assert np.allclose(rows[:, 1], np.exp(-t), atol=1e-6)
    assert np.allclose(rows[:, 3], np.exp(-4 * t), atol=1e-6)
    assert np.allclose(rows[:, [2, 4]], 0, atol=1e-6)
    rep = report(tmp_path, "diag", "solve")
    assert rep["audit"]["passed"] and "block_norms" in rep


def test_solve_jordan_demo(tmp_path):
    assert run(tmp_path, "solve", CONFIGS / "jordan_demo.json") == 0
    prefix = load_config(CONFIGS / "jordan_demo.json").output.prefix
    _, rows = read_rows(tmp_path / "out" / f"{prefix}_trajectory.csv")
    t = rows[:, 0]
    assert np.allclose(rows[:, 1], t * np.exp(-t), atol=1e-6)
    assert np.allclose(rows[:, 3], np.exp(-t), atol=1e-6)


def test_order_one_needs_force(tmp_path):
    assert run(tmp_path, "solve", CONFIGS / "order_one.json") == 4
    prefix = load_config(CONFIGS / "order_one.json").output.prefix
    assert "order_below_half" in report(tmp_path, prefix, "solve")["error"]
    assert run(tmp_path, "solve", CONFIGS / "order_one.json", "--force") == 0
    assert report(tmp_path, prefix, "solve")["forced"]


def test_csv_uses_seventeen_digits(tmp_path):
    run(tmp_path, "solve", CONFIGS / "diag_demo.json")
    line = (tmp_path / "out" / "diag_trajectory.csv").read_text().splitlines()[1]
    value = line.split(",")[1]
    assert float(value) == pytest.approx(math.exp(-0.1), rel=1e-15)


def test_output_directory_from_environment(tmp_path, monkeypatch):
    target = tmp_path / "env_out"
    monkeypatch.setenv("FRACCAUCHY_OUT", str(target))
    assert main(["solve", str(CONFIGS / "diag_demo.json")]) == 0
    assert (target / "diag_trajectory.csv").exists()


# -- verify ----------------------------------------------------------------------------------


@pytest.mark.parametrize("name", ["diag_demo.json", "product_demo.json"])
def test_verify_demo_passes(tmp_path, name):
    assert run(tmp_path, "verify", CONFIGS / name) == 0
    prefix = load_config(CONFIGS / name).output.prefix
    rep = report(tmp_path, prefix, "verify")
    assert rep["passed"] and all(r["passed"] for r in rep["checks"])
    assert {r["check"] for r in rep["checks"]} == {"oracle", "residual", "initial_condition", "beta_k", "regrouping"}


def test_verify_corruption_fails(tmp_path):
    assert run(tmp_path, "verify", CONFIGS / "diag_demo.json", "--inject-corruption") == 5
    rows = report(tmp_path, "diag", "verify")["checks"]
    assert not all(r["passed"] for r in rows if r["check"] == "residual")


def test_verify_check_subset(tmp_path):
    assert run(tmp_path, "verify", CONFIGS / "diag_demo.json", "--checks=beta_k") == 0
    rows = report(tmp_path, "diag", "verify")["checks"]
    assert rows and {r["check"] for r in rows} == {"beta_k"}
    assert run(tmp_path, "verify", CONFIGS / "diag_demo.json", "--checks=nonsense") == 2


def test_reports_are_byte_identical(tmp_path):
    outputs = []
    for n in range(2):
        d = tmp_path / f"run{n}"
        assert main(["verify", str(CONFIGS / "diag_demo.json"), "--out", str(d)]) == 0
        assert main(["solve", str(CONFIGS / "diag_demo.json"), "--out", str(d)]) == 0
        outputs.append([(d / f).read_bytes() for f in ("diag_verify_report.json", "diag_trajectory.csv")])
    assert outputs[0] == outputs[1]


# -- config round trip -------------------------------------------------------------------------


@pytest.mark.parametrize("name", sorted(p.name for p in CONFIGS.glob("*.json")))
def test_round_trip_shipped_configs(name):
    cfg = load_config(CONFIGS / name)
    again = ProblemConfig.parse(json.loads(cfg.dumps()))
    assert again == cfg
    assert again.dumps() == cfg.dumps()


@settings(max_examples=30)
@given(
    st.floats(1.0, 4.0),
    st.lists(st.tuples(st.floats(0.2, 2.0), st.floats(-0.3, 0.3), st.integers(1, 3)), min_size=1, max_size=4),
    st.integers(0, 2**31 - 1),
    st.floats(0.05, 0.95),
)
def test_round_trip_builds_identical_problem(alpha, chains, seed, kappa):
    eigen = [[m * math.cos(a), m * math.sin(a)] for m, a, _ in chains]
    lengths = [k for _, _, k in chains]
    N = sum(lengths)
    data = {
        "schema_version": 1,
        "function": {"zeros": {"kind": "power", "exponent": 3.0, "angles": [math.pi]}, "genus": 0},
        "operator": {"dimension": N, "eigenvalues": eigen, "lengths": lengths, "basis": {"seeded_random": seed}},
        "equation": {"alpha": alpha, "initial": [[1.0, 0.5]] * N,
                     "times": {"start": 0.1, "stop": 2.0, "count": 5, "spacing": "log"}, "kappa": kappa},
    }
    cfg = ProblemConfig.parse(data)
    again = ProblemConfig.parse(json.loads(cfg.dumps()))
    assert again == cfg
    p1, p2 = cfg.build_problem(), again.build_problem()
    assert np.array_equal(p1.operator.B, p2.operator.B)
    assert np.array_equal(p1.f, p2.f) and np.array_equal(p1.times, p2.times)
    assert (p1.alpha, p1.kappa) == (p2.alpha, p2.kappa)


def test_schema_version_required():
    with pytest.raises(ConfigError, match="schema_version"):
        ProblemConfig.parse({"function": {"zeros": {"kind": "explicit", "values": []}, "genus": 0}})


def test_dimension_must_match_lengths():
    data = json.loads((CONFIGS / "diag_demo.json").read_text())
    data["operator"]["dimension"] = 3
    with pytest.raises(ConfigError, match="operator"):
        ProblemConfig.parse(data)
