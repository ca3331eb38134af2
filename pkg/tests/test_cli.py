import csv
import io
import json

import numpy as np
import pytest

from bellnet.behaviors import behavior_from_quantum
from bellnet.cli import SweepSpec, UsageError, dispatch, run_sweep, rows_to_csv, thread_count
from bellnet.measurements import chsh_assignment
from bellnet.states import max_entangled


def run(capsys, *argv):
    code = dispatch(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def parse_csv(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_sweep_spec():
    assert len(SweepSpec("p", 0, 1, 0.01).grid()) == 101
    assert SweepSpec("L", 1, 4, 1).grid() == [1, 2, 3, 4]
    with pytest.raises(UsageError):
        SweepSpec("p", 1, 0, 0.1)
    with pytest.raises(UsageError):
        SweepSpec("p", 0, 1, 0)
    with pytest.raises(UsageError):
        SweepSpec("q", 0, 1, 0.1)


def test_run_sweep_order_and_errors():
    def task(v):
        if v == 3:
            raise ValueError("boom")
        return {"sq": v * v}

    rows = run_sweep(SweepSpec("N", 1, 5, 1), task)
    assert [r["N"] for r in rows] == [1, 2, 3, 4, 5]
    assert "error" in rows[2] and rows[3]["sq"] == 16
    text = rows_to_csv(rows)
    assert text.splitlines()[0].startswith("N,")


def test_thread_env(monkeypatch):
    monkeypatch.setenv("BELLNET_THREADS", "3")
    assert thread_count() == 3


def test_sweep_chsh(capsys):
    code, out, _ = run(capsys, "sweep-chsh")
    rows = parse_csv(out)
    assert code == 0 and len(rows) == 101
    flip = next(float(r["p"]) for r in rows if r["member"] == "false")
    assert abs(flip - 1 / np.sqrt(2)) <= 0.01


def test_hashing_threshold(capsys):
    code, out, _ = run(capsys, "hashing-threshold", "--d-list", "2,4,8")
    rows = parse_csv(out)
    assert code == 0 and list(rows[0]) == ["d", "p_star"]
    ps = [float(r["p_star"]) for r in rows]
    assert ps == sorted(ps, reverse=True)
    assert abs(ps[0] - 0.747613833446) < 1e-12


def test_star(capsys):
    code, out, _ = run(capsys, "star", "--n", "3", "--p", "0.85", "--ineq", "mermin", "--restarts", "3")
    obj = json.loads(out)
    assert code == 0
    assert {"value", "bound", "violated"} <= set(obj)
    assert obj["violated"] and abs(obj["value"] - 4 * 0.85**3) < 1e-6


def test_star_usage_error(capsys):
    code, _, err = run(capsys, "star", "--n", "3", "--p", "0.9", "--ineq", "chsh")
    assert code == 2 and "chsh" in err


def test_membership(capsys, tmp_path):
    path = tmp_path / "b.json"
    path.write_text(behavior_from_quantum(max_entangled(2), chsh_assignment()).to_json())
    code, out, _ = run(capsys, "membership", "--behavior", str(path), "--model", "local")
    obj = json.loads(out)
    assert code == 0 and obj["member"] is False
    assert abs(obj["v_star"] - 1 / np.sqrt(2)) < 1e-6


def test_membership_bad_file(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{}")
    code, _, _ = run(capsys, "membership", "--behavior", str(path))
    assert code == 1


def test_lift_and_swap(capsys):
    code, out, _ = run(capsys, "lift", "--p", "1")
    assert code == 0 and abs(json.loads(out)["lifted_value"] - (2 * np.sqrt(2) - 2) / 4) < 1e-9
    code, out, _ = run(capsys, "lambda-swap", "--p", "0.8")
    obj = json.loads(out)
    assert abs(obj["fidelity"] - obj["fidelity_isotropic_product"]) < 1e-10


def test_catalog_csv_and_json(capsys, tmp_path):
    code, out, _ = run(capsys, "catalog", "--name", "svetlichny")
    assert code == 0 and json.loads(out)["bound"] == 4
    target = tmp_path / "c.csv"
    code, _, _ = run(capsys, "catalog", "--name", "chsh", "--format", "csv", "--out", str(target))
    assert code == 0 and target.read_text().splitlines()[0]


def test_activate_commands(capsys):
    code, out, _ = run(capsys, "activate-tau", "--n", "3", "--p", "0.9", "--l-list", "3,5", "--restarts", "3")
    rows = parse_csv(out)
    assert code == 0 and [r["L"] for r in rows] == ["3", "5"]
    code, out, _ = run(capsys, "activate-sigma", "--l-max", "3")
    assert code == 0 and len(parse_csv(out)) == 3


def test_povm_reduce(capsys):
    code, out, _ = run(capsys, "povm-reduce", "--dim", "3", "--seed", "4")
    obj = json.loads(out)
    assert code == 0 and abs(obj["p0_simulated"] - obj["p0_direct"]) < 1e-10
    code, _, _ = run(capsys, "povm-reduce", "--effect", "[[1.5, 0], [0, 0]]")
    assert code == 1


def test_usage_errors(capsys):
    assert run(capsys, "nonsense")[0] == 2
    assert run(capsys)[0] == 2
    assert run(capsys, "sweep-chsh", "--start", "1", "--stop", "0")[0] == 2


def test_reruns_identical(capsys):
    first = run(capsys, "star", "--n", "2", "--p", "0.9", "--restarts", "4", "--seed", "7")[1]
    second = run(capsys, "star", "--n", "2", "--p", "0.9", "--restarts", "4", "--seed", "7")[1]
    assert first == second


def test_help_lists_commands(capsys):
    code, out, _ = run(capsys, "--help")
    assert code == 0
    for name in ("sweep-chsh", "hashing-threshold", "star", "lambda-swap", "membership", "lift",
                 "activate-sigma", "activate-tau", "catalog", "povm-reduce"):
        assert name in out
