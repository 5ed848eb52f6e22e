import csv
import json

import pytest

from fracsys import cli
from fracsys.spectral import read_field

SUBLINEAR = {"domain": {"dim": 2, "lengths": [1.0, 1.0]}, "modes": 16,
             "params": {"s": 0.75, "p": 0.5, "q": 0.5}, "solver": "minimize_direct"}
MOUNTAIN = {"domain": {"dim": 2}, "modes": 16, "params": {"s": 0.5, "p": 1, "q": 3},
            "solver": "mountain_pass"}


def write_cfg(tmp_path, doc, name="cfg.json"):
    path = tmp_path / name
    path.write_text(doc if isinstance(doc, str) else json.dumps(doc))
    return str(path)


def test_run_sublinear_writes_artifacts(tmp_path):
    out = tmp_path / "out"
    assert cli.main(["run", write_cfg(tmp_path, SUBLINEAR), "--out", str(out)]) == 0
    assert {p.name for p in out.iterdir()} == {"report.json", "trace.csv", "u.csv", "v.csv"}
    doc = json.loads((out / "report.json").read_text())
    assert doc["converged"] and doc["classification"]["regime"] == "sublinear"
    assert doc["fields"] == {"u": "u.csv", "v": "v.csv"}
    u = read_field(out / doc["fields"]["u"])
    assert u.basis.modes == 16
    with open(out / "trace.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["iteration", "energy", "grad_norm", "step", "clamp"]
    assert len(rows) - 1 == doc["iterations"]


def test_run_general(tmp_path):
    cfg = {"domain": {"dim": 2}, "modes": 16, "params": {"s": 0.75, "p": 1}, "solver": "solve_general",
           "nonlinearity": {"name": "re^r", "theta": 2.0}}
    assert cli.main(["run", write_cfg(tmp_path, cfg), "--out", str(tmp_path / "o")]) == 0


def test_supercritical_refused_with_hyperbola_values(tmp_path, capsys):
    cfg = dict(MOUNTAIN, domain={"dim": 3}, modes=8, params={"s": 0.5, "p": 3, "q": 9})
    out = tmp_path / "out"
    assert cli.main(["run", write_cfg(tmp_path, cfg), "--out", str(out)]) == 3
    err = capsys.readouterr().err
    assert "7/20 = 0.35 < (n-2s)/n = 2/3" in err
    assert not out.exists()


@pytest.mark.parametrize("doc", [
    "{not json",
    "[]",
    {"domain": {"dim": 2}, "modes": 16, "solver": "mountain_pass"},
    dict(MOUNTAIN, solver="newton"),
    dict(MOUNTAIN, domain={"dim": 2, "lengths": [1.0]}),
    dict(MOUNTAIN, modes="many"),
    dict(MOUNTAIN, options={"tolerance": 1}),
    dict(MOUNTAIN, params={"s": 1.5, "p": 1, "q": 3}),
    {"domain": {"dim": 2}, "modes": 16, "params": {"s": 0.75, "p": 1}, "solver": "solve_general",
     "nonlinearity": {"name": "sin"}},
])
def test_malformed_config_exit_2(tmp_path, doc):
    assert cli.main(["run", write_cfg(tmp_path, doc)]) == 2


def test_missing_config_file(tmp_path):
    assert cli.main(["run", str(tmp_path / "nope.json")]) == 2


def test_sweep_rows_in_input_order(tmp_path):
    out = tmp_path / "sw"
    assert cli.main(["sweep", write_cfg(tmp_path, MOUNTAIN), "--axis", "q=4,2,3", "--out", str(out)]) == 0
    with open(out / "sweep.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["q", "energy", "sup_norm", "theta2s_norm", "iterations", "converged"]
    assert [float(r[0]) for r in rows[1:]] == [4.0, 2.0, 3.0]


def test_sweep_empty_axis_header_only(tmp_path):
    out = tmp_path / "sw"
    assert cli.main(["sweep", write_cfg(tmp_path, MOUNTAIN), "--axis", "q=", "--out", str(out)]) == 0
    assert (out / "sweep.csv").read_text().strip() == "q,energy,sup_norm,theta2s_norm,iterations,converged"


def test_sweep_mixed_refused_before_running(tmp_path):
    cfg = dict(MOUNTAIN, domain={"dim": 3}, modes=8, params={"s": 0.5, "p": 1, "q": 3})
    out = tmp_path / "sw"
    assert cli.main(["sweep", write_cfg(tmp_path, cfg), "--axis", "q=2,9", "--out", str(out)]) == 3
    assert not out.exists()


def test_sweep_sublinear(tmp_path):
    out = tmp_path / "sw"
    assert cli.main(["sweep", write_cfg(tmp_path, SUBLINEAR), "--axis", "q=0.5,1.5", "--out", str(out)]) == 0
    assert len((out / "sweep.csv").read_text().splitlines()) == 3


def test_bad_axis_is_config_error(tmp_path):
    assert cli.main(["sweep", write_cfg(tmp_path, MOUNTAIN), "--axis", "p=1,2"]) == 2
    assert cli.main(["sweep", write_cfg(tmp_path, MOUNTAIN), "--axis", "q=a,b"]) == 2


def test_same_seed_same_report(tmp_path):
    cfg = write_cfg(tmp_path, SUBLINEAR)
    cli.main(["run", cfg, "--out", str(tmp_path / "a"), "--seed", "4"])
    cli.main(["run", cfg, "--out", str(tmp_path / "b"), "--seed", "4"])
    cli.main(["run", cfg, "--out", str(tmp_path / "c"), "--seed", "5"])
    a, b, c = ((tmp_path / d / "report.json").read_text() for d in "abc")
    assert a == b
    assert json.loads(c)["config"]["options"]["seed"] == 5


def test_output_directory_precedence(tmp_path, monkeypatch):
    cfg = write_cfg(tmp_path, dict(MOUNTAIN, output=str(tmp_path / "from_config")))
    monkeypatch.setenv(cli.OUT_ENV, str(tmp_path / "from_env"))
    assert cli.main(["run", cfg]) == 0
    assert (tmp_path / "from_env" / "report.json").exists()
    assert cli.main(["run", cfg, "--out", str(tmp_path / "from_flag")]) == 0
    assert (tmp_path / "from_flag" / "report.json").exists()
    monkeypatch.delenv(cli.OUT_ENV)
    assert cli.main(["run", cfg]) == 0
    assert (tmp_path / "from_config" / "report.json").exists()


def test_not_converged_exit_1(tmp_path):
    cfg = dict(SUBLINEAR, options={"max_iters": 2})
    assert cli.main(["run", write_cfg(tmp_path, cfg), "--out", str(tmp_path / "o")]) == 1


def test_failed_write_leaves_no_partial_file(tmp_path, monkeypatch):
    from fracsys import report_io

    def boom(path, u):
        path.write_text("partial")
        raise OSError("disk full")

    monkeypatch.setattr(report_io, "write_field", boom)
    with pytest.raises(OSError):
        cli.main(["run", write_cfg(tmp_path, MOUNTAIN), "--out", str(tmp_path / "o")])
    assert list((tmp_path / "o").iterdir()) == []
