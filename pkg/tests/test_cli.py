import csv
import json
import subprocess
import sys

import pytest

from entroclust.cli import main
from entroclust.experiment import RESULT_COLUMNS, ExperimentPlan, load_plan, run_sweep
from entroclust.errors import DomainError


def gen(tmp_path, *extra, name="d.csv", n=300):
    out = tmp_path / name
    code = main(["generate", "--d", "20", "--s", "3", "--a-norm", "2.548", "--n", str(n),
                 "--seed", "1", "--out", str(out), *extra])
    assert code == 0
    return out


def test_generate_header_and_determinism(tmp_path, capsys):
    a = gen(tmp_path, name="a.csv")
    b = gen(tmp_path, name="b.csv")
    assert a.read_text().startswith("# n=300 d=20 seed=1\n")
    assert a.read_bytes() == b.read_bytes()
    assert "n=300 d=20 s=3 anorm=2.548 seed=1" in capsys.readouterr().out


def test_generate_usage_errors(tmp_path):
    assert main(["generate", "--d", "100", "--s", "200", "--a-norm", "2.5", "--n", "10", "--seed", "1"]) == 2
    assert main(["generate", "--d", "10"]) == 2


def test_fit_lambda_auto_echo(tmp_path):
    data = gen(tmp_path)
    out = tmp_path / "fit.json"
    assert main(["fit", "--data", str(data), "--lambda-auto", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    echo = doc["config_echo"]
    for key in ("lambda0", "M_n", "lambda"):
        assert key in echo
    assert echo["lambda"] == pytest.approx(3 * 1.5 * echo["lambda0"])
    out2 = tmp_path / "fit2.json"
    main(["fit", "--data", str(data), "--lambda-auto", "--out", str(out2)])
    assert out.read_bytes() == out2.read_bytes()


def test_fit_plugin_and_explicit_lambda(tmp_path):
    data = gen(tmp_path)
    out = tmp_path / "f.json"
    assert main(["fit", "--data", str(data), "--lambda", "0.03", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["active_set"] == [0, 1, 2]
    assert doc["l1_off_support"] == 0.0
    assert main(["fit", "--data", str(data), "--lambda-auto", "--mode", "plugin", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["config_echo"]["mode"] == "plugin"


def test_fit_input_errors(tmp_path):
    assert main(["fit", "--data", str(tmp_path / "none.csv"), "--lambda", "0.1"]) == 2
    data = gen(tmp_path)
    (tmp_path / "d.csv.spec.json").write_text(json.dumps({"a": [1.0, 2.0]}))
    assert main(["fit", "--data", str(data), "--lambda", "0.1"]) == 2
    bad = tmp_path / "bad.csv"
    bad.write_text("# n=1 d=2 seed=0\n1.0,x\n")
    assert main(["fit", "--data", str(bad), "--lambda", "0.1"]) == 2
    assert main(["fit", "--data", str(data)]) == 2


def test_verify_only_and_unknown(tmp_path, capsys):
    out = tmp_path / "rep.json"
    assert main(["verify", "--only", "particular_case", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert [r["lemma_id"] for r in doc["reports"]] == ["particular_case"]
    assert main(["verify", "--only", "no_such", "--out", str(out)]) == 2
    err = capsys.readouterr().err
    assert "valid ids" in err and "particular_case" in err
    assert main(["report", "show", str(out)]) == 0


def test_report_show_rejects_garbage(tmp_path):
    p = tmp_path / "x.json"
    p.write_text("[1, 2]")
    assert main(["report", "show", str(p)]) == 2
    p.write_text("{")
    assert main(["report", "show", str(p)]) == 2


def test_landscape_table(tmp_path):
    out = tmp_path / "l.csv"
    assert main(["landscape", "--a-norm", "2", "--mu-grid=-1:1:5", "--r-grid", "0.5,1.0", "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 10
    by = {(float(r["mu"]), float(r["r"])): r for r in rows}
    for r in (0.5, 1.0):
        assert float(by[(0.0, r)]["d_mu"]) == 0.0
        assert float(by[(1.0, r)]["risk"]) == pytest.approx(float(by[(-1.0, r)]["risk"]), abs=1e-14)
        assert float(by[(1.0, r)]["d_mu"]) == pytest.approx(-float(by[(-1.0, r)]["d_mu"]), abs=1e-14)
    # along mu = r u with u = 1: risk decreases as r grows
    assert float(by[(1.0, 1.0)]["risk"]) < float(by[(0.5, 0.5)]["risk"])
    assert main(["landscape", "--a-norm", "2", "--mu-grid", "", "--r-grid", "1"]) == 2
    assert main(["landscape", "--a-norm", "2", "--mu-grid", "0", "--r-grid", "-1"]) == 2


def test_plan_validation_aggregates(tmp_path):
    p = tmp_path / "plan.json"
    p.write_text(json.dumps({"d": 10, "s": 20, "n_grid": [100, 50], "replicates": 0, "bogus": 1}))
    with pytest.raises(DomainError) as info:
        load_plan(p)
    msg = str(info.value)
    for part in ("bogus", "exceeds", "strictly increasing", "replicates"):
        assert part in msg
    assert main(["sweep", str(p)]) == 2


def test_sweep_reproducible(tmp_path):
    plan = ExperimentPlan(name="t", d=15, s=2, n_grid=[200, 400], replicates=2, lambda_rule="scaled",
                          lambda_value=0.2, restarts=1, outputs=str(tmp_path / "o1"), master_seed=3)
    rows1, summary, _ = run_sweep(plan, workers=2)
    plan.outputs = str(tmp_path / "o2")
    run_sweep(plan, workers=1)
    s1 = (tmp_path / "o1" / "summary.json").read_bytes()
    assert s1 == (tmp_path / "o2" / "summary.json").read_bytes()

    def science(path):
        rows = list(csv.DictReader(path.open()))
        return [{k: v for k, v in r.items() if k != "wall_ms"} for r in rows]

    r1 = science(tmp_path / "o1" / "results.csv")
    assert r1 == science(tmp_path / "o2" / "results.csv")
    assert [(int(r["n"]), int(r["replicate"])) for r in r1] == [(200, 0), (200, 1), (400, 0), (400, 1)]
    assert list(csv.DictReader((tmp_path / "o1" / "results.csv").open()).fieldnames) == list(RESULT_COLUMNS)
    assert r1[0]["excess_risk"] != r1[1]["excess_risk"]
    assert "started_unix" in json.loads((tmp_path / "o1" / "metadata.json").read_text())
    assert "started_unix" not in s1.decode()


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "entroclust", "verify", "--only", "no_such"],
                          capture_output=True, text=True)
    assert proc.returncode == 2
