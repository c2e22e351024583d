import json
import os

import pytest

from critgraph.cli import main

from conftest import SEED

LAW = '{"1":0.75,"3":0.25}'


def test_validate_ok(capsys):
    assert main(["validate", "--pmf", LAW]) == 0
    out = capsys.readouterr().out
    assert "mu = 1.5\n" in out and "beta = 1.5\n" in out


def test_validate_two_regular(capsys):
    assert main(["validate", "--pmf", '{"2":1.0}']) == 1
    assert "DegenerateTwoRegular" in capsys.readouterr().err


def test_validate_power_law(capsys):
    assert main(["validate", "--power-law-gamma", "3.5"]) == 0
    assert "power" in capsys.readouterr().out.lower()


def test_explore_forced_pair(capsys):
    assert main(["explore", "--n", "2", "--pmf", '{"1":1.0}', "--seed", "7"]) == 0
    lines = [l for l in capsys.readouterr().out.splitlines() if not l.startswith("#")]
    assert lines[0] == "i,walk,degree,cycle_count"
    assert [int(l.split(",")[1]) for l in lines[1:]] == [0, -1, -2]


@pytest.mark.parametrize("argv", [
    ["validate"],
    ["validate", "--pmf", "{bad json"],
    ["validate", "--pmf", LAW, "--poisson", "1"],
])
def test_usage_errors(argv, capsys):
    assert main(argv) == 2
    assert "usage error" in capsys.readouterr().err


def test_argparse_errors_exit_2():
    with pytest.raises(SystemExit) as info:
        main(["explore", "--pmf", LAW, "--n", "4", "--seed", "-1"])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        main(["nonsense"])
    assert info.value.code == 2


def _files(d):
    return {f: open(os.path.join(d, f), "rb").read() for f in sorted(os.listdir(d))}


def test_explore_outputs_identical(tmp_path):
    for sub in ("a", "b"):
        assert main(["explore", "--pmf", LAW, "--n", "500", "--seed", str(SEED), "--out", str(tmp_path / sub)]) == 0
    a, b = _files(tmp_path / "a"), _files(tmp_path / "b")
    assert a == b and set(a) == {"walk.csv", "sizes.csv"}
    for body in a.values():
        assert body.startswith(b"# config_hash=") and f"seed={SEED}".encode() in body.splitlines()[0]


def test_ensemble_and_report(tmp_path):
    args = ["ensemble", "--pmf", LAW, "--n", "100", "300", "--replicates", "6", "--seed", str(SEED)]
    for sub in ("a", "b"):
        assert main(args + ["--out", str(tmp_path / sub)]) == 0
    a, b = _files(tmp_path / "a"), _files(tmp_path / "b")
    assert a["summary.json"] == b["summary.json"] and a["records.csv"] == b["records.csv"]
    assert "runtime.json" in a
    doc = json.loads(a["summary.json"])
    assert doc["config"]["seed"] == SEED and len(doc["tops"]["300"]) == 6
    assert main(["report", "--summary", str(tmp_path / "a" / "summary.json"), "--out", str(tmp_path / "r")]) == 0
    rep = _files(tmp_path / "r")
    assert rep["report.csv"].startswith(f"# config_hash={doc['config_hash']} seed={SEED}".encode())


def test_ensemble_config_file(tmp_path):
    cfg = {"law": {"pmf": {"1": 0.75, "3": 0.25}}, "n_list": [50], "replicates": 3, "seed": SEED}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    assert main(["ensemble", "--config", str(path), "--out", str(tmp_path / "o")]) == 0
    assert main(["ensemble", "--config", str(path), "--replicates", "0"]) == 2


def test_ensemble_ks_check_exit_code(tmp_path):
    base = ["ensemble", "--pmf", LAW, "--n", "200", "--replicates", "20", "--seed", str(SEED),
            "--ks-against", "multigraph", "--out", str(tmp_path / "o")]
    assert main(base + ["--ks-max", "1.0"]) == 0
    # a KS statistic is at least 1/20 unless the samples coincide exactly
    assert main(base + ["--ks-max", "0.0"]) == 1
    assert main(["report", "--summary", str(tmp_path / "o" / "summary.json")]) == 1


def test_limit_outputs(tmp_path):
    args = ["limit", "--pmf", LAW, "--horizon", "2", "--dt", "0.01", "--replicates", "3", "--seed", str(SEED)]
    for sub in ("a", "b"):
        assert main(args + ["--out", str(tmp_path / sub)]) == 0
    a, b = _files(tmp_path / "a"), _files(tmp_path / "b")
    assert a == b
    rows = a["path.csv"].decode().splitlines()
    assert rows[1] == "t,value" and rows[2] == "0.0,0.0" and len(rows) == 2 + 201


def test_limit_power_law(tmp_path):
    assert main(["limit", "--power-law-gamma", "3.5", "--horizon", "1", "--dt", "0.01", "--eps", "0.05",
                 "--out", str(tmp_path)]) == 0


def test_poisson_check(tmp_path, capsys):
    code = main(["poisson-check", "--pmf", LAW, "--n", "1e4", "1e5", "1e6", "--replicates", "2000",
                 "--seed", str(SEED), "--out", str(tmp_path)])
    out = capsys.readouterr().out
    assert "drift ladder decreasing: True" in out
    assert code == 0
    assert os.path.exists(tmp_path / "poisson_check.json")


def test_noncritical_explore_warns(capsys):
    assert main(["explore", "--pmf", '{"1":0.5,"3":0.5}', "--n", "10"]) == 0
    assert "not critical" in capsys.readouterr().err


def test_tagged_checks(tmp_path, capsys):
    cfg = {"law": {"pmf": {"1": 0.75, "3": 0.25}}, "n_list": [200], "replicates": 20, "seed": SEED,
           "checks": [{"tag": "loose", "against": "multigraph", "ks_max": 1.0},
                      {"tag": "strict", "against": "multigraph", "ks_max": 0.0}]}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    assert main(["ensemble", "--config", str(path), "--tag", "loose", "--out", str(tmp_path / "a")]) == 0
    assert main(["ensemble", "--config", str(path), "--out", str(tmp_path / "b")]) == 1
    doc = json.loads((tmp_path / "b" / "summary.json").read_text())
    assert [c["tag"] for c in doc["checks"]] == ["loose", "strict"]
    assert [c["pass"] for c in doc["checks"]] == [True, False]
    bad = dict(cfg, checks=[{"tag": "x", "against": "nope"}])
    path.write_text(json.dumps(bad))
    assert main(["ensemble", "--config", str(path)]) == 2
