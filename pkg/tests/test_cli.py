import json

import pytest

from blochfactor.blochcore import BlochFunc
from blochfactor.cli import main
from blochfactor.molecules import WeightedSeq


@pytest.fixture
def files(tmp_path):
    paths = {}
    for name, obj in {"k": BlochFunc.kernel(0.5).to_dict(),
                      "a": WeightedSeq([(1.0, 0.5)]).to_dict(),
                      "b": WeightedSeq([(1.0, 0.5), (0.3, 0.1j)]).to_dict()}.items():
        p = tmp_path / f"{name}.json"
        p.write_text(json.dumps(obj))
        paths[name] = str(p)
    return paths


def _load(path):
    rep = json.loads(open(path).read())
    rep.pop("timestamp")
    return rep


def test_no_arguments_is_error(capsys):
    assert main([]) == 1
    assert "usage" in capsys.readouterr().err


def test_norm_report(files, tmp_path):
    out = tmp_path / "r.json"
    assert main(["norm", "--func", files["k"], "--out", str(out)]) == 0
    rep = _load(out)
    assert rep["status"] == "ok"
    br = rep["result"]["bracket"]
    assert br["lower"] <= 1.0 <= br["certified_upper"]
    assert br["lower"] >= 1 - 1e-3 and br["certified_upper"] <= 1 + 1e-3
    assert len(rep["input_digest"]) == 64


def test_reports_stable_apart_from_timestamp(files, tmp_path):
    outs = []
    for i in range(2):
        out = tmp_path / f"d{i}.json"
        assert main(["dominate", "--a", files["a"], "--b", files["b"], "--seed", "7",
                     "--out", str(out)]) == 0
        outs.append(_load(out))
    assert outs[0] == outs[1]
    assert outs[0]["result"]["dominates"] is True


def test_finding_exits_two(files, tmp_path):
    out = tmp_path / "u.json"
    code = main(["unitary-check", "--func", files["k"], "--c", "0.1", "--budget", "50",
                 "--out", str(out)])
    assert code == 2
    assert _load(out)["status"] == "finding"


def test_missing_file_is_error(tmp_path, capsys):
    assert main(["norm", "--func", str(tmp_path / "nope.json"), "--out",
                 str(tmp_path / "x.json")]) == 1


def test_malformed_json_is_error(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["norm", "--func", str(bad), "--out", str(tmp_path / "x.json")]) == 1


def test_unknown_config_key(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"bogus": 1}))
    assert main(["norm", "--config", str(cfg)]) == 1


def test_config_file_supplies_inputs(files, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"inputs": {"a": files["b"], "b": files["a"]}, "seed": 3}))
    out = tmp_path / "r.json"
    assert main(["dominate", "--config", str(cfg), "--out", str(out)]) == 0
    rep = _load(out)
    assert rep["seed"] == 3 and rep["result"]["dominates"] is False


def test_csv_output(files, tmp_path):
    out = tmp_path / "r.csv"
    assert main(["norm", "--func", files["k"], "--format", "csv", "--out", str(out)]) == 0
    lines = open(out).read().splitlines()
    assert lines[0] == "key,value"
    assert any(line.startswith("result.bracket.lower,") for line in lines)


def test_bad_flag_is_error():
    assert main(["norm", "--no-such-flag"]) == 1


def test_equal_sequences_dominate_by_mass(files, tmp_path):
    out = tmp_path / "r.json"
    assert main(["dominate", "--a", files["b"], "--b", files["b"], "--out", str(out)]) == 0
    res = _load(out)["result"]
    assert res["dominates"] is True and res["route"] == "mass"


def test_gamma2_rank_one(tmp_path):
    f = tmp_path / "rank1.json"
    f.write_text(BlochFunc.monomial(2, [3.0, 4.0]).to_json())
    out = tmp_path / "r.json"
    assert main(["gamma2", "--func", str(f), "--budget", "100", "--out", str(out)]) == 0
    res = _load(out)["result"]
    target = 5 * 4 / (3 * 3 ** 0.5)
    assert res["gamma2_upper"] == pytest.approx(target, rel=0.02)
    assert res["gamma2_lower"] <= res["gamma2_upper"]
    assert all(c["pass"] for c in res["checks"])
