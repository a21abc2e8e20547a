import json

import pytest

from fuchsian_coding import cli


def run(capsys, *args):
    code = cli.main(list(args))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("name", ["free-f2-ideal-quad", "genus2-octagon", "triangle-special-case"])
def test_validate_catalog(capsys, name):
    code, out, _ = run(capsys, "validate", "--catalog", name)
    assert code == 0 and "pass" in out


def test_validate_corrupted(capsys, tmp_path):
    from fuchsian_coding.scheme import load_catalog

    d = load_catalog("genus2-octagon").to_dict()
    d["vertex_classes"]["v"]["petals"] = 3
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(d))
    code, out, _ = run(capsys, "validate", "--scheme", str(p))
    assert code == 1 and "FAIL" in out
    code, _, err = run(capsys, "coding", "--scheme", str(p))
    assert code == 2 and "invalid" in err


def test_coding_free(capsys):
    code, out, _ = run(capsys, "coding", "--catalog", "free-f2-ideal-quad")
    assert code == 0
    assert "total  4" in out and "lambda: 3.0" in out


def test_coding_octagon_snapshot(capsys, tmp_path):
    out_json = tmp_path / "c.json"
    out_csv = tmp_path / "c.csv"
    code, out, _ = run(capsys, "coding", "--catalog", "genus2-octagon", "--out", str(out_json), "--csv", str(out_csv))
    assert code == 0
    assert out.splitlines()[2:] == [
        "A0     8", "AL     40", "AR     40", "ALR    32", "ARL    32", "B      8", "C      16",
        "D      8", "EL     8", "ER     8", "total  200", "start: 48", "final: 48", "reversible: True",
        "strongly_connected: True", "period: 1", "positivity_index: 8", "lambda: 6.979835779216"]
    d = json.loads(out_json.read_text())
    assert len(d["states"]) == 200
    assert out_csv.read_text().splitlines()[0] == "type,states"


def test_sphere(capsys):
    code, out, _ = run(capsys, "sphere", "--catalog", "free-f2-ideal-quad", "--n", "6")
    assert code == 0
    rows = [r.split(",") for r in out.splitlines()[1:]]
    assert all(r[1] == r[2] == str(4 * 3 ** (int(r[0]) - 1)) and r[3] == "true" for r in rows)
    code, out, _ = run(capsys, "sphere", "--catalog", "genus2-octagon", "--n", "5")
    assert code == 0 and out.count("true") == 5
    code, out, err = run(capsys, "sphere", "--catalog", "triangle-special-case", "--n", "3")
    assert code == 0 and "counts-only" in err


def test_parry_csv(capsys):
    code, out, err = run(capsys, "parry", "--catalog", "free-f2-ideal-quad")
    assert code == 0 and "lambda = 3" in err
    assert out.splitlines()[1] == "A0(a),1,0.25,0.25"


def test_simulate_parity_matches_baseline(capsys):
    code, out, _ = run(capsys, "simulate", "--catalog", "free-f2-ideal-quad", "--action", "free-parity", "--n", "4")
    assert code == 0
    for line in out.splitlines()[1:]:
        n, sup, l1, size = line.split(",")
        assert float(sup) <= 1e-12 and float(l1) <= 1e-12


def test_outputs_reproducible(capsys):
    args = ("simulate", "--catalog", "genus2-octagon", "--action", "octagon-s5", "--n", "3", "--seed", "4")
    assert run(capsys, *args)[1] == run(capsys, *args)[1]


def test_verify_quick(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "free", "--suite", "reversibility")
    assert code == 0 and out.count("PASS") == 2


def test_oracle_listing(capsys):
    code, out, err = run(capsys, "oracle", "--catalog", "free-f2-ideal-quad", "--radius", "2", "--audit")
    assert code == 0
    assert out.splitlines()[0] == "element_id,distance,word" and len(out.splitlines()) == 18
    assert "separation" in err


def test_oracle_word_svg(capsys, tmp_path):
    svg = tmp_path / "t.svg"
    code, out, _ = run(capsys, "oracle", "--catalog", "genus2-octagon", "--radius", "4", "--word", "aBCd",
                       "--svg", str(svg))
    assert code == 0 and json.loads(out)["levels"][1] == [["a"], ["B"]]
    assert svg.read_text().startswith("<svg")


@pytest.mark.parametrize("args", [("bogus",), ("verify", "--suite", "nope"), ("sphere", "--n", "0"),
                                  ("oracle", "--catalog", "triangle-special-case"),
                                  ("simulate", "--action", "missing.json")])
def test_usage_errors(capsys, args):
    assert run(capsys, *args)[0] == 2
