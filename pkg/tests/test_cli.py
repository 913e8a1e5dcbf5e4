import functools
import io
import json

import pytest

from avgcompact import cli
from avgcompact.battery import corrupt_operator, verify_bounds
from avgcompact.space import grid_space, space_to_document


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def s3_file(tmp_path):
    path = tmp_path / "s3.json"
    path.write_text(json.dumps({"metric": "euclidean", "points": [[0], [1], [2]], "weights": [1, 1, 1]}))
    return str(path)


@pytest.fixture
def grid_file(tmp_path):
    path = tmp_path / "grid.json"
    path.write_text(json.dumps(space_to_document(grid_space(100))))
    return str(path)


def test_diagnose_s3(s3_file):
    code, out, _ = run("diagnose", "--space", s3_file, "--s", "1.0")
    assert code == 0
    doc = json.loads(out)
    assert doc["scales"][0]["gamma"] == 1.5
    assert doc["scales"][0]["prop32"]["net_size"] == 2
    assert len(doc["scales"][0]["star_modulus"]) == 63


def test_diagnose_csv(s3_file):
    code, out, _ = run("diagnose", "--space", s3_file, "--s", "1,2", "--grid", "4", "--csv")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "s,modulus,delta,value,argmax"
    assert len(lines) == 1 + 2 * (3 + 3)


def test_counterexample_linf(grid_file):
    code, out, _ = run("counterexample", "--space", grid_file, "--s", "1", "--mode", "linf")
    assert code == 0
    doc = json.loads(out)
    assert doc["num_centers"] == 21
    assert doc["min_pairwise"] >= 1
    assert doc["status"] == "pass"


def test_counterexample_sweep_without_space():
    code, out, _ = run("counterexample", "--s", "1", "--sweep", "20,40", "--csv")
    assert code == 0
    assert out.splitlines()[1].startswith("20,5,")


def test_counterexample_single_center_has_null_pair(tmp_path):
    path = tmp_path / "small.json"
    path.write_text(json.dumps(space_to_document(grid_space(3))))
    code, out, _ = run("counterexample", "--space", str(path), "--s", "1")
    assert code == 0
    doc = json.loads(out)
    assert doc["min_pairwise"] is None
    assert doc["min_pair"] is None


def test_missing_space_file(tmp_path):
    code, out, err = run("diagnose", "--space", str(tmp_path / "nope.json"), "--s", "1")
    assert code == 2
    assert out == ""
    assert "--space" in err


def test_schema_error_names_field(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"metric": "euclidean", "points": [[0], [1]], "weights": [1, -1]}))
    code, _, err = run("diagnose", "--space", str(path), "--s", "1")
    assert code == 2
    assert "weights[1]" in err


def test_triangle_validation(tmp_path):
    path = tmp_path / "m.json"
    path.write_text(json.dumps({"metric": "matrix", "distance_matrix": [[0, 1, 5], [1, 0, 1], [5, 1, 0]]}))
    assert run("diagnose", "--space", str(path), "--s", "1")[0] == 0
    code, _, err = run("diagnose", "--space", str(path), "--s", "1", "--validate-triangle")
    assert code == 2
    assert "triangle" in err


@pytest.mark.parametrize(
    "argv",
    [
        ["diagnose", "--s", "1"],
        ["diagnose", "--s", "-1"],
        ["diagnose", "--s", "x"],
        ["certify", "--r", "1", "--epsilon", "0.5", "--p", "0.5"],
        ["certify", "--r", "1", "--epsilon", "0.5", "--family", "sample:x"],
        ["certify", "--r", "1", "--epsilon", "0.5", "--subset", "ball:9:1"],
        ["verify-bounds", "--functions", "0"],
        ["operator", "--r", "0"],
    ],
)
def test_bad_flags(s3_file, argv):
    # the first case omits --space on purpose
    if argv != ["diagnose", "--s", "1"]:
        argv = argv + ["--space", s3_file]
    code, _, err = run(*argv)
    assert code == 2
    assert err


def test_unknown_subcommand():
    assert run("frobnicate")[0] == 2


def test_operator_export(s3_file, tmp_path):
    export = tmp_path / "a.txt"
    code, out, _ = run("operator", "--space", s3_file, "--r", "1", "--export", str(export))
    assert code == 0
    doc = json.loads(out)
    assert doc["nnz"] == 7
    assert doc["norm_1"] == pytest.approx(4 / 3)
    assert doc["norm_inf"] == pytest.approx(1.0)
    assert export.read_text().splitlines()[0] == "0 0 0.5"


def test_certify_pass(s3_file, tmp_path):
    fam = tmp_path / "fam.json"
    fam.write_text(json.dumps({"functions": [[c / 10] * 3 for c in range(11)]}))
    code, out, _ = run("certify", "--space", s3_file, "--r", "1", "--p", "inf", "--epsilon", "0.5",
                       "--family", str(fam), "--full")
    assert code == 0
    doc = json.loads(out)
    assert doc["status"] == "pass"
    assert doc["K"] <= 5
    assert len(doc["certificate"]["representatives"]) == doc["K"]


def test_certify_family_file_errors(s3_file, tmp_path):
    fam = tmp_path / "fam.json"
    fam.write_text(json.dumps({"functions": [[1, 2]]}))
    code, _, err = run("certify", "--space", s3_file, "--r", "1", "--epsilon", "0.5", "--family", str(fam))
    assert code == 2
    assert "functions[0]" in err


def test_certify_failure_exit_code(tmp_path):
    h = 1 / 199
    path = tmp_path / "leb.json"
    path.write_text(json.dumps(space_to_document(grid_space(1, h, weight=h))))
    fam = tmp_path / "spikes.json"
    spikes = [[199.0 if j == k else 0.0 for j in range(200)] for k in range(5)]
    fam.write_text(json.dumps(spikes))
    code, out, _ = run("certify", "--space", str(path), "--r", "0.2", "--p", "1", "--epsilon", "0.01",
                       "--family", str(fam), "--grid", "4")
    assert code == 1
    doc = json.loads(out)
    assert doc["status"] == "fail"
    assert doc["threshold"]


def test_verify_bounds_s3(s3_file):
    code, out, _ = run("verify-bounds", "--space", s3_file, "--seed", "42")
    assert code == 0
    assert json.loads(out)["status"] == "pass"


def test_verify_bounds_single_point(tmp_path):
    path = tmp_path / "one.json"
    path.write_text(json.dumps({"metric": "euclidean", "points": [[0.0]]}))
    assert run("verify-bounds", "--space", str(path))[0] == 0


def test_verify_bounds_corrupted_operator(s3_file, monkeypatch):
    monkeypatch.setattr(cli, "verify_bounds", functools.partial(verify_bounds, operator_factory=corrupt_operator))
    code, out, _ = run("verify-bounds", "--space", s3_file, "--seed", "42", "--r", "1")
    assert code == 1
    doc = json.loads(out)
    assert doc["status"] == "fail"
    failed = [c for c in doc["checks"] if c["violations"]]
    assert failed
    assert all(c["witness"] for c in failed)


def test_output_file(s3_file, tmp_path):
    dest = tmp_path / "r.json"
    code, out, _ = run("diagnose", "--space", s3_file, "--s", "1", "-o", str(dest))
    assert code == 0
    assert out == ""
    assert json.loads(dest.read_text())["command"] == "diagnose"


def test_byte_identical_reports(grid_file):
    for argv in (
        ["verify-bounds", "--space", grid_file, "--seed", "7", "--functions", "3"],
        ["certify", "--space", grid_file, "--r", "2", "--epsilon", "0.8", "--family", "sample:20:3", "--full"],
        ["diagnose", "--space", grid_file, "--s", "1", "--grid", "8"],
    ):
        first = run(*argv)
        second = run(*argv)
        assert first == second


def test_dumps_format():
    text = cli.dumps({"a": 0.1, "b": [1, 2.5], "c": float("inf"), "d": {"e": None}})
    assert text == '{\n  "a": 0.10000000000000001,\n  "b": [1, 2.5],\n  "c": null,\n  "d": {\n    "e": null\n  }\n}\n'
