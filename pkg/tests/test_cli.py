import json
from pathlib import Path

import pytest

from octagen.cli import main
from octagen.rotsys import parse_rotsys, trace_faces

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_derive_builtin(capsys, tmp_path):
    out_file = tmp_path / "o18.rotsys"
    code, out, _ = run(capsys, "derive", "--log", "builtin:z18", "--out", str(out_file))
    assert code == 0
    assert "O_18" in out and "status=0" in out
    faces = trace_faces(parse_rotsys(out_file.read_text()))
    assert (faces.E, faces.genus) == (144, 16)


def test_derive_index2_fixture(capsys):
    code, out, _ = run(capsys, "derive", "--log", str(FIXTURES / "z24-index2.log"), "--index2")
    assert code == 0 and "O_24" in out


def test_derive_log_with_zero_entry_is_usage_error(capsys, tmp_path):
    bad = tmp_path / "bad.log"
    bad.write_text("log 1\nmod 6\nrow 0 1 2 4\n")
    code, _, err = run(capsys, "derive", "--log", str(bad))
    assert code == 2 and "error" in err


def test_derive_wrong_row_count(capsys):
    code, _, _ = run(capsys, "derive", "--log", str(FIXTURES / "z24-index2.log"))
    assert code == 2


def test_derive_non_triangular_is_failure(capsys, tmp_path):
    path = tmp_path / "swap.log"
    path.write_text("log 1\nmod 18\nrow 6 12 5 2 4 15 13 17 7 3 16 10 11 14 1 8\n")
    code, out, _ = run(capsys, "derive", "--log", str(path))
    assert code == 1 and "FAIL" in out


def test_augment_rejects_bad_n(capsys):
    code, _, err = run(capsys, "augment", "--n", "20")
    assert code == 2 and "multiple of 6" in err


def test_augment_writes_every_step(capsys, tmp_path):
    code, out, _ = run(capsys, "augment", "--n", "18", "--outdir", str(tmp_path))
    assert code == 0
    files = sorted(tmp_path.iterdir())
    assert len(files) == 4
    genera = [trace_faces(parse_rotsys(f.read_text())).genus for f in files]
    assert genera[0] == 16 and genera[-1] == 18


def test_search_budget_too_small_fails(capsys):
    code, out, _ = run(capsys, "search", "--n", "36", "--budget", "10")
    assert code == 1 and "not found" in out


def test_search_writes_cascade_that_verifies(capsys, tmp_path):
    path = tmp_path / "z30.cascade"
    code, _, _ = run(capsys, "search", "--n", "30", "--out", str(path))
    assert code == 0
    code, out, _ = run(capsys, "verify", str(path))
    assert code == 0 and "derived O_n" in out


def test_search_bad_n_is_usage_error(capsys):
    assert run(capsys, "search", "--n", "20")[0] == 2


def test_verify_fixture_json_mirrors_text(capsys):
    path = str(FIXTURES / "z18.cascade")
    code, text, _ = run(capsys, "verify", path)
    code_j, js, _ = run(capsys, "--json", "verify", path)
    assert code == code_j == 0
    data = json.loads(js)
    assert data["command"] == "verify" and data["status"] == 0
    names = [st["name"] for st in data["steps"]]
    assert all(name in text for name in names)
    assert all(st["verdict"] == "pass" for st in data["steps"])
    assert data["inputs"]["log"] in text


def test_verify_missing_file(capsys, tmp_path):
    assert run(capsys, "verify", str(tmp_path / "nope.cascade"))[0] == 2


def test_trace_with_faces(capsys, tmp_path):
    path = tmp_path / "k4.rotsys"
    path.write_text("rotsys 1\nn 4\nv 0: 1 3 2\nv 1: 0 2 3\nv 2: 0 3 1\nv 3: 0 1 2\n")
    code, out, _ = run(capsys, "--json", "trace", str(path), "--faces")
    assert code == 0
    data = json.loads(out)
    assert data["steps"][0]["genus"] == 0
    assert sum(1 for st in data["steps"] if st["name"].startswith("face ")) == 4


def test_trace_malformed(capsys, tmp_path):
    path = tmp_path / "bad.rotsys"
    path.write_text("rotsys 1\nn 2\nv 0: 5\n")
    assert run(capsys, "trace", str(path))[0] == 2


def test_table_18(capsys):
    code, out, _ = run(capsys, "--json", "table", "--n", "18")
    assert code == 0
    steps = json.loads(out)["steps"]
    assert len(steps) == 10
    assert [st["formula"] for st in steps] == [18, 18, 18, 17, 17, 17, 17, 17, 17, 16]


def test_table_bad_n(capsys):
    assert run(capsys, "table", "--n", "20")[0] == 2


def test_crossings_writes_certificates(capsys, tmp_path):
    certs = tmp_path / "c.txt"
    code, out, _ = run(capsys, "crossings", "--n", "18", "--certs", str(certs))
    assert code == 0
    lines = [ln for ln in certs.read_text().splitlines() if ln.startswith("xing")]
    assert len(lines) == 3 + 9


@pytest.mark.parametrize("argv", [[], ["nonsense"], ["augment"]])
def test_usage_errors(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_help_exits_zero(capsys):
    assert run(capsys, "--help")[0] == 0
