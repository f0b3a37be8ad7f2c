import csv
import io
import json
import subprocess
import sys

import pytest

from contactcoh.cli import main


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def test_charnum_values():
    assert run("charnum", "--d", "3", "--a", "8", "--b", "0", "--c", "0") == (0, "12\n")
    assert run("charnum", "--d", "1", "--a", "2", "--b", "0", "--c", "0") == (0, "1\n")


def test_charnum_json():
    code, out = run("charnum", "--d", "2", "--a", "3", "--b", "0", "--c", "1", "--json")
    assert code == 0
    assert json.loads(out) == {"d": 2, "a": 3, "b": 0, "c": 1, "value": "1"}


def test_charnum_missing_data():
    code, out = run("charnum", "--d", "3", "--a", "2", "--b", "6", "--c", "0")
    assert code == 2
    assert json.loads(out)["missing"] == [[3, 2, 6, 0]]


def test_charnum_invalid_key():
    code, _ = run("charnum", "--d", "3", "--a", "2", "--b", "5", "--c", "0")
    assert code == 3


def test_format_flags_are_exclusive():
    with pytest.raises(SystemExit) as exc:
        main(["charnum", "--d", "1", "--a", "2", "--b", "0", "--c", "0", "--json", "--csv"])
    assert exc.value.code == 3


def test_nonpositive_order_rejected():
    with pytest.raises(SystemExit) as exc:
        main(["verify", "pde", "--order", "0"])
    assert exc.value.code == 3


def test_table_degree_two():
    code, out = run("table", "--max-d", "2")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    c0 = [r["value"] for r in rows if r["d"] == "2" and r["c"] == "0"]
    assert c0 == ["1", "2", "4", "4", "2", "1"]
    flags = {(r["a"], r["b"], r["c"]): r["value"] for r in rows if r["d"] == "2" and r["c"] != "0"}
    assert flags[("3", "0", "1")] == "1"
    assert flags[("2", "1", "1")] == "needs-base-data"


def test_table_degree_one():
    code, out = run("table", "--max-d", "1", "--format", "json")
    rows = json.loads(out)
    assert [(r["a"], r["b"], r["c"], r["value"]) for r in rows] == [
        (2, 0, 0, "1"), (1, 1, 0, "0"), (0, 2, 0, "0"), (0, 0, 1, "1")]


def test_table_degree_four_kontsevich_column():
    code, out = run("table", "--max-d", "4", "--c0-only")
    rows = list(csv.DictReader(io.StringIO(out)))
    kont = [r["value"] for r in rows if int(r["a"]) == 3 * int(r["d"]) - 1]
    assert kont == ["1", "1", "12", "620"]
    assert any(r["value"] == "needs-base-data" for r in rows if r["d"] == "3")
    assert all(r["value"] != "needs-base-data" for r in rows if int(r["a"]) >= 3 and r["d"] != "4")


def test_verify_commands():
    for which, order in (("assoc", "5"), ("pde", "6"), ("presentation", "4"), ("quantum", "4")):
        code, out = run("verify", which, "--order", order)
        doc = json.loads(out)
        assert code == 0 and doc["status"] == "pass" and doc["checked"] > 0


def test_verify_pde_lists_skips():
    code, out = run("verify", "pde", "--order", "7")
    doc = json.loads(out)
    assert code == 0 and doc["skipped"]
    assert all(s["missing"] for s in doc["skipped"])


def test_verify_nothing_checkable():
    code, out = run("verify", "pde", "--order", "2")
    assert code == 2


def test_verify_quantum_delta_flag():
    code, out = run("verify", "quantum", "--order", "5", "--delta", "0,1/2,1", "--format", "text")
    assert code == 0 and out.startswith("quantum: pass")


def test_presentation_origin():
    code, out = run("presentation", "--order", "0")
    assert code == 0 and json.loads(out)["xi"] == ["1", "0", "0"]


def test_presentation_missing_data():
    code, out = run("presentation", "--order", "2")
    assert code == 2 and json.loads(out)["missing"]


def test_presentation_quantum_slice():
    code, out = run("presentation", "--order", "2", "--slice", "quantum", "--format", "text")
    assert code == 0
    assert "xi2 = 1/2*y2^2" in out


def test_base_roundtrip(tmp_path):
    path = tmp_path / "base.json"
    code, _ = run("base", "export", "--out", str(path))
    assert code == 0
    doc = json.loads(path.read_text())
    doc["entries"].append({"d": 2, "a": 2, "b": 1, "c": 1, "value": "4"})
    path.write_text(json.dumps(doc))
    code, out = run("base", "import", str(path))
    assert code == 0
    code, out = run("charnum", "--d", "2", "--a", "2", "--b", "1", "--c", "1", "--base", str(path))
    assert (code, out) == (0, "4\n")


def test_corrupt_base_file(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"schema": "charnum-base/1", "entries": [{"d": 1}')
    code, _ = run("charnum", "--d", "1", "--a", "2", "--b", "0", "--c", "0", "--base", str(path))
    assert code == 3
    code, _ = run("presentation", "--order", "0", "--base", str(tmp_path / "absent.json"))
    assert code == 3


def test_wrong_base_value_changes_classical_number(tmp_path):
    # a wrong line value propagates into the conic numbers
    path = tmp_path / "base.json"
    path.write_text(json.dumps({"schema": "charnum-base/1", "entries": [
        {"d": 1, "a": 2, "b": 0, "c": 0, "value": "2"}]}))
    code, out = run("charnum", "--d", "2", "--a", "5", "--b", "0", "--c", "0", "--base", str(path))
    assert code == 0 and out != "1\n"


def test_output_is_byte_stable():
    first = run("verify", "pde", "--order", "6")
    assert run("verify", "pde", "--order", "6") == first
    assert run("table", "--max-d", "3") == run("table", "--max-d", "3")


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "contactcoh", "charnum", "--d", "4", "--a", "11",
                           "--b", "0", "--c", "0"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout == "620\n"
