import io
import json
import subprocess
import sys
from pathlib import Path

from modelshift.cli import EXIT_FAIL, EXIT_OK, EXIT_PARSE, EXIT_RESOURCE, run
from modelshift.corpus import SIGMA
from modelshift.rational import transducer_F

DATA = Path(__file__).parent / "data"
FIELDS = ["name", "model", "holds", "counterexample", "decoded_observation", "states", "transitions", "millis"]


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run([str(a) for a in argv], out, err)
    return code, out.getvalue(), err.getvalue()


def records(text):
    return [json.loads(line) for line in text.splitlines()]


def test_levels_file():
    code, out, _ = call("--format", "machine", DATA / "levels.csp")
    assert code == EXIT_FAIL
    got = [(r["model"], r["holds"]) for r in records(out)]
    assert got == [
        ("T", True), ("F", False),
        ("F", True), ("R", False),
        ("R", True), ("A", True), ("RT", False), ("FL", False),
        ("R", True), ("RT", True), ("A", False), ("FL", False),
    ]  # fmt: skip


def test_field_order():
    _, out, _ = call("--format", "machine", DATA / "levels.csp")
    for r in records(out):
        assert list(r) == FIELDS
        assert (r["counterexample"] is None) == r["holds"]


def test_all_hold_exits_zero():
    code, out, _ = call(DATA / "holds.csp")
    assert code == EXIT_OK
    assert out.count("holds") == 3


def test_empty_file():
    code, out, err = call(DATA / "empty.csp")
    assert (code, out, err) == (EXIT_OK, "", "")


def test_parse_error():
    code, out, err = call(DATA / "bad.csp")
    assert code == EXIT_PARSE and out == ""
    assert "2:" in err


def test_missing_file():
    assert call(DATA / "nope.csp")[0] == EXIT_PARSE


def test_oracle_agrees():
    for name in ("levels", "timed", "holds"):
        code, out, err = call("--oracle", "--oracle-depth", "4", "--format", "machine", DATA / f"{name}.csp")
        assert all(r["oracle_agrees"] for r in records(out))
        assert "disagrees" not in err


def test_machine_output_is_deterministic():
    def strip(text):
        return [{k: v for k, v in r.items() if k != "millis"} for r in records(text)]

    first = call("--format", "machine", DATA / "levels.csp", DATA / "timed.csp")[1]
    second = call("--format", "machine", DATA / "levels.csp", DATA / "timed.csp")[1]
    assert strip(first) == strip(second)
    assert records(first)[0]["name"].startswith("levels:")


def test_model_override():
    code, out, _ = call("--model-override", "T", "--format", "machine", DATA / "levels.csp")
    assert code == EXIT_OK
    assert {r["model"] for r in records(out)} == {"T"}


def test_state_cap():
    code, _, err = call("--cap", "3", DATA / "levels.csp")
    assert code == EXIT_RESOURCE
    assert "more than 3" in err


def test_discipline_violation_is_input_error(tmp_path):
    f = tmp_path / "untimed.csp"
    f.write_text("alphabet a\nassert STOP [= [TF] STOP\n")
    code, _, err = call(f)
    assert code == EXIT_PARSE
    assert "tock" in err


def test_transducer(tmp_path):
    t = tmp_path / "failures.txt"
    t.write_text(transducer_F(list(SIGMA)).dumps())
    f = tmp_path / "pairs.csp"
    f.write_text("alphabet a, b\nassert a -> STOP [= [T] (a -> STOP) |~| STOP\nassert a -> STOP |~| STOP [= [T] a -> STOP\n")
    code, out, _ = call("--transducer", t, "--format", "machine", f)
    assert code == EXIT_FAIL
    assert [r["holds"] for r in records(out)] == [False, True]
    assert {r["model"] for r in records(out)} == {"rational"}


def test_bad_transducer(tmp_path):
    t = tmp_path / "broken.txt"
    t.write_text("left: a\n0 x 1\n")
    assert call("--transducer", t, DATA / "holds.csp")[0] == EXIT_PARSE


def test_dump_lts(tmp_path):
    dump = tmp_path / "lts.txt"
    call("--dump-lts", dump, DATA / "holds.csp")
    text = dump.read_text()
    assert text.count("# assert") == 3


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "modelshift", str(DATA / "holds.csp")], capture_output=True, text=True)
    assert res.returncode == 0
    assert "holds" in res.stdout
