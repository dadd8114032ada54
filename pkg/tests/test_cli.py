import io
import json
import subprocess
import sys

import pytest
from hypothesis import given, strategies as st

from flagforge.cli import run
from flagforge.exactring import LocalizedElement, Polynomial
from flagforge.flagmatrix import master_ring
from flagforge.freealg import lift
from flagforge.serialize import (
    localized_from_json,
    localized_to_json,
    nc_from_json,
    nc_to_json,
    polynomial_from_json,
    polynomial_to_json,
    sequence_from_json,
)

from gr24_fixtures import GR24, chart

QUADRIC = [["1", "1", [["y0", 1], ["y5", 1]]], ["-1", "1", [["y1", 1], ["y4", 1]]],
           ["1", "1", [["y2", 1], ["y3", 1]]]]


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def test_atlas_gr24():
    code, out, _ = call("atlas", "--d", "2", "--n", "4")
    doc = json.loads(out)
    assert code == 0 and doc["schema"] == "flagforge/1"
    assert doc["count"] == 6 and doc["dimension"] == 4
    assert doc["labels"] == ["1,2", "1,3", "1,4", "2,3", "2,4", "3,4"]


def test_realize_gr24_chart():
    code, out, _ = call("realize", "--chart", "1,3", "--d", "2", "--n", "4")
    doc = json.loads(out)
    assert code == 0
    assert doc["display"] == [["1", "-z23^-1*z13", "0", "-z23^-1*z13*z24 + z14"],
                              ["0", "z23^-1", "1", "z23^-1*z24"]]
    assert doc["matrix"]["entries"][1][1] == {"numerator": [["1", "1", []]], "denominator": [["w1_13", 1]]}
    assert doc["characteristic_map"]["map"] == {"1": 1, "2": 3, "3": 2, "4": 4}


def test_realize_flag_chart_syntax():
    code, out, _ = call("realize", "--chart", "1;1,3", "--d", "1,2", "--n", "3")
    assert code == 0
    assert json.loads(out)["display"] == [["1", "z12", "z13"], ["0", "z23^-1", "1"]]


def test_transition_and_master_ring():
    code, out, _ = call("transition", "--from", "1,2", "--to", "3,4")
    doc = json.loads(out)
    assert code == 0 and doc["localization"] == ["w1_34"]
    assert doc["coordinate_map"]["z13"]["text"] == "(z13*z24 - z14*z23)^-1*z24"
    code, out, _ = call("master-ring", "--d", "1,2", "--n", "3")
    assert [m["name"] for m in json.loads(out)["minors"]] == ["w1_2", "w1_3", "w2_13", "w2_23"]


def test_verify_all_fl123():
    code, out, _ = call("verify", "--all", "--d", "1,2", "--n", "3")
    doc = json.loads(out)
    assert code == 0 and doc["passed"]
    assert {c["check"] for c in doc["checks"]} >= {"cocycle", "soft-scheme", "lift-section", "numeric-roundtrip"}


def test_verify_cocycle_threads_are_deterministic(monkeypatch):
    _, serial, _ = call("verify-cocycle", "--exhaustive", "--d", "1,2", "--n", "3")
    monkeypatch.setenv("FLAGFORGE_THREADS", "4")
    code, parallel, _ = call("verify-cocycle", "--exhaustive", "--d", "1,2", "--n", "3")
    assert code == 0 and serial == parallel
    assert json.loads(serial)["triples"] == 216


def test_output_is_byte_stable(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    call("soft-scheme", "--convention", "union", "--output", str(a))
    call("soft-scheme", "--convention", "union", "--output", str(b))
    assert a.read_bytes() == b.read_bytes()
    assert json.loads(a.read_text())["report"]["ok"]


def test_plucker_lift_subscheme(tmp_path):
    q = tmp_path / "q.json"
    q.write_text(json.dumps(QUADRIC))
    code, out, _ = call("plucker", "--chart", "2,4", "--poly", str(q))
    assert code == 0 and json.loads(out)["pullback"]["text"] == "0"
    fermat = tmp_path / "f.json"
    fermat.write_text(json.dumps([["1", "1", [[f"y{i}", 4]]] for i in range(6)]))
    code, out, _ = call("subscheme", "--hypersurface", str(fermat))
    assert code == 0 and json.loads(out)["report"]["ok"]
    expr = tmp_path / "e.json"
    expr.write_text(json.dumps({"numerator": [["1", "1", [["z14", 1], ["z23", 1]]], ["-1", "1", [["z13", 1], ["z24", 1]]]],
                                "denominator": [["w1_13", 1]]}))
    code, out, _ = call("lift", "--expr", str(expr))
    doc = json.loads(out)
    assert code == 0 and doc["section_ok"] and doc["lift"]["text"] == "-w1_13*z13*z24 + z14"
    code, out, _ = call("soften")
    assert code == 0 and all(json.loads(out)["softens"].values())


@pytest.mark.parametrize("argv", [
    ["realize", "--chart", "1,5"],
    ["realize", "--chart", "1,3", "--d", "2,1"],
    ["atlas", "--d", "x"],
    ["atlas", "--bogus"],
    ["transition", "--from", "1,2"],
    ["plucker", "--chart", "1;1,2", "--d", "1,2", "--n", "3", "--poly", "/nonexistent.json"],
    ["lift", "--expr", "/nonexistent.json"],
    ["verify"],
])
def test_usage_errors_exit_2(argv):
    code, out, err = call(*argv)
    assert code == 2 and out == ""


def test_non_grassmannian_plucker_is_a_usage_error(tmp_path):
    q = tmp_path / "q.json"
    q.write_text(json.dumps(QUADRIC))
    code, _, err = call("plucker", "--chart", "1;1,2", "--d", "1,2", "--n", "3", "--poly", str(q))
    assert code == 2 and "Grassmannian" in err


def test_bad_polynomial_file(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps([["1", "1", [["y9", 1]]]]))
    code, _, err = call("plucker", "--chart", "1,2", "--poly", str(bad))
    assert code == 2 and err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "flagforge", "atlas", "--d", "1,2", "--n", "3"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and json.loads(proc.stdout)["count"] == 6


R = master_ring(GR24)


@given(st.dictionaries(st.tuples(*[st.integers(0, 2)] * 4),
                       st.fractions(min_value=-9, max_value=9, max_denominator=7), max_size=5),
       st.dictionaries(st.integers(0, 4), st.integers(0, 2), max_size=3))
def test_serialization_round_trip(terms, den):
    e = LocalizedElement(R, Polynomial(R.registry, terms), den)
    doc = json.loads(json.dumps(localized_to_json(e)))
    assert localized_from_json(doc, R) == e
    p = e.numerator
    assert polynomial_from_json(polynomial_to_json(p), R.registry) == p
    a = lift(e)
    assert nc_from_json(nc_to_json(a), R) == a


def test_sequence_json():
    seq = chart(1, 3)
    assert sequence_from_json(seq.to_json()) == seq
