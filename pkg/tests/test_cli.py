import io
import json

import pytest

from opacsynth.cli import main

SECRET_FREE = """states: 0 1
initial: 0
observable: o
controllable: c
transitions:
0 o 1
0 c 1
"""

CHAIN = """states: 0 1 2
initial: 0
secret: 1
observable: o
transitions:
0 o 1
1 o 2
"""


def cli(*argv, stdin=""):
    out = io.StringIO()
    code = main(list(argv), stdin=io.StringIO(stdin), stdout=out)
    return code, out.getvalue()


@pytest.fixture
def plant_file(tmp_path):
    def write(text, name="plant.des"):
        p = tmp_path / name
        p.write_text(text)
        return str(p)
    return write


def test_verify_fig1():
    code, out = cli("verify", "fig1_G")
    assert code == 1
    doc = json.loads(out)
    assert doc["witness"] == {"alpha_prime": ["o1"], "alpha_beta": ["o1", "o2"], "estimate": ["5"]}


def test_verify_opaque_inputs(plant_file):
    assert cli("verify", "fig1_G_disabled_b.des")[0] == 0
    code, out = cli("verify", plant_file(SECRET_FREE), "--format", "text")
    assert (code, out) == (0, "opaque\n")


def test_verify_text_witness():
    code, out = cli("verify", "fig1_G", "--format", "text")
    assert code == 1 and "{5}" in out


def test_parse_error_exit_code(plant_file):
    assert cli("verify", plant_file("states: 0\ninitial: 9\n"))[0] == 2
    assert cli("verify", "no/such/file.des")[0] == 2
    assert cli("bogus-command")[0] == 2
    assert cli("synth-quant", "fig5_G", "--n-max", "0")[0] == 2
    assert cli("verify", "fig1_G", "--simplify", "maybe")[0] == 2


def test_synth_qual_json():
    code, out = cli("synth-qual", "fig1_G")
    doc = json.loads(out)
    assert code == 0 and doc["solvable"]
    first = doc["supervisor"]["memory_states"][0]["decision"]
    assert "b" not in first and "a" in first


def test_synth_qual_all_and_formats():
    code, out = cli("synth-qual", "fig1_G", "--chooser", "all")
    assert code == 0 and len(json.loads(out)["supervisors"]) == 2
    code, out = cli("synth-qual", "fig1_G", "--format", "dot", "--chooser", "all")
    assert out.count("digraph") == 2
    code, out = cli("synth-qual", "fig1_G", "--format", "text")
    assert out.startswith("supervisor 1:")
    assert cli("synth-qual", "fig1_G", "--format", "csv")[0] == 2


def test_synth_qual_unsolvable(plant_file):
    code, out = cli("synth-qual", plant_file(CHAIN))
    assert code == 1 and json.loads(out) == {"solvable": False}


def test_synth_qual_opaque_plant_enables_everything(plant_file):
    code, out = cli("synth-qual", plant_file(SECRET_FREE))
    assert code == 0
    assert json.loads(out)["supervisor"]["memory_states"][0]["decision"] == ["c", "o"]


def test_resource_cap():
    assert cli("synth-qual", "fig1_G", "--max-states", "3")[0] == 3
    assert cli("synth-quant", "fig5_G", "--n-max", "5", "--max-states", "3")[0] == 3


def test_synth_quant_fig5(tmp_path):
    csv_path = tmp_path / "values.csv"
    code, out = cli("synth-quant", "fig5_G", "--n-max", "5", "--values", str(csv_path), "--reduce", "off")
    doc = json.loads(out)
    assert code == 0
    assert doc["value"] == 2 and doc["stable_round"] == 10
    assert [m["budget"] for m in doc["supervisor"]["memory_states"]] == [2, 2, 2, 2, 0]
    rows = csv_path.read_text().splitlines()
    assert rows[1].startswith("Y0,0,0,0,0,")
    assert cli("synth-quant", "fig5_G", "--n-max", "5", "--format", "csv", "--reduce", "off")[1] == csv_path.read_text()


def test_synth_quant_other_outputs(plant_file):
    assert json.loads(cli("synth-quant", "fig1_G", "--n-max", "5")[1])["value"] == 0
    code, out = cli("synth-quant", plant_file(SECRET_FREE), "--n-max", "3", "--format", "text")
    assert code == 0 and "worst-case cost 0" in out
    assert cli("synth-quant", "fig5_G", "--n-max", "5", "--format", "dot")[1].startswith("digraph")


def test_synth_quant_infinite(plant_file):
    loop = "states: 0 1\ninitial: 0\nsecret: 1\nobservable: o\ntransitions:\n0 o 1\n1 o 1\n"
    code, out = cli("synth-quant", plant_file(loop), "--n-max", "2")
    assert code == 1 and json.loads(out)["value"] is None


def _optimal_fig5(tmp_path):
    path = tmp_path / "s.json"
    assert cli("synth-quant", "fig5_G", "--n-max", "5", "--output", str(path))[0] == 0
    return str(path)


def test_simulate_walkthrough(tmp_path):
    sup = _optimal_fig5(tmp_path)
    code, out = cli("simulate", "fig5_G", sup, stdin="o1\no2\n")
    recs = [json.loads(line) for line in out.splitlines()]
    assert code == 0
    assert [r["observed"] for r in recs] == [None, "o1", "o2"]
    assert [r["budget"] for r in recs] == [2, 2, 2]
    assert "a" in recs[0]["decision"] and "a" in recs[1]["decision"] and "a" not in recs[2]["decision"]
    assert recs[1]["info"]["current"] == ["2", "3", "6"]
    assert recs[2]["info"]["current"] == ["4", "7"]


def test_simulate_rejections(tmp_path):
    sup = _optimal_fig5(tmp_path)
    code, out = cli("simulate", "fig5_G", sup, stdin="a\no2\n# comment\n\no1\n")
    recs = [json.loads(line) for line in out.splitlines()]
    assert recs[1] == {"rejected": "a", "reason": "not an observable event"}
    assert recs[2] == {"rejected": "o2", "reason": "cannot occur in any current state"}
    assert recs[3]["observed"] == "o1"


def test_simulate_disabled_event(tmp_path, plant_file):
    doc = {"memory_states": [{"id": 0, "decision": ["o"]}], "initial": 0, "transitions": []}
    sup = tmp_path / "only_o.json"
    sup.write_text(json.dumps(doc))
    code, out = cli("simulate", plant_file(SECRET_FREE), str(sup), stdin="c\n")
    assert json.loads(out.splitlines()[1])["rejected"] == "c"


def test_simulate_bad_supervisor(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli("simulate", "fig5_G", str(bad))[0] == 2
    bad.write_text(json.dumps({"memory_states": [], "initial": 3, "transitions": []}))
    assert cli("simulate", "fig5_G", str(bad))[0] == 2


def test_export_dot(tmp_path):
    out_path = tmp_path / "g.dot"
    assert cli("export-dot", "fig1_G", "--output", str(out_path))[0] == 0
    text = out_path.read_text()
    assert text.startswith("digraph") and "doublecircle" in text


def test_fixture_check():
    code, out = cli("fixture-check")
    assert code == 0
    assert out.splitlines() == ["fig1_G: ok (26 checked, 2 unconstrained)", "fig5_G: ok (65 checked, 3 unconstrained)"]


@pytest.mark.parametrize("argv", [
    ("verify", "fig1_G"),
    ("synth-qual", "fig1_G", "--chooser", "all"),
    ("synth-quant", "fig5_G", "--n-max", "5", "--format", "csv"),
    ("export-dot", "fig5_G"),
])
def test_repeatable_output(argv):
    assert cli(*argv) == cli(*argv)
