import json

import numpy as np
import pytest

from ambiguity.cli import main, parse_setting
from ambiguity.domains import Assignment, KnobDomain, DetectorDomain
from ambiguity.errors import InvalidInput
from ambiguity.explanations import explain_sqrt
from ambiguity.measures import ParamProbMeasure
from ambiguity.quantum import pure_state
from ambiguity.sampling import random_measure
from ambiguity.serialization import (
    domain_to_json,
    dumps,
    explanation_to_json,
    matrix_to_json,
    measure_to_json,
)

from conftest import detector, knob


@pytest.fixture
def write(tmp_path):
    def _write(name, obj):
        path = tmp_path / name
        path.write_text(dumps(obj))
        return str(path)

    return _write


@pytest.fixture
def mu_file(write, rng):
    mu = random_measure(KnobDomain([knob("A", 2)]), DetectorDomain([detector("D", 2)]), rng)
    return mu, write("mu.json", measure_to_json(mu))


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parse_setting():
    assert parse_setting("A=x, B=y") == Assignment({"A": "x", "B": "y"})
    assert parse_setting('{"A": "x"}') == Assignment({"A": "x"})
    with pytest.raises(InvalidInput):
        parse_setting("A")


def test_usage_errors_exit_1(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["no-such-verb"])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 1
    assert run(capsys, "bb84", "--tol", "-1")[0] == 1


def test_help_exits_0_and_names_formulas(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["helstrom", "--help"])
    assert exc.value.code == 0
    assert "positive part of rho1 - rho2" in capsys.readouterr().out


def test_lattice_meet_of_disjoint_is_empty(capsys, write):
    a = write("a.json", domain_to_json(KnobDomain([knob("A", 2)])))
    b = write("b.json", domain_to_json(KnobDomain([knob("B", 2)])))
    code, out, _ = run(capsys, "lattice", "meet", a, b)
    assert code == 0 and json.loads(out) == {"knobs": []}
    code, out, _ = run(capsys, "lattice", "join", a, b)
    assert [k["name"] for k in json.loads(out)["knobs"]] == ["A", "B"]


def test_lattice_name_clash_exits_2(capsys, write):
    a = write("a.json", domain_to_json(KnobDomain([knob("A", 2)])))
    b = write("b.json", domain_to_json(KnobDomain([knob("A", 3)])))
    assert run(capsys, "lattice", "join", a, b)[0] == 2


def test_missing_file_exits_2(capsys, tmp_path):
    code, _, err = run(capsys, "topology", str(tmp_path / "nope.json"))
    assert code == 2 and "invalid input" in err


def test_bad_measure_exits_2(capsys, write):
    kd = KnobDomain([knob("A", 1)])
    dd = DetectorDomain([detector("D", 2)])
    obj = measure_to_json(ParamProbMeasure(kd, dd, [[0.5, 0.5]]))
    obj["entries"][0]["p"] = 0.9
    assert run(capsys, "topology", write("bad.json", obj))[0] == 2


def test_verify_pass_and_mismatch(capsys, write, mu_file, rng):
    mu, path = mu_file
    good = write("good.json", explanation_to_json(explain_sqrt(mu)))
    code, out, _ = run(capsys, "verify", "--expl", good, "--mu", path)
    assert code == 0 and json.loads(out)["explains"] is True
    other = random_measure(mu.knob_domain, mu.detector_domain, rng)
    bad = write("bad.json", explanation_to_json(explain_sqrt(other)))
    code, out, _ = run(capsys, "verify", "--expl", bad, "--mu", path)
    assert code == 3 and json.loads(out)["explains"] is False


def test_explain_then_trace_rule_round_trip(capsys, write, mu_file):
    mu, path = mu_file
    for method in ("measurement", "state", "sqrt"):
        code, out, _ = run(capsys, "explain", path, "--method", method)
        assert code == 0
        expl = write(f"{method}.json", json.loads(out))
        code, out, _ = run(capsys, "trace-rule", expl)
        entries = json.loads(out)["entries"]
        table = np.array([e["p"] for e in entries]).reshape(mu.table.shape)
        np.testing.assert_allclose(table, mu.table, atol=1e-12)


def test_cycle_verb(capsys, mu_file):
    _, path = mu_file
    code, out, _ = run(capsys, "cycle", "--mu", path)
    rep = json.loads(out)
    assert code == 0
    assert rep["conflict"] is True and rep["D"] == 0.0 and rep["DPrime"] == 1.0
    code, out, _ = run(capsys, "cycle", "--mu", path, "--rounds", "2", "--reject", "keep-second")
    assert [r["settings"]["base"] for r in json.loads(out)["rounds"]] == [2, 8]


def test_cycle_without_inequivalent_pair_exits_3(capsys, write, mu_file):
    mu, path = mu_file
    e = write("e.json", explanation_to_json(explain_sqrt(mu)))
    assert run(capsys, "cycle", "--mu", path, "--expl", e, "--expl2", e)[0] == 3


def test_bound_verb(capsys, write, mu_file):
    mu, _ = mu_file
    e = write("e.json", explanation_to_json(explain_sqrt(mu)))
    code, out, _ = run(capsys, "bound", e)
    assert code == 0 and json.loads(out)["holds"] is True
    code, out, _ = run(capsys, "bound", e, "--pair", "A=a0", "A=a1")
    assert len(json.loads(out)["pairs"]) == 1
    assert run(capsys, "bound", e, "--pair", "A=a0", "A=zz")[0] == 2


def test_helstrom_verb_seeded(capsys, write, monkeypatch):
    r1 = write("r1.json", matrix_to_json(pure_state([1, 0])))
    r2 = write("r2.json", matrix_to_json(pure_state([1, 1])))
    code, out, _ = run(capsys, "helstrom", r1, r2, "--seed", "7")
    rep = json.loads(out)
    assert code == 0
    assert rep["helstromError"] == pytest.approx(0.5 * (1 - 2 ** -0.5), abs=1e-12)
    assert rep["randomCheck"]["seed"] == 7 and rep["randomCheck"]["exceeded"] is False
    monkeypatch.setenv("AMBIGUITY_SEED", "7")
    assert run(capsys, "helstrom", r1, r2)[1] == out
    monkeypatch.setenv("AMBIGUITY_SEED", "x")
    assert run(capsys, "helstrom", r1, r2)[0] == 1


def test_topology_fold_and_marginalize(capsys, write):
    from ambiguity.qkd import bb84_build

    path = write("bb84.json", measure_to_json(bb84_build().mu))
    code, out, _ = run(capsys, "topology", path)
    assert json.loads(out)["classCount"] == 3
    code, out, _ = run(capsys, "topology", path, "--fold", "bob")
    assert json.loads(out)["classCount"] == 4
    code, out, _ = run(capsys, "check-prop47", path, "--state-knobs", "alice")
    assert json.loads(out)["possible"] is True
    assert run(capsys, "marginalize", path, "--drop", "click")[0] == 2


def test_bb84_deterministic_and_text(capsys, tmp_path):
    first = run(capsys, "bb84")[1]
    assert run(capsys, "bb84")[1] == first
    rep = json.loads(first)
    assert rep["alternative"]["explains"] is True
    out = tmp_path / "r.txt"
    assert run(capsys, "bb84", "--format", "text", "--out", str(out))[0] == 0
    assert "helstrom" in out.read_text().lower()


def test_metdev_verb(capsys, write, mu_file, rng):
    mu, path = mu_file
    other = write("o.json", measure_to_json(random_measure(mu.knob_domain, mu.detector_domain, rng)))
    code, out, _ = run(capsys, "metdev", path, other)
    rep = json.loads(out)
    assert code == 0 and rep["metdev"] <= 2 * rep["uniformMetric"] + 1e-15
