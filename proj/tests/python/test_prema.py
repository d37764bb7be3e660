import json
import pathlib
import subprocess
import sys

import pytest

import prema

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture(scope="module")
def vm1():
    return prema.load(FIXTURES / "vm1" / "prema.json")


def test_check_clean_and_seeded(vm1):
    assert prema.check(vm1)["diagnostics"] == []
    seeded = prema.load(FIXTURES / "seeded" / "prema.json")
    assert prema.check(seeded)["counts"] == {"E001": 5, "E102": 1, "E201": 1}
    assert not seeded.schedulable


def test_missing_document_raises_e002(tmp_path):
    (tmp_path / "prema.json").write_text(json.dumps({"documents": ["gone.md"]}))
    with pytest.raises(prema.PremaError) as info:
        prema.load(tmp_path / "prema.json")
    assert prema.error_code(info.value) == "E002"


def test_model_and_graphs(vm1):
    m = prema.model(vm1)
    assert [sm["variable"] for sm in m["machines"]] == ["vmState"]
    dot = prema.graph(vm1, "state", "vmState")
    assert dot.startswith("digraph")
    for state in ("Pay", "Select", "Beverage"):
        assert f'"{state}"' in dot
    assert "digraph" in prema.graph(vm1, "deps", "vmState", depth=1)
    with pytest.raises(prema.PremaError):
        prema.graph(vm1, "state", "coin_inserted")


def test_simulate_cycle(vm1):
    csv = "cycle,coin_inserted,beverage_selected\n1,True,False\n2,False,True\n3,False,False\n"
    run = prema.simulate(vm1, csv)
    assert run["blocking"] == []
    states = [c["post"]["vmState"] for c in run["trace"]["cycles"]]
    assert states == ["Select", "Beverage", "Pay"]


def test_simulate_division_fault():
    seeded = prema.load(FIXTURES / "seeded" / "prema.json")
    csv = (FIXTURES / "seeded" / "divide_inputs.csv").read_text()
    run = prema.simulate(seeded, csv, ["averaging/"])
    assert run["trace"]["halted"]["code"] == "E301"
    assert run["trace"]["halted"]["cycle"] == 3


def test_testgen_mcdc():
    p = prema.load(FIXTURES / "mcdc" / "prema.json")
    cov = prema.testgen(p)
    assert cov["aggregate"]["fraction_at_100"] == 1.0
    rows = cov["csv"].strip().splitlines()
    assert len(rows) == 1 + 4


def test_verify_verdicts(vm1):
    cex = prema.verify(vm1, "vmState' != Beverage", "vmState == Select")
    assert cex["verdict"] == "COUNTEREXAMPLE"
    assert prema.verify(vm1, "vmState != Beverage or vmState' == Pay")["verdict"] == "VALID"
    assert prema.verify(vm1, runtime_safety=True)["verdict"] == "VALID"


def z3_available():
    try:
        import z3  # noqa: F401
    except ImportError:
        return False
    return True


@pytest.mark.skipif(not z3_available(), reason="z3 not installed")
@pytest.mark.parametrize(
    "prop, assume",
    [
        ("vmState' != Beverage", "vmState == Select"),
        ("vmState != Beverage or vmState' == Pay", ""),
        ("vmState' != Select", ""),
        ("not coin_inserted or vmState != Pay or vmState' == Select", ""),
        ("vmState' == vmState", "not coin_inserted and not beverage_selected"),
    ],
)
def test_smtlib_agrees_with_z3(vm1, prop, assume):
    import z3

    solver = z3.Solver()
    solver.from_string(prema.smtlib(vm1, prop, assume))
    status = solver.check()
    assert status in (z3.sat, z3.unsat)
    z3_verdict = "COUNTEREXAMPLE" if status == z3.sat else "VALID"
    assert prema.verify(vm1, prop, assume)["verdict"] == z3_verdict


def test_module_runs_as_subprocess():
    # Import in a fresh interpreter catches static-initialization problems.
    out = subprocess.run(
        [sys.executable, "-c", "import prema; print(prema.__all__[0])"], capture_output=True, text=True, check=True
    )
    assert out.stdout.strip() == "PremaError"
