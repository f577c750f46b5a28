import json

import pytest

from ultracong.scenarios import (
    BUILTIN_NAMES, Scenario, builtin, replay, scenario_phidf, scenario_squarefree,
)
from ultracong.supernatural import SupernaturalNumber, parse_sn


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_builtin_scenarios_replay(name):
    rep = replay(builtin(name))
    assert rep.passed, "\n".join(rep.lines())
    assert rep.undetermined == 0


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_json_round_trip(name):
    sc = builtin(name)
    again = Scenario.from_json(json.loads(sc.dumps()))
    assert again.to_json() == sc.to_json()
    assert replay(again).passed


def test_ex1_audit_flags_non_transitivity():
    rep = replay(builtin("ex1"))
    audit = [r for r in rep.results if r.label == "certificate:transitivity_audit"]
    assert audit and audit[0].ok and "not transitive" in audit[0].detail


def test_tampered_certificates_fail():
    sc = builtin("phidf")
    sc.certificates[3]["witness"] = str(int(sc.certificates[3]["witness"]) + 1)
    assert not replay(sc).passed
    sc = scenario_squarefree(L=3, window=(1, 1000))
    sc.certificates[1]["witness"] = "548"
    assert not replay(sc).passed
    sc = builtin("ex1")
    sc.claims[2]["expected"] = "true"
    assert not replay(sc).passed


def test_squarefree_variants():
    assert scenario_squarefree(L=1, window=(1, 100)).certificates[1]["witness"] == "3"
    cubes = scenario_squarefree(L=4, window=(1, 10 ** 4), alpha=SupernaturalNumber((), 3))
    n = int(cubes.certificates[1]["witness"])
    assert all((n + k) % p ** 3 == 0 for k, p in zip(range(1, 5), (2, 3, 5, 7)))
    assert replay(cubes).passed


def test_phidf_other_classes():
    assert replay(scenario_phidf(parse_sn("default=0;2:3"))).passed
    assert replay(scenario_phidf(parse_sn("default=parity(0,omega)"))).passed


def test_schema_version_checked():
    data = builtin("ex1").to_json()
    data["schema"] = 99
    with pytest.raises(ValueError):
        Scenario.from_json(data)
