import json

import pytest

from causalfuse.errors import MergeError
from causalfuse.formula import parse_formula as _f, render
from causalfuse.merge import GlueSpec, annotate, equate, extend, load_plan, refine, root_of, run_plan, submodel
from causalfuse.model import CausalModel, all_contexts, evaluate
from causalfuse.trees import load_tree, tree_to_causal

from conftest import FIXTURES, fixture


@pytest.fixture(scope="module")
def fault():
    return tree_to_causal(load_tree(fixture("fault_tree.json")))


@pytest.fixture(scope="module")
def attack():
    return tree_to_causal(load_tree(fixture("attack_tree.json")))


def leaf(name, tag="expert"):
    return CausalModel(
        name=name.lower(), exogenous=[name + "_exo"], endogenous=[name],
        equations={name: name + "_exo"}, provenance={name: tag, name + "_exo": tag},
    )


def test_refine_software_error(fault, attack):
    cas = submodel(attack, "HackCAS")
    m = refine(fault, "SoftwareError", cas)
    assert render(m.equations["SoftwareError"]) == "HackCAS"
    assert "SoftwareError_exo" not in m.exogenous
    assert len(m.endogenous) == len(fault.endogenous) + len(cas.endogenous)
    assert len(m.exogenous) == len(fault.exogenous) - 1 + len(cas.exogenous)
    assert m.provenance["HackCAS"] == "attack-tree" and m.provenance["Collision"] == "fault-tree"


def test_refine_preserves_base_semantics(fault, attack):
    cas = submodel(attack, "HackCAS")
    m = refine(fault, "SoftwareError", cas)
    for u in all_contexts(m):
        got = evaluate(m, u)
        ub = {x: u[x] for x in fault.exogenous if x in u}
        ub["SoftwareError_exo"] = got["HackCAS"]
        want = evaluate(fault, ub)
        assert all(got[v] == want[v] for v in fault.endogenous)


def test_refine_with_single_node_is_a_rename(fault):
    m = refine(fault, "DriverFailure", leaf("HumanSlip"))
    assert render(m.equations["DriverFailure"]) == "HumanSlip"
    assert m.exogenous.count("HumanSlip_exo") == 1 and "DriverFailure_exo" not in m.exogenous
    for u in all_contexts(m):
        v = evaluate(m, u)
        assert v["DriverFailure"] == u["HumanSlip_exo"]


def test_refines_commute(fault):
    a = refine(refine(fault, "DriverFailure", leaf("Slip")), "FailureTransmission", leaf("Gearbox"))
    b = refine(refine(fault, "FailureTransmission", leaf("Gearbox")), "DriverFailure", leaf("Slip"))
    assert a.to_json() == b.to_json()


def test_refine_errors(fault, attack):
    with pytest.raises(MergeError, match="not a leaf"):
        refine(fault, "Collision", leaf("X"))
    with pytest.raises(MergeError, match="defined in both"):
        refine(fault, "DriverFailure", leaf("SoftwareError"))
    with pytest.raises(MergeError, match="root nodes"):
        refine(fault, "SoftwareError", _two_roots())


def _two_roots():
    return CausalModel(name="two", exogenous=["u"], endogenous=["A", "B"], equations={"A": "u", "B": "u"})


def test_root_of(fault, attack):
    assert root_of(fault) == "Collision" and root_of(attack) == "CauseCollision"
    with pytest.raises(MergeError, match="2 root nodes"):
        root_of(_two_roots())


def test_extend_without_glue_is_disjoint_union(fault):
    other = leaf("Weather")
    m = extend(fault, other)
    assert set(m.endogenous) == set(fault.endogenous) | {"Weather"}
    assert set(m.exogenous) == set(fault.exogenous) | {"Weather_exo"}
    assert m.equations["Collision"] == fault.equations["Collision"]


def test_extend_conflicting_names_rejected(fault, attack):
    with pytest.raises(MergeError, match="outside the equate list"):
        extend(fault, leaf("SoftwareError"))


def test_extend_equate_leaf_gives_way(fault):
    driver = CausalModel(
        name="d", exogenous=["a_exo", "b_exo"], endogenous=["a", "b", "Crash"],
        equations={"a": "a_exo", "b": "b_exo", "Crash": "a | b"},
    )
    m = extend(fault, driver, GlueSpec(equate=(("DriverFailure", "Crash"),)))
    assert render(m.equations["DriverFailure"]) == "a | b"
    assert "DriverFailure_exo" not in m.exogenous and "Crash" not in m.endogenous
    # the incoming model carries no tags, so the base tag survives alone
    assert m.provenance["DriverFailure"] == "fault-tree"


def test_equate_two_equations_needs_rewrite(fault):
    other = CausalModel(name="o", exogenous=["z_exo"], endogenous=["z", "Top"], equations={"z": "z_exo", "Top": "!z"})
    with pytest.raises(MergeError, match="add a rewrite"):
        equate(fault, "NoBrakeDemand", other, "Top")
    m = extend(fault, other, GlueSpec(equate=(("NoBrakeDemand", "Top"),), rewrites=(("NoBrakeDemand", _f("z")),)))
    assert render(m.equations["NoBrakeDemand"]) == "z"


def test_equate_is_idempotent(fault):
    m = equate(fault, "Collision", fault, "Collision")
    assert m.to_json() == fault.to_json()


def test_equate_errors(fault, attack):
    with pytest.raises(MergeError, match="not an endogenous variable"):
        equate(fault, "Nope", attack, "CauseCollision")
    with pytest.raises(MergeError, match="not an endogenous variable"):
        equate(fault, "Collision", attack, "Nope")
    with pytest.raises(MergeError, match="only a top node"):
        equate(fault, "SoftwareError", attack, "HackCAS")
    with pytest.raises(MergeError, match="equate names"):
        extend(fault, attack, GlueSpec(equate=(("Ghost", "CauseCollision"),)))
    with pytest.raises(MergeError, match="need an incoming model"):
        extend(fault, None, GlueSpec(equate=(("Collision", "X"),)))


def test_glue_errors(fault):
    with pytest.raises(MergeError, match="already exists"):
        extend(fault, None, GlueSpec(added_nodes=(("Collision", _f("1"), "expert"),)))
    with pytest.raises(MergeError, match="not endogenous"):
        extend(fault, None, GlueSpec(rewrites=(("Ghost", _f("1")),)))
    with pytest.raises(MergeError, match="unresolved reference"):
        extend(fault, None, GlueSpec(rewrites=(("Collision", _f("Ghost")),)))
    with pytest.raises(MergeError, match="invalid result"):
        extend(fault, None, GlueSpec(rewrites=(("SystemFailure", _f("Collision")),)))
    with pytest.raises(MergeError, match="unknown keys"):
        GlueSpec.from_dict({"rename": []})


def test_glue_added_node_forms():
    g = GlueSpec.from_dict({"added_nodes": [["A", "B"], {"name": "C", "equation": "B", "provenance": "hta"}, ["D", "B", "fault-tree"]]})
    assert [(n, t) for n, _, t in g.added_nodes] == [("A", "expert"), ("C", "hta"), ("D", "fault-tree")]


def test_annotate(fault):
    m = annotate(fault, [("DriverFailure", "SystemFailure")])
    assert m.preemptions == (("DriverFailure", "SystemFailure"),)
    assert m.equations == fault.equations
    with pytest.raises(MergeError, match="annotate"):
        annotate(fault, [("Ghost", "SystemFailure")])


def test_plan_matches_golden(integrated):
    m = load_plan(fixture("integrated.plan.json"))
    assert m.to_json() == integrated.to_json()
    assert len(m.endogenous) == 29 and len(m.exogenous) == 11
    assert m.provenance["NoEvasiveManeuver"] == "expert"
    assert m.provenance["CrashLeftCar"] == "hta"
    assert m.provenance["DriverFailure"] == "fault-tree+hta"


def _plan(**kw):
    plan = json.loads(open(fixture("integrated.plan.json"), encoding="utf-8").read())
    plan.update(kw)
    return plan


@pytest.mark.parametrize(
    "plan, msg",
    [
        (_plan(extra=1), "unknown keys"),
        (_plan(steps=[{"op": "split", "source": "ghost", "root": "X", "as": "y"}]), "unknown model"),
        (_plan(steps=[{"op": "split", "source": "attack", "root": "HackCAS"}]), "no 'as'"),
        (_plan(steps=[{"op": "refine", "base": "fault", "as": "y"}]), "step 0 \\(refine\\) is missing key 'leaf'"),
        (_plan(steps=[{"op": "fuse", "as": "y"}]), "unknown op"),
        (_plan(steps=[], output=None), "no steps"),
        (_plan(sources={"x": {"url": "http://"}}), "source needs one of"),
    ],
)
def test_plan_errors(plan, msg):
    with pytest.raises(MergeError, match=msg):
        run_plan(plan, str(FIXTURES))
