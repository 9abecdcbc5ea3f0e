import json

import pytest

from causalfuse.errors import EffectNotHoldError, EvidenceConflictError, EvidenceError
from causalfuse.formula import render
from causalfuse.model import all_contexts, evaluate
from causalfuse.scenario import Evidence, Observation, analyze, apply_evidence, load_evidence, prune

from conftest import WIDE, fixture


def ev(obs=None, fixed=None, **kw):
    return Evidence.from_dict(dict(observations=obs or {}, fixed_exogenous=fixed or {}, **kw))


@pytest.fixture(scope="module")
def s2(integrated):
    return analyze(integrated, load_evidence(fixture("scenario2.evidence.json")), None, WIDE)


# -- evidence documents ------------------------------------------------------

def test_bare_bit_is_a_logged_consistency_observation():
    e = ev({"A": 1})
    assert e.observations["A"] == Observation(1, "log", "consistency")


def test_evidence_round_trip():
    e = load_evidence(fixture("scenario2.evidence.json"))
    assert Evidence.from_dict(e.to_dict()) == e
    assert e.interventions() == [("DoNotCheckLeftViewMirror", 1)]
    assert ("LetPass", 0) in e.consistency()


@pytest.mark.parametrize(
    "doc, msg",
    [
        ({"observations": {"A": {"value": 1, "source": "rumour"}}}, "source"),
        ({"observations": {"A": {"value": 1, "mode": "wish"}}}, "mode"),
        ({"observations": {"A": {"source": "log"}}}, "no value"),
        ({"observations": {"A": {"value": 1, "weight": 2}}}, "unknown keys"),
        ({"observations": {"A": 2}}, "0 or 1"),
        ({"observations": {"A": True}}, "0 or 1"),
        ({"fixed_exogenous": {"A": -1}}, "0 or 1"),
        ({"context": {}}, "unknown keys"),
        ([], "JSON object"),
    ],
)
def test_bad_evidence(doc, msg):
    with pytest.raises(EvidenceError, match=msg):
        Evidence.from_dict(doc)


def test_bad_evidence_json():
    with pytest.raises(EvidenceError, match="not valid JSON"):
        Evidence.from_json("{")


def test_evidence_names_checked(rock):
    with pytest.raises(EvidenceError, match="endogenous variable 'ST'"):
        apply_evidence(rock, ev(fixed={"ST": 1}))
    with pytest.raises(EvidenceError, match="use fixed_exogenous"):
        apply_evidence(rock, ev({"ST_exo": 1}))
    with pytest.raises(EvidenceError, match="unknown variable 'Ghost'"):
        apply_evidence(rock, ev({"Ghost": 1}))


# -- admissible contexts -----------------------------------------------------

def test_empty_evidence_keeps_every_context(rock):
    working, ctxs = apply_evidence(rock, Evidence())
    assert ctxs == list(all_contexts(rock))
    assert working.to_json() == rock.to_json()


def test_consistency_filters_contexts(rock):
    _, ctxs = apply_evidence(rock, ev({"BH": 1}))
    assert ctxs == [{"BT_exo": 1, "ST_exo": 0}]


def test_intervention_changes_the_model(rock):
    working, ctxs = apply_evidence(rock, ev({"ST": {"value": 0, "mode": "intervention"}}))
    assert len(ctxs) == 4
    assert all(evaluate(working, u)["SH"] == 0 for u in ctxs)


def test_conflicting_evidence(rock):
    with pytest.raises(EvidenceConflictError) as info:
        apply_evidence(rock, ev({"SH": 1, "BH": 1}))
    conflict = info.value.conflict
    assert conflict["observations"] == {"BH": 1, "SH": 1}
    assert conflict["violated"] == {"BH": 3, "SH": 2}


def test_conflict_with_fixed_exogenous(rock):
    with pytest.raises(EvidenceConflictError, match="contradictory"):
        apply_evidence(rock, ev({"SH": 1}, fixed={"ST_exo": 0}))


def test_effect_must_hold_in_every_context(rock):
    with pytest.raises(EffectNotHoldError, match="effect not established: BS is false in 1 of 4"):
        analyze(rock, Evidence(), "BS")


def test_effect_needed(rock):
    with pytest.raises(EvidenceError, match="no effect"):
        analyze(rock, Evidence())


# -- pruning -----------------------------------------------------------------

def test_alternative_scenario_pins_software_error(integrated):
    e = ev({"GainSystemAccess": 1, "ExploitCASECU": 1})
    _, pruned = prune(integrated, e)
    for name in ("HackCAS", "SoftwareError", "SystemFailure", "NoBrakeDemand", "Collision"):
        assert pruned[name] == 1, name


def test_pruning_preserves_semantics(integrated):
    e = load_evidence(fixture("scenario1.evidence.json"))
    reduced, pruned = prune(integrated, e)
    working, ctxs = apply_evidence(integrated, e)
    for u in ctxs:
        assert evaluate(reduced, u) == evaluate(working, u)
    assert all(render(reduced.equations[x]) == str(b) for x, b in pruned.items())


def test_fixing_every_exogenous_prunes_everything(integrated):
    u = {x: i % 2 for i, x in enumerate(integrated.exogenous)}
    _, pruned = prune(integrated, ev(fixed=u))
    assert pruned == {x: v for x, v in sorted(evaluate(integrated, u).items()) if x in integrated.equations}


def test_no_evidence_prunes_nothing_on_a_live_model(rock):
    assert prune(rock, Evidence())[1] == {}


def test_no_evidence_still_prunes_constant_nodes(integrated):
    pruned = prune(integrated, Evidence())[1]
    assert pruned["CrashLeftCar"] == 0 and "Collision" not in pruned


# -- analysis ----------------------------------------------------------------

def test_rock_scenario(rock):
    r = analyze(rock, ev(fixed={"ST_exo": 1, "BT_exo": 1}), "BS")
    assert [dict(c.candidate) for c in r.causes] == [{"SH": 1}, {"ST": 1}]
    assert r.pruned == {"BH": 0, "BS": 1, "BT": 1, "SH": 1, "ST": 1}
    assert r.preemptions == ({"preempting": "SH", "preempted": "BH", "causes": [0, 1]},)


def test_scenario2_left_lane_causes(s2):
    assert len(s2.admissible) == 15
    causes = [dict(c.candidate) for c in s2.causes]
    for single in ({"DoNotObserveBlindSpot": 1}, {"LetPass": 0}, {"CheckSpeed": 0}, {"CrashLeftCar": 1}):
        assert single in causes
    assert all(c.contexts == tuple(range(15)) for c in s2.causes)
    assert s2.pruned["CrashLeftCar"] == 1
    pairs = {(p["preempting"], p["preempted"]) for p in s2.preemptions}
    assert ("LetPass", "CrashLeftCar") in pairs


def test_scenario2_narrative(s2):
    assert "human error: DoNotObserveBlindSpot=1 (every admissible context)" in s2.narrative
    assert any(line.startswith("combined human and technical failure: DriverFailure=1") for line in s2.narrative)
    text = s2.to_text()
    assert text.startswith("scenario scenario-2: effect Collision\nadmissible contexts: 15\n")
    assert "LetPass -| CrashLeftCar" in text


def test_report_serialization(s2):
    d = json.loads(s2.to_json())
    assert d["admissible_contexts"] == 15 == len(d["contexts"])
    assert list(d) == ["name", "effect", "admissible_contexts", "contexts", "causes", "pruned", "preemptions", "narrative"]
    first = d["causes"][0]
    assert set(first) == {"candidate", "contexts", "domains", "witness"}


def test_key_order_does_not_matter(rock):
    a = {"fixed_exogenous": {"ST_exo": 1, "BT_exo": 1}, "observations": {"SH": 1, "BT": 1}, "effect": "BS"}
    b = {"effect": "BS", "observations": {"BT": 1, "SH": 1}, "fixed_exogenous": {"BT_exo": 1, "ST_exo": 1}}
    ra = analyze(rock, Evidence.from_dict(a))
    rb = analyze(rock, Evidence.from_dict(b))
    assert ra.to_json() == rb.to_json()


def test_partial_context_cause_scope(rock):
    # both inputs are free; observing SH=1 and BT=1 leaves one context
    r = analyze(rock, ev({"SH": 1, "BT": 1}), "BS")
    assert len(r.admissible) == 1
    assert "every admissible context" in r.narrative[0]
