import logging

import pytest

from causalfuse.errors import HtaError, HtaSyntaxError
from causalfuse.formula import Const, parse_formula, render
from causalfuse.hta import InversionSpec, camel, invert_hta, load_hta, load_inversion, parse_hta

from conftest import fixture

DRIVER_EQS = {
    "Crash": "CrashLeftCar | CrashFrontCar",
    "CrashLeftCar": "DoNotCheckBlindSpotWarning & DoNotCheckLeftViewMirror & !LetPass",
    "CrashFrontCar": "DoNotCheckFront",
    "LetPass": "CheckSpeed",
    "CheckSpeed": "CheckDistance",
    "CheckDistance": "CheckDistance_exo",
    "DoNotCheckBlindSpotWarning": "DoNotObserveBlindSpot",
    "DoNotCheckLeftViewMirror": "DoNotAdjustSafetyMargin & DoNotAdjustSpeedDifference",
    "DoNotAdjustSafetyMargin": "CheckSpeed & !DoNotAdjustSpeedDifference",
    "DoNotAdjustSpeedDifference": "CheckSpeed",
    "DoNotCheckFront": "DoNotAdjustLeadCarDistance & DoNotObserveCourseOfTheRoad",
}


@pytest.fixture(scope="module")
def driver():
    return load_hta(fixture("driver.hta"))


@pytest.fixture(scope="module")
def spec():
    return load_inversion(fixture("driver.inversion.json"))


def test_listing_parses():
    h = load_hta(fixture("listing.hta"))
    assert h.top == "monitor_traffic"
    assert h.subgoals("monitor_traffic") == ("observe_blind_spot_warning", "observe_windshield", "observe_left_mirror")
    assert h.rules["monitor_traffic"].condition == Const(1)
    assert h.subgoals("observe_windshield") == ()


def test_driver_subgoals(driver):
    assert driver.top == "lane_change"
    assert driver.subgoals("lane_change") == ("observe_blind_spot_warning", "observe_left_mirror", "observe_windshield")
    assert driver.rules["check_speed"].condition == parse_formula("check_distance")
    assert "let_pass" in driver.goals and "let_pass" not in driver.reachable()


def test_inversion_equations(driver, spec):
    m = invert_hta(driver, spec)
    for var, text in DRIVER_EQS.items():
        assert render(m.equations[var]) == text, var
    assert sorted(m.exogenous) == [
        "CheckDistance_exo", "DoNotAdjustLeadCarDistance_exo", "DoNotObserveBlindSpot_exo", "DoNotObserveCourseOfTheRoad_exo"
    ]
    assert set(m.provenance.values()) == {"hta"}


def test_guards_become_preemptions(driver, spec):
    m = invert_hta(driver, spec)
    assert set(m.preemptions) == {("LetPass", "CrashLeftCar"), ("DoNotAdjustSpeedDifference", "DoNotAdjustSafetyMargin")}


def test_unreachable_target_warns(driver, spec, caplog):
    with caplog.at_level(logging.WARNING, logger="causalfuse"):
        invert_hta(driver, spec)
    assert any("CrashLeftCar" in r.getMessage() and "intervention" in r.getMessage() for r in caplog.records)


def test_camel():
    assert camel("check_speed") == "CheckSpeed"
    assert camel("let__pass_") == "LetPass"


@pytest.mark.parametrize(
    "text, line, col",
    [
        ("rule(goal=a){\n -->\n  Goal(b\n}", 4, 1),
        ("rule(goal=a){ --> Goal(b) }\nrule(goal=a){ --> Goal(c) }", 2, 1),
        ("rule(goal=a){ -> Goal(b) }", 1, 15),
        ("rule(goal=a){ --> Goal(b) } $", 1, 29),
        ("rule(gaol=a){ --> }", 1, 6),
    ],
)
def test_syntax_errors_have_line_and_column(text, line, col):
    with pytest.raises(HtaSyntaxError) as info:
        parse_hta(text)
    assert (info.value.line, info.value.column) == (line, col)
    assert f"line {line}, column {col}" in str(info.value)


def test_bad_condition_reported():
    with pytest.raises(HtaSyntaxError, match="bad condition"):
        parse_hta("rule(goal=a){\n  Condition(x &)\n -->\n  Goal(b)\n}")


def test_empty_and_cyclic_documents():
    with pytest.raises(HtaError, match="no rules"):
        parse_hta("# nothing\n")
    with pytest.raises(HtaError, match="cycle among goals: a -> b -> a"):
        parse_hta("rule(goal=a){ --> Goal(b) }\nrule(goal=b){ --> Goal(a) }")


def test_comments_and_optional_condition():
    h = parse_hta("# top\nrule(goal=a){ # inline\n --> Goal(b) Goal(c) }")
    assert h.rules["a"].condition is None and h.subgoals("a") == ("b", "c")


def _spec(**kw):
    doc = {"failure_name": {"a": "A", "b": "B", "c": "C"}, "combinator": {"A": "OR"}}
    doc.update(kw)
    return InversionSpec.from_dict(doc)


SIMPLE = "rule(goal=a){ --> Goal(b) Goal(c) }"


def test_minimal_inversion():
    m = invert_hta(parse_hta(SIMPLE), _spec())
    assert render(m.equations["A"]) == "B | C"
    assert m.exogenous == ("B_exo", "C_exo")


@pytest.mark.parametrize(
    "kw, msg",
    [
        ({"failure_name": {"a": "A", "b": "B"}}, "neither mapped"),
        ({"failure_name": {"a": "A", "b": "B", "c": "C", "zz": "Z"}}, "unknown goal"),
        ({"combinator": {}}, "no combinator"),
        ({"combinator": {"A": "XOR"}}, "must be AND or OR"),
        ({"guards": [["A", "Ghost"]]}, "guard variable"),
        ({"guards": [["Ghost", "B"]]}, "guard on unknown node"),
        ({"failure_name": {"a": "A", "b": "B", "c": "B"}}, "used for two goals"),
        ({"targets": {"B": {"inputs": ["C"]}}}, "clashes"),
    ],
)
def test_inversion_errors(kw, msg):
    with pytest.raises(HtaError, match=msg):
        invert_hta(parse_hta(SIMPLE), _spec(**kw))


def test_spec_validation():
    with pytest.raises(HtaError, match="unknown keys"):
        InversionSpec.from_dict({"failure_name": {}, "extra": 1})
    with pytest.raises(HtaError, match="failure_name"):
        InversionSpec.from_dict({})


def test_kept_goal_uses_camel_case():
    m = invert_hta(parse_hta(SIMPLE), _spec(failure_name={"a": "A", "b": "B"}, positive_keep=["c"]))
    assert "C" in m.endogenous and render(m.equations["A"]) == "B | C"
