"""Goal hierarchies in goal-rule format and their inversion into failure models.

Rule syntax::

    rule(goal=monitor_traffic){
      Condition(expr)
      -->
      Goal(observe_blind_spot_warning)
      Goal(observe_windshield)
    }

``Condition`` is optional and is kept as metadata only.  A goal that is
named as a sub-goal but has no rule of its own is a leaf.  The first rule
names the top goal.  ``#`` starts a comment running to the end of the line.

Inversion is driven by an explicit :class:`InversionSpec` because which
goals turn into failure events, how their failures combine and which
preemptions apply are modelling decisions, not something derivable from
the positive task model.
"""
from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Tuple

from .errors import FormulaSyntaxError, HtaError, HtaSyntaxError
from .formula import Formula, Not, Var, And, conjoin, disjoin, parse_formula
from .model import EXO_SUFFIX, CausalModel, constant_nodes

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Rule:
    goal: str
    condition: Optional[Formula]
    subgoals: Tuple[str, ...]


@dataclass(frozen=True)
class HtaModel:
    goals: Tuple[str, ...]
    rules: Mapping[str, Rule]
    top: str

    def subgoals(self, goal):
        rule = self.rules.get(goal)
        return rule.subgoals if rule else ()

    def reachable(self, start=None):
        seen = []
        stack = [start or self.top]
        while stack:
            g = stack.pop()
            if g not in seen:
                seen.append(g)
                stack.extend(reversed(self.subgoals(g)))
        return seen


# -- parsing -----------------------------------------------------------------

_TOKEN = re.compile(
    r"""(?P<ws>\s+|\#[^\n]*)
      | (?P<arrow>-->)
      | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
      | (?P<punct>[(){}=])
    """,
    re.VERBOSE,
)


class _HtaParser:
    def __init__(self, text):
        self.text = text
        self.i = 0

    def where(self, i=None):
        i = self.i if i is None else i
        line = self.text.count("\n", 0, i) + 1
        col = i - (self.text.rfind("\n", 0, i) + 1) + 1
        return line, col

    def error(self, message, i=None):
        return HtaSyntaxError(message, *self.where(i))

    def skip(self):
        while self.i < len(self.text):
            m = _TOKEN.match(self.text, self.i)
            if m and m.lastgroup == "ws":
                self.i = m.end()
            else:
                break

    def peek(self):
        self.skip()
        if self.i >= len(self.text):
            return ("end", None, self.i)
        m = _TOKEN.match(self.text, self.i)
        if m is None:
            raise self.error(f"unexpected character {self.text[self.i]!r}")
        return (m.lastgroup, m.group(), self.i)

    def take(self):
        tok = self.peek()
        if tok[0] != "end":
            self.i += len(tok[1])
        return tok

    def expect(self, value):
        tok = self.take()
        if tok[1] != value:
            found = "end of input" if tok[0] == "end" else repr(tok[1])
            raise self.error(f"expected {value!r}, found {found}", tok[2])
        return tok

    def name(self):
        tok = self.take()
        if tok[0] != "name":
            raise self.error("expected a name", tok[2])
        return tok[1]

    def condition_text(self):
        start = self.i
        depth = 1
        while self.i < len(self.text):
            ch = self.text[self.i]
            if ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
                if depth == 0:
                    body = self.text[start:self.i]
                    self.i += 1
                    return body, start
            self.i += 1
        raise self.error("unterminated Condition(", start)

    def rules(self):
        out = []
        while self.peek()[0] != "end":
            out.append(self.rule())
        return out

    def rule(self):
        tok = self.take()
        if tok[1] != "rule":
            raise self.error("expected 'rule'", tok[2])
        start = tok[2]
        self.expect("(")
        key = self.take()
        if key[1] != "goal":
            raise self.error("expected 'goal='", key[2])
        self.expect("=")
        goal = self.name()
        self.expect(")")
        self.expect("{")
        condition = None
        tok = self.peek()
        if tok[1] == "Condition":
            self.take()
            self.expect("(")
            body, pos = self.condition_text()
            try:
                condition = parse_formula(body)
            except FormulaSyntaxError as exc:
                raise self.error(f"bad condition: {exc}", pos + exc.position) from None
        self.expect("-->")
        subgoals = []
        while self.peek()[1] == "Goal":
            self.take()
            self.expect("(")
            subgoals.append(self.name())
            self.expect(")")
        self.expect("}")
        return Rule(goal, condition, tuple(subgoals)), start


def parse_hta(text: str) -> HtaModel:
    parser = _HtaParser(text)
    parsed = parser.rules()
    if not parsed:
        raise HtaError("HTA document contains no rules")
    rules: Dict[str, Rule] = {}
    goals: List[str] = []
    for rule, pos in parsed:
        if rule.goal in rules:
            line, col = parser.where(pos)
            raise HtaSyntaxError(f"duplicate rule for goal {rule.goal!r}", line, col)
        rules[rule.goal] = rule
        for g in (rule.goal,) + rule.subgoals:
            if g not in goals:
                goals.append(g)
    h = HtaModel(goals=tuple(goals), rules=rules, top=parsed[0][0].goal)
    cycle = _goal_cycle(h)
    if cycle:
        raise HtaError("cycle among goals: " + " -> ".join(cycle))
    return h


def load_hta(path) -> HtaModel:
    with open(path, encoding="utf-8") as fh:
        return parse_hta(fh.read())


def _goal_cycle(h: HtaModel):
    color = {}
    for start in h.goals:
        if start in color:
            continue
        path = [start]
        color[start] = 1
        stack = [iter(h.subgoals(start))]
        while stack:
            nxt = next(stack[-1], None)
            if nxt is None:
                stack.pop()
                color[path.pop()] = 2
            elif color.get(nxt) == 1:
                return path[path.index(nxt):] + [nxt]
            elif nxt not in color:
                color[nxt] = 1
                path.append(nxt)
                stack.append(iter(h.subgoals(nxt)))
    return None


# -- inversion ---------------------------------------------------------------

_SPEC_KEYS = {"failure_name", "combinator", "guards", "targets", "positive_keep", "name"}


def camel(goal: str) -> str:
    return "".join(part[:1].upper() + part[1:] for part in goal.split("_") if part)


@dataclass(frozen=True)
class Target:
    combinator: str
    inputs: Tuple[str, ...]


@dataclass(frozen=True)
class InversionSpec:
    """Expert choices for turning a positive task model into a failure model.

    ``failure_name`` maps goals to node names (kept goals default to the
    CamelCase goal name).  ``targets`` are failure effects that do not
    correspond to a single goal; when present, the top goal's node combines
    them instead of its own sub-goals.
    """

    failure_name: Mapping[str, str]
    combinator: Mapping[str, str] = field(default_factory=dict)
    guards: Tuple[Tuple[str, str], ...] = ()
    targets: Mapping[str, Target] = field(default_factory=dict)
    positive_keep: Tuple[str, ...] = ()
    name: str = "hta"

    @classmethod
    def from_dict(cls, doc):
        unknown = set(doc) - _SPEC_KEYS
        if unknown:
            raise HtaError(f"unknown keys in inversion spec: {sorted(unknown)}")
        if "failure_name" not in doc:
            raise HtaError("inversion spec needs 'failure_name'")
        targets = {}
        for name, t in doc.get("targets", {}).items():
            targets[name] = Target(str(t.get("combinator", "AND")).upper(), tuple(t["inputs"]))
        return cls(
            failure_name=dict(doc["failure_name"]),
            combinator={k: str(v).upper() for k, v in doc.get("combinator", {}).items()},
            guards=tuple(tuple(g) for g in doc.get("guards", ())),
            targets=targets,
            positive_keep=tuple(doc.get("positive_keep", ())),
            name=doc.get("name", "hta"),
        )

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def load_inversion(path) -> InversionSpec:
    with open(path, encoding="utf-8") as fh:
        return InversionSpec.from_json(fh.read())


def _combine(node, combinator, parts):
    if len(parts) == 1:
        return parts[0]
    if combinator == "AND":
        return conjoin(parts)
    if combinator == "OR":
        return disjoin(parts)
    if combinator is None:
        raise HtaError(f"node {node!r} has {len(parts)} inputs but no combinator")
    raise HtaError(f"combinator for {node!r} must be AND or OR, got {combinator!r}")


def invert_hta(h: HtaModel, spec: InversionSpec) -> CausalModel:
    for goal in list(spec.failure_name) + list(spec.positive_keep):
        if goal not in h.goals:
            raise HtaError(f"inversion spec references unknown goal {goal!r}")
    keep = set(spec.positive_keep)
    chosen = set(h.reachable()) | set(spec.failure_name) | keep
    included = []
    for g in h.goals:
        if g in chosen:
            for sub in h.reachable(g):
                if sub not in included:
                    included.append(sub)
    names = {}
    for g in included:
        if g in spec.failure_name:
            names[g] = spec.failure_name[g]
        elif g in keep:
            names[g] = camel(g)
        else:
            raise HtaError(f"goal {g!r} is neither mapped to a failure node nor kept positive")
    skipped = [g for g in h.goals if g not in included]
    if skipped:
        log.info("goals outside the inverted model: %s", ", ".join(skipped))

    eqs: Dict[str, Formula] = {}
    exo = []
    for g in included:
        node = names[g]
        if node in eqs:
            raise HtaError(f"node name {node!r} used for two goals")
        subs = h.subgoals(g)
        if g == h.top and spec.targets:
            parts = [Var(t) for t in spec.targets]
        elif subs:
            parts = [Var(names[s]) for s in subs]
        else:
            drv = node + EXO_SUFFIX
            exo.append(drv)
            eqs[node] = Var(drv)
            continue
        eqs[node] = _combine(node, spec.combinator.get(node), parts)
    for tname, target in spec.targets.items():
        if tname in eqs:
            raise HtaError(f"target {tname!r} clashes with a goal node")
        eqs[tname] = _combine(tname, target.combinator, [Var(i) for i in target.inputs])

    preemptions = []
    for node, guard in spec.guards:
        if node not in eqs:
            raise HtaError(f"guard on unknown node {node!r}")
        if guard not in eqs:
            raise HtaError(f"guard variable {guard!r} is not a node of the inverted model")
        eqs[node] = And(eqs[node], Not(Var(guard)))
        preemptions.append((guard, node))

    prov = {v: "hta" for v in list(eqs) + exo}
    m = CausalModel(
        name=spec.name,
        exogenous=exo,
        endogenous=list(eqs),
        equations=eqs,
        preemptions=preemptions,
        provenance=prov,
    )
    rep = m.report
    if not rep.ok:
        raise HtaError("inverted model is invalid: " + "; ".join(v.message for v in rep.violations))
    consts = constant_nodes(m) if spec.targets else {}
    for tname in spec.targets:
        if consts.get(tname) == 0:
            log.warning("failure target %s is 0 in every context; it can only occur under intervention", tname)
    return m
