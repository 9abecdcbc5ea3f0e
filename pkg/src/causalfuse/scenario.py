"""Evidence, pruning and scenario reports.

Evidence documents are JSON::

    {"name": "scenario-1",
     "effect": "Collision",
     "fixed_exogenous": {"DisableBrakes_exo": 0},
     "observations": {
         "NoBrakingAlthoughDemand": {"value": 0, "source": "sensor", "mode": "consistency"},
         "DoNotCheckLeftViewMirror": {"value": 1, "source": "expert", "mode": "intervention"},
         "ExploitCASECU": 1}}

A bare bit is shorthand for a consistency-mode observation from a log.
Consistency observations filter the context space; intervention
observations are applied as surgery before anything else.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Tuple

from .errors import EffectNotHoldError, EvidenceConflictError, EvidenceError
from .formula import Const, as_formula, eval_formula, fold_constants, formula_vars, render, substitute
from .inference import DEFAULT_OPTIONS, CauseQueryOptions, CauseVerdict, enumerate_causes, replay_witness
from .model import CausalModel, all_contexts, evaluate, intervene

SOURCES = ("sensor", "log", "expert")
MODES = ("consistency", "intervention")
DOMAINS = {"fault-tree": "technical", "attack-tree": "technical", "hta": "human", "expert": "expert"}

_EVIDENCE_KEYS = {"name", "effect", "fixed_exogenous", "observations"}
_OBS_KEYS = {"value", "source", "mode"}


@dataclass(frozen=True)
class Observation:
    value: int
    source: str = "log"
    mode: str = "consistency"

    def to_dict(self):
        return {"value": self.value, "source": self.source, "mode": self.mode}


@dataclass(frozen=True)
class Evidence:
    fixed_exogenous: Mapping[str, int] = field(default_factory=dict)
    observations: Mapping[str, Observation] = field(default_factory=dict)
    name: str = "scenario"
    effect: Optional[str] = None

    @classmethod
    def from_dict(cls, doc):
        if not isinstance(doc, dict):
            raise EvidenceError("evidence document must be a JSON object")
        unknown = set(doc) - _EVIDENCE_KEYS
        if unknown:
            raise EvidenceError(f"unknown keys in evidence: {sorted(unknown)}")
        fixed = {}
        for k, v in doc.get("fixed_exogenous", {}).items():
            fixed[k] = _bit(k, v)
        obs = {}
        for k, v in doc.get("observations", {}).items():
            if isinstance(v, dict):
                bad = set(v) - _OBS_KEYS
                if bad:
                    raise EvidenceError(f"unknown keys {sorted(bad)} in observation of {k!r}")
                if "value" not in v:
                    raise EvidenceError(f"observation of {k!r} has no value")
                o = Observation(_bit(k, v["value"]), v.get("source", "log"), v.get("mode", "consistency"))
            else:
                o = Observation(_bit(k, v))
            if o.source not in SOURCES:
                raise EvidenceError(f"observation source for {k!r} must be one of {SOURCES}, got {o.source!r}")
            if o.mode not in MODES:
                raise EvidenceError(f"observation mode for {k!r} must be one of {MODES}, got {o.mode!r}")
            obs[k] = o
        return cls(fixed, obs, doc.get("name", "scenario"), doc.get("effect"))

    @classmethod
    def from_json(cls, text):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise EvidenceError(f"evidence is not valid JSON: {exc}") from exc
        return cls.from_dict(doc)

    def to_dict(self):
        doc = {"name": self.name}
        if self.effect is not None:
            doc["effect"] = self.effect
        doc["fixed_exogenous"] = dict(sorted(self.fixed_exogenous.items()))
        doc["observations"] = {k: self.observations[k].to_dict() for k in sorted(self.observations)}
        return doc

    def interventions(self):
        return sorted((k, o.value) for k, o in self.observations.items() if o.mode == "intervention")

    def consistency(self):
        return sorted((k, o.value) for k, o in self.observations.items() if o.mode == "consistency")


def _bit(name, v):
    if isinstance(v, bool) or v not in (0, 1):
        raise EvidenceError(f"value for {name!r} must be 0 or 1, got {v!r}")
    return int(v)


def load_evidence(path) -> Evidence:
    with open(path, encoding="utf-8") as fh:
        return Evidence.from_json(fh.read())


# -- evidence application ----------------------------------------------------

def _check_names(m: CausalModel, e: Evidence):
    for k in e.fixed_exogenous:
        if k not in m.exogenous:
            kind = "endogenous" if k in m.equations else "unknown"
            raise EvidenceError(f"fixed_exogenous names {kind} variable {k!r}")
    for k in e.observations:
        if k not in m.equations:
            kind = "exogenous; use fixed_exogenous" if k in m.exogenous else "unknown"
            raise EvidenceError(f"observation names {kind} variable {k!r}")


def apply_evidence(m: CausalModel, e: Evidence) -> Tuple[CausalModel, List[Dict[str, int]]]:
    """Return the working model and every admissible context, in counting order."""
    m.require_valid()
    _check_names(m, e)
    working = intervene(m, e.interventions())
    wanted = e.consistency()
    admissible = []
    mismatches: Dict[str, int] = {}
    for ctx in all_contexts(working, e.fixed_exogenous):
        vals = evaluate(working, ctx)
        bad = [k for k, b in wanted if vals[k] != b]
        if not bad:
            admissible.append(ctx)
        else:
            for k in bad:
                mismatches[k] = mismatches.get(k, 0) + 1
    if not admissible:
        conflict = {
            "fixed_exogenous": dict(sorted(e.fixed_exogenous.items())),
            "interventions": dict(e.interventions()),
            "observations": dict(wanted),
            "violated": dict(sorted(mismatches.items())),
        }
        raise EvidenceConflictError(
            "contradictory evidence: no context reproduces the observations "
            f"(observations violated per context: {conflict['violated']})",
            conflict,
        )
    return working, admissible


def fixed_values(m: CausalModel, contexts) -> Dict[str, int]:
    """Endogenous variables that take one value across ``contexts``."""
    seen: Dict[str, set] = {x: set() for x in m.endogenous}
    for ctx in contexts:
        vals = evaluate(m, ctx)
        for x in m.endogenous:
            seen[x].add(vals[x])
    return {x: next(iter(s)) for x, s in sorted(seen.items()) if len(s) == 1}


def prune(m: CausalModel, e: Evidence) -> Tuple[CausalModel, Dict[str, int]]:
    """Mark nodes fixed by the evidence and fold their constants.

    Pruned nodes keep a constant equation so the result is still a valid
    model over the same variables; every other equation has the constants
    substituted and folded.
    """
    working, admissible = apply_evidence(m, e)
    pruned = fixed_values(working, admissible)
    consts = {x: Const(b) for x, b in pruned.items()}
    eqs = {}
    for x in working.endogenous:
        if x in pruned:
            eqs[x] = consts[x]
        else:
            eqs[x] = fold_constants(substitute(working.equations[x], consts))
    return working.replace(equations=eqs), pruned


# -- analysis ----------------------------------------------------------------

@dataclass(frozen=True)
class AggregatedCause:
    candidate: Tuple[Tuple[str, int], ...]
    contexts: Tuple[int, ...]
    verdict: CauseVerdict
    domains: Tuple[str, ...]

    def to_dict(self):
        return {
            "candidate": dict(self.candidate),
            "contexts": list(self.contexts),
            "domains": list(self.domains),
            "witness": self.verdict.witness.to_dict(),
        }


@dataclass(frozen=True)
class ScenarioReport:
    name: str
    effect: str
    admissible: Tuple[Mapping[str, int], ...]
    causes: Tuple[AggregatedCause, ...]
    pruned: Mapping[str, int]
    preemptions: Tuple[Mapping, ...]
    narrative: Tuple[str, ...]

    def to_dict(self):
        return {
            "name": self.name,
            "effect": self.effect,
            "admissible_contexts": len(self.admissible),
            "contexts": [dict(sorted(c.items())) for c in self.admissible],
            "causes": [c.to_dict() for c in self.causes],
            "pruned": dict(self.pruned),
            "preemptions": list(self.preemptions),
            "narrative": list(self.narrative),
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def to_text(self):
        lines = [
            f"scenario {self.name}: effect {self.effect}",
            f"admissible contexts: {len(self.admissible)}",
            "pruned: " + (", ".join(f"{k}={v}" for k, v in self.pruned.items()) or "(none)"),
            "causes:",
        ]
        for c in self.causes:
            w = c.verdict.witness
            lines.append(
                f"  {_setting(c.candidate)}  [{'+'.join(c.domains)}]  "
                f"in {len(c.contexts)}/{len(self.admissible)} contexts; "
                f"W={_setting(w.w) or '{}'} x'={_setting(w.x_prime)}"
            )
        if self.preemptions:
            lines.append("preemptions crossed:")
            for p in self.preemptions:
                lines.append(f"  {p['preempting']} -| {p['preempted']}")
        lines.append("narrative:")
        lines.extend("  " + n for n in self.narrative)
        return "\n".join(lines) + "\n"


def _setting(pairs):
    return ", ".join(f"{n}={b}" for n, b in pairs)


def domains_of(m: CausalModel, names) -> Tuple[str, ...]:
    out = set()
    for n in names:
        for tag in m.provenance.get(n, "").split("+"):
            if tag in DOMAINS:
                out.add(DOMAINS[tag])
    return tuple(sorted(out))


def analyze(
    m: CausalModel,
    e: Evidence,
    effect=None,
    opts: CauseQueryOptions = DEFAULT_OPTIONS,
) -> ScenarioReport:
    """Run cause enumeration in every admissible context and aggregate.

    A cause is listed once with the indices of the admissible contexts in
    which it is a minimal actual cause; the stored witness is the one from
    the first such context.
    """
    if effect is None:
        effect = e.effect
    if effect is None:
        raise EvidenceError("no effect given and the evidence names none")
    phi = as_formula(effect)
    working, admissible = apply_evidence(m, e)
    failing = [i for i, ctx in enumerate(admissible) if not eval_formula(phi, evaluate(working, ctx))]
    if failing:
        raise EffectNotHoldError(
            f"effect not established: {render(phi)} is false in {len(failing)} of "
            f"{len(admissible)} admissible contexts (first: #{failing[0]})"
        )
    found: Dict[Tuple, list] = {}
    for i, ctx in enumerate(admissible):
        for verdict in enumerate_causes(working, ctx, phi, opts):
            if not replay_witness(working, ctx, verdict):
                raise AssertionError(f"witness for {verdict.candidate} does not replay")
            entry = found.setdefault(verdict.candidate, [[], verdict])
            entry[0].append(i)
    order = sorted(found, key=lambda c: (len(c), [n for n, _ in c], [b for _, b in c]))
    causes = tuple(
        AggregatedCause(c, tuple(found[c][0]), found[c][1], domains_of(m, [n for n, _ in c])) for c in order
    )
    pruned = fixed_values(working, admissible)
    crossed = _crossed_preemptions(working, causes, phi)
    return ScenarioReport(
        name=e.name,
        effect=render(phi),
        admissible=tuple(admissible),
        causes=causes,
        pruned=pruned,
        preemptions=crossed,
        narrative=tuple(_narrative(causes, len(admissible), crossed)),
    )


def _crossed_preemptions(m: CausalModel, causes, phi):
    """Preemption pairs lying on some path from a reported cause to the effect."""
    anc = m.ancestors(formula_vars(phi))
    out = []
    for a, b in m.preemptions:
        hits = []
        for idx, c in enumerate(causes):
            names = [n for n, _ in c.candidate]
            path = (set(names) | m.descendants(names)) & anc
            if a in path or b in path:
                hits.append(idx)
        if hits:
            out.append({"preempting": a, "preempted": b, "causes": hits})
    return tuple(out)


def _narrative(causes, n_ctx, crossed):
    lines = []
    for c in causes:
        if c.domains == ("technical",):
            kind = "technical failure"
        elif c.domains == ("human",):
            kind = "human error"
        elif "technical" in c.domains and "human" in c.domains:
            kind = "combined human and technical failure"
        else:
            kind = "+".join(c.domains) + " factor"
        scope = "every admissible context" if len(c.contexts) == n_ctx else f"{len(c.contexts)} of {n_ctx} contexts"
        lines.append(f"{kind}: {_setting(c.candidate)} ({scope})")
    for p in crossed:
        lines.append(f"preemption {p['preempting']} over {p['preempted']} lies on the path of {len(p['causes'])} cause(s)")
    return lines
