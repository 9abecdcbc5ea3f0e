"""Binary structural causal models.

A model is a set of exogenous inputs, a set of endogenous variables and
one boolean equation per endogenous variable.  Values are always 0/1 and
the dependency graph must be acyclic so every context has exactly one
solution.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Mapping, Sequence, Tuple

from .errors import ContextError, InterventionError, ModelError
from .formula import (
    Const,
    Formula,
    as_formula,
    eval_formula,
    formula_vars,
    is_valid_name,
    render,
)

PROVENANCE_TAGS = ("fault-tree", "attack-tree", "hta", "expert")
EXO_SUFFIX = "_exo"

_MODEL_KEYS = {"name", "exogenous", "endogenous", "equations", "preemptions", "provenance", "ranges"}


def merge_tags(*tags):
    """Combine provenance tags, e.g. ``fault-tree`` and ``hta`` -> ``fault-tree+hta``."""
    parts = set()
    for t in tags:
        if t:
            parts.update(t.split("+"))
    return "+".join(sorted(parts, key=_tag_order))


def _tag_order(tag):
    return (PROVENANCE_TAGS.index(tag) if tag in PROVENANCE_TAGS else len(PROVENANCE_TAGS), tag)


@dataclass(frozen=True)
class Violation:
    kind: str
    message: str
    detail: Tuple = ()

    def to_dict(self):
        return {"kind": self.kind, "message": self.message, "detail": list(self.detail)}


@dataclass(frozen=True)
class ValidationReport:
    violations: Tuple[Violation, ...] = ()

    @property
    def ok(self):
        return not self.violations

    def __bool__(self):
        return self.ok

    def to_dict(self):
        return {"ok": self.ok, "violations": [v.to_dict() for v in self.violations]}


@dataclass(frozen=True, eq=False)
class CausalModel:
    """Immutable binary causal model.

    ``exogenous`` and ``endogenous`` are kept sorted so that every derived
    artifact is independent of the order the model was written in.
    """

    name: str
    exogenous: Tuple[str, ...]
    endogenous: Tuple[str, ...]
    equations: Mapping[str, Formula]
    preemptions: Tuple[Tuple[str, str], ...] = ()
    provenance: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "exogenous", tuple(sorted(self.exogenous)))
        object.__setattr__(self, "endogenous", tuple(sorted(self.endogenous)))
        object.__setattr__(
            self, "equations", {k: as_formula(v) for k, v in sorted(self.equations.items())}
        )
        pairs = sorted({(a, b) for a, b in self.preemptions})
        object.__setattr__(self, "preemptions", tuple(pairs))
        object.__setattr__(self, "provenance", dict(sorted(self.provenance.items())))

    def __eq__(self, other):
        if not isinstance(other, CausalModel):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __hash__(self):
        return hash(json.dumps(self.to_dict(), sort_keys=True))

    @property
    def variables(self):
        return self.exogenous + self.endogenous

    @cached_property
    def parents(self) -> Dict[str, frozenset]:
        return {x: formula_vars(f) for x, f in self.equations.items()}

    @cached_property
    def children(self) -> Dict[str, Tuple[str, ...]]:
        out = {v: [] for v in self.variables}
        for x, ps in self.parents.items():
            for p in ps:
                out.setdefault(p, []).append(x)
        return {k: tuple(sorted(v)) for k, v in out.items()}

    @cached_property
    def report(self) -> ValidationReport:
        return validate_model(self)

    @cached_property
    def topological_order(self) -> Tuple[str, ...]:
        self.require_valid()
        return _toposort(self.endogenous, self.parents)

    def require_valid(self):
        rep = self.report
        if not rep.ok:
            msgs = "; ".join(v.message for v in rep.violations)
            raise ModelError(f"invalid model {self.name!r}: {msgs}", rep.violations)

    def roots(self):
        """Endogenous variables no other equation mentions."""
        return tuple(v for v in self.endogenous if not self.children.get(v))

    def exo_driver(self, name):
        """Return ``name_exo`` when ``name``'s equation is exactly that variable."""
        f = self.equations.get(name)
        drv = name + EXO_SUFFIX
        if f is not None and f == as_formula(drv) and drv in self.exogenous:
            return drv
        return None

    def ancestors(self, names) -> frozenset:
        """Endogenous and exogenous ancestors of ``names``, including them."""
        seen = set()
        stack = list(names)
        while stack:
            v = stack.pop()
            if v in seen:
                continue
            seen.add(v)
            stack.extend(self.parents.get(v, ()))
        return frozenset(seen)

    def descendants(self, names) -> frozenset:
        seen = set()
        stack = list(names)
        while stack:
            v = stack.pop()
            for c in self.children.get(v, ()):
                if c not in seen:
                    seen.add(c)
                    stack.append(c)
        return frozenset(seen)

    def replace(self, **changes):
        data = {
            "name": self.name,
            "exogenous": self.exogenous,
            "endogenous": self.endogenous,
            "equations": self.equations,
            "preemptions": self.preemptions,
            "provenance": self.provenance,
        }
        data.update(changes)
        return CausalModel(**data)

    # -- serialization -------------------------------------------------------

    def to_dict(self):
        return {
            "name": self.name,
            "exogenous": list(self.exogenous),
            "endogenous": list(self.endogenous),
            "equations": {k: render(v) for k, v in self.equations.items()},
            "preemptions": [list(p) for p in self.preemptions],
            "provenance": dict(self.provenance),
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=False) + "\n"

    @classmethod
    def from_dict(cls, doc):
        if not isinstance(doc, dict):
            raise ModelError("model document must be a JSON object")
        unknown = set(doc) - _MODEL_KEYS
        if unknown:
            raise ModelError(f"unknown keys in model document: {sorted(unknown)}")
        if "ranges" in doc:
            for var, rng in doc["ranges"].items():
                if sorted(rng) != [0, 1]:
                    raise ModelError(
                        f"variable {var!r} has range {rng}; only binary models with range [0, 1] are supported"
                    )
        for key in ("exogenous", "endogenous", "equations"):
            if key not in doc:
                raise ModelError(f"model document is missing {key!r}")
        exo = list(doc["exogenous"])
        endo = list(doc["endogenous"])
        dups = sorted(n for n, c in _counts(exo + endo).items() if c > 1)
        if dups:
            raise ModelError(f"duplicate variable names: {dups}")
        try:
            eqs = {k: as_formula(v) for k, v in doc["equations"].items()}
        except Exception as exc:
            raise ModelError(f"bad equation: {exc}") from exc
        pre = doc.get("preemptions", [])
        for p in pre:
            if len(p) != 2:
                raise ModelError(f"preemption entry must be a pair, got {p!r}")
        return cls(
            name=doc.get("name", "model"),
            exogenous=exo,
            endogenous=endo,
            equations=eqs,
            preemptions=[tuple(p) for p in pre],
            provenance=doc.get("provenance", {}),
        )

    @classmethod
    def from_json(cls, text):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ModelError(f"model is not valid JSON: {exc}") from exc
        return cls.from_dict(doc)


def _counts(items):
    out = {}
    for i in items:
        out[i] = out.get(i, 0) + 1
    return out


def load_model(path) -> CausalModel:
    with open(path, encoding="utf-8") as fh:
        return CausalModel.from_json(fh.read())


def _toposort(nodes, parents):
    order = []
    state = {}
    for start in sorted(nodes):
        if start in state:
            continue
        stack = [(start, iter(sorted(p for p in parents.get(start, ()) if p in parents)))]
        state[start] = 1
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                stack.pop()
                state[node] = 2
                order.append(node)
            elif nxt not in state:
                state[nxt] = 1
                stack.append((nxt, iter(sorted(p for p in parents.get(nxt, ()) if p in parents))))
    return tuple(order)


def _find_cycle(nodes, parents):
    """Return one dependency cycle as a list starting at its smallest name."""
    color = {}
    for start in sorted(nodes):
        if start in color:
            continue
        path = [start]
        color[start] = 1
        stack = [iter(sorted(p for p in parents.get(start, ()) if p in parents))]
        while stack:
            nxt = next(stack[-1], None)
            if nxt is None:
                stack.pop()
                color[path.pop()] = 2
                continue
            if color.get(nxt) == 1:
                cycle = path[path.index(nxt):]
                i = cycle.index(min(cycle))
                return cycle[i:] + cycle[:i]
            if nxt not in color:
                color[nxt] = 1
                path.append(nxt)
                stack.append(iter(sorted(p for p in parents.get(nxt, ()) if p in parents)))
    return None


def validate_model(m: CausalModel) -> ValidationReport:
    out = []
    exo, endo = set(m.exogenous), set(m.endogenous)
    for name in sorted(_counts(m.exogenous + m.endogenous).items()):
        if name[1] > 1:
            out.append(Violation("duplicate", f"duplicate name {name[0]!r}", (name[0],)))
    for name in sorted(exo | endo):
        if not is_valid_name(name):
            out.append(Violation("bad-name", f"invalid variable name {name!r}", (name,)))
    for x in sorted(endo - set(m.equations)):
        out.append(Violation("missing-equation", f"no equation for {x!r}", (x,)))
    for x in sorted(set(m.equations) - endo):
        kind = "exogenous-equation" if x in exo else "extra-equation"
        out.append(Violation(kind, f"equation for non-endogenous {x!r}", (x,)))
    known = exo | endo
    for x, f in m.equations.items():
        for v in sorted(formula_vars(f) - known):
            out.append(Violation("unbound", f"equation of {x!r} uses unbound {v!r}", (x, v)))
    parents = {x: formula_vars(f) & endo for x, f in m.equations.items() if x in endo}
    cycle = _find_cycle(parents, parents)
    if cycle:
        out.append(Violation("cycle", "dependency cycle " + " -> ".join(cycle + cycle[:1]), tuple(cycle)))
    for a, b in m.preemptions:
        for v in (a, b):
            if v not in known:
                out.append(Violation("preemption", f"preemption names unknown variable {v!r}", (a, b)))
    for v, tag in m.provenance.items():
        if v not in known:
            out.append(Violation("provenance", f"provenance for unknown variable {v!r}", (v,)))
        elif any(t not in PROVENANCE_TAGS for t in tag.split("+")):
            out.append(Violation("provenance", f"unknown provenance tag {tag!r} on {v!r}", (v, tag)))
    return ValidationReport(tuple(out))


# -- contexts and evaluation -------------------------------------------------

def check_context(m: CausalModel, u: Mapping[str, int]) -> Dict[str, int]:
    exo = set(m.exogenous)
    missing = sorted(exo - set(u))
    extra = sorted(set(u) - exo)
    if missing or extra:
        parts = []
        if missing:
            parts.append(f"missing exogenous {missing}")
        if extra:
            parts.append(f"not exogenous {extra}")
        raise ContextError("context must assign exactly the exogenous variables: " + "; ".join(parts))
    out = {}
    for k, v in u.items():
        if v not in (0, 1) or isinstance(v, float):
            raise ContextError(f"context value for {k!r} must be 0 or 1, got {v!r}")
        out[k] = int(v)
    return out


def evaluate(m: CausalModel, u: Mapping[str, int]) -> Dict[str, int]:
    """Solve the equations in context ``u``; returns values for U and V."""
    m.require_valid()
    values = check_context(m, u)
    for x in m.topological_order:
        values[x] = eval_formula(m.equations[x], values)
    return values


def all_contexts(m: CausalModel, fixed: Mapping[str, int] = None):
    """Yield every context (completions of ``fixed``) in binary counting order."""
    fixed = dict(fixed or {})
    free = [u for u in m.exogenous if u not in fixed]
    for bits in itertools.product((0, 1), repeat=len(free)):
        ctx = dict(fixed)
        ctx.update(zip(free, bits))
        yield {u: ctx[u] for u in m.exogenous}


def constant_nodes(m: CausalModel, max_exogenous=16):
    """Endogenous variables taking the same value in every context.

    Returns ``{name: value}``; empty when the model has too many inputs to
    enumerate.
    """
    if len(m.exogenous) > max_exogenous:
        return {}
    seen = {}
    for ctx in all_contexts(m):
        vals = evaluate(m, ctx)
        for x in m.endogenous:
            seen.setdefault(x, set()).add(vals[x])
    return {x: next(iter(s)) for x, s in seen.items() if len(s) == 1}


def intervene(m: CausalModel, xs: Sequence[Tuple[str, int]]) -> CausalModel:
    """Return ``M_{X<-x}``: each target's equation replaced by a constant."""
    xs = list(xs.items()) if isinstance(xs, Mapping) else list(xs)
    seen = set()
    eqs = dict(m.equations)
    for name, bit in xs:
        if name in seen:
            raise InterventionError(f"variable {name!r} intervened on twice")
        seen.add(name)
        if name in m.exogenous:
            raise InterventionError(f"cannot intervene on exogenous variable {name!r}")
        if name not in m.equations:
            raise InterventionError(f"unknown variable {name!r}")
        if bit not in (0, 1):
            raise InterventionError(f"intervention value for {name!r} must be 0 or 1")
        eqs[name] = Const(int(bit))
    if not xs:
        return m
    return m.replace(equations=eqs)


@dataclass(frozen=True)
class CausalFormula:
    """``[Y1 <- y1, ..., Yk <- yk] phi``."""

    interventions: Tuple[Tuple[str, int], ...]
    phi: Formula

    def __post_init__(self):
        object.__setattr__(self, "interventions", tuple((n, int(b)) for n, b in self.interventions))
        object.__setattr__(self, "phi", as_formula(self.phi))


def satisfies(m: CausalModel, u: Mapping[str, int], cf: CausalFormula) -> int:
    values = evaluate(intervene(m, cf.interventions), u)
    return eval_formula(cf.phi, values)


def parse_assignment(text: str) -> Dict[str, int]:
    """Parse ``"A=1,B=0"`` into a dict."""
    out = {}
    text = text.strip()
    if not text:
        return out
    for part in text.split(","):
        if "=" not in part:
            raise ContextError(f"expected name=bit, got {part.strip()!r}")
        k, v = (s.strip() for s in part.split("=", 1))
        if v not in ("0", "1"):
            raise ContextError(f"value for {k!r} must be 0 or 1, got {v!r}")
        if k in out:
            raise ContextError(f"{k!r} assigned twice")
        out[k] = int(v)
    return out


def assignment_list(values: Mapping[str, int]) -> List[Tuple[str, int]]:
    return sorted((k, int(v)) for k, v in values.items())
