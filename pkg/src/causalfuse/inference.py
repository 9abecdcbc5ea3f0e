"""Actual causation under the modified Halpern-Pearl definition.

``X = x`` is an actual cause of ``phi`` in ``(M, u)`` when

* AC1: ``X = x`` and ``phi`` both hold in the actual world,
* AC2: for some set W (frozen at its actual values) and some ``x' != x``,
  ``[X <- x', W <- w] not phi`` holds,
* AC3: no strict subset of ``X`` satisfies AC1 and AC2.

Witness sets are searched in increasing size and, within a size, in
lexicographic order of the sorted variable names; settings ``x'`` are tried
in binary counting order for each W.  Only variables that are both
descendants of ``X`` and ancestors of ``phi`` can change the outcome when
frozen, so the search runs over that set; the first witness in the full
order always lies inside it.
"""
from __future__ import annotations

import itertools
from array import array
from dataclasses import dataclass
from typing import List, Mapping, Optional, Tuple

from . import kernel
from .errors import CauseQueryError, EffectNotHoldError, SearchLimitError
from .formula import And, Const, Formula, Not, Or, Var, Xor, as_formula, eval_formula, formula_vars, render
from .model import CausalFormula, CausalModel, evaluate, satisfies

Setting = Tuple[Tuple[str, int], ...]


@dataclass(frozen=True)
class CauseQueryOptions:
    max_cause_size: int = 3
    allow_effect_vars: bool = False
    max_model_size: int = 24

    def __post_init__(self):
        if self.max_cause_size < 1:
            raise ValueError("max_cause_size must be at least 1")
        if self.max_model_size < 1:
            raise ValueError("max_model_size must be at least 1")


DEFAULT_OPTIONS = CauseQueryOptions()


@dataclass(frozen=True)
class Witness:
    w: Setting
    x_prime: Setting

    def to_dict(self):
        return {"W": dict(self.w), "x_prime": dict(self.x_prime)}


@dataclass(frozen=True)
class CauseVerdict:
    candidate: Setting
    effect: Formula
    ac1: bool
    ac2: bool
    witness: Optional[Witness]
    ac3: bool
    ac3_violation: Optional[Setting] = None

    @property
    def overall(self):
        return self.ac1 and self.ac2 and self.ac3

    @property
    def names(self):
        return tuple(n for n, _ in self.candidate)

    def to_dict(self):
        return {
            "candidate": dict(self.candidate),
            "effect": render(self.effect),
            "ac1": int(self.ac1),
            "ac2": int(self.ac2),
            "witness": self.witness.to_dict() if self.witness else None,
            "ac3": int(self.ac3),
            "ac3_violation": dict(self.ac3_violation) if self.ac3_violation is not None else None,
            "overall": int(self.overall),
        }


# -- compilation to bytecode -------------------------------------------------

def _emit(f, slots, out):
    if isinstance(f, Var):
        out.extend((kernel.OP_VAR, slots[f.name]))
    elif isinstance(f, Const):
        out.extend((kernel.OP_CONST, f.value))
    elif isinstance(f, Not):
        _emit(f.arg, slots, out)
        out.extend((kernel.OP_NOT, 0))
    else:
        _emit(f.left, slots, out)
        _emit(f.right, slots, out)
        op = {And: kernel.OP_AND, Or: kernel.OP_OR, Xor: kernel.OP_XOR}[type(f)]
        out.extend((op, 0))


class _Plan:
    """Slot numbering and bytecode for one model.

    Slots follow sorted variable names, so ascending slot order is name
    order.
    """

    def __init__(self, m: CausalModel):
        m.require_valid()
        self.model = m
        self.names = tuple(sorted(m.variables))
        self.slots = {n: i for i, n in enumerate(self.names)}
        code = array("i")
        starts = array("i", [0] * len(self.names))
        ends = array("i", [0] * len(self.names))
        for x in m.endogenous:
            s = self.slots[x]
            starts[s] = len(code)
            _emit(m.equations[x], self.slots, code)
            ends[s] = len(code)
        self.code, self.starts, self.ends = code, starts, ends
        self.topo_rank = {self.slots[x]: i for i, x in enumerate(m.topological_order)}
        self.desc = {}
        for x in m.endogenous:
            bits = 0
            for d in m.descendants([x]):
                bits |= 1 << self.slots[d]
            self.desc[x] = bits

    def compile(self, f):
        out = array("i")
        _emit(f, self.slots, out)
        return out

    def anc_bits(self, names):
        bits = 0
        for a in self.model.ancestors(names):
            bits |= 1 << self.slots[a]
        return bits

    def base(self, actual):
        return array("b", [actual[n] for n in self.names])


def _plan(m: CausalModel) -> _Plan:
    plan = m.__dict__.get("_hp_plan")
    if plan is None:
        plan = _Plan(m)
        m.__dict__["_hp_plan"] = plan
    return plan


class _Query:
    """Shared state for AC2 checks against one (model, context, effect)."""

    def __init__(self, m, u, phi):
        self.m = m
        self.plan = _plan(m)
        self.phi = phi
        self.actual = evaluate(m, u)
        self.phi_holds = bool(eval_formula(phi, self.actual))
        self.phi_code = self.plan.compile(phi)
        self.base = self.plan.base(self.actual)
        self.phi_anc = self.plan.anc_bits(formula_vars(phi))

    def ac1(self, candidate: Setting) -> bool:
        return self.phi_holds and all(self.actual[n] == b for n, b in candidate)

    def ac2(self, candidate: Setting) -> Optional[Witness]:
        plan = self.plan
        names = [n for n, _ in candidate]
        x = [b for _, b in candidate]
        x_slots = array("i", [plan.slots[n] for n in names])
        xbits = 0
        desc = 0
        for n in names:
            xbits |= 1 << plan.slots[n]
            desc |= plan.desc[n]
        rel = desc & self.phi_anc & ~xbits
        r_sorted = [s for s in range(len(plan.names)) if rel >> s & 1]
        n_r = len(r_sorted)
        bit_of = {s: n_r - 1 - i for i, s in enumerate(r_sorted)}
        r_topo = sorted(r_sorted, key=plan.topo_rank.__getitem__)
        xprimes = [bits for bits in itertools.product((0, 1), repeat=len(x)) if list(bits) != x]
        flat = array("b", [b for bits in xprimes for b in bits])
        hit = kernel.first_witness(
            plan.code,
            plan.starts,
            plan.ends,
            self.phi_code,
            self.base,
            x_slots,
            flat,
            array("i", r_topo),
            array("i", [bit_of[s] for s in r_topo]),
        )
        if hit is None:
            return None
        mask, k = hit
        w = tuple(
            (plan.names[s], self.actual[plan.names[s]]) for s in r_sorted if mask >> bit_of[s] & 1
        )
        return Witness(w=w, x_prime=tuple(zip(names, xprimes[k])))


def _normalize_candidate(m, candidate) -> Setting:
    items = list(candidate.items()) if isinstance(candidate, Mapping) else list(candidate)
    if not items:
        raise CauseQueryError("candidate cause must name at least one variable")
    seen = set()
    for name, bit in items:
        if name in seen:
            raise CauseQueryError(f"candidate names {name!r} twice")
        seen.add(name)
        if name in m.exogenous:
            raise CauseQueryError(f"candidate {name!r} is exogenous; causes are endogenous variables")
        if name not in m.equations:
            raise CauseQueryError(f"unknown variable {name!r} in candidate")
        if bit not in (0, 1):
            raise CauseQueryError(f"candidate value for {name!r} must be 0 or 1")
    return tuple(sorted((n, int(b)) for n, b in items))


def _check_size(m, opts):
    if len(m.endogenous) > opts.max_model_size:
        raise SearchLimitError(
            f"model {m.name!r} has {len(m.endogenous)} endogenous variables, above "
            f"max_model_size={opts.max_model_size}; raise the cap to search it"
        )


def _check_effect_overlap(candidate, phi, opts):
    if opts.allow_effect_vars:
        return
    overlap = sorted(set(n for n, _ in candidate) & formula_vars(phi))
    if overlap:
        raise CauseQueryError(
            f"candidate variables {overlap} occur in the effect; set allow_effect_vars to permit this"
        )


def is_actual_cause(m: CausalModel, u, candidate, phi, opts: CauseQueryOptions = DEFAULT_OPTIONS) -> CauseVerdict:
    phi = as_formula(phi)
    m.require_valid()
    _check_size(m, opts)
    cand = _normalize_candidate(m, candidate)
    _check_effect_overlap(cand, phi, opts)
    q = _Query(m, u, phi)
    ac1 = q.ac1(cand)
    witness = q.ac2(cand)
    violation = None
    for size in range(1, len(cand)):
        for sub in itertools.combinations(cand, size):
            if q.ac1(sub) and q.ac2(sub) is not None:
                violation = sub
                break
        if violation is not None:
            break
    return CauseVerdict(
        candidate=cand,
        effect=phi,
        ac1=ac1,
        ac2=witness is not None,
        witness=witness,
        ac3=violation is None,
        ac3_violation=violation,
    )


def enumerate_causes(m: CausalModel, u, phi, opts: CauseQueryOptions = DEFAULT_OPTIONS) -> List[CauseVerdict]:
    """All minimal actual causes of ``phi`` with at most ``max_cause_size`` conjuncts.

    Candidates take their actual values (anything else fails AC1).  Results
    are ordered by size, then by the sorted variable names.
    """
    phi = as_formula(phi)
    m.require_valid()
    _check_size(m, opts)
    q = _Query(m, u, phi)
    if not q.phi_holds:
        raise EffectNotHoldError(f"effect does not hold: {render(phi)} is false in the given context")
    effect_vars = formula_vars(phi)
    relevant = m.ancestors(effect_vars)
    # a variable outside the effect's ancestry can never be part of a minimal cause
    pool = [
        x
        for x in m.endogenous
        if x in relevant and (opts.allow_effect_vars or x not in effect_vars)
    ]
    index = {x: i for i, x in enumerate(pool)}
    found_masks = []
    out = []
    for size in range(1, min(opts.max_cause_size, len(pool)) + 1):
        for combo in itertools.combinations(pool, size):
            mask = 0
            for x in combo:
                mask |= 1 << index[x]
            if any(f & mask == f for f in found_masks):
                continue
            cand = tuple((x, q.actual[x]) for x in combo)
            witness = q.ac2(cand)
            if witness is None:
                continue
            found_masks.append(mask)
            out.append(
                CauseVerdict(candidate=cand, effect=phi, ac1=True, ac2=True, witness=witness, ac3=True)
            )
    return out


def but_for(m: CausalModel, u, candidate, phi) -> bool:
    """Simple counterfactual dependence: flip every candidate, keep nothing frozen."""
    phi = as_formula(phi)
    m.require_valid()
    cand = _normalize_candidate(m, candidate)
    actual = evaluate(m, u)
    if not eval_formula(phi, actual) or any(actual[n] != b for n, b in cand):
        return False
    flipped = tuple((n, 1 - b) for n, b in cand)
    return bool(satisfies(m, u, CausalFormula(flipped, Not(phi))))


def replay_witness(m: CausalModel, u, verdict: CauseVerdict) -> bool:
    """True iff the stored witness really falsifies the effect."""
    if verdict.witness is None:
        return False
    setting = verdict.witness.x_prime + verdict.witness.w
    return bool(satisfies(m, u, CausalFormula(setting, Not(verdict.effect))))
