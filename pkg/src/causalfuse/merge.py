"""Joining causal models: refine a leaf, equate nodes, extend with expert glue.

Merges never rename silently.  If two models share a name that the merge
does not explicitly identify, the merge fails and lists the clash.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import Dict, Iterable, Mapping, Optional, Tuple

from .errors import MergeError
from .formula import Formula, Var, as_formula, formula_vars, rename, render
from .model import CausalModel, load_model, merge_tags


@dataclass(frozen=True)
class GlueSpec:
    """Expert input for :func:`extend`, applied as equates, then added nodes, then rewrites."""

    equate: Tuple[Tuple[str, str], ...] = ()
    rewrites: Tuple[Tuple[str, Formula], ...] = ()
    added_nodes: Tuple[Tuple[str, Formula, str], ...] = ()

    @classmethod
    def from_dict(cls, doc):
        unknown = set(doc) - {"equate", "rewrites", "added_nodes"}
        if unknown:
            raise MergeError(f"unknown keys in glue spec: {sorted(unknown)}")
        return cls(
            equate=tuple((a, b) for a, b in doc.get("equate", ())),
            rewrites=tuple((n, as_formula(f)) for n, f in doc.get("rewrites", ())),
            added_nodes=tuple(
                (n, as_formula(f), tag) for n, f, tag in (_added(x) for x in doc.get("added_nodes", ()))
            ),
        )


def _added(entry):
    if isinstance(entry, dict):
        return entry["name"], entry["equation"], entry.get("provenance", "expert")
    if len(entry) == 2:
        return entry[0], entry[1], "expert"
    return tuple(entry)


def _finish(m: CausalModel, what: str) -> CausalModel:
    rep = m.report
    if not rep.ok:
        raise MergeError(f"{what} produced an invalid model: " + "; ".join(v.message for v in rep.violations))
    return m


def _clashes(a: CausalModel, b: CausalModel, allowed=()):
    return sorted((set(a.variables) & set(b.variables)) - set(allowed))


def _union(a: CausalModel, b: CausalModel, name=None) -> Dict:
    eqs = dict(a.equations)
    eqs.update(b.equations)
    prov = dict(b.provenance)
    for k, v in a.provenance.items():
        prov[k] = merge_tags(v, prov.get(k))
    return {
        "name": name or a.name,
        "exogenous": sorted(set(a.exogenous) | set(b.exogenous)),
        "endogenous": sorted(set(a.endogenous) | set(b.endogenous)),
        "equations": eqs,
        "preemptions": list(a.preemptions) + list(b.preemptions),
        "provenance": prov,
    }


def _rename_model(m: CausalModel, names: Mapping[str, str]) -> CausalModel:
    if not names:
        return m
    r = lambda v: names.get(v, v)  # noqa: E731
    return CausalModel(
        name=m.name,
        exogenous=[r(v) for v in m.exogenous],
        endogenous=[r(v) for v in m.endogenous],
        equations={r(k): rename(f, names) for k, f in m.equations.items()},
        preemptions=[(r(a), r(b)) for a, b in m.preemptions],
        provenance={r(k): v for k, v in m.provenance.items()},
    )


def _drop_exogenous(doc, name):
    doc["exogenous"] = [u for u in doc["exogenous"] if u != name]
    doc["provenance"].pop(name, None)


def root_of(m: CausalModel) -> str:
    roots = m.roots()
    if len(roots) != 1:
        raise MergeError(f"model {m.name!r} has {len(roots)} root nodes {list(roots)}; name the root explicitly")
    return roots[0]


def submodel(m: CausalModel, root: str, name: Optional[str] = None) -> CausalModel:
    """The part of ``m`` that ``root`` depends on, with ``root`` as its top node."""
    if root not in m.equations:
        raise MergeError(f"{root!r} is not an endogenous variable of {m.name!r}")
    keep = m.ancestors([root])
    return CausalModel(
        name=name or f"{m.name}:{root}",
        exogenous=[u for u in m.exogenous if u in keep],
        endogenous=[v for v in m.endogenous if v in keep],
        equations={k: f for k, f in m.equations.items() if k in keep},
        preemptions=[p for p in m.preemptions if p[0] in keep and p[1] in keep],
        provenance={k: v for k, v in m.provenance.items() if k in keep},
    )


def refine(base: CausalModel, leaf: str, sub: CausalModel, sub_root: Optional[str] = None) -> CausalModel:
    """Replace the exogenous driver of ``leaf`` by the root of ``sub``."""
    drv = base.exo_driver(leaf)
    if drv is None:
        raise MergeError(f"{leaf!r} is not a leaf of {base.name!r} (expected equation {leaf} = {leaf}_exo)")
    clash = _clashes(base, sub)
    if clash:
        raise MergeError(f"refine of {leaf!r}: names defined in both models: {clash}")
    top = sub_root or root_of(sub)
    if top not in sub.equations:
        raise MergeError(f"{top!r} is not an endogenous variable of {sub.name!r}")
    if any(drv in formula_vars(f) for k, f in base.equations.items() if k != leaf):
        raise MergeError(f"{drv!r} drives more than {leaf!r}; cannot remove it")
    doc = _union(base, sub)
    doc["equations"][leaf] = Var(top)
    _drop_exogenous(doc, drv)
    return _finish(CausalModel(**doc), "refine")


def equate(a: CausalModel, na: str, b: CausalModel, nb: str) -> CausalModel:
    """Identify ``b``'s top node ``nb`` with ``na``; ``na`` keeps a single equation.

    A side whose node is a bare exogenous leaf gives way to the other
    side's equation.  Names other than the equated pair that appear in both
    models must have identical definitions (this makes equating copies of
    one model idempotent).
    """
    return _equate_many(a, b, [(na, nb)])


def _equate_many(a: CausalModel, b: CausalModel, pairs, resolved=()) -> CausalModel:
    renames = {}
    for na, nb in pairs:
        if na not in a.equations:
            raise MergeError(f"{na!r} is not an endogenous variable of {a.name!r}")
        if nb not in b.equations:
            raise MergeError(f"{nb!r} is not an endogenous variable of {b.name!r}")
        if b.children.get(nb):
            raise MergeError(
                f"{nb!r} is used by {list(b.children[nb])} in {b.name!r}; only a top node can be equated"
            )
        if nb != na:
            renames[nb] = na
    b2 = _rename_model(b, renames)
    targets = {na for na, _ in pairs}
    for v in _clashes(a, b2, allowed=targets):
        same = (v in a.exogenous and v in b2.exogenous) or (
            v in a.equations and v in b2.equations and a.equations[v] == b2.equations[v]
        )
        if not same:
            raise MergeError(f"{v!r} is defined differently in both models and is not equated")
    doc = _union(a, b2)
    for na, nb in pairs:
        drv_a, drv_b = a.exo_driver(na), b.exo_driver(nb)
        if drv_b is not None:
            drv_b = renames.get(drv_b, drv_b)
        eq_a, eq_b = a.equations[na], b2.equations[na]
        if drv_a and not drv_b:
            doc["equations"][na] = eq_b
            drop = drv_a
        elif drv_b and drv_b != drv_a:
            doc["equations"][na] = eq_a
            drop = drv_b
        elif eq_a != eq_b and na not in resolved:
            raise MergeError(
                f"{na!r} and {nb!r} both have equations ({render(eq_a)} vs {render(eq_b)}); "
                "add a rewrite to decide which one holds"
            )
        else:
            doc["equations"][na] = eq_a
            drop = None
        if drop and not any(drop in formula_vars(f) for f in doc["equations"].values()):
            _drop_exogenous(doc, drop)
        doc["provenance"][na] = merge_tags(a.provenance.get(na), b.provenance.get(nb))
    return _finish(CausalModel(**doc), "equate")


def extend(base: CausalModel, ext: Optional[CausalModel], glue: GlueSpec = GlueSpec()) -> CausalModel:
    if ext is not None:
        for na, nb in glue.equate:
            if na not in base.variables:
                raise MergeError(f"equate names {na!r}, which is not in {base.name!r}")
            if nb not in ext.variables:
                raise MergeError(f"equate names {nb!r}, which is not in {ext.name!r}")
        renamed = _rename_model(ext, {nb: na for na, nb in glue.equate})
        clash = _clashes(base, renamed, allowed=[na for na, _ in glue.equate])
        if clash:
            raise MergeError(f"extend: names defined in both models outside the equate list: {clash}")
        m = _equate_many(base, ext, glue.equate, [n for n, _ in glue.rewrites]) if glue.equate else CausalModel(**_union(base, ext))
    elif glue.equate:
        raise MergeError("equate pairs need an incoming model")
    else:
        m = base
    doc = m.to_dict()
    doc["equations"] = dict(m.equations)
    doc["preemptions"] = [tuple(p) for p in doc["preemptions"]]
    for name, f, tag in glue.added_nodes:
        if name in doc["endogenous"] or name in doc["exogenous"]:
            raise MergeError(f"added node {name!r} already exists")
        doc["endogenous"].append(name)
        doc["equations"][name] = f
        doc["provenance"][name] = tag
    for name, f in glue.rewrites:
        if name not in doc["equations"]:
            raise MergeError(f"rewrite targets {name!r}, which is not endogenous")
        doc["equations"][name] = f
    out = CausalModel(**doc)
    rep = out.report
    if not rep.ok:
        unresolved = [v for v in rep.violations if v.kind == "unbound"]
        kind = "unresolved reference" if unresolved else "invalid result"
        raise MergeError(f"extend: {kind}: " + "; ".join(v.message for v in rep.violations))
    return out


def annotate(m: CausalModel, pairs: Iterable[Tuple[str, str]]) -> CausalModel:
    """Record preemption pairs (preempting, preempted) without touching equations."""
    return _finish(m.replace(preemptions=list(m.preemptions) + [tuple(p) for p in pairs]), "annotate")


# -- merge plans -------------------------------------------------------------

def _load_source(spec, root_dir):
    from .hta import invert_hta, load_hta, load_inversion
    from .trees import load_tree, tree_to_causal

    path = lambda p: os.path.join(root_dir, p)  # noqa: E731
    if "model" in spec:
        return load_model(path(spec["model"]))
    if "tree" in spec:
        return tree_to_causal(load_tree(path(spec["tree"])))
    if "hta" in spec:
        return invert_hta(load_hta(path(spec["hta"])), load_inversion(path(spec["inversion"])))
    raise MergeError(f"source needs one of 'model', 'tree' or 'hta': {spec}")


def run_plan(plan: Mapping, root_dir: str = ".") -> CausalModel:
    """Execute a declarative merge plan.

    ``sources`` names the input models; each step stores its result under
    ``as``; ``output`` names the final model.
    """
    unknown = set(plan) - {"name", "sources", "steps", "output"}
    if unknown:
        raise MergeError(f"unknown keys in merge plan: {sorted(unknown)}")
    env: Dict[str, CausalModel] = {}
    for key, spec in plan.get("sources", {}).items():
        env[key] = _load_source(spec, root_dir)

    def get(key):
        if key not in env:
            raise MergeError(f"merge plan refers to unknown model {key!r}")
        return env[key]

    target = None
    for i, step in enumerate(plan.get("steps", ())):
        op = step.get("op")
        target = step.get("as")
        if not target:
            raise MergeError(f"step {i} ({op}) has no 'as' name")
        try:
            env[target] = _run_step(step, op, get)
        except KeyError as exc:
            raise MergeError(f"step {i} ({op}) is missing key {exc.args[0]!r}") from None
    output = plan.get("output") or target
    if output is None:
        raise MergeError("merge plan has no steps and no output")
    out = get(output)
    if plan.get("name"):
        out = out.replace(name=plan["name"])
    return out


def _run_step(step, op, get):
    if op == "split":
        return submodel(get(step["source"]), step["root"], name=step["as"])
    if op == "refine":
        return refine(get(step["base"]), step["leaf"], get(step["sub"]), step.get("sub_root"))
    if op == "equate":
        return equate(get(step["a"]), step["node"], get(step["b"]), step["other"])
    if op == "extend":
        ext = get(step["ext"]) if step.get("ext") else None
        return extend(get(step["base"]), ext, GlueSpec.from_dict(step.get("glue", {})))
    if op == "annotate":
        return annotate(get(step["model"]), step.get("preemptions", ()))
    raise MergeError(f"unknown op {op!r}")


def load_plan(path) -> CausalModel:
    with open(path, encoding="utf-8") as fh:
        plan = json.load(fh)
    return run_plan(plan, os.path.dirname(os.path.abspath(path)))
