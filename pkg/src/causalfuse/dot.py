"""Graphviz rendering of causal models.

Output is deterministic: nodes and edges are emitted in sorted order and
no attribute depends on hashing or timing.
"""
from __future__ import annotations

from typing import Iterable, Mapping, Optional, Tuple, Union

from .model import CausalModel

# fill colours per provenance tag; merged tags use the first tag
PALETTE = {
    "fault-tree": "#dbe9f6",
    "attack-tree": "#f8d7d3",
    "hta": "#e2f0d9",
    "expert": "#fff2cc",
}
CAUSE_COLOR = "#c00000"


def _q(s: str) -> str:
    return '"' + str(s).replace("\\", "\\\\").replace('"', '\\"') + '"'


def _attrs(pairs):
    return "[" + ", ".join(f"{k}={_q(v)}" for k, v in pairs) + "]"


def export_dot(
    m: CausalModel,
    pruned: Union[Mapping[str, int], Iterable[str]] = (),
    causes: Iterable[str] = (),
    preemptions: Optional[Iterable[Tuple[str, str]]] = None,
    include_exogenous: bool = False,
) -> str:
    """Render ``m`` as a DOT digraph.

    Pruned nodes get dashed borders (with their fixed value when ``pruned``
    is a mapping), cause nodes a thick red border, and preemption pairs a
    dotted edge.  Node fill encodes provenance.
    """
    m.require_valid()
    values = dict(pruned) if isinstance(pruned, Mapping) else {n: None for n in pruned}
    causes = set(causes)
    pre = sorted(set(map(tuple, m.preemptions if preemptions is None else preemptions)))
    shown = set(m.endogenous) | (set(m.exogenous) if include_exogenous else set())

    lines = [f"digraph {_q(m.name)} {{", "  rankdir=BT;", '  node [shape="box", style="rounded"];']
    for n in sorted(shown):
        tag = m.provenance.get(n, "")
        style = ["rounded"]
        attrs = []
        label = n
        if n in values:
            style.append("dashed")
            if values[n] is not None:
                label = f"{n} = {values[n]}"
        fill = PALETTE.get(tag.split("+")[0])
        if fill:
            style.append("filled")
            attrs.append(("fillcolor", fill))
        if tag:
            attrs.append(("class", tag))
        if n in m.exogenous:
            attrs.append(("shape", "ellipse"))
        if n in causes:
            attrs += [("color", CAUSE_COLOR), ("penwidth", "2.5")]
        attrs = [("label", label), ("style", ",".join(style))] + attrs
        lines.append(f"  {_q(n)} {_attrs(attrs)};")

    pre_set = set(pre)
    for child in sorted(m.endogenous):
        for parent in sorted(m.parents[child]):
            if parent not in shown:
                continue
            edge = f"  {_q(parent)} -> {_q(child)}"
            if (parent, child) in pre_set:
                edge += " " + _attrs([("style", "dotted"), ("arrowhead", "tee")])
            lines.append(edge + ";")
    for a, b in pre:
        if a in shown and b in shown and a not in m.parents.get(b, ()):
            lines.append(
                f"  {_q(a)} -> {_q(b)} "
                + _attrs([("style", "dotted"), ("arrowhead", "tee"), ("constraint", "false")])
                + ";"
            )
    lines.append("}")
    return "\n".join(lines) + "\n"
