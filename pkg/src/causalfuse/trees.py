"""Attack and fault trees, and their compilation into causal models.

Tree documents are JSON::

    {"kind": "fault" | "attack",
     "name": "optional model name",
     "root": "Collision",
     "nodes": {"Collision": {"gate": "OR", "children": ["A", "B"],
                             "label": "Collision with no braking"},
               "A": {}, "B": {}}}

Leaves omit ``gate`` and ``children``.  Node names must be identifiers;
``label`` carries free text for display.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from typing import Dict, Mapping, Optional, Tuple

from .errors import TreeError
from .formula import Var, conjoin, disjoin, exclusive, is_valid_name
from .model import EXO_SUFFIX, CausalModel

log = logging.getLogger(__name__)

GATES = ("AND", "OR", "XOR", "PAND", "INHIBIT")
ATTACK_GATES = ("AND", "OR")
KIND_TAGS = {"fault": "fault-tree", "attack": "attack-tree"}

_TREE_KEYS = {"kind", "name", "root", "nodes"}
_NODE_KEYS = {"gate", "children", "label"}


@dataclass(frozen=True)
class TreeNode:
    gate: Optional[str] = None
    children: Tuple[str, ...] = ()
    label: Optional[str] = None

    @property
    def is_leaf(self):
        return not self.children


@dataclass(frozen=True)
class Tree:
    kind: str
    root: str
    nodes: Mapping[str, TreeNode]
    name: str = ""

    def leaves(self):
        return tuple(sorted(n for n, node in self.nodes.items() if node.is_leaf))

    def parents(self):
        out: Dict[str, list] = {n: [] for n in self.nodes}
        for n, node in self.nodes.items():
            for c in node.children:
                out[c].append(n)
        return out


def tree_from_dict(doc) -> Tree:
    if not isinstance(doc, dict):
        raise TreeError("tree document must be a JSON object")
    unknown = set(doc) - _TREE_KEYS
    if unknown:
        raise TreeError(f"unknown keys in tree document: {sorted(unknown)}")
    kind = doc.get("kind")
    if kind not in KIND_TAGS:
        raise TreeError(f"tree kind must be 'fault' or 'attack', got {kind!r}")
    if "root" not in doc or "nodes" not in doc:
        raise TreeError("tree document needs 'root' and 'nodes'")
    nodes = {}
    for name, spec in doc["nodes"].items():
        if not is_valid_name(name):
            raise TreeError(f"invalid node name {name!r}")
        spec = spec or {}
        bad = set(spec) - _NODE_KEYS
        if bad:
            raise TreeError(f"unknown keys {sorted(bad)} on node {name!r}")
        gate = spec.get("gate")
        if gate is not None:
            gate = str(gate).upper()
        nodes[name] = TreeNode(gate=gate, children=tuple(spec.get("children", ())), label=spec.get("label"))
    tree = Tree(kind=kind, root=doc["root"], nodes=nodes, name=doc.get("name") or f"{kind}-tree")
    check_tree(tree)
    return tree


def parse_tree(text: str) -> Tree:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TreeError(f"tree is not valid JSON: {exc}") from exc
    return tree_from_dict(doc)


def load_tree(path) -> Tree:
    with open(path, encoding="utf-8") as fh:
        return parse_tree(fh.read())


def check_tree(t: Tree):
    if t.root not in t.nodes:
        raise TreeError(f"root {t.root!r} is not a node")
    for name, node in t.nodes.items():
        for c in node.children:
            if c not in t.nodes:
                raise TreeError(f"node {name!r} has dangling child {c!r}")
        if len(set(node.children)) != len(node.children):
            raise TreeError(f"node {name!r} lists a child twice")
        if node.children:
            if node.gate is None:
                raise TreeError(f"internal node {name!r} has no gate")
            if node.gate not in GATES:
                raise TreeError(f"unknown gate {node.gate!r} on node {name!r}")
            if t.kind == "attack" and node.gate not in ATTACK_GATES:
                raise TreeError(f"attack trees only support AND/OR gates; {name!r} uses {node.gate}")
            if node.gate == "INHIBIT" and len(node.children) != 2:
                raise TreeError(f"INHIBIT gate {name!r} needs exactly an input and a condition child")
        elif node.gate is not None:
            raise TreeError(f"leaf {name!r} has a gate but no children")
    parents = t.parents()
    if parents[t.root]:
        raise TreeError(f"root {t.root!r} has parents {sorted(parents[t.root])}")
    cycle = _cycle(t)
    if cycle:
        raise TreeError("cycle in tree: " + " -> ".join(cycle))
    reach = set()
    stack = [t.root]
    while stack:
        n = stack.pop()
        if n not in reach:
            reach.add(n)
            stack.extend(t.nodes[n].children)
    orphans = sorted(set(t.nodes) - reach)
    if orphans:
        raise TreeError(f"nodes not reachable from root {t.root!r}: {orphans}")


def _cycle(t: Tree):
    color = {}

    def visit(n, path):
        color[n] = 1
        path.append(n)
        for c in t.nodes[n].children:
            if color.get(c) == 1:
                return path[path.index(c):] + [c]
            if c not in color:
                found = visit(c, path)
                if found:
                    return found
        path.pop()
        color[n] = 2
        return None

    for n in sorted(t.nodes):
        if n not in color:
            found = visit(n, [])
            if found:
                return found
    return None


def gate_formula(gate: str, children, node_name=""):
    args = [Var(c) for c in children]
    if gate == "AND":
        return conjoin(args)
    if gate == "OR":
        return disjoin(args)
    if gate == "XOR":
        return exclusive(args)
    if gate == "PAND":
        log.warning("PAND gate %s compiled to AND: event order is not expressible in binary equations", node_name)
        return conjoin(args)
    if gate == "INHIBIT":
        log.warning("INHIBIT gate %s compiled to AND of input and condition", node_name)
        return conjoin(args)
    raise TreeError(f"unknown gate {gate!r}")


def tree_to_causal(t: Tree) -> CausalModel:
    """Each node becomes an endogenous variable; each leaf ``X`` is driven by ``X_exo``."""
    check_tree(t)
    clash = sorted(n for n in t.nodes if n.endswith(EXO_SUFFIX))
    if clash:
        raise TreeError(f"node names use the reserved {EXO_SUFFIX!r} suffix: {clash}")
    tag = KIND_TAGS[t.kind]
    eqs = {}
    exo = []
    for name in sorted(t.nodes):
        node = t.nodes[name]
        if node.is_leaf:
            drv = name + EXO_SUFFIX
            exo.append(drv)
            eqs[name] = Var(drv)
        else:
            eqs[name] = gate_formula(node.gate, node.children, name)
    prov = {v: tag for v in list(eqs) + exo}
    return CausalModel(name=t.name, exogenous=exo, endogenous=list(eqs), equations=eqs, provenance=prov)
