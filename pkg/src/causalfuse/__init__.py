"""Binary causal models built from fault trees, attack trees and task models."""
from .errors import (
    CausalFuseError,
    CauseQueryError,
    EffectNotHoldError,
    EvidenceConflictError,
    EvidenceError,
    FormulaSyntaxError,
    HtaError,
    HtaSyntaxError,
    MergeError,
    ModelError,
    SearchLimitError,
    TreeError,
    UnboundVariableError,
)
from .formula import And, Const, Not, Or, Var, Xor, eval_formula, formula_vars, parse_formula, render
from .model import (
    CausalFormula,
    CausalModel,
    all_contexts,
    evaluate,
    intervene,
    load_model,
    satisfies,
    validate_model,
)
from .inference import CauseQueryOptions, CauseVerdict, but_for, enumerate_causes, is_actual_cause
from .trees import load_tree, parse_tree, tree_to_causal
from .hta import InversionSpec, invert_hta, load_hta, parse_hta
from .merge import GlueSpec, equate, extend, load_plan, refine, run_plan
from .scenario import Evidence, ScenarioReport, analyze, apply_evidence, load_evidence, prune
from .dot import export_dot
from .kernel import BACKEND

__version__ = "0.1.0"

__all__ = [
    "CausalFuseError",
    "CauseQueryError",
    "EffectNotHoldError",
    "EvidenceConflictError",
    "EvidenceError",
    "FormulaSyntaxError",
    "HtaError",
    "HtaSyntaxError",
    "MergeError",
    "ModelError",
    "SearchLimitError",
    "TreeError",
    "UnboundVariableError",
    "And",
    "Const",
    "Not",
    "Or",
    "Var",
    "Xor",
    "eval_formula",
    "formula_vars",
    "parse_formula",
    "render",
    "CausalFormula",
    "CausalModel",
    "all_contexts",
    "evaluate",
    "intervene",
    "load_model",
    "satisfies",
    "validate_model",
    "CauseQueryOptions",
    "CauseVerdict",
    "but_for",
    "enumerate_causes",
    "is_actual_cause",
    "load_tree",
    "parse_tree",
    "tree_to_causal",
    "InversionSpec",
    "invert_hta",
    "load_hta",
    "parse_hta",
    "GlueSpec",
    "equate",
    "extend",
    "load_plan",
    "refine",
    "run_plan",
    "Evidence",
    "ScenarioReport",
    "analyze",
    "apply_evidence",
    "load_evidence",
    "prune",
    "export_dot",
    "BACKEND",
]
