"""Command-line interface.

Exit status: 0 on success, 1 on a domain error (invalid model, failed
merge, contradictory evidence, ...), 2 on usage errors and unreadable
files.  Results go to stdout (or ``-o``); diagnostics go to stderr.

Paths of the form ``fixture:NAME`` resolve against the bundled fixtures,
or against ``$CAUSALFUSE_FIXTURES`` when that is set.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from importlib import resources

from .dot import export_dot
from .errors import CausalFuseError, ContextError
from .formula import as_formula, render
from .hta import invert_hta, load_hta, load_inversion
from .inference import CauseQueryOptions, but_for, enumerate_causes, is_actual_cause
from .merge import load_plan
from .model import evaluate, intervene, load_model, parse_assignment
from .scenario import analyze, load_evidence, prune
from .trees import load_tree, tree_to_causal

log = logging.getLogger("causalfuse")

FIXTURE_PREFIX = "fixture:"
FIXTURE_ENV = "CAUSALFUSE_FIXTURES"


class UsageError(Exception):
    pass


def fixture_dir() -> str:
    override = os.environ.get(FIXTURE_ENV)
    if override:
        return override
    return str(resources.files("causalfuse") / "fixtures")


def resolve(path: str) -> str:
    if path.startswith(FIXTURE_PREFIX):
        path = os.path.join(fixture_dir(), path[len(FIXTURE_PREFIX):])
    if not os.path.isfile(path):
        raise UsageError(f"no such file: {path}")
    return path


def _dump(doc) -> str:
    return json.dumps(doc, indent=2) + "\n"


def _setting_text(d):
    return ", ".join(f"{k}={v}" for k, v in d.items()) or "{}"


def _verdict_text(v):
    d = v.to_dict()
    lines = [
        f"cause {_setting_text(d['candidate'])} -> {d['effect']}: {'yes' if d['overall'] else 'no'}",
        f"  AC1 {d['ac1']}  AC2 {d['ac2']}  AC3 {d['ac3']}",
    ]
    if d["witness"]:
        lines.append(f"  witness W={_setting_text(d['witness']['W'])} x'={_setting_text(d['witness']['x_prime'])}")
    if d["ac3_violation"]:
        lines.append(f"  smaller cause {_setting_text(d['ac3_violation'])}")
    return "\n".join(lines) + "\n"


def _options(args) -> CauseQueryOptions:
    try:
        return CauseQueryOptions(
            max_cause_size=args.max_cause_size,
            allow_effect_vars=args.allow_effect_vars,
            max_model_size=args.max_model_size,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _context(m, text):
    u = parse_assignment(text or "")
    if not text and m.exogenous:
        raise ContextError(f"a --context is required; exogenous variables: {', '.join(m.exogenous)}")
    return u


# -- subcommands -------------------------------------------------------------

def cmd_validate(args):
    m = load_model(resolve(args.model))
    rep = m.report
    if args.format == "json":
        out = _dump({"model": m.name, "ok": rep.ok, "violations": [v.to_dict() for v in rep.violations]})
    else:
        out = f"{m.name}: ok\n" if rep.ok else "".join(f"{v.kind}: {v.message}\n" for v in rep.violations)
    for v in rep.violations:
        log.error("%s", v.message)
    return out, 0 if rep.ok else 1


def cmd_eval(args):
    m = load_model(resolve(args.model))
    if args.intervene:
        m = intervene(m, sorted(parse_assignment(args.intervene).items()))
    vals = evaluate(m, _context(m, args.context))
    endo = {x: vals[x] for x in m.endogenous}
    if args.format == "json":
        return _dump(endo), 0
    return "".join(f"{k}={v}\n" for k, v in endo.items()), 0


def cmd_cause(args):
    m = load_model(resolve(args.model))
    v = is_actual_cause(m, _context(m, args.context), parse_assignment(args.cause), args.effect, _options(args))
    return (_dump(v.to_dict()) if args.format == "json" else _verdict_text(v)), 0


def cmd_causes(args):
    m = load_model(resolve(args.model))
    vs = enumerate_causes(m, _context(m, args.context), args.effect, _options(args))
    if args.format == "json":
        return _dump({"effect": render(as_formula(args.effect)), "causes": [v.to_dict() for v in vs]}), 0
    return "".join(_verdict_text(v) for v in vs) or "no causes\n", 0


def cmd_butfor(args):
    m = load_model(resolve(args.model))
    cand = parse_assignment(args.cause)
    r = but_for(m, _context(m, args.context), cand, args.effect)
    if args.format == "json":
        return _dump({"candidate": cand, "effect": render(as_formula(args.effect)), "but_for": int(r)}), 0
    return f"but-for {_setting_text(cand)}: {'yes' if r else 'no'}\n", 0


def _model_out(m, args):
    if args.format == "json":
        return m.to_json()
    return "".join(f"{x} = {render(m.equations[x])}\n" for x in m.endogenous)


def cmd_convert_tree(args):
    return _model_out(tree_to_causal(load_tree(resolve(args.tree))), args), 0


def cmd_convert_hta(args):
    m = invert_hta(load_hta(resolve(args.hta)), load_inversion(resolve(args.inversion)))
    return _model_out(m, args), 0


def cmd_merge(args):
    return _model_out(load_plan(resolve(args.plan)), args), 0


def cmd_scenario(args):
    m = load_model(resolve(args.model))
    e = load_evidence(resolve(args.evidence))
    if args.pruned_model:
        pm, _ = prune(m, e)
        return _model_out(pm, args), 0
    r = analyze(m, e, args.effect, _options(args))
    return (r.to_json() if args.format == "json" else r.to_text()), 0


def cmd_dot(args):
    m = load_model(resolve(args.model))
    pruned, causes = {}, ()
    if args.evidence:
        e = load_evidence(resolve(args.evidence))
        _, pruned = prune(m, e)
        if args.effect or e.effect:
            r = analyze(m, e, args.effect, _options(args))
            causes = sorted({n for c in r.causes for n, _ in c.candidate})
    return export_dot(m, pruned=pruned, causes=causes, include_exogenous=args.exogenous), 0


# -- parser ------------------------------------------------------------------

def _query_flags(p):
    p.add_argument("--max-cause-size", type=int, default=3)
    p.add_argument("--allow-effect-vars", action="store_true")
    p.add_argument("--max-model-size", type=int, default=24)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="causalfuse", description="Causal models from fault trees, attack trees and task models.")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "text"), default="json")
    common.add_argument("-o", "--output", help="write results here instead of stdout")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.set_defaults(func=func)
        return p

    p = add("validate", cmd_validate, "check a model document")
    p.add_argument("--model", required=True)

    p = add("eval", cmd_eval, "solve a model in a context")
    p.add_argument("--model", required=True)
    p.add_argument("--context", default="")
    p.add_argument("--intervene", default="")

    for name, func, help_ in (
        ("cause", cmd_cause, "test one candidate cause"),
        ("causes", cmd_causes, "enumerate minimal actual causes"),
        ("butfor", cmd_butfor, "simple counterfactual test"),
    ):
        p = add(name, func, help_)
        p.add_argument("--model", required=True)
        p.add_argument("--context", default="")
        p.add_argument("--effect", required=True)
        if name != "causes":
            p.add_argument("--cause", required=True, help="e.g. ST=1 or A=1,B=0")
        if name != "butfor":
            _query_flags(p)

    p = add("convert-tree", cmd_convert_tree, "compile a fault or attack tree")
    p.add_argument("--tree", required=True)

    p = add("convert-hta", cmd_convert_hta, "invert a task model into a failure model")
    p.add_argument("--hta", required=True)
    p.add_argument("--inversion", required=True)

    p = add("merge", cmd_merge, "run a merge plan")
    p.add_argument("--plan", required=True)

    p = add("scenario", cmd_scenario, "analyse a scenario under evidence")
    p.add_argument("--model", required=True)
    p.add_argument("--evidence", required=True)
    p.add_argument("--effect")
    p.add_argument("--pruned-model", action="store_true", help="print the pruned model instead of the report")
    _query_flags(p)

    p = add("dot", cmd_dot, "render a model as Graphviz DOT")
    p.add_argument("--model", required=True)
    p.add_argument("--evidence")
    p.add_argument("--effect")
    p.add_argument("--exogenous", action="store_true", help="also draw exogenous inputs")
    _query_flags(p)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s: %(message)s"))
    root = logging.getLogger("causalfuse")
    saved = root.handlers[:], root.level, root.propagate
    root.handlers[:] = [handler]
    root.setLevel(logging.WARNING - 10 * min(args.verbose, 2))
    root.propagate = False
    try:
        return _run(args)
    finally:
        root.handlers[:], root.level, root.propagate = saved


def _run(args) -> int:
    try:
        out, status = args.func(args)
    except (UsageError, OSError) as exc:
        log.error("%s", exc)
        return 2
    except CausalFuseError as exc:
        log.error("%s", exc)
        return 1
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)
    return status


if __name__ == "__main__":
    sys.exit(main())
