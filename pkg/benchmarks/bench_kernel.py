"""Compare the compiled and pure-Python witness kernels.

    python benchmarks/bench_kernel.py --sizes 8 12 16 --repeat 5

Each case is a layered random model whose effect sits on top, queried with
a candidate at the bottom so the witness search spans most of the graph.
Both kernels must return the same witness; the script aborts otherwise.
A second table times a full scenario analysis on the bundled integrated
model, which issues thousands of small witness searches.
"""
import argparse
import random
import statistics
import time

from causalfuse import kernel
from causalfuse.cli import fixture_dir
from causalfuse.formula import And, Not, Or, Var
from causalfuse.inference import CauseQueryOptions, _Query
from causalfuse.model import CausalModel, load_model
from causalfuse.scenario import analyze, load_evidence


def chain_model(n, seed):
    """Root X, then n layers each reading the previous layer and one random earlier node."""
    rng = random.Random(seed)
    names = [f"V{i:02d}" for i in range(n)]
    eqs = {"X": Var("X_exo"), "Y": Var("Y_exo")}
    prev = ["X", "Y"]
    for name in names:
        a, b = prev[-1], rng.choice(prev[:-1])
        fa, fb = Var(a), Var(b)
        if rng.random() < 0.3:
            fb = Not(fb)
        eqs[name] = And(fa, fb) if rng.random() < 0.5 else Or(fa, fb)
        prev.append(name)
    eqs["E"] = Or(Var(names[-1]), And(Var("X"), Var("Y")))
    return CausalModel(
        name=f"bench{n}", exogenous=["X_exo", "Y_exo"], endogenous=list(eqs), equations=eqs
    )


def time_backend(fn, q, cand, repeat):
    saved = kernel.first_witness
    kernel.first_witness = fn
    try:
        times = []
        result = None
        for _ in range(repeat):
            t0 = time.perf_counter()
            result = q.ac2(cand)
            times.append(time.perf_counter() - t0)
        return statistics.median(times), result
    finally:
        kernel.first_witness = saved


def time_scenario(fn, name):
    saved = kernel.first_witness
    kernel.first_witness = fn
    try:
        d = fixture_dir()
        m = load_model(f"{d}/integrated.json")
        e = load_evidence(f"{d}/{name}.evidence.json")
        t0 = time.perf_counter()
        report = analyze(m, e, opts=CauseQueryOptions(max_model_size=32))
        return time.perf_counter() - t0, report.to_json()
    finally:
        kernel.first_witness = saved


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[8, 12, 16, 18])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    if kernel.compiled_first_witness is None:
        raise SystemExit("compiled kernel not built; run: pip install -e . --no-build-isolation")
    print(f"{'layers':>6} {'|R|':>4} {'python s':>10} {'cython s':>10} {'speedup':>8}")
    for n in args.sizes:
        m = chain_model(n, args.seed + n)
        q = _Query(m, {"X_exo": 1, "Y_exo": 1}, Var("E"))
        cand = (("X", q.actual["X"]),)
        r_size = len((m.descendants(["X"]) & m.ancestors(["E"])) - {"X"})
        tp, wp = time_backend(kernel.pure_first_witness, q, cand, args.repeat)
        tc, wc = time_backend(kernel.compiled_first_witness, q, cand, args.repeat)
        if wp != wc:
            raise SystemExit(f"backends disagree at n={n}: {wp} vs {wc}")
        print(f"{n:>6} {r_size:>4} {tp:>10.4f} {tc:>10.4f} {tp / max(tc, 1e-9):>7.1f}x")

    print()
    print(f"{'scenario':>10} {'python s':>10} {'cython s':>10} {'speedup':>8}")
    for name in ("scenario1", "scenario2"):
        tp, rp = time_scenario(kernel.pure_first_witness, name)
        tc, rc = time_scenario(kernel.compiled_first_witness, name)
        if rp != rc:
            raise SystemExit(f"backends disagree on {name}")
        print(f"{name:>10} {tp:>10.3f} {tc:>10.3f} {tp / max(tc, 1e-9):>7.1f}x")


if __name__ == "__main__":
    main()
