"""Command-line interface: ``buffon eval|sample|dist|pgf|named|grammar``."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import analysis
from .bags import Int1
from .combinators import Expr, Var, any_var
from .dsl import DSLError, parse, to_dsl
from .randbits import default_seed
from .registry import REGISTRY
from .runner import dist, run
from .vonneumann import Polylog, PermClass, VNIter, VNValue
from .walks import GrammarBernoulli, GrammarError, parse_grammar


def _contains(e: Expr, kind) -> bool:
    return isinstance(e, kind) or any(_contains(c, kind) for c in e.children())


def _record_max(e: Expr) -> bool:
    if isinstance(e, Polylog) or (isinstance(e, (VNValue, VNIter)) and e.cls is PermClass.RECORD_FIRST_MAX):
        return True
    return any(_record_max(c) for c in e.children())


def weak_warnings(e: Expr, binding: Expr | None, near_one: float = 0.9) -> list[str]:
    """Heuristic flags for machines whose mean flip count may be infinite or huge."""
    out = []
    for name, entry in REGISTRY.items():
        if entry.weak and entry.expr == e:
            out.append(f"{name} is only weakly realizable: mean flip count is infinite")
    if binding is not None:
        try:
            at = analysis.oracle_value(binding).value
        except analysis.UnsupportedKind:
            at = 0.0
        if at >= 1.0 - 1e-12 and _contains(e, Int1):
            out.append("integrator evaluated at x = 1: mean flip count may be infinite")
        if at >= near_one and _record_max(e):
            out.append(f"record-max tester at x = {at:.3g}: cost blows up as x -> 1")
    if out:
        out.append("flips.mean is unstable; rely on median and p95")
    return out


def _expr(text: str) -> Expr:
    return parse(text)


def _binding(text: str | None) -> Expr | None:
    if text is None:
        return None
    b = parse(text)
    if any_var(b):
        raise DSLError("--at / --lambda must be a closed expression", 1, 1)
    return b


def _check_bound(e: Expr, binding: Expr | None):
    if binding is None and any_var(e):
        raise DSLError("expression uses x; give a value with --at", 1, 1)


def _emit(obj, as_json: bool, text: str):
    if as_json:
        print(json.dumps(obj, indent=2))
    else:
        print(text)


def cmd_eval(args):
    e, b = _expr(args.expr), _binding(args.at)
    _check_bound(e, b)
    o = analysis.oracle_value(e, b)
    obj = {"expr": to_dsl(e), "binding": to_dsl(b) if b else None, "value": o.value, "error_bound": o.error_bound}
    _emit(obj, args.json, f"{o.value:.12f}  (+- {o.error_bound:.1e})")


def _stats_text(stats, warnings) -> str:
    lo, hi = stats.ci95
    f = stats.flips
    lines = [
        f"expr      {stats.expr}" + (f"  at {stats.binding}" if stats.binding else ""),
        f"n         {stats.n}   seed {stats.seed}",
        f"p_hat     {stats.p_hat:.5f}   95% CI [{lo:.5f}, {hi:.5f}]",
    ]
    if stats.oracle is not None:
        lines.append(f"oracle    {stats.oracle:.5f}")
    if warnings:
        lines += [f"warning   {w}" for w in warnings]
        lines.append(f"flips     median {f['median']}  p95 {f['p95']}  max {f['max']}  (mean {f['mean']:.3f}, unstable)")
    else:
        lines.append(f"flips     mean {f['mean']:.3f}  median {f['median']}  p95 {f['p95']}  max {f['max']}")
    if stats.censored:
        lines.append(f"censored  {stats.censored} samples exceeded the flip budget")
    return "\n".join(lines)


def _report(stats, args, warnings):
    if getattr(args, "csv", False):
        w = csv.writer(sys.stdout)
        w.writerow(["flips", "count"])
        for k in sorted(stats.flip_hist):
            w.writerow([k, stats.flip_hist[k]])
        return
    obj = stats.to_json()
    if warnings:
        obj["warnings"] = warnings
    _emit(obj, args.json, _stats_text(stats, warnings))


def cmd_sample(args):
    e, b = _expr(args.expr), _binding(args.at)
    _check_bound(e, b)
    warnings = weak_warnings(e, b)
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    stats = run(e, b, n=args.n, seed=args.seed, budget=args.budget, workers=args.workers)
    _report(stats, args, warnings)


def cmd_dist(args):
    lam = _binding(args.lam)
    h = dist(args.kind, lam, args.n, args.seed)
    cs = h.chi_square
    lines = [f"{args.kind}({h.lam:.6g})  n {h.n}  seed {h.seed}  mean trials {h.mean_trials:.4f}"]
    lines += [f"  {label:>6}  {obs:8d}  {exp:10.1f}" for label, obs, exp in cs.cells]
    lines.append(f"chi2 {cs.statistic:.3f}  dof {cs.dof}  p-value {cs.p_value:.4f}")
    _emit(h.to_json(), args.json, "\n".join(lines))


_PGF_CLASSES = {
    "sorted": PermClass.SORTED,
    "recordmax": PermClass.RECORD_FIRST_MAX,
    "all": PermClass.ALL,
    "alteven": PermClass.ALTERNATING_EVEN,
    "altodd": PermClass.ALTERNATING_ODD,
}


def cmd_pgf(args):
    lam = Fraction(args.lam)
    series = analysis.cost_pgf(_PGF_CLASSES[args.cls], lam, args.order)
    print(
        json.dumps(
            {
                "class": args.cls,
                "lambda": f"{lam.numerator}/{lam.denominator}",
                "order": args.order,
                "coeffs": [str(c) for c in series.coeffs],
            },
            indent=None if args.compact else 2,
        )
    )


def _named_obj(name):
    entry = REGISTRY[name]
    return {
        "name": name,
        "expr": to_dsl(entry.expr),
        "description": entry.description,
        "weak": entry.weak,
        "oracle": analysis.oracle_value(entry.expr).value,
    }


def cmd_named(args):
    if args.name in (None, "list"):
        if args.json:
            print(json.dumps([_named_obj(k) for k in REGISTRY], indent=2))
        else:
            width = max(map(len, REGISTRY))
            for k, entry in REGISTRY.items():
                flag = "  [weak]" if entry.weak else ""
                print(f"{k:<{width}}  {entry.description}{flag}")
        return
    if args.name not in REGISTRY:
        raise KeyError(f"unknown machine {args.name!r}; available: {', '.join(REGISTRY)}")
    obj = _named_obj(args.name)
    _emit(obj, args.json, f"{obj['name']}: {obj['description']}\n  {obj['expr']}\n  oracle {obj['oracle']:.12f}")


def cmd_grammar(args):
    g = parse_grammar(Path(args.file).read_text())
    lam = _binding(args.lam)
    e = GrammarBernoulli(g, Var())
    stats = run(e, lam, n=args.n, seed=args.seed, budget=args.budget)
    _report(stats, args, [])


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="buffon", description="Perfect Bernoulli sampling from fair coin flips.")
    sub = p.add_subparsers(dest="command", required=True)

    def common_run(sp):
        sp.add_argument("-n", type=int, default=10_000, help="number of samples")
        sp.add_argument("--seed", type=int, default=None, help="64-bit seed (default $BUFFON_SEED)")
        sp.add_argument("--budget", type=int, default=None, help="per-sample flip budget; overruns are censored")
        out = sp.add_mutually_exclusive_group()
        out.add_argument("--json", action="store_true")
        out.add_argument("--csv", action="store_true", help="flip-count histogram as CSV")

    sp = sub.add_parser("eval", help="exact/numeric success probability")
    sp.add_argument("expr")
    sp.add_argument("--at", default=None, help="closed expression bound to x")
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("sample", help="run a machine n times")
    sp.add_argument("expr")
    sp.add_argument("--at", default=None)
    sp.add_argument("--workers", type=int, default=1)
    common_run(sp)
    sp.set_defaults(func=cmd_sample)

    sp = sub.add_parser("dist", help="sample a Poisson/logarithmic/geometric law and fit it")
    sp.add_argument("kind", choices=["poisson", "logarithmic", "geometric"])
    sp.add_argument("--lambda", dest="lam", default="flip")
    sp.add_argument("-n", type=int, default=10_000)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_dist)

    sp = sub.add_parser("pgf", help="exact cost PGF of the von Neumann schema")
    sp.add_argument("--class", dest="cls", choices=list(_PGF_CLASSES), default="sorted")
    sp.add_argument("--lambda", dest="lam", default="1/2")
    sp.add_argument("--order", type=int, default=16)
    sp.add_argument("--compact", action="store_true")
    sp.set_defaults(func=cmd_pgf)

    sp = sub.add_parser("named", help="list or show registered machines")
    sp.add_argument("name", nargs="?", default=None)
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_named)

    sp = sub.add_parser("grammar", help="sample the Bernoulli machine of a grammar file")
    sp.add_argument("file")
    sp.add_argument("--lambda", dest="lam", default="flip")
    common_run(sp)
    sp.set_defaults(func=cmd_grammar)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "seed", 0) is None:
        args.seed = default_seed()
    try:
        args.func(args)
    except (DSLError, GrammarError, KeyError, ValueError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"buffon: error: {msg}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
