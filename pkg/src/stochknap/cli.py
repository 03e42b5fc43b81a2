"""Command line front end: solve, brute, estimate, check-hyper, gen, selftest.

Every command reads or writes JSON (UTF-8, newline terminated).  Exit codes:
0 on success, 1 on invalid input, 2 when a size budget is exceeded.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import replace
from fractions import Fraction
from typing import Optional, Sequence

from .distributions import Bernoulli, Finite, Laplace, as_fraction, fraction_str, max_kurtosis, reference_kurtosis
from .errors import BudgetError, InstanceError
from .generators import FAMILIES, generate
from .instance import STREAM_BRUTE, STREAM_REPORT, Instance, SolverConfig, dump_json, load_instance, stream
from .oracles import OverflowEstimate, brute_force_opt, exact_overflow, mc_overflow
from .scheme_bernoulli import solve_bernoulli
from .scheme_hyper import solve_hyper
from .scheme_ksupport import common_support, solve_ksupport

SCHEMES = ("bernoulli", "ksupport", "hyper", "auto")


def pick_scheme(instance: Instance, k_cap: int = 4) -> str:
    """bernoulli if every item is Bernoulli, ksupport for a small common finite
    support, hyper otherwise."""
    dists = instance.dists
    if dists and all(isinstance(d, Bernoulli) for d in dists):
        return "bernoulli"
    if dists and all(isinstance(d, (Bernoulli, Finite)) for d in dists):
        if len(common_support(instance)) <= k_cap:
            return "ksupport"
    return "hyper"


def _config(args) -> SolverConfig:
    cfg = SolverConfig()
    changes = {}
    if getattr(args, "delta", None) is not None:
        changes["delta"] = args.delta
    if getattr(args, "type_budget", None) is not None:
        changes["type_budget"] = args.type_budget
    if getattr(args, "gate_mode", None) is not None:
        changes["gate_mode"] = args.gate_mode
    return replace(cfg, **changes) if changes else cfg


def _load(args) -> Instance:
    if not args.instance:
        raise InstanceError("--instance is required")
    try:
        inst = load_instance(args.instance)
    except OSError as exc:
        raise InstanceError(f"cannot read {args.instance}: {exc.strerror}") from None
    changes = {}
    if args.epsilon is not None:
        changes["epsilon"] = as_fraction(args.epsilon)
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.delta is not None:
        changes["delta"] = args.delta
    return inst.with_(**changes) if changes else inst


def _emit(obj, args) -> None:
    text = dump_json(obj)
    if getattr(args, "output", None):
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_solve(args) -> dict:
    inst = _load(args)
    config = _config(args)
    scheme = args.scheme if args.scheme != "auto" else pick_scheme(inst, config.k_cap)
    solver = {"bernoulli": solve_bernoulli, "ksupport": solve_ksupport, "hyper": solve_hyper}[scheme]
    sol = solver(inst, config=config)
    return sol.to_json(include_time=not args.no_time)


def cmd_brute(args) -> dict:
    inst = _load(args)
    started = time.perf_counter()
    tau = args.tau if args.tau is not None else None
    res = brute_force_opt(inst, cap=args.brute_cap, tau=tau, delta=inst.delta, rng=stream(inst.seed, STREAM_BRUTE))
    out: dict = {"scheme": "brute", "epsilon": fraction_str(inst.epsilon), "seed": inst.seed}
    if res is None:
        out.update({"selected": None, "total_profit": None, "overflow": None, "feasible": False})
    else:
        if res.exact:
            overflow = {"estimate": float(res.overflow), "exact": fraction_str(res.overflow),
                        "half_width": 0.0, "confidence": 1.0}
        else:
            overflow = res.overflow.to_json()
        out.update({"selected": list(res.subset), "total_profit": fraction_str(res.profit),
                    "overflow": overflow, "feasible": True})
    if not args.no_time:
        out["wall_time_ms"] = round((time.perf_counter() - started) * 1000.0, 3)
    return out


def parse_subset(text: str, n: int) -> tuple:
    text = (text or "").strip()
    if not text:
        return ()
    try:
        idx = [int(tok) for tok in text.split(",")]
    except ValueError:
        raise InstanceError(f"--subset must be comma-separated indices, got {text!r}") from None
    if len(set(idx)) != len(idx):
        raise InstanceError("--subset has repeated indices")
    bad = [i for i in idx if not 0 <= i < n]
    if bad:
        raise InstanceError(f"--subset index {bad[0]} is outside 0..{n - 1}")
    return tuple(sorted(idx))


def cmd_estimate(args) -> dict:
    inst = _load(args)
    subset = parse_subset(args.subset, inst.n)
    dists = inst.subset_dists(subset)
    if args.exact:
        if not all(d.finite for d in dists):
            raise InstanceError("--exact needs every selected item to be a finite law")
        val = exact_overflow(dists, inst.capacity)
        out = OverflowEstimate(float(val), 0.0, 1.0, 0).to_json()
        out["exact"] = fraction_str(val)
    else:
        delta = args.delta if args.delta is not None else inst.delta
        out = mc_overflow(dists, inst.capacity, args.tau, delta, stream(inst.seed, STREAM_REPORT)).to_json()
    out["subset"] = list(subset)
    return out


def cmd_check_hyper(args) -> dict:
    inst = _load(args)
    rows = []
    for i, d in enumerate(inst.dists):
        m = d.moments()
        ref = reference_kurtosis(d)
        rows.append({
            "index": i,
            "family": d.tag,
            "variance": float(m.var),
            "kurtosis": None if m.kurtosis is None else float(m.kurtosis),
            "reference_kurtosis": ref,
        })
    c4 = max_kurtosis(inst.dists, skip_degenerate=True)
    return {
        "items": rows,
        "c4": None if c4 is None else float(c4),
        "c": None if c4 is None else float(c4) ** 0.25,
        "zero_variance_items": [r["index"] for r in rows if r["kurtosis"] is None],
    }


def cmd_gen(args) -> dict:
    eps = as_fraction(args.epsilon) if args.epsilon is not None else None
    inst = generate(args.family, args.n, seed=args.seed if args.seed is not None else 0, k=args.k, epsilon=eps)
    return inst.to_json()


def _selftest_checks() -> list:
    """Small end-to-end checks that exercise every scheme against brute force."""
    checks = []

    def record(name, ok, detail=""):
        checks.append({"check": name, "ok": bool(ok), "detail": detail})

    record("laplace kurtosis is 6", abs(float(Laplace(0.0, 1.0).moments().kurtosis) - 6.0) < 1e-9)

    for family, solver, seed in (("bernoulli", solve_bernoulli, 1), ("ksupport", solve_ksupport, 2)):
        inst = generate(family, 8, seed=seed)
        sol = solver(inst)
        opt = brute_force_opt(inst)
        over = exact_overflow(inst.subset_dists(sol.selected), inst.capacity)
        opt_profit = opt.profit if opt else Fraction(0)
        ok = over <= inst.p + inst.epsilon and sol.total_profit >= opt_profit
        record(f"{family} scheme matches brute force", ok,
               f"profit {fraction_str(sol.total_profit)} vs {fraction_str(opt_profit)}, overflow {float(over):.4f}")

    inst = generate("deterministic", 8, seed=3)
    sol = solve_hyper(inst)
    opt = brute_force_opt(inst)
    opt_profit = opt.profit if opt else Fraction(0)
    record("hyper scheme on point masses is exact", sol.total_profit == opt_profit,
           f"profit {fraction_str(sol.total_profit)} vs {fraction_str(opt_profit)}")
    return checks


def cmd_selftest(args) -> dict:
    checks = _selftest_checks()
    return {"ok": all(c["ok"] for c in checks), "checks": checks}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--instance", help="instance JSON file")
    common.add_argument("--epsilon", type=str, help="accuracy parameter (decimal or a/b)")
    common.add_argument("--seed", type=int, help="master seed")
    common.add_argument("--delta", type=float, help="failure probability of randomized checks")
    common.add_argument("--output", help="write JSON here instead of stdout")
    common.add_argument("--no-time", action="store_true", help="omit wall_time_ms from the output")

    parser = argparse.ArgumentParser(prog="stochknap", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", parents=[common], help="run an approximation scheme")
    p.add_argument("--scheme", choices=SCHEMES, default="auto")
    p.add_argument("--type-budget", type=int, help="cap on enumerated variance types (hyper scheme)")
    p.add_argument("--gate-mode", choices=("auto", "mc", "exact"), help="how overflow comparisons are judged")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("brute", parents=[common], help="exhaustive optimum over all subsets")
    p.add_argument("--brute-cap", type=int, default=20, help="refuse instances with more items")
    p.add_argument("--tau", type=float, help="Monte Carlo accuracy for non-finite sizes (default epsilon/10)")
    p.set_defaults(func=cmd_brute)

    p = sub.add_parser("estimate", parents=[common], help="overflow probability of a subset")
    p.add_argument("--subset", default="", help='comma-separated item indices, e.g. "0,2"')
    p.add_argument("--tau", type=float, default=0.01, help="half-width of the estimate")
    p.add_argument("--exact", action="store_true", help="exact convolution (finite laws only)")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("check-hyper", parents=[common], help="per-item kurtosis report")
    p.set_defaults(func=cmd_check_hyper)

    p = sub.add_parser("gen", parents=[common], help="emit a seeded random instance")
    p.add_argument("--family", choices=FAMILIES, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, default=2, help="support size for the ksupport family")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("selftest", parents=[common], help="quick end-to-end checks")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        result = args.func(args)
    except BudgetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (InstanceError, ValueError, ZeroDivisionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    _emit(result, args)
    if args.command == "selftest" and not result["ok"]:
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
