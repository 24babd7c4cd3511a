"""
Command-line runner.

    ris-lab analyze  --config fig2               AST at the spec file's fixed point
    ris-lab sweep    --config fig2 --out results CSV + gnuplot script
    ris-lab optimize --config fig5               optimal blocklength
    ris-lab simulate --config fig7               Monte Carlo only
    ris-lab selftest                             invariant checks

Exit codes: 0 success, 1 invalid input, 2 numerical failure, 3 infeasible
optimisation. ``RIS_LAB_THREADS`` caps the worker pool (0 = all cores).
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from dataclasses import replace

from .experiments import (
    ExperimentSpec, SpecError, bundled_spec_names, evaluate, evaluator_for, load_spec, opt_row,
    run_experiment, run_optimizer_sweep, trend_summary, write_outputs,
)
from .optimize import OptConstraints, optimize_constrained, optimize_unconstrained
from .selftest import run_selftest

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL, EXIT_INFEASIBLE = 0, 1, 2, 3


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ris-lab", description=__doc__.split("\n\n")[0].strip())
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out=False):
        sp.add_argument("--config", required=True,
                        help="spec file, or a bundled spec name: " + ", ".join(bundled_spec_names()))
        sp.add_argument("--seed", type=int, help="override the Monte Carlo seed (u64)")
        sp.add_argument("--realizations", type=int, help="override the Monte Carlo realisation count")
        sp.add_argument("--series", help="comma-separated series kinds to run")
        if out:
            sp.add_argument("--out", default=".", help="output directory")

    common(sub.add_parser("analyze", help="evaluate every series at the fixed point"))
    common(sub.add_parser("sweep", help="run a spec file and write CSV + plot script"), out=True)
    sp = sub.add_parser("optimize", help="optimal blocklength at the fixed point")
    common(sp)
    sp.add_argument("--eps-th", type=float, help="reliability target (enables the constrained problem)")
    sp.add_argument("--m-th", type=float, help="latency cap in channel uses")
    common(sub.add_parser("simulate", help="Monte Carlo AST at the fixed point"))
    sub.add_parser("selftest", help="run the invariant checks")
    return p


def _apply_overrides(spec: ExperimentSpec, args) -> ExperimentSpec:
    plan = spec.plan
    if args.seed is not None:
        plan = replace(plan, seed=args.seed)
    if args.realizations is not None:
        plan = replace(plan, realizations=args.realizations)
    changes = {"plan": plan}
    if args.series:
        changes["series"] = tuple(s.strip() for s in args.series.split(",") if s.strip())
    return replace(spec, **changes)


def _fmt(x) -> str:
    return "nan" if x is None or (isinstance(x, float) and math.isnan(x)) else f"{x:.6g}"


def _cmd_analyze(spec, kinds) -> int:
    status = EXIT_OK
    for kind in kinds:
        r = evaluate(kind, spec.scenario, spec.fixed, spec.plan)
        if not math.isfinite(r.value):
            status = EXIT_NUMERICAL
        sem = f"  sem={_fmt(r.sem)}" if r.sem is not None else ""
        print(f"{kind:22s} ast={_fmt(r.value)}  eps_bar={_fmt(r.eps_bar)}{sem}")
    return status


def _cmd_optimize(spec, args) -> int:
    ev = evaluator_for(spec.scenario, spec.fixed)
    o = spec.optimizer
    eps_th = args.eps_th if args.eps_th is not None else (o.eps_th if o.mode == "constrained" else None)
    m_th = args.m_th if args.m_th is not None else o.m_th
    if eps_th is not None or args.m_th is not None:
        cons = OptConstraints(1.0 if eps_th is None else eps_th, m_th)
        res = optimize_constrained(ev, spec.fixed.code, cons)
    else:
        res = optimize_unconstrained(ev, spec.fixed.code, (o.m_lo, o.m_hi))
    if not res.feasible:
        print("infeasible: " + "; ".join(res.notes))
        return EXIT_INFEASIBLE
    row = opt_row("m", res.m_star, "optimal", res, spec.fixed.code.b)
    print(f"m_star={res.m_star}  ast={_fmt(res.ast_at_star)}  m_relaxed={_fmt(res.m_relaxed)}  "
          f"eps_bar={_fmt(row.eps_bar)}  binding={res.binding.value}"
          + ("  (multimodal: grid search)" if res.multimodal else ""))
    return EXIT_OK


def _cmd_sweep(spec, out) -> int:
    if spec.optimizer.mode != "none":
        rows = run_optimizer_sweep(spec)
        for line in trend_summary(rows):
            print(line)
    else:
        rows = run_experiment(spec)
    csv_path, gp_path = write_outputs(spec, rows, out)
    print(f"wrote {csv_path} ({len(rows)} rows) and {gp_path}")
    if any(r.failed for r in rows):
        print(f"{sum(r.failed for r in rows)} point(s) failed; see the notes column", file=sys.stderr)
        return EXIT_NUMERICAL
    if any(r.notes.startswith("infeasible") for r in rows):
        return EXIT_INFEASIBLE
    return EXIT_OK


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "selftest":
        results = run_selftest()
        for name, ok in results:
            print(f"{'PASS' if ok else 'FAIL'}  {name}")
        return EXIT_OK if all(ok for _, ok in results) else EXIT_NUMERICAL
    try:
        spec = _apply_overrides(load_spec(args.config), args)
        if args.command == "analyze":
            return _cmd_analyze(spec, spec.series)
        if args.command == "simulate":
            return _cmd_analyze(spec, ["monte_carlo"])
        if args.command == "optimize":
            return _cmd_optimize(spec, args)
        return _cmd_sweep(spec, args.out)
    except SpecError as exc:
        print(f"invalid spec: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ArithmeticError, ValueError) as exc:
        # config validation raises ValueError too; the ones that reach here
        # come from dataclass checks on user input
        kind = EXIT_NUMERICAL if isinstance(exc, ArithmeticError) else EXIT_INVALID
        print(f"error: {exc}", file=sys.stderr)
        return kind
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
