"""Command line: certilasso {solve, condition, sweep, make-witness}.

Exit codes: 0 when a certified support was produced, 2 when the budget
ran out, 1 for malformed input or bad flags.  Reports are JSON; every
number appears as an exact rational string next to a decimal rendering.
Supports in reports are 1-based feature indices.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
from dataclasses import asdict, dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction
from pathlib import Path

from .baseline import DEFAULT_EPSILONS, DEFAULT_NS, FAMILIES, FloatSolveConfig, failure_sweep, sweep_csv
from .conditioning import ILL_POSED_KINDS, make_ill_posed, stsp_bounds
from .exact import ContractViolation
from .fsul import BudgetExhausted, FsulBudget, IterationEvent, fsul
from .lasso import DEFAULT_ENUMERATION_CAP, ulasso_enumerate
from .oracle import (
    GroundTruth,
    InexactInput,
    OracleToleranceError,
    Steer,
    adversarial_oracle,
    dump_ground_truth,
    dyadic_oracle,
    load_ground_truth,
)

EXIT_OK, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # bad flags are input errors (exit 1), not argparse's default 2
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def number(v) -> dict:
    """{"exact": "p/q", "decimal": "..."}; infinities render as "inf"."""
    if isinstance(v, float) and math.isinf(v):
        return {"exact": "inf", "decimal": "inf"}
    v = Fraction(v)
    exact = str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    with localcontext() as ctx:
        ctx.prec = 20
        dec = Decimal(v.numerator) / Decimal(v.denominator)
    return {"exact": exact, "decimal": format(dec, "g")}


def parse_number(doc) -> Fraction | float:
    return math.inf if doc["exact"] == "inf" else Fraction(doc["exact"])


def one_based(support) -> list[int]:
    return [i + 1 for i in support]


@dataclass
class RunReport:
    command: list[str]
    input_digest: str | None
    outcome: dict
    trace: list[dict] = field(default_factory=list)
    timing: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunReport":
        return cls(**json.loads(text))


def event_json(ev: IterationEvent) -> dict:
    doc = {
        "n": ev.n,
        "delta": number(ev.delta),
        "C": number(ev.C) if ev.C is not None else None,
        "support": one_based(ev.support) if ev.support is not None else None,
        "terminated": ev.terminated,
    }
    s = ev.sigma
    if s is not None:
        doc["sigma"] = {
            "sigma1": number(s.sigma1),
            "sigma3": number(s.sigma3),
            "sigma2_exceeds_C": s.sigma2_exceeds_C,
            "sigma_leq_C2": s.sigma_leq_C2,
            "degenerate": s.degenerate,
        }
    else:
        doc["sigma"] = None
    return doc


def _digest(path: str) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _load(args) -> GroundTruth:
    truth = load_ground_truth(args.input)
    if args.lam is not None:
        truth = GroundTruth(truth.y, truth.A, Fraction(args.lam))
    return truth


def _oracle(truth: GroundTruth, spec: str) -> InexactInput:
    if spec == "dyadic":
        return dyadic_oracle(truth)
    if spec.startswith("adversarial:"):
        target = load_ground_truth(spec.split(":", 1)[1])
        ty, tA = target.exact()
        return adversarial_oracle(truth, Steer(ty, tA))
    raise UsageError(f"unknown oracle {spec!r}; use dyadic or adversarial:<target.json>")


def _budget(args) -> FsulBudget:
    return FsulBudget(max_iterations=args.budget, wall_clock_limit=args.time_limit)


def _run_fsul(args):
    truth = _load(args)
    inp = _oracle(truth, args.oracle)
    started = time.monotonic()
    report = None
    if args.verbose:
        def report(ev):
            status = "degenerate" if ev.sigma is None else ("stop" if ev.terminated else "continue")
            print(f"n={ev.n} delta=1/{1 / ev.delta} support={one_based(ev.support or ())} {status}", file=sys.stderr)
    out = fsul(inp, _budget(args), report)
    elapsed = time.monotonic() - started
    timing = {"seconds": round(elapsed, 6), "max_precision_bits": inp.max_precision, "oracle_calls": inp.calls}
    return truth, inp, out, timing


def _emit(report: RunReport, args) -> None:
    text = report.to_json()
    if getattr(args, "json", None):
        Path(args.json).write_text(text + "\n")
    print(text)


def _exhausted(out: BudgetExhausted) -> dict:
    return {"status": "BudgetExhausted", "iterations": out.iterations, "reason": out.reason}


def cmd_solve(args) -> int:
    truth, inp, out, timing = _run_fsul(args)
    trace = [event_json(e) for e in out.trace]
    if isinstance(out, BudgetExhausted):
        outcome = _exhausted(out)
        code = EXIT_BUDGET
    else:
        outcome = {
            "status": "certified",
            "support": one_based(out.support),
            "eta": number(out.eta),
            "iterations": out.iterations,
            "certificate": out.certificate.to_json(one_based=True),
        }
        code = EXIT_OK
    _emit(RunReport(args.argv, _digest(args.input), outcome, trace, timing), args)
    return code


def _bounds_json(truth: GroundTruth, fallback_cert, fallback_yA) -> dict:
    """sigma bounds on stsp for the exact data when it is rational and small."""
    try:
        y, A = truth.exact()
        if truth.N > DEFAULT_ENUMERATION_CAP:
            raise ValueError("too large to enumerate")
        cert = ulasso_enumerate(y, A, truth.lam)
        source = "exact input"
    except (ValueError, ArithmeticError):
        (y, A), cert = fallback_yA, fallback_cert
        source = "final approximation"
    b = stsp_bounds(cert, y, A, truth.lam)
    enc = b.ub_sigma2_enclosure()
    return {
        "source": source,
        "lb": number(b.lb),
        "ub_sigma1": number(b.ub_sigma1) if b.ub_sigma1 is not None else None,
        "ub_sigma2_enclosure": [number(v) for v in enc] if enc else None,
        "ub_sigma3": number(b.ub_sigma3) if b.ub_sigma3 is not None else None,
    }


def cmd_condition(args) -> int:
    truth, inp, out, timing = _run_fsul(args)
    trace = [event_json(e) for e in out.trace]
    if isinstance(out, BudgetExhausted):
        _emit(RunReport(args.argv, _digest(args.input), _exhausted(out), trace, timing), args)
        return EXIT_BUDGET
    n = out.iterations
    approx = (inp.get_vector(4 * n), inp.get_matrix(4 * n))  # cached, no new precision
    outcome = {
        "status": "certified",
        "support": one_based(out.support),
        "eta": number(out.eta),
        "stsp_at_least": number(1 / out.eta),
        "bounds": _bounds_json(truth, out.certificate, approx),
    }
    _emit(RunReport(args.argv, _digest(args.input), outcome, trace, timing), args)
    return EXIT_OK


def _floats(text: str) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"not a comma-separated list of numbers: {text!r}") from exc
    if not vals or any(v <= 0 for v in vals):
        raise UsageError("values must be positive")
    return vals


def cmd_sweep(args) -> int:
    default = "1e-2" if args.family == "deterministic-epsilon" else "1e-3"
    thresholds = _floats(args.thresholds or default)
    if args.trials < 0:
        raise UsageError("--trials must be >= 0")
    if args.params:
        params = _floats(args.params)
        if args.family != "deterministic-epsilon":
            params = [int(v) for v in params]
    else:
        params = DEFAULT_EPSILONS if args.family == "deterministic-epsilon" else DEFAULT_NS
    cfg = FloatSolveConfig(max_iters=args.max_iters, objective_tolerance=args.objective_tolerance)
    rows = failure_sweep(args.family, thresholds, args.trials, args.seed, params, cfg)
    text = sweep_csv(rows)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_make_witness(args) -> int:
    w = make_ill_posed(args.kind, Fraction(args.lam))
    out = Path(args.out)
    written = []
    if args.kind == "vanishing-coordinate":
        # the t = 0 limit is the ill-posed member; t = 2^-k approach it
        y, A = w.family(Fraction(0))
        dump_ground_truth(GroundTruth.from_values(y, A, w.lam), out)
        written.append(str(out))
        for k in range(1, args.family_size + 1):
            y, A = w.family(Fraction(1, 1 << k))
            p = out.with_name(f"{out.stem}_t{k}{out.suffix or '.json'}")
            dump_ground_truth(GroundTruth.from_values(y, A, w.lam), p)
            written.append(str(p))
        sidecar = out.with_name(out.stem + ".witness.json")
        sidecar.write_text(json.dumps(w.artifacts(), indent=2) + "\n")
    else:
        w.dump(out)
        sidecar = out.with_name(out.stem + ".witness.json")
    written.append(str(sidecar))
    print(json.dumps({"kind": args.kind, "files": written}, indent=2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="certilasso", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def fsul_flags(sp):
        sp.add_argument("input", help="ground-truth JSON file")
        sp.add_argument("--lambda", dest="lam", help="override the regularisation parameter")
        sp.add_argument("--budget", type=int, default=FsulBudget().max_iterations, help="maximum FSUL iterations")
        sp.add_argument("--time-limit", type=float, default=None, help="wall-clock limit in seconds")
        sp.add_argument("--oracle", default="dyadic", help="dyadic or adversarial:<target.json>")
        sp.add_argument("--json", help="also write the report to this file")
        sp.add_argument("--verbose", action="store_true", help="print one progress line per iteration to stderr")

    fsul_flags(sub.add_parser("solve", help="certified support of the LASSO minimiser"))
    fsul_flags(sub.add_parser("condition", help="condition-number bound and sigma bounds on stsp"))

    sw = sub.add_parser("sweep", help="threshold-then-support failure rates as CSV")
    sw.add_argument("--family", required=True, choices=FAMILIES)
    sw.add_argument("--thresholds", help="comma list; default 1e-2 for deterministic-epsilon, 1e-3 otherwise")
    sw.add_argument("--trials", type=int, default=100)
    sw.add_argument("--seed", type=int, default=0)
    sw.add_argument("--params", help="comma list of epsilons or N values")
    sw.add_argument("--max-iters", type=int, default=FloatSolveConfig().max_iters)
    sw.add_argument("--objective-tolerance", type=float, default=FloatSolveConfig().objective_tolerance)
    sw.add_argument("--out", help="CSV path (stdout if omitted)")

    mw = sub.add_parser("make-witness", help="write an ill-posed instance and its verification sidecar")
    mw.add_argument("--kind", required=True, help=", ".join(ILL_POSED_KINDS))
    mw.add_argument("--out", required=True)
    mw.add_argument("--lambda", dest="lam", default="1/10")
    mw.add_argument("--family-size", type=int, default=6, help="vanishing-coordinate: members t = 2^-1 .. 2^-k")
    return p


COMMANDS = {
    "solve": cmd_solve,
    "condition": cmd_condition,
    "sweep": cmd_sweep,
    "make-witness": cmd_make_witness,
}


def main(argv=None) -> int:
    try:
        argv = list(sys.argv[1:] if argv is None else argv)
        args = build_parser().parse_args(argv)
        args.argv = argv
        if args.command == "make-witness" and args.kind not in ILL_POSED_KINDS:
            raise UsageError(f"unknown kind {args.kind!r}; choose from {', '.join(ILL_POSED_KINDS)}")
        if getattr(args, "budget", 1) < 1:
            raise UsageError("--budget must be >= 1")
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"certilasso: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (OSError, ValueError, KeyError, TypeError, ContractViolation, OracleToleranceError, ZeroDivisionError) as exc:
        print(f"certilasso: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SystemExit as exc:  # --help
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
