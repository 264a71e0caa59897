"""Command-line front end: ``symbolic``, ``rates``, ``sim`` and ``audit``.

Exit codes: 0 all checks pass, 1 a check failed, 2 bad parameters or config.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from pathlib import Path

from .audit import (correctness_suite, format_report, privacy_exact_check, privacy_statistical_check,
                    zero_noise)
from .config import PRESETS, SchemeConfig, load_config
from .errors import EnumerationInfeasibleError, PirError
from .lifted import answer_batch, dump_transcript, instantiate_queries, measured_rate
from .mds import encode, random_messages
from .protocol import substream
from .rates import CSV_HEADER, FORMULAS, capacity, decimal6, exact, lifted_rate, rate_rows
from .symbolic import build_symbolic

EXIT_OK, EXIT_FAIL, EXIT_PARAM = 0, 1, 2


def parse_range(text: str) -> list[int]:
    """``"5"``, ``"2,3,7"`` or ``"2..10"`` (inclusive)."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..")
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return out


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _scheme_config(args) -> SchemeConfig:
    if args.config:
        cfg = load_config(args.config)
    elif args.preset:
        if args.preset not in PRESETS:
            raise argparse.ArgumentTypeError(f"unknown preset {args.preset!r}; known: {sorted(PRESETS)}")
        cfg = PRESETS[args.preset]
    else:
        if args.N is None:
            raise argparse.ArgumentTypeError("give --config, --preset or at least --N")
        cfg = SchemeConfig(args.kind, N=args.N, K=args.K, T=args.T, M=args.M, q=args.q,
                           generator=args.generator, transform=args.transform)
    changes = {k: getattr(args, k) for k in ("q",) if getattr(args, k) is not None and (args.config or args.preset)}
    if args.seed is not None:
        changes["seed"] = args.seed
    return cfg.replace(**changes) if changes else cfg


def cmd_symbolic(args) -> int:
    s = build_symbolic(args.N, args.r, args.M)
    text = s.to_text()
    if args.golden:
        golden = Path(args.golden).read_bytes()
        if golden != text.encode():
            sys.stdout.write(f"mismatch against {args.golden}\n")
            return EXIT_FAIL
        sys.stdout.write(f"match {args.golden}\n")
    if args.out or not args.golden:
        _emit(text, args.out)
    return EXIT_OK


def cmd_rates(args) -> int:
    formulas = args.formula or ["lifted"]
    for f in formulas:
        if f not in FORMULAS:
            raise argparse.ArgumentTypeError(f"unknown formula {f!r}; choose from {FORMULAS}")
    rows = rate_rows(formulas, args.N or [10], args.K or [1], args.T or [1], args.M or [2], args.r)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    writer.writerows(rows)
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def cmd_sim(args) -> int:
    cfg = _scheme_config(args)
    scheme = cfg.build_scheme()
    lines = [f"config: {cfg.label()}", f"q: {scheme.q}", f"codimension r: {scheme.r}",
             f"message length L: {cfg.message_length(scheme)}"]
    ok = True
    if cfg.transform == "lifted":
        plan = cfg.build_plan(scheme)
        rate = measured_rate(plan)
        closed = lifted_rate(plan.N, plan.r, plan.M)
        counts = plan.per_server_counts()
        lines += [f"per-server queries: {' '.join(map(str, counts))}",
                  f"total queries: {sum(counts)}", f"informative queries: {plan.L}",
                  f"measured rate: {exact(rate)} ({decimal6(rate)})",
                  f"closed form: {exact(closed)} match={rate == closed}"]
        ok &= rate == closed
        if cfg.K == 1 and scheme.r == cfg.T:
            cap = capacity(cfg.N, cfg.T, cfg.M)
            lines.append(f"capacity: {exact(cap)} match={rate == cap}")
        if args.transcript:
            msgs = random_messages(cfg.M, plan.L, plan.q, substream(cfg.seed, "transcript-messages"))
            db = encode(msgs, scheme.generator)
            batch, state = instantiate_queries(plan, None, 1, substream(cfg.seed, "transcript"))
            Path(args.transcript).write_text(dump_transcript(plan, batch, answer_batch(db, batch), state))
    report = correctness_suite(cfg, args.trials, cfg.seed, corrupt=args.corrupt)
    ok &= report.ok
    text = "\n".join(lines) + "\n" + format_report(report)
    _emit(text, args.out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_audit(args) -> int:
    cfg = _scheme_config(args)
    if args.mode == "correctness":
        report = correctness_suite(cfg, args.trials, cfg.seed, corrupt=args.corrupt)
    elif args.mode == "exact":
        target = zero_noise(cfg) if args.zero_noise else cfg
        try:
            report = privacy_exact_check(target, T=cfg.T, label=cfg.label())
        except EnumerationInfeasibleError as exc:
            sys.stdout.write(f"privacy-exact,INFEASIBLE,{cfg.label()}\n  {exc}\n")
            return EXIT_FAIL
    else:
        report = privacy_statistical_check(cfg, args.trials, args.significance, width=args.width,
                                           seed=cfg.seed, noise_support=args.noise_support)
    _emit(format_report(report), args.out)
    return EXIT_OK if report.ok and not getattr(report, "inconclusive", False) else EXIT_FAIL


def _scheme_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON scheme config")
    p.add_argument("--preset", help=f"named config: {', '.join(sorted(PRESETS))}")
    p.add_argument("--kind", default="secret_sharing", choices=["secret_sharing", "geometrical", "explicit"])
    p.add_argument("--transform", default="lifted", choices=["lifted", "oneshot"])
    p.add_argument("--N", type=int)
    p.add_argument("--K", type=int, default=1)
    p.add_argument("--T", type=int, default=1)
    p.add_argument("--M", type=int, default=2)
    p.add_argument("--q", type=int)
    p.add_argument("--generator", help="generator preset name")
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--corrupt", action="store_true", help="perturb one response per trial")
    p.add_argument("--out")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="oneshot-pir", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("symbolic", help="print a symbolic matrix or compare it to a golden file")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--M", type=int, required=True)
    p.add_argument("--golden")
    p.add_argument("--out")
    p.set_defaults(func=cmd_symbolic)

    p = sub.add_parser("rates", help="closed-form rate table as CSV")
    p.add_argument("--formula", action="append", help=f"one of {', '.join(FORMULAS)} (repeatable)")
    p.add_argument("--N", type=parse_range)
    p.add_argument("--K", type=parse_range)
    p.add_argument("--T", type=parse_range)
    p.add_argument("--M", type=parse_range)
    p.add_argument("--r", type=int, help="codimension for lifted/refined/oneshot (default K+T-1)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_rates)

    p = sub.add_parser("sim", help="build a scheme, report its rate and run correctness trials")
    _scheme_args(p)
    p.add_argument("--transcript", help="write one run's transcript here")
    p.set_defaults(func=cmd_sim)

    p = sub.add_parser("audit", help="correctness or privacy audit")
    _scheme_args(p)
    p.add_argument("--mode", choices=["exact", "stat", "correctness"], default="correctness")
    p.add_argument("--significance", type=float, default=0.01)
    p.add_argument("--width", type=int, default=2, help="projection width for the statistical test")
    p.add_argument("--noise-support", type=lambda s: [int(v) for v in s.split(",")],
                   help="restrict noise draws to these residues (negative control)")
    p.add_argument("--zero-noise", action="store_true", help="replace the noise code by zeros (negative control)")
    p.set_defaults(func=cmd_audit)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARAM if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (PirError, argparse.ArgumentTypeError, ValueError) as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_PARAM
    except OSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_PARAM


if __name__ == "__main__":
    sys.exit(main())
