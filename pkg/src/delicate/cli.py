"""Command line entry point: ``delicate <command> [flags]``.

Exit status: 0 on success (a failing delicacy verdict is still a success),
1 on usage errors, 2 when an invariant or audit check fails.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from typing import Sequence

from . import analytic, covering, delicacy
from .arith import Effort
from .digits import PerturbationBox

log = logging.getLogger("delicate")

EXIT_OK, EXIT_USAGE, EXIT_INVARIANT = 0, 1, 2

# never echoed: they must not change the output bytes
_UNECHOED = {"threads", "out", "config", "figure", "command", "func"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _int_list(text: str) -> list[int]:
    try:
        return [int(float(t)) if "e" in t.lower() else int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma list of integers: {text!r}")


def _big_int(text: str) -> int:
    try:
        return int(float(text)) if "e" in text.lower() else int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")


def _interval(text: str) -> tuple[int, int]:
    try:
        lo, hi = text.split(":")
        return _big_int(lo), _big_int(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo:hi, got {text!r}")


def _residue(text: str) -> tuple[int, int]:
    try:
        b, W = text.split(":")
        return int(b), int(W)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected b:W, got {text!r}")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--threads", type=int, default=int(os.environ.get("DELICATE_THREADS", "1")))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("json-lines", "csv"), default=None)
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.add_argument("--config", default=None, help="key=value file merged under the flags")
    p.add_argument("--figure", default=None, help="also render a PNG figure to this path")


def _box_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--K", type=int, default=2)
    p.add_argument("--N", type=_big_int, default=None)
    p.add_argument("--s-set", type=_int_list, default=[0])
    p.add_argument("--i-max", type=int, default=None)


def _effort_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--effort-trial", type=int, default=10**6)
    p.add_argument("--effort-rho", type=int, default=10**7)
    p.add_argument("--fresh-random", action="store_true")


def build_parser() -> _Parser:
    parser = _Parser(prog="delicate", allow_abbrev=False)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("check", allow_abbrev=False, help="test one prime")
    _common(p)
    p.add_argument("--p", type=_big_int, required=True)
    p.add_argument("--base", type=int, default=10)
    p.add_argument("--mode", choices=delicacy.MODES, default=delicacy.DIGIT_CHANGE)
    _box_flags(p)
    p.set_defaults(func=cmd_check)

    for name, func in (("search", cmd_search), ("density", cmd_density)):
        p = sub.add_parser(name, allow_abbrev=False)
        _common(p)
        p.add_argument("--base", type=int, default=10)
        p.add_argument("--mode", choices=delicacy.MODES, default=delicacy.DIGIT_CHANGE)
        p.add_argument("--class", dest="residue_class", type=_residue, default=None, help="b:W")
        _box_flags(p)
        if name == "search":
            p.add_argument("--interval", type=_interval, default=None, help="closed range lo:hi")
            p.add_argument("--records", action="store_true", help="one record per tested prime")
        else:
            p.set_defaults(N=None)
            p.add_argument("--N-grid", type=_int_list, required=True)
        p.set_defaults(func=func)

    p = sub.add_parser("construct", allow_abbrev=False)
    _common(p)
    _construct_flags(p)
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("audit", allow_abbrev=False)
    _common(p)
    _construct_flags(p)
    p.add_argument("--system", default=None, help="system JSON written by construct")
    p.add_argument("--audit-i-max", type=int, default=10**4)
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("series", allow_abbrev=False)
    _common(p)
    p.add_argument("--A", type=int, default=10)
    p.add_argument("--S", type=int, default=2)
    p.add_argument("--X", type=_int_list, default=[10**3, 10**4, 10**5])
    p.set_defaults(func=cmd_series)

    p = sub.add_parser("sieve-ratio", allow_abbrev=False)
    _common(p)
    p.add_argument("--x-grid", type=_int_list, default=[10**5, 10**6])
    p.add_argument("--W", type=int, default=1)
    p.add_argument("--b", type=int, default=0)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--h", type=int, default=2)
    p.set_defaults(func=cmd_sieve_ratio)
    return parser


def _construct_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--K", type=int, default=2)
    p.add_argument("--M", type=str, default="0.2")
    p.add_argument("--s-set", type=_int_list, default=[0])
    p.add_argument("--partition", choices=(covering.PROPORTIONAL, covering.STRICT), default=covering.PROPORTIONAL)
    p.add_argument("--min-prime", type=int, default=5)
    _effort_flags(p)


# ------------------------------------------------------------------ output


class _Output:
    def __init__(self, args, default_format: str):
        self.format = args.format or default_format
        self.buf = io.StringIO()
        config = {k: v for k, v in sorted(vars(args).items()) if k not in _UNECHOED}
        config = {"command": args.command, **config, "format": self.format}
        if self.format == "json-lines":
            self.json({"config": config})
        else:
            self.buf.write("# config: " + json.dumps(config, sort_keys=False, default=str) + "\n")
        self._csv = csv.writer(self.buf, lineterminator="\n")

    def json(self, obj) -> None:
        self.buf.write(json.dumps(obj, default=str) + "\n")

    def row(self, values) -> None:
        self._csv.writerow([f"{v:.15g}" if isinstance(v, float) else v for v in values])

    def emit(self, path: str | None) -> None:
        text = self.buf.getvalue()
        if path:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)


def _make_box(args, p: int | None = None) -> PerturbationBox | None:
    if args.mode == delicacy.DIGIT_CHANGE:
        return None
    N = args.N if args.N is not None else p
    if N is None:
        raise UsageError("--N is required for box modes")
    S = (0,) if args.mode == delicacy.TAO_BOX else tuple(args.s_set)
    return PerturbationBox.make(args.K, N, S, args.i_max)


def _effort(args) -> Effort:
    return Effort(args.effort_trial, args.effort_rho, seed=args.seed or None, fresh=args.fresh_random)


# ----------------------------------------------------------------- commands


def cmd_check(args) -> int:
    out = _Output(args, "json-lines")
    rep = delicacy.check_prime(args.p, args.mode, args.base, _make_box(args, args.p))
    out.json(rep.record() | {"tested": rep.tested, "le1": rep.le1, "equal_p": rep.equal_p})
    out.emit(args.out)
    return EXIT_OK


def _search(args, lo: int, hi: int, keep: bool):
    return delicacy.search_interval(
        lo,
        hi,
        mode=args.mode,
        base=args.base,
        box=_make_box(args, hi),
        residue_class=args.residue_class,
        threads=args.threads,
        keep_reports=keep,
        shards=max(8, args.threads),
    )


def cmd_search(args) -> int:
    if args.interval:
        lo, hi = args.interval
    elif args.N is not None:
        lo, hi = delicacy.theorem_interval(args.N, args.K)
    else:
        raise UsageError("search needs --interval lo:hi or --N")
    res = _search(args, lo, hi, args.records)
    out = _Output(args, "json-lines")
    if out.format == "json-lines":
        for rep in res.reports:
            out.json(rep.record())
        out.json({"stats": res.stats.record(), "passing": [delicacy.json_int(p) for p in res.passing]})
    else:
        out.row(["p", "mode", "verdict", "witness_value"])
        if res.reports:
            for rep in res.reports:
                out.row([rep.p, rep.mode, rep.verdict, "" if rep.witness_value is None else rep.witness_value])
        else:
            for p in res.passing:
                out.row([p, args.mode, "pass", ""])
    out.emit(args.out)
    return EXIT_OK


def cmd_density(args) -> int:
    results = []
    for N in args.N_grid:
        lo, hi = delicacy.theorem_interval(N, args.K)
        args.N = N
        results.append((N, _search(args, lo, hi, False).stats))
    args.N = None
    rows = delicacy.density_report(results)
    out = _Output(args, "csv")
    if out.format == "csv":
        out.row(delicacy.DENSITY_HEADER)
        for r in rows:
            out.row(r)
    else:
        for r in rows:
            out.json(dict(zip(delicacy.DENSITY_HEADER, (r[0], r[1], r[2], f"{r[3]:.15g}"))))
    out.emit(args.out)
    if args.figure:
        from .plotting import plot_density

        plot_density(rows, args.figure)
    return EXIT_OK


def _build(args) -> covering.CoveringSystem:
    return covering.build_system(
        args.K,
        args.M,
        args.s_set,
        effort=_effort(args),
        partition_mode=args.partition,
        min_prime=args.min_prime,
    )


def cmd_construct(args) -> int:
    system = _build(args)
    bad = covering.verify_system(system)
    inv_q, ref = covering.qo1_check(system)
    doc = system.to_json() | {
        "qo1": {"sum_inv_q": f"{inv_q:.15g}", "sum_inv_p_log_p": f"{ref:.15g}"},
        "cell_mass_target": str(system.M / len(covering.cells(system.K, system.S))),
        "violations": bad,
    }
    out = _Output(args, "json-lines")
    out.json(doc)
    out.emit(args.out)
    return EXIT_INVARIANT if bad else EXIT_OK


def cmd_audit(args) -> int:
    if args.system:
        with open(args.system, encoding="utf-8") as fh:
            text = fh.read()
        doc = json.loads(text.splitlines()[-1]) if text.lstrip().startswith('{"config"') else json.loads(text)
        system = covering.CoveringSystem.from_json(doc)
    else:
        system = _build(args)
    bad = covering.verify_system(system)
    audits = covering.audit_all(system, args.audit_i_max, args.threads)
    out = _Output(args, "json-lines")
    for au in audits:
        out.json(au.record())
    n_viol = sum(len(au.violations) for au in audits)
    n_over = sum(not au.within_bound for au in audits)
    out.json({"summary": {"families": len(audits), "violations": n_viol, "over_bound": n_over, "system_violations": bad}})
    out.emit(args.out)
    if args.figure:
        from .plotting import plot_coverage

        plot_coverage(audits, args.figure)
    return EXIT_INVARIANT if (bad or n_viol or n_over) else EXIT_OK


def cmd_series(args) -> int:
    ests = [analytic.romanoff_partial_sum(args.A, args.S, X, args.threads) for X in args.X]
    out = _Output(args, "csv")
    if out.format == "csv":
        out.row(["X", "partial_sum", "last_block_increment"])
    for e in ests:
        vals = (e.X, f"{e.partial_sum:.15g}", f"{e.last_block_increment:.15g}")
        if out.format == "csv":
            out.row(vals)
        else:
            out.json(dict(zip(("X", "partial_sum", "last_block_increment"), vals)))
    out.emit(args.out)
    if args.figure:
        from .plotting import plot_series

        plot_series(ests, args.figure)
    return EXIT_OK


def cmd_sieve_ratio(args) -> int:
    pts = analytic.sieve_ratio_experiment(args.x_grid, args.W, args.b, args.k, args.h, args.threads)
    out = _Output(args, "csv")
    if out.format == "csv":
        out.row(analytic.SIEVE_RATIO_HEADER)
    for pt in pts:
        if out.format == "csv":
            out.row(pt.row())
        else:
            out.json({k: (f"{v:.15g}" if isinstance(v, float) else v) for k, v in zip(analytic.SIEVE_RATIO_HEADER, pt.row())})
    out.emit(args.out)
    if args.figure:
        from .plotting import plot_sieve_ratio

        plot_sieve_ratio(pts, args.figure)
    return EXIT_OK


# --------------------------------------------------------------------- run


def _config_argv(path: str, parser: argparse.ArgumentParser, command: str) -> list[str]:
    sub = parser._subparsers._group_actions[0].choices[command]  # type: ignore[union-attr]
    known = {s for a in sub._actions for s in a.option_strings}
    argv: list[str] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            key, value = (t.strip() for t in line.split("=", 1))
            flag = "--" + key.lstrip("-")
            if flag not in known or flag == "--config":
                raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
            action = next(a for a in sub._actions if flag in a.option_strings)
            if action.nargs == 0:
                if value.lower() in ("1", "true", "yes"):
                    argv.append(flag)
            else:
                argv += [flag, value]
    return argv


def _config_path(argv: Sequence[str]) -> str | None:
    for idx, tok in enumerate(argv):
        if tok == "--config":
            if idx + 1 >= len(argv):
                raise UsageError("--config needs a path")
            return argv[idx + 1]
        if tok.startswith("--config="):
            return tok.split("=", 1)[1]
    return None


def run(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        cfg = _config_path(argv)
        if cfg is not None:
            if not argv or argv[0] not in parser._subparsers._group_actions[0].choices:  # type: ignore[union-attr]
                raise UsageError("--config must follow a command")
            argv = [argv[0], *_config_argv(cfg, parser, argv[0]), *argv[1:]]
        args = parser.parse_args(argv)
        if args.threads < 1:
            raise UsageError("--threads must be positive")
        return args.func(args)
    except (UsageError, OSError) as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except covering.CoverageError as exc:
        print(f"audit failure: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (ValueError, covering.ConstructionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    sys.exit(run())
