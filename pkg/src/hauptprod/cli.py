"""Command-line interface.

Exit codes: 0 success / identity holds, 1 verification mismatch, 2 usage or
domain error.  JSON output has a fixed field order and prints floats with 17
significant digits; timing fields are null unless ``--timing`` is given, so
identical invocations produce byte-identical output.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from . import arith, borcherds, hecke, kernels
from .arith import CACHE_ENV, CACHE_FILENAME, DomainError, KloostermanCache
from .hauptmodul import UnsupportedLevelError, hauptmodul, supported_levels
from .qseries import LaurentSeries, PrecisionError
from .special import DEFAULT_POLICY, SeriesEvalPolicy, SeriesTruncationError

log = logging.getLogger("hauptprod")

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE = 0, 1, 2


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    level: int | None = None
    precision: int | None = None
    box: tuple[int, int] | None = None
    c_max: int | None = None
    tolerance: float | None = None
    output_format: str = "json"
    cache_dir: str | None = None
    threads: int = 1

    def __post_init__(self):
        for name in ("level", "precision", "c_max", "tolerance", "threads"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise DomainError(f"--{name.replace('_', '-')} must be positive, got {v}")
        if self.box is not None and min(self.box) < 1:
            raise DomainError("--box dimensions must be positive")


# -- output ----------------------------------------------------------------


def _json_value(x) -> str:
    if isinstance(x, bool) or x is None:
        return json.dumps(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            return "null"
        return format(x, ".17g")
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else json.dumps(str(x))
    if isinstance(x, int):
        return str(x)
    if isinstance(x, str):
        return json.dumps(x)
    if isinstance(x, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_json_value(v)}" for k, v in x.items()) + "}"
    if isinstance(x, (list, tuple)):
        return "[" + ", ".join(_json_value(v) for v in x) + "]"
    raise TypeError(f"cannot serialise {type(x).__name__}")


def dumps(obj) -> str:
    """JSON with insertion-ordered keys and 17-significant-digit floats."""
    return _json_value(obj)


def _cell(x) -> str:
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def emit(payload: dict, header: list[str], rows: list[list], fmt: str, out) -> None:
    if fmt == "json":
        out.write(dumps(payload) + "\n")
    elif fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(c) for c in row])
        out.write(buf.getvalue())
    else:
        cols = [header] + [[_cell(c) for c in row] for row in rows]
        widths = [max(len(r[i]) for r in cols) for i in range(len(header))]
        for r in cols:
            out.write("  ".join(s.rjust(w) for s, w in zip(r, widths)).rstrip() + "\n")


# -- argument parsing ------------------------------------------------------


def _box(text: str) -> tuple[int, int]:
    parts = text.split(",")
    try:
        vals = [int(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"box must be A or A,B; got {text!r}") from None
    if len(vals) == 1:
        vals *= 2
    if len(vals) != 2:
        raise argparse.ArgumentTypeError(f"box must be A or A,B; got {text!r}")
    return vals[0], vals[1]


def _levels(text: str) -> list[int]:
    if text == "all":
        return list(supported_levels())
    try:
        return [int(p) for p in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad level list {text!r}") from None


def _perturbation(text: str) -> tuple[int, int, int]:
    try:
        r, rp, d = (int(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("perturbation must be R,RPRIME,DELTA") from None
    return r, rp, d


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv", "text"), default=None)
    common.add_argument("--cache-dir", default=os.environ.get(CACHE_ENV),
                        help=f"Kloosterman cache directory (default ${CACHE_ENV})")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--timing", action="store_true",
                        help="include wall-clock fields (output is then not reproducible)")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="hauptprod", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("haupt", parents=[common], help="Hauptmodul coefficients a_N(r), -1 <= r < P")
    s.add_argument("--level", type=int, required=True)
    s.add_argument("--prec", type=int, default=10)

    s = sub.add_parser("verify-borcherds", parents=[common],
                       help="exact check of the product expansion of J_N(p) - J_N(q)")
    s.add_argument("--level", type=_levels, required=True, help="N, N1,N2,... or 'all'")
    s.add_argument("--box", type=_box, default=(6, 6))
    s.add_argument("--exponents", choices=borcherds.EXPONENT_SOURCES, default="replicable")
    s.add_argument("--perturb", type=_perturbation, action="append", default=[],
                   help=argparse.SUPPRESS)

    s = sub.add_parser("poincare", parents=[common], help="Poincare coefficient p_{r',N}(r)")
    s.add_argument("--level", type=int, default=1)
    s.add_argument("--rprime", type=int, required=True)
    s.add_argument("--r", type=int, required=True)
    s.add_argument("--cmax", type=int, default=10000)
    s.add_argument("--tol", type=float, default=DEFAULT_POLICY.absolute_tolerance)

    s = sub.add_parser("eisenstein", parents=[common], help="Eisenstein coefficient e_{r,N}")
    s.add_argument("--level", type=int, default=1)
    s.add_argument("--r", type=int, required=True)
    s.add_argument("--exact", action="store_true")
    s.add_argument("--cmax", type=int, default=10000)

    s = sub.add_parser("kloosterman", parents=[common], help="Kloosterman sum K(a, b; c)")
    s.add_argument("a", type=int)
    s.add_argument("b", type=int)
    s.add_argument("c", type=int)

    s = sub.add_parser("selberg", parents=[common], help="both sides of the Selberg identity")
    s.add_argument("r", type=int)
    s.add_argument("rprime", type=int)
    s.add_argument("c", type=int)

    s = sub.add_parser("hecke-apply", parents=[common], help="apply T_k(m) to a q-expansion")
    s.add_argument("--level", type=int, default=11)
    s.add_argument("--weight", type=int, default=2)
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--prec", type=int, default=20, help="output precision")
    s.add_argument("--input", type=Path, default=None,
                   help="series JSON (default: the level-11 eta fixture)")
    return p


# -- commands --------------------------------------------------------------


def _ms(seconds: float, timing: bool):
    return round(seconds * 1e3, 3) if timing else None


def cmd_haupt(args, cfg: RunConfig, out) -> int:
    h = hauptmodul(cfg.level, cfg.precision)
    rows = [[r, int(h[r])] for r in range(-1, cfg.precision)]
    payload = {"level": cfg.level, "precision": cfg.precision,
               "coefficients": [{"r": r, "a": a} for r, a in rows]}
    emit(payload, ["r", "a"], rows, cfg.output_format, out)
    return EXIT_OK


def cmd_verify_borcherds(args, cfg: RunConfig, out) -> int:
    A, B = cfg.box
    perturb = {(r, rp): d for r, rp, d in args.perturb}
    reports = [
        borcherds.verify_identity(N, A, B, args.exponents, perturb or None, cfg.threads)
        for N in args.level
    ]
    for rep in reports:
        log.info("level %d: %s in %.1f ms", rep.level, "pass" if rep.passed else "FAIL",
                 rep.elapsed_ms)
    objs = [rep.to_json(timing=args.timing) for rep in reports]
    payload = objs[0] if len(objs) == 1 else {"reports": objs}
    rows = [[rep.level, m.i, m.j, m.lhs, m.rhs] for rep in reports for m in rep.mismatches]
    if cfg.output_format == "text":
        for rep in reports:
            out.write(f"level {rep.level} box {A}x{B} exponents={rep.exponent_source}: "
                      f"{'PASS' if rep.passed else 'FAIL'} ({len(rep.mismatches)} mismatches)\n")
    else:
        emit(payload, ["level", "i", "j", "lhs", "rhs"], rows, cfg.output_format, out)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_MISMATCH


def cmd_poincare(args, cfg: RunConfig, out, cache) -> int:
    policy = SeriesEvalPolicy(absolute_tolerance=cfg.tolerance)
    pc = kernels.poincare_coeff(cfg.level, args.rprime, args.r, cfg.c_max, policy, cache)
    payload = {
        "level": pc.level, "rprime": pc.rprime, "r": pc.r, "c_max": pc.c_max,
        "value": pc.value, "tail_bound": pc.tail_bound,
        "identity_term": pc.identity_term, "series_coefficient": pc.series_coefficient,
    }
    if pc.rprime > 0:
        payload["exact_prediction"] = kernels.rademacher_prediction(pc.level, pc.rprime, pc.r)
    payload["elapsed_ms"] = _ms(pc.elapsed_s, args.timing)
    emit(payload, list(payload), [list(payload.values())], cfg.output_format, out)
    return EXIT_OK


def cmd_eisenstein(args, cfg: RunConfig, out) -> int:
    exact = kernels.eisenstein_exact(cfg.level, args.r)
    if args.exact:
        payload = {"level": cfg.level, "r": args.r, "value": exact, "exact": True}
    else:
        ns = kernels.eisenstein_numeric(cfg.level, args.r, cfg.c_max)
        payload = {"level": cfg.level, "r": args.r, "c_max": ns.c_max, "value": ns.value,
                   "tail_bound": ns.tail_bound, "exact_value": exact, "exact": False,
                   "elapsed_ms": _ms(ns.elapsed_s, args.timing)}
    emit(payload, list(payload), [list(payload.values())], cfg.output_format, out)
    return EXIT_OK


def cmd_kloosterman(args, cfg: RunConfig, out, cache) -> int:
    key = arith.KloostermanKey.normalize(args.a, args.b, args.c)
    kv = arith.kloosterman_value(args.a, args.b, args.c)
    value = cache.get(key) if cache is not None else None
    if value is None:
        value = kv.value
        if cache is not None:
            cache.put(key, value)
    payload = {"a": args.a, "b": args.b, "c": args.c, "value": value,
               "term_count": kv.term_count, "error_bound": kv.error_bound}
    if cfg.output_format == "text":
        out.write(format(value, ".17g") + "\n")
    else:
        emit(payload, list(payload), [list(payload.values())], cfg.output_format, out)
    return EXIT_OK


def cmd_selberg(args, cfg: RunConfig, out) -> int:
    lhs, rhs = arith.selberg_sides(args.r, args.rprime, args.c)
    tol = 1e-8 * arith.divisor_count(args.c) * math.sqrt(args.c)
    payload = {"r": args.r, "rprime": args.rprime, "c": args.c, "lhs": lhs, "rhs": rhs,
               "difference": abs(lhs - rhs), "tolerance": tol, "agree": abs(lhs - rhs) < tol}
    emit(payload, list(payload), [list(payload.values())], cfg.output_format, out)
    return EXIT_OK if payload["agree"] else EXIT_MISMATCH


def cmd_hecke_apply(args, cfg: RunConfig, out) -> int:
    if args.input is not None:
        series = LaurentSeries.from_json(args.input.read_text())
        f = hecke.ModularFormExpansion(args.weight, cfg.level, series)
    else:
        f = hecke.eta_square_form(cfg.level, args.m * cfg.precision)
    g = hecke.hecke_apply(args.weight, args.m, f, cfg.precision)
    rows = [[n, f.series[n], g.series[n]] for n in range(cfg.precision)]
    payload = {"level": cfg.level, "weight": args.weight, "m": args.m,
               "precision": cfg.precision,
               "rows": [{"n": n, "before": a, "after": b} for n, a, b in rows]}
    emit(payload, ["n", "before", "after"], rows, cfg.output_format, out)
    return EXIT_OK


_DEFAULT_FORMAT = {"hecke-apply": "csv"}


def run(argv: list[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    fmt = args.format or _DEFAULT_FORMAT.get(args.command, "json")
    try:
        cfg = RunConfig(
            args.command,
            level=getattr(args, "level", None) if isinstance(getattr(args, "level", None), int) else None,
            precision=getattr(args, "prec", None),
            box=getattr(args, "box", None),
            c_max=getattr(args, "cmax", None),
            tolerance=getattr(args, "tol", None),
            output_format=fmt,
            cache_dir=args.cache_dir,
            threads=args.threads,
        )
        _set_threads(cfg.threads)
        cache = KloostermanCache.open_dir(cfg.cache_dir)
        if args.command == "haupt":
            code = cmd_haupt(args, cfg, out)
        elif args.command == "verify-borcherds":
            code = cmd_verify_borcherds(args, cfg, out)
        elif args.command == "poincare":
            code = cmd_poincare(args, cfg, out, cache)
        elif args.command == "eisenstein":
            code = cmd_eisenstein(args, cfg, out)
        elif args.command == "kloosterman":
            code = cmd_kloosterman(args, cfg, out, cache)
        elif args.command == "selberg":
            code = cmd_selberg(args, cfg, out)
        else:
            code = cmd_hecke_apply(args, cfg, out)
        if cache is not None and cache.dirty:
            cache.save(Path(cfg.cache_dir) / CACHE_FILENAME)
        return code
    except (UnsupportedLevelError, DomainError, PrecisionError, SeriesTruncationError,
            ValueError) as exc:
        print(f"hauptprod {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def _set_threads(n: int) -> None:
    import numba

    numba.set_num_threads(max(1, min(n, numba.config.NUMBA_NUM_THREADS)))


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
