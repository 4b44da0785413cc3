"""Command-line front end: cached tables, approximant builds, error tables,
zero discovery, and the lasso experiment.

Every command is deterministic given its configuration and cache state;
cache files are keyed by discriminant, size, precision (and method), and are
written atomically.  Exit codes: 0 success, 2 solver non-convergence,
3 precision fault, 4 bad configuration.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from dataclasses import dataclass

from mpmath import mpc, mpf

from . import interp, lasso, solve
from .characters import character_from_discriminant
from .gramzero import GramTable, ZeroTable, find_zeros, gram_table
from .lref import L_value
from .mpnum import PrecisionContext, PrecisionFault, real_to_str

EXIT_OK = 0
EXIT_SOLVER = 2
EXIT_PRECISION = 3
EXIT_CONFIG = 4


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    d: int
    M: int = 0
    k: int = 1
    method: str = "gram"
    digits: int = 120
    solver: str = "lu"
    tol: str = "1e-20"
    max_iter: int = 1000
    cache_dir: str = ".lgram-cache"
    out: str | None = None
    fmt: str = "json"
    coprime_constraint: bool = True

    def __post_init__(self):
        if self.method not in ("zeros", "gram"):
            raise ConfigError(f"method must be 'zeros' or 'gram', got {self.method!r}")
        if self.solver not in ("lu", "gmres"):
            raise ConfigError(f"solver must be 'lu' or 'gmres', got {self.solver!r}")
        if self.fmt not in ("json", "csv"):
            raise ConfigError(f"format must be 'json' or 'csv', got {self.fmt!r}")
        if self.method == "zeros" and self.k < 1:
            raise ConfigError("k must be >= 1 for the zeros method")
        if self.method == "gram" and self.k < 2:
            raise ConfigError("k must be >= 2 for the gram method")

    @property
    def ctx(self) -> PrecisionContext:
        try:
            return PrecisionContext(self.digits)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc


def _atomic_write(path: str, text: str):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(os.path.abspath(path)))
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _cache_path(cfg: RunConfig, kind: str, **extra) -> str:
    bits = [kind, f"d{cfg.d}", f"M{cfg.M}", f"dg{cfg.digits}"]
    for key in sorted(extra):
        bits.append(f"{key}{extra[key]}")
    return os.path.join(cfg.cache_dir, "_".join(map(str, bits)) + ".json")


def _cached_gram(cfg: RunConfig) -> GramTable:
    path = _cache_path(cfg, "gram")
    if os.path.exists(path):
        with open(path) as fh:
            return GramTable.from_json(json.load(fh))
    char = character_from_discriminant(cfg.d)
    table = gram_table(char, cfg.M, cfg.ctx)
    _atomic_write(path, _dump_json(table.to_json()))
    return table


def _cached_zeros(cfg: RunConfig) -> ZeroTable:
    path = _cache_path(cfg, "zeros")
    if os.path.exists(path):
        with open(path) as fh:
            return ZeroTable.from_json(json.load(fh))
    char = character_from_discriminant(cfg.d)
    table = find_zeros(char, cfg.M, cfg.ctx)
    _atomic_write(path, _dump_json(table.to_json()))
    return table


def _table_csv(table, value_field: str) -> str:
    lines = [f"m,value,{value_field}"]
    for m, value, extra in table.entries:
        lines.append(f"{m},{value},{extra}")
    return "\n".join(lines) + "\n"


def _emit(cfg: RunConfig, payload_json: dict, payload_csv: str):
    if cfg.out:
        text = _dump_json(payload_json) if cfg.fmt == "json" else payload_csv
        _atomic_write(cfg.out, text)
    else:
        sys.stdout.write(_dump_json(payload_json) if cfg.fmt == "json" else payload_csv)


def cmd_gram(cfg: RunConfig) -> int:
    table = _cached_gram(cfg)
    _emit(cfg, table.to_json(), _table_csv(table, "residual"))
    return EXIT_OK


def cmd_zeros(cfg: RunConfig) -> int:
    table = _cached_zeros(cfg)
    _emit(cfg, table.to_json(), _table_csv(table, "achieved_digits"))
    return EXIT_OK


def _approx_cache_path(cfg: RunConfig) -> str:
    return _cache_path(
        cfg,
        "approx",
        method=cfg.method,
        k=cfg.k,
        solver=cfg.solver,
        constrained=int(cfg.coprime_constraint),
    )


def cmd_build(cfg: RunConfig) -> int:
    char = character_from_discriminant(cfg.d)
    ctx = cfg.ctx
    if cfg.method == "gram":
        nodes = _cached_gram(cfg).values()
        system = interp.build_system_gram(char, nodes, cfg.k, ctx)
    else:
        nodes = _cached_zeros(cfg).values()
        system = interp.build_system_full(
            char, nodes, cfg.k, ctx, coprime_constraint=cfg.coprime_constraint
        )
    opts = solve.SolveOptions(method=cfg.solver, tol=cfg.tol, max_iter=cfg.max_iter)
    x, report = solve.solve(system.A, system.b, opts, ctx)
    approximant = interp.assemble_approximant(system, x, char)
    path = _approx_cache_path(cfg)
    _atomic_write(path, _dump_json(approximant.to_json()))
    coeff_csv = "n,a_n\n" + "".join(
        f"{n},{real_to_str(a, ctx)}\n" for n, a in approximant.coefficients
    )
    if cfg.out:
        _atomic_write(cfg.out, _dump_json(approximant.to_json()))
        _atomic_write(os.path.splitext(cfg.out)[0] + "_coefficients.csv", coeff_csv)
    summary = {
        "approximant": path,
        "solver": report.method,
        "iterations": report.iterations,
        "relative_residual": real_to_str(report.relative_residual, ctx),
        "converged": report.converged,
    }
    sys.stdout.write(_dump_json(summary))
    if not report.converged:
        return EXIT_SOLVER
    return EXIT_OK


def _load_approximant(path: str) -> interp.Approximant:
    with open(path) as fh:
        return interp.Approximant.from_json(json.load(fh))


def _load_points(path: str, ctx: PrecisionContext):
    with open(path) as fh:
        raw = json.load(fh)
    if isinstance(raw, dict):
        raw = raw["points"]
    with ctx.working():
        return [mpc(mpf(str(p[0])), mpf(str(p[1]))) for p in raw]


def cmd_eval_table(cfg: RunConfig, approximant_path: str, points_path: str) -> int:
    char = character_from_discriminant(cfg.d)
    ctx = cfg.ctx
    F = _load_approximant(approximant_path)
    points = _load_points(points_path, ctx)
    rows = []
    for s in points:
        err = abs(L_value(char, s, ctx).value - interp.evaluate(F, s, ctx))
        rows.append((s, err))
    csv = "re_s,im_s,abs_error\n" + "".join(
        f"{real_to_str(s.real, ctx)},{real_to_str(s.imag, ctx)},{real_to_str(e, ctx)}\n"
        for s, e in rows
    )
    payload = {
        "approximant": approximant_path,
        "rows": [
            {
                "re": real_to_str(s.real, ctx),
                "im": real_to_str(s.imag, ctx),
                "abs_error": real_to_str(e, ctx),
            }
            for s, e in rows
        ],
    }
    _emit(cfg, payload, csv)
    return EXIT_OK


def cmd_discover(cfg: RunConfig, approximant_path: str, mode: str) -> int:
    char = character_from_discriminant(cfg.d)
    ctx = cfg.ctx
    F = _load_approximant(approximant_path)
    reference = _cached_zeros(cfg) if cfg.M else None
    if mode == "scan":
        gram_cfg = RunConfig(
            d=cfg.d,
            M=F.M,
            digits=F.digits,
            cache_dir=cfg.cache_dir,
        )
        gram = _cached_gram(gram_cfg)
        found = interp.discover_zeros(F, char, ctx, reference=reference, gram=gram)
    else:
        if reference is None:
            raise ConfigError("validation mode needs --M for the reference zeros")
        found = interp.discover_zeros(F, char, ctx, reference=reference)
    rows = []
    failures = 0
    for z in found:
        rows.append(
            {
                "label": z.label,
                "re": real_to_str(z.location.real, ctx),
                "im": real_to_str(z.location.imag, ctx),
                "offset_re": real_to_str(z.offset.real, ctx) if z.offset else None,
                "offset_im": real_to_str(z.offset.imag, ctx) if z.offset else None,
                "converged": z.converged,
            }
        )
        failures += 0 if z.converged else 1
    csv = "label,re,im,offset_re,offset_im,converged\n" + "".join(
        ",".join(str(row[c]) for c in ("label", "re", "im", "offset_re", "offset_im", "converged"))
        + "\n"
        for row in rows
    )
    _emit(cfg, {"zeros": rows, "failed_seeds": failures}, csv)
    return EXIT_OK


def cmd_lasso(cfg: RunConfig, n_features: int, samples_per_feature: int, span: int) -> int:
    char = character_from_discriminant(cfg.d)
    report = lasso.feature_experiment(
        char,
        n_features=n_features,
        samples_per_feature=samples_per_feature,
        gram_span=span,
    )
    rec = lasso.constraint_recommendation(report, char.q)
    payload = {
        "report": report.to_json(),
        "recommendation": {
            "clean_partition": rec.clean_partition,
            "predicate": rec.predicate,
            "violations": [list(v) for v in rec.violations],
        },
    }
    csv = "n,vanish_lambda,rank\n" + "".join(
        f"{n},{report.vanish_lambda[n]},{report.ranking.index(n) + 1}\n"
        for n in report.indices
    )
    _emit(cfg, payload, csv)
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lgram",
        description="Dirichlet L-function approximation by interpolation at "
        "generalized Gram points or initial zeros, and critical-line zero "
        "discovery.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_m=True):
        p.add_argument("--d", type=int, required=True, help="fundamental discriminant")
        if with_m:
            p.add_argument("--M", type=int, required=True, help="node count")
        p.add_argument("--digits", type=int, default=120)
        p.add_argument("--cache-dir", default=".lgram-cache")
        p.add_argument("--out", default=None)
        p.add_argument("--format", dest="fmt", choices=("json", "csv"), default="json")

    p = sub.add_parser("gram", help="generalized Gram point table")
    common(p)

    p = sub.add_parser("zeros", help="critical-line zero table")
    common(p)

    p = sub.add_parser("build", help="build an approximant")
    common(p)
    p.add_argument("--k", type=int, default=None, help="frozen leading coefficients")
    p.add_argument("--method", choices=("zeros", "gram"), default="gram")
    p.add_argument("--solver", choices=("lu", "gmres"), default="lu")
    p.add_argument("--tol", default="1e-20")
    p.add_argument("--max-iter", type=int, default=1000)
    p.add_argument(
        "--no-coprime-constraint",
        action="store_true",
        help="demo flag: drop the coprime support restriction (reproduces the "
        "wild-coefficient failure mode; zeros method only)",
    )

    p = sub.add_parser("eval-table", help="per-point |L - F| error table")
    common(p, with_m=False)
    p.add_argument("--approximant", required=True)
    p.add_argument("--points", required=True, help="JSON file of [re, im] pairs")

    p = sub.add_parser("discover", help="locate zeros of an approximant")
    common(p, with_m=False)
    p.add_argument("--approximant", required=True)
    p.add_argument("--mode", choices=("validation", "scan"), default="scan")
    p.add_argument(
        "--M", type=int, default=0, help="reference zero count (offsets/validation)"
    )

    p = sub.add_parser("lasso", help="coefficient feature-selection experiment")
    common(p, with_m=False)
    p.add_argument("--features", type=int, default=60)
    p.add_argument("--samples-per-feature", type=int, default=4)
    p.add_argument("--span", type=int, default=100, help="top Gram index sampled")
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "build":
            k = args.k if args.k is not None else (2 if args.method == "gram" else 1)
            if args.no_coprime_constraint and args.method == "gram":
                raise ConfigError(
                    "--no-coprime-constraint only applies to the zeros method"
                )
            cfg = RunConfig(
                d=args.d,
                M=args.M,
                k=k,
                method=args.method,
                digits=args.digits,
                solver=args.solver,
                tol=args.tol,
                max_iter=args.max_iter,
                cache_dir=args.cache_dir,
                out=args.out,
                fmt=args.fmt,
                coprime_constraint=not args.no_coprime_constraint,
            )
            return cmd_build(cfg)
        cfg = RunConfig(
            d=args.d,
            M=getattr(args, "M", 0) or 0,
            digits=args.digits,
            cache_dir=args.cache_dir,
            out=args.out,
            fmt=args.fmt,
            k=2,
        )
        if args.command == "gram":
            return cmd_gram(cfg)
        if args.command == "zeros":
            return cmd_zeros(cfg)
        if args.command == "eval-table":
            return cmd_eval_table(cfg, args.approximant, args.points)
        if args.command == "discover":
            return cmd_discover(cfg, args.approximant, args.mode)
        if args.command == "lasso":
            return cmd_lasso(cfg, args.features, args.samples_per_feature, args.span)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PrecisionFault as exc:
        print(f"precision fault: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except solve.SingularMatrixError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
