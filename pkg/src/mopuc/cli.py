"""Command line front end: ``mopuc {gen,sumrule,verify,gems}``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import io
from .errors import BadConfig, MopucError
from .harness import DEFAULT_G, RunConfig, random_sequence, run_suite
from .opuc import verblunsky_from_measure
from .sumrule import CSV_HEADER, gem_diagnostics, measure_report, sumrule_reports

GEMS_HEADER = "# mopuc-gems v1: k,sum_i,sum_ii,sum_iii"


def _emit(text: str, out: str | None, append: bool = False) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    with open(out, "a" if append else "w") as fh:
        fh.write(text)


def _config(args) -> RunConfig:
    g_list = tuple(args.g) if getattr(args, "g", None) else DEFAULT_G
    return RunConfig(
        grid_size=args.grid,
        trunc=args.trunc,
        tolerance=args.tol,
        seed=args.seed,
        g_list=g_list,
        dim=args.dim,
        fmt=args.format,
        trials=getattr(args, "trials", 10),
        norm_cap=getattr(args, "norm_cap", 0.8),
    ).validate()


def cmd_gen(args) -> int:
    cfg = _config(args)
    alpha = random_sequence(np.random.default_rng(cfg.seed), cfg.dim or 1, cfg.trunc, cfg.norm_cap)
    _emit(json.dumps(io.sequence_to_json(alpha)) + "\n", args.out)
    return 0


def _load_input(source: str, cfg: RunConfig):
    """Return ``(measure or None, coefficient sequence)``."""
    if source == "lambda0" or source.startswith("lambda_g:"):
        obj = {"dim": cfg.dim or 1, "grid_size": cfg.grid_size, "density": source}
    else:
        obj = io.load_json(source)
    if io.is_measure_file(obj):
        mu = io.measure_from_json(obj)
        N = min(cfg.trunc, mu.grid_size // 8)
        return mu, verblunsky_from_measure(mu, N)
    return None, io.sequence_from_json(obj)


def cmd_sumrule(args) -> int:
    cfg = _config(args)
    mu, alpha = _load_input(args.input, cfg)
    if mu is None:
        reports = sumrule_reports(alpha, cfg.g_list, cfg.grid_size)
    else:
        reports = [measure_report(mu, alpha, g) for g in cfg.g_list]
    if cfg.fmt == "csv":
        append = args.out is not None and Path(args.out).exists()
        lines = [] if append else [CSV_HEADER]
        lines += [r.csv_row() for r in reports]
        _emit("\n".join(lines) + "\n", args.out, append=append)
    else:
        _emit(json.dumps([r.to_dict() for r in reports], indent=1) + "\n", args.out)
    return 0 if all(r.residual < cfg.tolerance for r in reports) else 1


def cmd_verify(args) -> int:
    cfg = _config(args)
    results = run_suite(cfg)
    if cfg.fmt == "csv":
        lines = ["# mopuc-verify v1: name,max_residual,tolerance,trials,errors,passed"]
        lines += [f"{r.name},{r.max_residual!r},{r.tolerance!r},{r.trials},{len(r.errors)},{r.passed}" for r in results]
        text = "\n".join(lines) + "\n"
    else:
        text = json.dumps({"seed": cfg.seed, "checks": [r.to_dict() for r in results],
                           "all_passed": all(r.passed for r in results)}, indent=1) + "\n"
    _emit(text, args.out)
    return 0 if all(r.passed for r in results) else 1


def _generated(desc: str, N: int, p: int) -> np.ndarray:
    """Coefficients ``c(k) * 1`` from ``zeros``, ``const:c``, ``geometric:q`` or ``power:c:s``."""
    kind, _, rest = desc.partition(":")
    k = np.arange(N, dtype=float)
    parts = [float(x) for x in rest.split(":")] if rest else []
    try:
        if kind == "zeros":
            vals = np.zeros(N)
        elif kind == "const":
            vals = np.full(N, parts[0])
        elif kind == "geometric":
            vals = parts[0] ** k
        elif kind == "power":
            vals = parts[0] * (k + 1) ** parts[1]
        else:
            raise BadConfig(f"unknown generator {desc!r}")
    except IndexError:
        raise BadConfig(f"generator {desc!r} is missing parameters") from None
    return vals[:, None, None] * np.eye(p)


def cmd_gems(args) -> int:
    cfg = _config(args)
    if args.generator:
        coeffs = _generated(args.generator, cfg.trunc, cfg.dim or 1)
    elif args.input:
        obj = io.load_json(args.input)
        coeffs = np.stack([io.matrix_from_json(m, int(obj["dim"])) for m in obj["coeffs"]])
    else:
        raise BadConfig("gems needs an input file or --generator")
    gems = gem_diagnostics(coeffs)
    lines = [GEMS_HEADER]
    for k in range(len(gems.sum_i)):
        lines.append(",".join([str(k)] + [repr(float(s[k])) for s in (gems.sum_i, gems.sum_ii, gems.sum_iii)]))
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--dim", type=int, default=None, help="matrix size p")
    common.add_argument("--trunc", type=int, default=8, help="number of coefficients N")
    common.add_argument("--grid", type=int, default=4096, help="quadrature grid size M")
    common.add_argument("--g", type=float, action="append", help="coupling; repeatable")
    common.add_argument("--tol", type=float, default=1e-6)
    common.add_argument("--out", default=None)
    common.add_argument("--format", choices=("json", "csv"), default="json")

    parser = argparse.ArgumentParser(prog="mopuc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    gen = sub.add_parser("gen", parents=[common], help="random strict contractions")
    gen.add_argument("--norm-cap", type=float, default=0.8)
    gen.set_defaults(func=cmd_gen)
    sr = sub.add_parser("sumrule", parents=[common], help="sum-rule report for a file or builtin")
    sr.add_argument("input", help="coefficient file, measure file, 'lambda0' or 'lambda_g:<g>'")
    sr.set_defaults(func=cmd_sumrule)
    ver = sub.add_parser("verify", parents=[common], help="run the identity suite on random trials")
    ver.add_argument("--trials", type=int, default=10)
    ver.add_argument("--norm-cap", type=float, default=0.8)
    ver.set_defaults(func=cmd_verify)
    gems = sub.add_parser("gems", parents=[common], help="partial sums of the summability series")
    gems.add_argument("input", nargs="?", default=None)
    gems.add_argument("--generator", default=None, help="zeros | const:c | geometric:q | power:c:s")
    gems.set_defaults(func=cmd_gems)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (MopucError, ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        code = exc.code if isinstance(exc, MopucError) else type(exc).__name__
        sys.stdout.write(json.dumps({"error": code, "message": str(exc)}) + "\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
