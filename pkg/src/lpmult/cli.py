"""Command line interface: ``lpmult <command> ...``.

Commands print JSON records on stdout.  ``experiment run`` and
``report convert`` write files to ``--out-dir`` or, failing that, to the
directory named by ``LPMULT_OUTPUT_DIR``.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from .analytic_models import NotBoundedError, model_from_record
from .circle_geometry import ClosedCircleSet, GeometryError, build_star_domain
from .experiments import (ConfigError, _jsonable, emit, load_config, output_dir, parse_p,
                          read_report, run)
from .littlewood_paley import dyadic_partition, lp_constants_estimate, partition_from_set
from .lp_sets import GENERATORS, check_ratio_condition, ratio_report
from .mikhlin import mikhlin_constant
from .multiplier_norms import multiplier_norm_curve
from .taylor import taylor, taylor_dft, taylor_exact

FORMATS = ("csv", "json", "svg")


def _print(record) -> None:
    print(json.dumps(_jsonable(record), indent=2, sort_keys=True))


def _load_json_arg(value: str):
    """A JSON literal, or the path of a file holding one."""
    path = Path(value)
    if path.is_file():
        return json.loads(path.read_text())
    return json.loads(value)


def _p_arg(value: str) -> float:
    try:
        return parse_p(value if value in ("inf", "infinity") else float(value))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _add_set_args(parser) -> None:
    g = parser.add_mutually_exclusive_group(required=True)
    g.add_argument("--set", dest="set_file", help="JSON set record or file")
    g.add_argument("--generator", choices=sorted(GENERATORS))
    parser.add_argument("--K", type=int, default=8, help="generator depth (default 8)")


def _get_set(args) -> ClosedCircleSet:
    if args.set_file:
        return ClosedCircleSet.from_record(_load_json_arg(args.set_file))
    return GENERATORS[args.generator](args.K)


def _get_model(args):
    return model_from_record(_load_json_arg(args.model))


def cmd_set_gen(args):
    _print(GENERATORS[args.generator](args.K).to_record())


def cmd_set_check_ratio(args):
    rep = ratio_report(_get_set(args), args.tail_start)
    out = rep.to_record()
    out["beta"] = args.beta
    out["holds"] = check_ratio_condition(rep, args.beta)
    _print(out)


def cmd_domain_build(args):
    dom = build_star_domain(_get_set(args), args.theta0)
    out = dom.to_record()
    out["inscribed_constant"] = dom.inscribed_constant(args.samples)
    _print(out)


def cmd_taylor(args):
    m = _get_model(args)
    if args.method == "exact":
        seq = taylor_exact(m, args.N)
    elif args.method == "dft":
        seq = taylor_dft(m, args.N, args.rho, args.M)
    else:
        seq = taylor(m, args.N)
    _print(seq.to_record())


def cmd_norm(args):
    m = _get_model(args)
    rows = []
    for p in args.p:
        for est in multiplier_norm_curve(m, p, args.N, args.seed, args.tol):
            rows.append(est.to_record())
    _print(rows)


def cmd_mikhlin(args):
    dom = build_star_domain(_get_set(args), args.theta0)
    _print(mikhlin_constant(_get_model(args), dom, args.grid).to_record())


def cmd_lp_constants(args):
    rows = []
    for N in args.N:
        part = dyadic_partition(N) if args.dyadic else partition_from_set(_get_set(args), N)
        for p in args.p:
            rows.append(lp_constants_estimate(part, p, args.trials, args.seed).to_record())
    _print(rows)


def cmd_experiment_run(args):
    cfg = load_config(args.config, args.seed)
    report = run(cfg, workers=args.workers)
    for fmt in args.format:
        print(emit(report, fmt, args.out_dir))


def cmd_report_convert(args):
    report = read_report(args.report)
    stem = args.stem or Path(args.report).stem
    for fmt in args.to:
        print(emit(report, fmt, args.out_dir, stem))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lpmult", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_set = sub.add_parser("set", help="closed circle sets").add_subparsers(dest="action",
                                                                            required=True)
    gen = p_set.add_parser("gen", help="generate a lacunary set")
    gen.add_argument("--generator", choices=sorted(GENERATORS), required=True)
    gen.add_argument("--K", type=int, required=True)
    gen.set_defaults(func=cmd_set_gen)
    chk = p_set.add_parser("check-ratio", help="arc-ratio condition")
    _add_set_args(chk)
    chk.add_argument("--beta", type=float, required=True)
    chk.add_argument("--tail-start", type=int, default=None)
    chk.set_defaults(func=cmd_set_check_ratio)

    p_dom = sub.add_parser("domain", help="star domains").add_subparsers(dest="action",
                                                                         required=True)
    build = p_dom.add_parser("build", help="build a star domain over a set")
    _add_set_args(build)
    build.add_argument("--theta0", type=float, default=math.pi / 6)
    build.add_argument("--samples", type=int, default=64)
    build.set_defaults(func=cmd_domain_build)

    tay = sub.add_parser("taylor", help="Taylor coefficients of a model")
    tay.add_argument("--model", required=True, help="JSON model record or file")
    tay.add_argument("--N", type=int, required=True)
    tay.add_argument("--method", choices=("auto", "exact", "dft"), default="auto")
    tay.add_argument("--rho", type=float, default=None)
    tay.add_argument("--M", type=int, default=None)
    tay.set_defaults(func=cmd_taylor)

    nrm = sub.add_parser("norm", help="section norm brackets")
    nrm.add_argument("--model", required=True, help="JSON model record or file")
    nrm.add_argument("--p", type=_p_arg, nargs="+", required=True)
    nrm.add_argument("--N", type=int, nargs="+", required=True)
    nrm.add_argument("--seed", type=int, default=0)
    nrm.add_argument("--tol", type=float, default=1e-8)
    nrm.set_defaults(func=cmd_norm)

    mik = sub.add_parser("mikhlin", help="derivative bound check")
    mik.add_argument("--model", required=True, help="JSON model record or file")
    _add_set_args(mik)
    mik.add_argument("--theta0", type=float, default=math.pi / 6)
    mik.add_argument("--grid", type=int, default=20000)
    mik.set_defaults(func=cmd_mikhlin)

    lpc = sub.add_parser("lp-constants", help="square-function ratio brackets")
    g = lpc.add_mutually_exclusive_group(required=True)
    g.add_argument("--set", dest="set_file", help="JSON set record or file")
    g.add_argument("--generator", choices=sorted(GENERATORS))
    g.add_argument("--dyadic", action="store_true", help="dyadic partition refined to N")
    lpc.add_argument("--K", type=int, default=8)
    lpc.add_argument("--p", type=_p_arg, nargs="+", required=True)
    lpc.add_argument("--N", type=int, nargs="+", required=True)
    lpc.add_argument("--trials", type=int, default=500)
    lpc.add_argument("--seed", type=int, default=0)
    lpc.set_defaults(func=cmd_lp_constants)

    exp = sub.add_parser("experiment", help="config-driven experiments").add_subparsers(
        dest="action", required=True)
    er = exp.add_parser("run", help="run an experiment config")
    er.add_argument("config")
    er.add_argument("--seed", type=int, default=None, help="override the config seed")
    er.add_argument("--format", choices=FORMATS, nargs="+", default=list(FORMATS))
    er.add_argument("--out-dir", default=None)
    er.add_argument("--workers", type=int, default=1)
    er.set_defaults(func=cmd_experiment_run)

    rep = sub.add_parser("report", help="report files").add_subparsers(dest="action",
                                                                       required=True)
    conv = rep.add_parser("convert", help="re-emit a json report")
    conv.add_argument("report")
    conv.add_argument("--to", choices=FORMATS, nargs="+", required=True)
    conv.add_argument("--out-dir", default=None)
    conv.add_argument("--stem", default=None)
    conv.set_defaults(func=cmd_report_convert)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (ConfigError, GeometryError, NotBoundedError, ValueError, KeyError, OSError) as exc:
        print(f"lpmult: error: {exc}", file=sys.stderr)
        return 2
    return 0


__all__ = ["main", "build_parser", "output_dir"]
