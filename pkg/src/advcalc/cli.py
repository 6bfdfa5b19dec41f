"""advcalc command line.

Exit codes: 0 success, 1 a suite or replayed check failed, 2 malformed
arguments or config.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from fractions import Fraction

import numpy as np

from . import gauge, strings
from .geometry import GeometryError, dump_set, frac, load_set, parse_norm
from .morphology import MorphContext, closing, dilate, erode, finite_family_identities, fringe, mollify, opening
from .optimize import SearchError, SearchInstance, greedy_flip_descent, mollified_optimality_check, oracle_search
from .render import render
from .risk import LabeledDistribution, adversarial_risk, standard_risk
from .suites import SUITES, SuiteError, replay, run_suite, write_outputs


class ConfigError(ValueError):
    pass


MORPH_OPS = {
    "dilate": dilate,
    "erode": erode,
    "open": opening,
    "close": closing,
    "fringe": fringe,
    "mollify": mollify,
}


# --------------------------------------------------------------------------
# parsing and validation
# --------------------------------------------------------------------------


def _common(parser, suppress: bool):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--seed", default=d("0"), help="RNG seed (unsigned 64-bit)")
    parser.add_argument("--format", default=d("csv"), choices=("csv", "json"))
    parser.add_argument("--config", default=d(None), help="JSON file whose keys override flags")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="advcalc", description="Exact adversarial set calculus.")
    _common(p, suppress=False)
    sub = p.add_subparsers(dest="command")
    parent = argparse.ArgumentParser(add_help=False)
    _common(parent, suppress=True)

    s = sub.add_parser("morph", parents=[parent], help="dilate/erode/open/close/fringe/mollify a set file")
    s.add_argument("--op", choices=sorted(MORPH_OPS))
    s.add_argument("--eps")
    s.add_argument("--norm", default="l1")
    s.add_argument("--in", dest="input")
    s.add_argument("--out")

    s = sub.add_parser("check-identities", parents=[parent], help="family relations for a list of set files")
    s.add_argument("--family", nargs="+")
    s.add_argument("--eps")
    s.add_argument("--norm", default="l1")
    s.add_argument("--out", default="advcalc-out")

    s = sub.add_parser("risk", parents=[parent], help="exact standard and adversarial risk")
    s.add_argument("--set", dest="set_path")
    s.add_argument("--dist")
    s.add_argument("--eps")
    s.add_argument("--norm", default="l1")
    s.add_argument("--mode", default="morphology", choices=("morphology", "distance"))

    s = sub.add_parser("optimize", parents=[parent], help="oracle / greedy / pipeline minimizer search")
    s.add_argument("--mode", default="oracle", choices=("oracle", "greedy", "pipeline"))
    s.add_argument("--dist")
    s.add_argument("--eps")
    s.add_argument("--norm", default="l1")
    s.add_argument("--cells", help="number of interval cells (1-D); lattice instances use every point near an atom")
    s.add_argument("--lo")
    s.add_argument("--hi")
    s.add_argument("--out", default="result.json")

    s = sub.add_parser("gauge", parents=[parent], help="lambda_C(x, v) and sampled probes")
    s.add_argument("--body")
    s.add_argument("--x")
    s.add_argument("--v")
    s.add_argument("--probe", choices=("concavity",))
    s.add_argument("--samples", default="10000")
    s.add_argument("--out", default="advcalc-out")

    s = sub.add_parser("strings", parents=[parent], help="swap perturbations on a string universe")
    s.add_argument("--alphabet", default="ab")
    s.add_argument("--maxlen", default="3")
    s.add_argument("--swaps", action="append", help="pair i,j (repeatable)")
    s.add_argument("--dist")
    s.add_argument("--set", dest="set_words", help="comma-separated words for risk mode")
    s.add_argument("--mode", default="risk", choices=("risk", "oracle", "identities"))

    for name in ("suite", "run-suite"):
        s = sub.add_parser(name, parents=[parent], help="run a seeded property suite")
        s.add_argument("suite_name", nargs="?", choices=sorted(SUITES))
        s.add_argument("--cases")
        s.add_argument("--out", default="advcalc-out")
        s.add_argument("--inject-failure", action="store_true", help="append one deliberately false case")

    s = sub.add_parser("render", parents=[parent], help="SVG (1-D) or PPM (2-D) of A, A^eps, A^-eps")
    s.add_argument("--in", dest="input")
    s.add_argument("--eps")
    s.add_argument("--norm", default="l1")
    s.add_argument("--out")

    s = sub.add_parser("replay", parents=[parent], help="re-run the check stored in a witness file")
    s.add_argument("witness")
    return p


def _rational(name: str, value, minimum=Fraction(0)) -> Fraction:
    try:
        v = frac(value)
    except (GeometryError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"{name} must be a rational number, got {value!r}") from exc
    if v < minimum:
        raise ConfigError(f"{name} must be >= {minimum}, got {value}")
    return v


def _integer(name: str, value, minimum: int = 0) -> int:
    try:
        v = int(str(value))
    except ValueError as exc:
        raise ConfigError(f"{name} must be an integer, got {value!r}") from exc
    if v < minimum:
        raise ConfigError(f"{name} must be >= {minimum}, got {v}")
    return v


def _existing(name: str, path) -> str:
    if not path:
        raise ConfigError(f"--{name} is required")
    if not os.path.exists(path):
        raise ConfigError(f"{name} file not found: {path}")
    return path


def apply_config(args: argparse.Namespace, parser: argparse.ArgumentParser) -> argparse.Namespace:
    """Overlay a JSON config on parsed flags (config wins)."""
    if not args.config:
        return args
    try:
        with open(args.config) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    command = cfg.pop("command", None) or args.command
    if command is None:
        raise ConfigError("no command given on the command line or in the config")
    if args.command is not None and command != args.command:
        raise ConfigError(f"config command {command!r} conflicts with {args.command!r}")
    if args.command is None:
        base = parser.parse_args([command])
        for k in ("seed", "format", "config"):
            setattr(base, k, getattr(args, k))
        args = base
    aliases = {"in": "input", "set": "set_path" if command == "risk" else "set_words", "suite": "suite_name"}
    known = set(vars(args))
    if "eps" in cfg:
        _rational("eps", cfg["eps"])
    for key, value in cfg.items():
        dest = aliases.get(key, key.replace("-", "_"))
        if dest not in known:
            raise ConfigError(f"unknown config key {key!r} for {command}")
        setattr(args, dest, value)
    return args


def validate(args: argparse.Namespace) -> argparse.Namespace:
    args.seed = _integer("seed", args.seed)
    if args.seed >= 1 << 64:
        raise ConfigError("seed must fit in 64 bits")
    if args.format not in ("csv", "json"):
        raise ConfigError("format must be csv or json")
    if getattr(args, "eps", None) is not None:
        args.eps = _rational("eps", args.eps)
    cmd = args.command
    if cmd in ("morph", "render", "risk", "optimize", "check-identities") and args.eps is None:
        raise ConfigError("--eps is required")
    if cmd == "morph":
        if args.op not in MORPH_OPS:
            raise ConfigError(f"--op must be one of {', '.join(sorted(MORPH_OPS))}")
        _existing("in", args.input)
        if not args.out:
            raise ConfigError("--out is required")
    if cmd == "render":
        _existing("in", args.input)
    if cmd == "check-identities":
        if not args.family:
            raise ConfigError("--family needs at least one file")
        for f in args.family:
            _existing("family", f)
    if cmd == "risk":
        _existing("set", args.set_path)
        _existing("dist", args.dist)
    if cmd == "optimize":
        _existing("dist", args.dist)
        if args.cells is not None:
            args.cells = _integer("cells", args.cells, 1)
    if cmd in ("suite", "run-suite"):
        if args.suite_name not in SUITES:
            raise ConfigError(f"suite must be one of {', '.join(SUITES)}")
        if args.cases is not None:
            args.cases = _integer("cases", args.cases, 1)
    if cmd == "gauge":
        _existing("body", args.body)
        args.samples = _integer("samples", args.samples, 1)
    if cmd == "strings":
        args.maxlen = _integer("maxlen", args.maxlen)
        if not args.swaps:
            raise ConfigError("--swaps needs at least one pair")
        if args.mode != "identities":
            _existing("dist", args.dist)
    if cmd == "replay":
        _existing("witness", args.witness)
    return args


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------


def _ctx(args, A) -> MorphContext:
    return MorphContext(parse_norm(args.norm, A.dim), args.eps)


def _emit(args, obj) -> None:
    if args.format == "json":
        print(json.dumps(obj, indent=2, sort_keys=True))
    else:
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(list(obj))
        w.writerow([obj[k] if not isinstance(obj[k], (list, dict)) else json.dumps(obj[k]) for k in obj])


def cmd_morph(args) -> int:
    A = load_set(args.input)
    out = MORPH_OPS[args.op](A, _ctx(args, A))
    dump_set(out, args.out)
    print(f"{args.op}: wrote {args.out}")
    return 0


def cmd_check_identities(args) -> int:
    fam = [load_set(f) for f in args.family]
    ctx = _ctx(args, fam[0])
    rep = finite_family_identities(fam, ctx)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "identities.csv")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["identity", "status", "witness-file"])
        for name, chk in rep.checks.items():
            wit = ""
            if not chk.ok:
                wit = os.path.join(args.out, f"witness_{name}.json")
                dump_set(chk.witness, wit)
            w.writerow([name, "pass" if chk.ok else "fail", wit])
    print(f"wrote {path}")
    return 0 if rep.ok else 1


def cmd_risk(args) -> int:
    A = load_set(args.set_path)
    D = LabeledDistribution.load(args.dist)
    ctx = _ctx(args, A)
    adv = adversarial_risk(A, D, ctx, mode=args.mode)
    std = standard_risk(A, D)
    _emit(args, {
        "adversarial_risk": str(adv),
        "adversarial_risk_decimal": float(adv),
        "standard_risk": str(std),
        "standard_risk_decimal": float(std),
    })
    return 0


def _search_instance(args) -> SearchInstance:
    D = LabeledDistribution.load(args.dist)
    dim = len(D.atoms[0].x)
    ctx = MorphContext(parse_norm(args.norm, dim), args.eps)
    if dim == 1 and args.cells is not None:
        xs = [a.x[0] for a in D]
        pad = args.eps / ctx.norm.scale_1d() + 1
        lo = frac(args.lo) if args.lo is not None else min(xs) - pad
        hi = frac(args.hi) if args.hi is not None else max(xs) + pad
        return SearchInstance.intervals(lo, hi, args.cells, D, ctx)
    ball = ctx.norm.lattice_ball(ctx.eps, 1)
    cells = sorted({tuple(int(c) for c in np.asarray([int(v) for v in a.x]) + off) for a in D for off in ball})
    if args.cells is not None and len(cells) > args.cells:
        raise SearchError(f"lattice neighborhood has {len(cells)} cells, more than --cells {args.cells}")
    return SearchInstance.lattice(cells, D, ctx)


def cmd_optimize(args) -> int:
    inst = _search_instance(args)
    if args.mode == "greedy":
        res = greedy_flip_descent(inst, 0)
        extra = {}
    else:
        res = oracle_search(inst)
        extra = {}
        if args.mode == "pipeline":
            rep = mollified_optimality_check(inst)
            extra = {
                "mollified_set": rep.mollified.to_json(),
                "mollified_risk": str(rep.mollified_risk),
                "mollified_equal": rep.ok,
                "mollified_pseudo_certifiably_robust": rep.robust,
            }
    out = res.to_json()
    trace_path = os.path.splitext(args.out)[0] + "_trace.csv"
    with open(trace_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iteration", "risk"])
        w.writerows([it, str(r)] for it, r in res.trace)
    out.update(extra, mode=args.mode, trace=trace_path)
    with open(args.out, "w") as fh:
        json.dump(out, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"best_risk {res.best_risk} ({float(res.best_risk)}); wrote {args.out}")
    return 0


def _coords(s) -> list[float]:
    if isinstance(s, list):
        return [float(v) for v in s]
    try:
        return [float(v) for v in str(s).split(",")]
    except ValueError as exc:
        raise ConfigError(f"bad coordinates {s!r}") from exc


def cmd_gauge(args) -> int:
    with open(args.body) as fh:
        C = gauge.body_from_json(json.load(fh))
    if args.probe == "concavity":
        rep = gauge.concavity_probe(C, args.samples, args.seed, None if args.v is None else _coords(args.v))
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, "concavity.csv")
        rep.write_csv(path)
        print(f"max violation {rep.max_violation!r}; wrote {path}")
        return 0 if rep.ok() else 1
    if args.x is None or args.v is None:
        raise ConfigError("--x and --v are required without --probe")
    t_lo, t_hi = gauge.ray_interval(C, _coords(args.x), _coords(args.v))
    _emit(args, {"lambda": repr(t_hi), "t_min": repr(t_lo)})
    return 0


def _pairs(raw) -> list[tuple[int, int]]:
    out = []
    for item in raw:
        try:
            i, j = (int(v) for v in (item if isinstance(item, list) else str(item).split(",")))
        except ValueError as exc:
            raise ConfigError(f"bad swap pair {item!r}") from exc
        out.append((i, j))
    return strings.swap_family(out)


def cmd_strings(args) -> int:
    U = strings.StringUniverse(args.alphabet, args.maxlen)
    B = _pairs(args.swaps)
    if args.mode == "identities":
        bad = [w for b in B for w in U.strings() if strings.swap_apply(b, strings.swap_apply(b, w)) != w]
        _emit(args, {"universe": U.size(), "swaps": len(B), "involution_failures": len(bad)})
        return 0 if not bad else 1
    D = LabeledDistribution.load(args.dist)
    if args.mode == "oracle":
        res = strings.string_oracle_search(D, B, U)
        _emit(args, {"best_set": sorted(res.best_set), "best_risk": str(res.best_risk), "cells": res.cells})
        return 0
    words = args.set_words or ""
    A = frozenset(w for w in words.split(",") if w) if isinstance(words, str) else frozenset(words)
    r = strings.string_adversarial_risk(A, D, B, U)
    _emit(args, {"adversarial_risk": str(r), "adversarial_risk_decimal": float(r), "standard_risk": str(strings.string_standard_risk(A, D))})
    return 0


def cmd_suite(args) -> int:
    run = run_suite(args.suite_name, args.seed, args.cases, None, args.inject_failure)
    paths = write_outputs(run, args.out, args.format)
    print(f"{args.suite_name}: {len(run.rows)} cases, {run.failures} failures; wrote {paths['cases']} and {paths['summary']}")
    for rel in run.witnesses:
        print(f"witness: {os.path.join(args.out, rel)}")
    return 0 if run.failures == 0 else 1


def cmd_render(args) -> int:
    A = load_set(args.input)
    if A.dim > 2:
        raise GeometryError("rendering supports 1-D and 2-D sets only")
    text, suffix = render(A, _ctx(args, A))
    out = args.out or os.path.splitext(args.input)[0] + suffix
    with open(out, "w") as fh:
        fh.write(text)
    print(f"wrote {out}")
    return 0


def cmd_replay(args) -> int:
    res = replay(args.witness)
    if res.ok:
        print(f"not reproduced: check passes (lhs {res.lhs}, rhs {res.rhs})")
        return 0
    print(f"reproduced: lhs {res.lhs} != rhs {res.rhs}")
    return 1


COMMANDS = {
    "morph": cmd_morph,
    "check-identities": cmd_check_identities,
    "risk": cmd_risk,
    "optimize": cmd_optimize,
    "gauge": cmd_gauge,
    "strings": cmd_strings,
    "suite": cmd_suite,
    "run-suite": cmd_suite,
    "render": cmd_render,
    "replay": cmd_replay,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args = apply_config(args, parser)
        if args.command is None:
            parser.print_help()
            return 2
        args = validate(args)
        return COMMANDS[args.command](args)
    except (ConfigError, SuiteError) as exc:
        print(f"advcalc: error: {exc}", file=sys.stderr)
        return 2
    except (GeometryError, gauge.GaugeError, strings.StringError, OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"advcalc: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
