"""Command line entry point.

Exit codes: 0 ok, 1 invalid input, 2 numerical failure, 3 verification failure.
Errors go to stderr as one JSON object.
"""
from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import __version__
from .cycles import CycleError
from .degeneration import (DEFAULT_T, DegenerationError, check_detPB_limit, check_period_limits,
                           theta_factorization_check)
from .io import (InputError, PeriodCache, build_report, cached_periods, cmatrix, default_cache_dir,
                 from_cmatrix, load_config, periods_to_dict, save_report)
from .periods import PeriodError
from .quadrature import QuadratureError
from .theta import Characteristic, ThetaError, theta_constant
from .thomae import VerificationError, run_example7, verify_thomae
from .trees import TreeError, validate_tree

EXIT_INPUT, EXIT_NUMERIC, EXIT_VERIFY = 1, 2, 3


class CliFailure(Exception):
    def __init__(self, code: int, kind: str, message: str, **extra):
        super().__init__(message)
        self.code = code
        self.kind = kind
        self.extra = extra


def _c(z) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def _emit(args, report: dict, summary: str) -> None:
    if args.out:
        save_report(args.out, report)
    if args.json:
        json.dump(report, sys.stdout, indent=1, sort_keys=True, default=str)
        sys.stdout.write("\n")
    else:
        print(summary)


def _cache(args):
    if args.no_cache:
        return None
    return PeriodCache(args.cache_dir or default_cache_dir())


def _load(path):
    try:
        return load_config(path)
    except TreeError as exc:
        raise InputError(str(exc)) from exc


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------


def cmd_validate(args) -> int:
    config, tree, lam = _load(args.config)
    rep = validate_tree(tree, config)
    report = build_report("validate", config, tree, lam, args.precision, rep.as_dict())
    if not rep.ok:
        raise CliFailure(EXIT_INPUT, "invalid_tree", rep.errors[0]["message"], errors=rep.errors)
    _emit(args, report, f"valid, genus {rep.genus}")
    return 0


def cmd_periods(args) -> int:
    config, tree, lam = _load(args.config)
    rep = validate_tree(tree, config)
    if not rep.ok:
        raise CliFailure(EXIT_INPUT, "invalid_tree", rep.errors[0]["message"], errors=rep.errors)
    pd, hit = cached_periods(config, tree, args.precision, _cache(args), args.rotation)
    body = {"periods": periods_to_dict(pd)}
    report = build_report("periods", config, tree, lam, args.precision, body)
    _emit(args, report, f"genus {pd.g}, cond(P_B) = {pd.cond_B:.3g}, cache {'hit' if hit else 'miss'}\n"
                        f"tau =\n{np.array2string(pd.tau, precision=8)}")
    return 0


def _read_tau(path) -> np.ndarray:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read tau file: {exc}") from exc
    rows = doc["tau"] if isinstance(doc, dict) else doc
    try:
        tau = from_cmatrix(rows)
    except (TypeError, ValueError) as exc:
        raise InputError("tau must be a matrix of [re, im] pairs", "$.tau") from exc
    if tau.shape[0] != tau.shape[1]:
        raise InputError("tau is not square", "$.tau")
    return tau


def cmd_theta(args) -> int:
    tau = _read_tau(args.tau)
    try:
        chi = Characteristic.parse(args.char)
    except ValueError as exc:
        raise InputError(str(exc), "--char") from exc
    if chi.g != tau.shape[0]:
        raise InputError(f"characteristic has genus {chi.g}, tau has size {tau.shape[0]}", "--char")
    dps = 30 if args.precision == "extended" else None
    tv = theta_constant(tau, chi.alpha, chi.beta, eps=args.eps, dps=dps)
    value = tv.mp_value if tv.mp_value is not None else tv.value
    report = {"kind": "theta", "tau": cmatrix(tau), "characteristic": chi.as_strings(), "value": _c(value),
              "sixth_power": _c(value ** 6), "lattice_points": tv.points, "tail_bound": tv.bound,
              "precision": args.precision}
    _emit(args, report, f"theta = {complex(value):.15g}\ntheta^6 = {complex(value ** 6):.15g}")
    return 0


def cmd_verify(args) -> int:
    config, tree, lam = _load(args.config)
    if lam is None:
        raise InputError("verify needs a Lambda entry", "$.Lambda")
    rep = validate_tree(tree, config)
    if not rep.ok:
        raise CliFailure(EXIT_INPUT, "invalid_tree", rep.errors[0]["message"], errors=rep.errors)
    pd, hit = cached_periods(config, tree, args.precision, _cache(args), args.rotation)
    try:
        vr = verify_thomae(config, tree, lam, args.precision, eps=args.eps, periods=pd, rotation=args.rotation)
    except VerificationError as exc:
        kind = EXIT_INPUT if exc.stage == "tree" else EXIT_NUMERIC
        raise CliFailure(kind, exc.stage, str(exc)) from exc
    body = vr.as_dict()
    body.pop("seconds")  # keeps reports bit-identical between runs
    body["periods"] = periods_to_dict(pd)
    report = build_report("verify", config, tree, lam, args.precision, body,
                          {"modulus": vr.tol_modulus, "phase": vr.tol_phase})
    _emit(args, report, f"r/kappa^g = {vr.ratio / vr.kappa_g:.10g}\n|r|/|kappa^g| - 1 = {vr.modulus_dev:.2e}\n"
                        f"(r/kappa^g)^6 - 1 = {vr.phase_test:.2e}\n{'PASS' if vr.ok else 'FAIL'}")
    return 0 if vr.ok else EXIT_VERIFY


def cmd_degenerate(args) -> int:
    config, tree, lam = _load(args.config)
    rep = validate_tree(tree, config)
    if not rep.ok:
        raise CliFailure(EXIT_INPUT, "invalid_tree", rep.errors[0]["message"], errors=rep.errors)
    i, j = args.merge, args.merge_with
    if j is None:
        j = i + 1
    if not (0 <= i < config.m and 0 <= j < config.m):
        raise InputError("merge indices out of range", "--merge")
    try:
        tilde = complex(args.tilde.replace("i", "j")) if args.tilde is not None else None
    except ValueError as exc:
        raise InputError(f"cannot parse {args.tilde!r} as a complex number", "--tilde") from exc
    ts = sorted(args.t_seq, reverse=True)
    if any(not 0 < t < 1 for t in ts):
        raise InputError("t values must lie in (0, 1)", "--t-seq")
    limits = check_period_limits(config, tree, i, tilde, ts, j=j)
    body = {"period_limits": limits.as_dict()}
    ok = limits.ok
    lines = [f"period limits: {'PASS' if limits.ok else 'FAIL'}"]
    if limits.setup.white:
        det = check_detPB_limit(config, tree, i, tilde, ts, j=j)
        body["det_limit"] = det.as_dict()
        ok &= det.ok
        lines.append(f"det P_B limit: rel error {det.item.rel_error:.2e} {'PASS' if det.ok else 'FAIL'}")
    if lam is not None and lam[i] != lam[j]:
        fz = theta_factorization_check(config, tree, i, lam, tilde, ts, j=j)
        body["factorization"] = fz.as_dict()
        ok &= fz.ok
        lines.append(f"theta factorisation: rel error {fz.rel_error:.2e} {'PASS' if fz.ok else 'FAIL'}")
    body["pass"] = bool(ok)
    report = build_report("degenerate", config, tree, lam, "double", body)
    _emit(args, report, "\n".join(lines))
    return 0 if ok else EXIT_VERIFY


def cmd_example7(args) -> int:
    rep = run_example7(args.precision)
    body = rep.as_dict()
    _emit(args, {"kind": "example7", **body},
          f"|lhs/rhs - 1| = {rep.rel_error:.2e} (tol {rep.tol:g}) {'PASS' if rep.ok else 'FAIL'}")
    return 0 if rep.ok else EXIT_VERIFY


def cmd_selftest(args) -> int:
    from .selftest import run_selftest

    results = run_selftest(skip_extended=args.precision == "double")
    ok = all(r.ok for r in results)
    lines = [f"{'PASS' if r.ok else 'FAIL'}  {r.name}: {r.detail}" for r in results]
    _emit(args, {"kind": "selftest", "checks": [r.as_dict() for r in results], "pass": ok}, "\n".join(lines))
    return 0 if ok else EXIT_VERIFY


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--eps", type=float, default=1e-14, help="theta truncation bound")
    common.add_argument("--precision", choices=("double", "extended"), default="double")
    common.add_argument("--cache-dir", default=None, help="period cache (default: $THOMAE_CACHE_DIR or ~/.cache)")
    common.add_argument("--no-cache", action="store_true")
    common.add_argument("--seed", type=int, default=0, help="seed for the intersection jitter and sampling")
    common.add_argument("--json", action="store_true", help="print the full JSON report")
    common.add_argument("--out", default=None, help="also write the report to this file")
    common.add_argument("--rotation", type=int, choices=(1, -1), default=1, help="block order at each vertex")

    parser = argparse.ArgumentParser(prog="tricover", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common], help="check a configuration and tree")
    p.add_argument("config")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("periods", parents=[common], help="period matrices and tau")
    p.add_argument("config")
    p.set_defaults(func=cmd_periods)

    p = sub.add_parser("theta", parents=[common], help="theta constant for a given tau")
    p.add_argument("--tau", required=True, help="JSON file with tau as [[re, im], ...] rows")
    p.add_argument("--char", required=True, help="characteristic 'a1,..;b1,..'")
    p.set_defaults(func=cmd_theta)

    p = sub.add_parser("verify", parents=[common], help="Thomae identity for the configuration's Lambda")
    p.add_argument("config")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("degenerate", parents=[common], help="limits as two terminals merge")
    p.add_argument("config")
    p.add_argument("--merge", type=int, required=True, help="0-based index of the first terminal")
    p.add_argument("--merge-with", type=int, default=None, help="second terminal (default: merge + 1)")
    p.add_argument("--tilde", default=None, help="merge point, e.g. 2.5 or 1+0.5j (default: midpoint)")
    p.add_argument("--t-seq", type=float, nargs="+", default=list(DEFAULT_T))
    p.set_defaults(func=cmd_degenerate)

    p = sub.add_parser("example7", parents=[common], help="reproduce the genus-2 worked example")
    p.set_defaults(func=cmd_example7)

    p = sub.add_parser("selftest", parents=[common], help="run all reference examples")
    p.set_defaults(func=cmd_selftest)
    return parser


def _fail(code: int, kind: str, message: str, **extra) -> int:
    json.dump({"error": kind, "message": message, "exit_code": code, **extra}, sys.stderr, default=str)
    sys.stderr.write("\n")
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    np.random.seed(args.seed)
    try:
        return args.func(args)
    except CliFailure as exc:
        return _fail(exc.code, exc.kind, str(exc), **exc.extra)
    except InputError as exc:
        return _fail(EXIT_INPUT, "invalid_input", exc.message, path=exc.path)
    except TreeError as exc:
        return _fail(EXIT_INPUT, "invalid_tree", str(exc))
    except (PeriodError, QuadratureError, ThetaError, CycleError, DegenerationError, np.linalg.LinAlgError) as exc:
        return _fail(EXIT_NUMERIC, "numerical_failure", f"{type(exc).__name__}: {exc}")


if __name__ == "__main__":
    sys.exit(main())
