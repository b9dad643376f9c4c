"""Command-line front end.

Standard output carries JSON only; the human-readable summary goes to
standard error. Exit codes: 0 ok, 1 parse error, 2 validation failure,
3 verification discrepancy.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import jsonio, matcore, oracle, qsl, randers
from .errors import SchemaError, SingularFormError, ValidationError
from .hamiltonians import ControlProblem, hamiltonian_from_json, problem_from_json, validate

EXIT_OK, EXIT_PARSE, EXIT_VALIDATION, EXIT_DISCREPANCY = 0, 1, 2, 3
VERIFY_RATIO_RANGE = (1 - 1e-6, 1.05)


def _say(msg: str) -> None:
    print(msg, file=sys.stderr)


def _emit(obj, path) -> None:
    text = jsonio.dumps(obj) + "\n"
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _problem_and_target(obj, tol_spec):
    """A ControlProblem and target matrix from either a preset or explicit form."""
    if "preset" in obj:
        p, g = qsl.preset(obj["preset"], obj.get("params", {}))
        if tol_spec != matcore.TOL_SPEC:
            p = ControlProblem(p.h0, p.budget, tol_spec=tol_spec)
        return p, g.o
    p = problem_from_json(obj, tol_spec)
    if "target" not in obj:
        raise SchemaError("input needs a 'target' (matrix or preset name)")
    target = obj["target"]
    if isinstance(target, str):
        if target == "single-spin":
            o = qsl.IY
        elif target == "swap-chain":
            o = qsl.SWAP_SU4
        else:
            raise SchemaError(f"unknown target name {target!r}")
    else:
        o = matcore.matrix_from_json(target)
    return p, o


def _check_problem(p):
    v = validate(p)
    if v:
        raise ValidationError("invalid control problem", v)


def _branch_shift(args, obj):
    if args.branch_max_shift is not None:
        return args.branch_max_shift
    return int(obj.get("branch_max_shift", 0))


def cmd_tmin(args) -> int:
    obj = jsonio.load(args.input)
    p, o = _problem_and_target(obj, args.tol_spec)
    _check_problem(p)
    shift = _branch_shift(args, obj)
    principal = qsl.t_opt_closed_form(p, qsl.TargetGate.from_unitary(o, tol=args.tol_spec))
    out = principal.to_json()
    if shift > 0:
        branches = qsl.t_opt_over_branches(p, o, shift, args.tol_spec)
        out = {"principal": out, "branch_max_shift": shift,
               "branches": [b.to_json() for b in branches]}
    _emit(out, args.output)
    _say(f"t_opt = {principal.t_opt:.12g} (rho = {principal.rho:.6g}, "
         f"route {principal.diagnostics['route']})")
    return EXIT_OK


def cmd_norm(args) -> int:
    obj = jsonio.load(args.input)
    p = problem_from_json(obj, args.tol_spec)
    _check_problem(p)
    if "hamiltonian" not in obj:
        raise SchemaError("input needs a 'hamiltonian' (tangent -i H U)")
    h = hamiltonian_from_json(obj["hamiltonian"])
    nav = randers.NavigationData(p)
    general = randers.hamiltonian_norm(nav, h)
    try:
        su = randers.randers_norm_su(nav, -h)
    except SingularFormError:
        su = None
    _emit({"norm": general, "norm_su": su}, args.output)
    _say(f"||-i H U|| = {general:.12g}")
    return EXIT_OK


def cmd_length(args) -> int:
    obj = jsonio.load(args.input)
    p = problem_from_json(obj, args.tol_spec)
    _check_problem(p)
    sched_obj = obj.get("schedule", obj)
    schedule, relax = randers.schedule_from_json(sched_obj)
    relax = relax or args.relax_budget
    nav = randers.NavigationData(p)
    length = randers.curve_length(nav, schedule, relax_budget=relax)
    elapsed = schedule.duration
    _emit({"length": length, "elapsed": elapsed, "unit_speed_residual": abs(length - elapsed)},
          args.output)
    _say(f"length = {length:.12g}, elapsed = {elapsed:.12g}")
    return EXIT_OK


def cmd_verify(args) -> int:
    obj = jsonio.load(args.input)
    p, o = _problem_and_target(obj, args.tol_spec)
    _check_problem(p)
    cfg = dict(obj.get("search", {}))
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.dist_tol is not None:
        cfg["dist_tol"] = args.dist_tol
    if args.quotient_center:
        cfg["quotient_center"] = True
    shift = max(1, _branch_shift(args, obj))
    cfg.setdefault("branch_max_shift", shift)
    try:
        branches = qsl.t_opt_over_branches(p, o, shift, args.tol_spec)
        report = oracle.brute_force_min_time(p, o, cfg)
    except ValueError as exc:
        if isinstance(exc, (SchemaError, ValidationError)):
            raise
        raise SchemaError(str(exc)) from None
    positive = [b.t_opt for b in branches if b.t_opt > 0]
    min_t = min(positive) if positive else math.nan
    ratio = report.best_time / min_t if report.success else math.inf
    ok = VERIFY_RATIO_RANGE[0] <= ratio <= VERIFY_RATIO_RANGE[1]
    _emit({
        "branch_times": [b.t_opt for b in branches],
        "min_t_opt": min_t,
        "search": report.to_json(),
        "ratio": ratio if math.isfinite(ratio) else None,
        "consistent": ok,
    }, args.output)
    _say(f"min closed-form t_opt = {min_t:.10g}, brute force = {report.best_time:.10g}, "
         f"ratio = {ratio:.8g} -> {'ok' if ok else 'DISCREPANCY'}")
    return EXIT_OK if ok else EXIT_DISCREPANCY


def _parse_params(pairs):
    out = {}
    for item in pairs or ():
        key, sep, val = item.partition("=")
        if not sep:
            raise SchemaError(f"--param expects key=value, got {item!r}")
        out[key] = float(val)
    return out


def cmd_preset_report(args) -> int:
    if args.name:
        name, params = args.name, _parse_params(args.param)
    else:
        obj = jsonio.load(args.input)
        if "preset" not in obj:
            raise SchemaError("input needs 'preset' and 'params'")
        name, params = obj["preset"], obj.get("params", {})
    report = qsl.preset_report(name, params)
    _emit(report, args.output)
    tr = report["tr_H0_logO"]
    _say(f"{name}: rho = {report['rho']:.10g}, Tr(H0 log O) = {tr[0]:.3g}{tr[1]:+.10g}i, "
         f"Tr(log(O)^2) = {report['tr_logO_sq']:.10g}, t_opt = {report['t_opt']:.10g}")
    return EXIT_OK


COMMANDS = {
    "tmin": cmd_tmin,
    "norm": cmd_norm,
    "length": cmd_length,
    "verify": cmd_verify,
    "preset-report": cmd_preset_report,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("input", nargs="?", default="-", help="input JSON file ('-' for stdin)")
    common.add_argument("-o", "--output", help="write JSON here instead of stdout")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--tol-spec", type=float, default=matcore.TOL_SPEC)
    common.add_argument("--dist-tol", type=float, default=None)
    common.add_argument("--branch-max-shift", type=int, default=None)
    common.add_argument("--quotient-center", action="store_true")
    common.add_argument("--relax-budget", action="store_true")

    parser = argparse.ArgumentParser(prog="randers-qsl", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common])
        if name == "preset-report":
            sp.add_argument("--name", choices=qsl.PRESETS)
            sp.add_argument("--param", action="append", metavar="KEY=VALUE")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    try:
        return COMMANDS[args.command](args)
    except SchemaError as exc:
        _say(f"error: {exc}")
        return EXIT_PARSE
    except ValidationError as exc:
        _say(f"validation failed: {exc}")
        for v in exc.violations:
            _say(f"  {v}")
        return EXIT_VALIDATION
    except ValueError as exc:
        _say(f"validation failed: {exc}")
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
