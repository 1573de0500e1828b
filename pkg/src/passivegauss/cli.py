"""Command line front-end.

Subcommands::

    check     validity, squeezing and whether passive optics can entangle
    entangle  build the optimal passive transform and write it to --out
    apply     apply a stored transform to a state
    report    logarithmic negativity of a state as it is
    oracle    brute-force search, compared with the closed form
    make      write a standard state to a file

Exit codes: ``check``/``entangle`` return 0 if the state can be entangled
and 1 if not; every command returns 2 on invalid input and ``oracle``
returns 3 when the search disagrees with the criterion.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from typing import Optional, Sequence

import numpy as np

from . import core, entanglement, oracle, power
from .core import CovarianceMatrix, PassiveTransform, apply_passive, validate
from .errors import GaussianError, ValidityError

EXIT_OK, EXIT_NOT_ENTANGLABLE, EXIT_INVALID, EXIT_DISAGREE = 0, 1, 2, 3
ORACLE_AGREEMENT = 1e-3


class InputError(GaussianError):
    """Bad input file or arguments; maps to exit code 2."""


# ---------------------------------------------------------------------------
# files
# ---------------------------------------------------------------------------


def _read_json(path: str):
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    try:
        obj = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    except UnicodeDecodeError as exc:
        raise InputError(f"{path}: not UTF-8 text ({exc.reason})") from None
    if not isinstance(obj, dict):
        raise InputError(f"{path}: top level must be a JSON object")
    return obj, hashlib.sha256(raw).hexdigest()


def _matrix_field(obj, name: str, rows: int, path: str) -> np.ndarray:
    if name not in obj:
        raise InputError(f"{path}: missing field {name!r}")
    m = obj[name]
    if not isinstance(m, list) or len(m) != rows:
        got = len(m) if isinstance(m, list) else type(m).__name__
        raise InputError(f"{path}: field {name!r} must have {rows} rows, got {got}")
    for i, row in enumerate(m):
        if not isinstance(row, list) or len(row) != rows:
            got = len(row) if isinstance(row, list) else type(row).__name__
            raise InputError(f"{path}: field {name!r} row {i + 1} must have {rows} entries, got {got}")
        for j, x in enumerate(row):
            if isinstance(x, bool) or not isinstance(x, (int, float)):
                raise InputError(f"{path}: field {name!r} entry ({i + 1}, {j + 1}) is not a number")
    return np.array(m, dtype=float)


def _int_field(obj, name: str, path: str) -> int:
    n = obj.get(name)
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise InputError(f"{path}: field {name!r} must be a positive integer")
    return n


def load_state(path: str):
    """Read a covariance-matrix file; returns ``(CovarianceMatrix, sha256 digest)``."""
    obj, digest = _read_json(path)
    n = _int_field(obj, "n", path)
    ordering = obj.get("ordering", "qqpp")
    if ordering != "qqpp":
        raise InputError(f"{path}: field 'ordering' must be 'qqpp', got {ordering!r}")
    return CovarianceMatrix(_matrix_field(obj, "matrix", 2 * n, path)), digest


def state_to_json(gamma: CovarianceMatrix) -> dict:
    return {"n": gamma.n, "ordering": "qqpp", "matrix": gamma.data.tolist()}


def load_transform(path: str) -> PassiveTransform:
    """Read a transform file, cross-checking the stored real form against the unitary."""
    obj, _ = _read_json(path)
    n = _int_field(obj, "n", path)
    u = _matrix_field(obj, "unitary_re", n, path) + 1j * _matrix_field(obj, "unitary_im", n, path)
    k = _matrix_field(obj, "real_form", 2 * n, path)
    try:
        return PassiveTransform(u, k)
    except ValidityError as exc:
        raise InputError(f"{path}: {exc}") from None


def transform_to_json(k: PassiveTransform) -> dict:
    return {
        "n": k.n,
        "unitary_re": k.unitary.real.tolist(),
        "unitary_im": k.unitary.imag.tolist(),
        "real_form": k.real_form.tolist(),
    }


def _write_json(obj, path: Optional[str]):
    text = json.dumps(obj, indent=1) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# report sections
# ---------------------------------------------------------------------------


def _validity(gamma) -> dict:
    v = validate(gamma)
    return {"status": v.status, "min_eigenvalue": v.min_eigenvalue, "asymmetry": v.asymmetry, "violation": v.violation}


def _squeezing(gamma) -> dict:
    rep = core.squeezing_report(gamma)
    return {
        "eigenvalues": rep.eigenvalues.tolist(),
        "lambda1": rep.lambda1,
        "lambda2": rep.lambda2,
        "is_squeezed": rep.is_squeezed,
    }


def _verdict(v: power.EntanglingPowerVerdict) -> dict:
    return {
        "lambda1": v.lambda1,
        "lambda2": v.lambda2,
        "product": v.product,
        "can_entangle": v.can_entangle,
        "lower_bound_bits": v.lower_bound_bits,
        "attainable_two_mode_bits": v.attainable_two_mode_bits,
        "partition": str(v.partition) if v.partition else None,
    }


def _achieved(rep: entanglement.EntanglementReport) -> dict:
    return {
        "partition": str(rep.partition),
        "symplectic_spectrum": rep.spectrum.tolist(),
        "log_negativity_bits": rep.log_negativity,
        "is_nppt": rep.is_nppt,
        "label": rep.verdict_label,
    }


def _plan(plan: power.EntanglerPlan) -> dict:
    return {
        "alpha": plan.alpha,
        "gamma": plan.gamma,
        "beam_splitter_angle": plan.gamma / 2,
        "transmissivity": plan.transmissivity,
        "case": plan.case,
        "nothing_to_gain": plan.nothing_to_gain,
        "predicted_negativity_bits": plan.predicted_negativity_bits,
        "two_mode_real_form": plan.k.real_form.tolist(),
    }


def _fmt(x) -> str:
    if x is None:
        return "-"
    if isinstance(x, bool):
        return "yes" if x else "no"
    if isinstance(x, float):
        return f"{x:.6g}"
    if isinstance(x, list):
        if x and isinstance(x[0], list):
            return "\n" + "\n".join("      " + " ".join(f"{v + 0.0:>12.6g}" for v in row) for row in x)
        return "[" + ", ".join(_fmt(v) for v in x) + "]"
    return str(x)


def _render(report: dict) -> str:
    lines = []
    for key, val in report.items():
        if isinstance(val, dict):
            lines.append(f"{key}:")
            lines.extend(f"  {k}: {_fmt(v)}" for k, v in val.items())
        else:
            lines.append(f"{key}: {_fmt(val)}")
    return "\n".join(lines)


def _emit(report: dict, as_json: bool):
    if as_json:
        sys.stdout.write(json.dumps(report, indent=1) + "\n")
    else:
        sys.stdout.write(_render(report) + "\n")


def _partition(args, n: int):
    if n < 2:
        raise InputError(f"a bipartition needs at least two modes, state has {n} (try 'make ... --ancilla')")
    if args.partition is None:
        return entanglement.ModePartition.halves(n)
    return entanglement.parse_partition(args.partition, n)


def _valid_state(args, report: dict):
    gamma, digest = load_state(args.file)
    report["input_digest"] = digest
    report["validity"] = _validity(gamma)
    if report["validity"]["status"] != "valid":
        v = report["validity"]
        raise ValidityError(f"{args.file}: state is {v['status']} (violation {v['violation']:.6g})", v["violation"])
    return gamma


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_check(args, report: dict) -> int:
    gamma = _valid_state(args, report)
    part = _partition(args, gamma.n)
    report["squeezing"] = _squeezing(gamma)
    v = power.verdict(gamma, part)
    report["verdict"] = _verdict(v)
    return EXIT_OK if v.can_entangle else EXIT_NOT_ENTANGLABLE


def cmd_entangle(args, report: dict) -> int:
    gamma = _valid_state(args, report)
    part = _partition(args, gamma.n)
    report["squeezing"] = _squeezing(gamma)
    v = power.verdict(gamma, part)
    report["verdict"] = _verdict(v)
    result = power.entangle_optimally(gamma, part)
    report["plan"] = _plan(result.plan)
    report["achieved"] = _achieved(result.report)
    if args.out:
        _write_json(transform_to_json(result.transform), args.out)
    if not v.can_entangle:
        print("warning: passive optics cannot entangle this state; emitted the identity", file=sys.stderr)
        return EXIT_NOT_ENTANGLABLE
    return EXIT_OK


def cmd_apply(args, report: dict) -> int:
    gamma = _valid_state(args, report)
    k = load_transform(args.transform)
    if k.n != gamma.n:
        raise InputError(f"transform acts on {k.n} modes, state has {gamma.n}")
    out = apply_passive(gamma, k)
    _write_json(state_to_json(out), args.out)
    return EXIT_OK


def cmd_report(args, report: dict) -> int:
    gamma = _valid_state(args, report)
    part = _partition(args, gamma.n)
    report["achieved"] = _achieved(entanglement.entanglement_report(gamma, part))
    return EXIT_OK


def cmd_oracle(args, report: dict) -> int:
    gamma = _valid_state(args, report)
    part = _partition(args, gamma.n)
    cfg = oracle.SearchConfig(
        samples=args.samples,
        refine_iters=args.refine,
        seed=args.seed,
        partition=part,
        objective=args.objective,
        workers=args.workers,
    )
    report["verdict"] = _verdict(power.verdict(gamma, part))
    check = oracle.verify_criterion(gamma, cfg)
    closed = power.attainable_two_mode(gamma)
    # the closed form is exact only for two modes or the subsystem objective
    comparable = gamma.n == 2 or args.objective == "two_mode_subsystem"
    agrees = (not comparable) or abs(check.oracle_best_bits - closed) <= ORACLE_AGREEMENT
    report["oracle"] = {
        "objective": args.objective,
        "samples": args.samples,
        "refine_iters": args.refine,
        "seed": args.seed,
        "best_negativity_bits": check.oracle_best_bits,
        "closed_form_bits": closed,
        "difference": check.oracle_best_bits - closed,
        "closed_form_exact": comparable,
        "criterion_check": check.message,
        "best_unitary_re": check.search.best_unitary.real.tolist(),
        "best_unitary_im": check.search.best_unitary.imag.tolist(),
    }
    return EXIT_OK if check.passed and agrees else EXIT_DISAGREE


def cmd_make(args, report: dict) -> int:
    params = {}
    kind = args.kind
    if kind == "vacuum":
        params["n"] = args.n or 1
    elif kind == "thermal":
        params["b"] = _need(args.b, "--b", kind)
    elif kind == "squeezed":
        params["r"] = _need(args.r, "--r", kind)
        params["phase"] = args.phase if args.phase else 0.0
    elif kind == "simon":
        for name in "abcd":
            val = getattr(args, name)
            params[name] = _need(val, f"--{name}", kind)[0]
    elif kind == "tms":
        params["r"] = _need(args.r, "--r", kind)[0]
    elif kind == "random":
        params.update(n=args.n or 2, seed=args.seed, max_squeeze=args.max_squeeze, max_thermal=args.max_thermal)
    gamma = core.make_state(kind, **params)
    if args.ancilla:
        gamma = power.add_vacuum_ancilla(gamma)
    _write_json(state_to_json(gamma), args.out)
    return EXIT_OK


def _need(val, flag, kind):
    if val is None:
        raise InputError(f"make {kind} requires {flag}")
    return val


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="passivegauss",
        description="Entangling power of passive optics on Gaussian states.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def analysis(name, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("file", help="covariance matrix JSON file")
        p.add_argument("--partition", help="A:B modes, 1-indexed, e.g. 1,3:2,4 (default: halves)")
        p.add_argument("--json", action="store_true", help="machine-readable output")
        return p

    analysis("check", "can passive optics entangle this state?")
    p = analysis("entangle", "construct the optimal passive transform")
    p.add_argument("--out", help="write the transform JSON here")
    analysis("report", "logarithmic negativity of the state as is")
    p = analysis("oracle", "brute-force search over passive transforms")
    p.add_argument("--samples", type=int, default=5000)
    p.add_argument("--refine", type=int, default=2000, help="local refinement rounds")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--objective", choices=oracle.OBJECTIVES, default="full")
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("apply", help="apply a stored passive transform")
    p.add_argument("file", help="covariance matrix JSON file")
    p.add_argument("transform", help="transform JSON file")
    p.add_argument("--out", help="output state file (default: stdout)")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("make", help="write a standard state")
    p.add_argument("kind", choices=["vacuum", "thermal", "squeezed", "simon", "tms", "random"])
    p.add_argument("--n", type=int, help="mode count (vacuum, random)")
    p.add_argument("--r", type=float, nargs="+", help="squeezing parameter(s)")
    p.add_argument("--phase", type=float, nargs="+", help="squeezing direction(s)")
    p.add_argument("--a", type=float, nargs=1)
    p.add_argument("--b", type=float, nargs="+", help="thermal factor(s); b for simon")
    p.add_argument("--c", type=float, nargs=1)
    p.add_argument("--d", type=float, nargs=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-squeeze", type=float, default=1.0)
    p.add_argument("--max-thermal", type=float, default=2.0)
    p.add_argument("--ancilla", action="store_true", help="append a vacuum mode")
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--json", action="store_true")
    return parser


COMMANDS = {
    "check": cmd_check,
    "entangle": cmd_entangle,
    "apply": cmd_apply,
    "report": cmd_report,
    "oracle": cmd_oracle,
    "make": cmd_make,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    report: dict = {"command": args.command}
    try:
        code = COMMANDS[args.command](args, report)
    except (GaussianError, ValueError) as exc:
        report["error"] = str(exc)
        if args.command not in ("apply", "make"):
            _emit(report, args.json)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if args.command not in ("apply", "make"):
        _emit(report, args.json)
    return code


if __name__ == "__main__":
    sys.exit(main())
