"""Command-line front end writing report.json and curves.csv.

Exit codes: 0 success or ConformallyReeb, 2 NotReeb, 3 Borderline, 1 error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import jsonschema
import numpy as np
from scipy.interpolate import CubicSpline

from . import __version__
from .circle_map import DEFAULT_GRID, TWO_PI, CircleMap
from .criterion import ReebDecision, decide
from .diffeo import phi_inverse, std_pullback_residual, straightening_residual
from .errors import AmbiguousLift, Borderline, CriterionFailed, FlatReebError, ParseError
from .expr import parse_theta
from .forms import (FIBER_AREA, TrigOneForm, angle_form, check_connection_volume_independence,
                    check_gray_segment, check_identity_31, covering_volume, contact_density,
                    volume_z, ZOneForm)
from .open_models import build_example_i, check_example_ii
from .solver import TOLERANCES, ReebCertificate, synthesize_certificate
from .synthesis import DEFAULT_DELTA, DEFAULT_ETA, ScrewData

log = logging.getLogger(__name__)

EXIT_OK, EXIT_ERROR, EXIT_NOT_REEB, EXIT_BORDERLINE = 0, 1, 2, 3
EQUIVARIANT_GRID = 3072
CSV_HEADER = ["z", "theta", "phi", "f", "g", "density"]
IDENTITY31_PAIRS = 50

_NUM = {"type": "number"}
_NUM_OR_NULL = {"type": ["number", "null"]}
REPORT_SCHEMA = {
    "type": "object",
    "required": ["status", "command", "decision", "certificate", "volume", "residuals",
                 "provenance", "error"],
    "additionalProperties": False,
    "properties": {
        "status": {"enum": ["OK", "NOT_REEB", "BORDERLINE", "FAILED"]},
        "command": {"type": "string"},
        "decision": {
            "oneOf": [
                {"type": "null"},
                {
                    "type": "object",
                    "required": ["verdict", "degree", "max_drawdown", "margin", "witness", "reason"],
                    "properties": {
                        "verdict": {"enum": ["ConformallyReeb", "NotReeb", "Borderline"]},
                        "degree": {"type": "integer"},
                        "max_drawdown": _NUM,
                        "margin": _NUM,
                        "reason": {"type": "string"},
                        "witness": {
                            "oneOf": [
                                {"type": "null"},
                                {"type": "object", "required": ["a", "b", "drop"],
                                 "properties": {"a": _NUM, "b": _NUM, "drop": _NUM}},
                            ]
                        },
                    },
                },
            ]
        },
        "certificate": {"type": ["object", "null"]},
        "volume": {
            "oneOf": [
                {"type": "null"},
                {
                    "type": "object",
                    "required": ["vol_torus", "vol_quotient", "n_value", "w"],
                    "properties": {"vol_torus": _NUM, "vol_quotient": _NUM_OR_NULL,
                                   "n_value": _NUM, "w": {"type": "integer"}},
                },
            ]
        },
        "residuals": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "required": ["value", "tol", "kind", "ok"],
                "properties": {"value": _NUM, "tol": _NUM,
                               "kind": {"enum": ["upper", "lower"]}, "ok": {"type": "boolean"}},
            },
        },
        "provenance": {
            "type": "object",
            "required": ["version", "grid", "seed", "tolerances", "perturbations", "input"],
        },
        "error": {
            "oneOf": [
                {"type": "null"},
                {"type": "object", "required": ["type", "code", "message"],
                 "properties": {"type": {"type": "string"}, "code": {"type": "string"},
                                "message": {"type": "string"}}},
            ]
        },
        "details": {"type": "object"},
    },
}

_VALIDATOR = jsonschema.Draft202012Validator(REPORT_SCHEMA)


def validate_report(report: dict) -> None:
    """Raise jsonschema.ValidationError if ``report`` does not match the schema."""
    _VALIDATOR.validate(report)


class ResidualTable(dict):
    """name -> {value, tol, kind, ok}; ``upper`` means value <= tol."""

    def add(self, name: str, value, tol: float, kind: str = "upper") -> None:
        value = float(value)
        ok = value <= tol if kind == "upper" else value >= tol
        self[name] = {"value": value, "tol": float(tol), "kind": kind, "ok": bool(ok)}

    @property
    def ok(self) -> bool:
        return all(r["ok"] for r in self.values())


def decision_dict(dec: ReebDecision) -> dict:
    w = dec.witness
    return {
        "verdict": dec.verdict,
        "degree": int(dec.degree),
        "max_drawdown": float(dec.max_drawdown),
        "margin": float(dec.margin),
        "witness": None if w is None else {"a": w.a, "b": w.b, "drop": w.drop},
        "reason": dec.reason,
    }


def certificate_summary(cert: ReebCertificate) -> dict:
    out = {
        "winding": int(cert.winding),
        "n_value": float(cert.n_value),
        "f_min": float(np.min(cert.f)),
        "f_max": float(np.max(cert.f)),
        "g_min": float(np.min(cert.g)),
        "g_max": float(np.max(cert.g)),
    }
    for key, val in cert.meta.items():
        if isinstance(val, (bool, int, float, str)) or val is None:
            out[key] = val
    return out


def certificate_residuals(cert: ReebCertificate, table: ResidualTable) -> None:
    r = cert.residuals
    for key, tol in TOLERANCES.items():
        table.add(key, r[key], tol)
    table.add("min_contact_density", r["min_contact_density"], 0.0, "lower")
    table.add("min_slope", r["min_slope"], cert.phi.eta / 2, "lower")
    table.add("tube_distance", r["tube_distance"], np.pi / 2 - cert.phi.delta / 2)
    table.add("ode_residual", r["ode_residual"], 1e-8)
    if "seam_residual" in r:
        table.add("seam_residual", r["seam_residual"], 1e-9)
        table.add("seam_c1", r["seam_c1"], 1e-6)


def write_curves(path: Path, theta: CircleMap | None, cert: ReebCertificate | None = None) -> None:
    with path.open("w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(CSV_HEADER)
        if theta is None:
            return
        cols = [theta.z, theta.samples]
        if cert is not None:
            dens = contact_density(cert.contact_form())
            cols += [cert.phi.samples, cert.f, cert.g, np.append(dens, dens[0])]
        for row in zip(*cols):
            vals = ["%.17g" % v for v in row]
            out.writerow(vals + [""] * (len(CSV_HEADER) - len(vals)))


def load_theta_csv(path: str | Path, n: int) -> CircleMap:
    """Read columns z, theta (z strictly increasing in [0, 2*pi)) and resample to n cells."""
    data = np.genfromtxt(path, delimiter=",", names=True)
    try:
        z, th = np.asarray(data["z"], dtype=float), np.asarray(data["theta"], dtype=float)
    except (ValueError, KeyError) as exc:
        raise ParseError(f"{path}: need columns z and theta") from exc
    if z.ndim != 1 or len(z) < 4 or np.any(np.diff(z) <= 0) or z[0] < 0 or z[-1] >= TWO_PI:
        raise ParseError(f"{path}: z must be strictly increasing in [0, 2*pi)")
    closed = lift_samples_open(z, th)
    d = round((closed[-1] - closed[0]) / TWO_PI)
    zz = np.append(z, z[0] + TWO_PI)
    if len(z) == n and np.allclose(z, TWO_PI * np.arange(n) / n, atol=1e-12, rtol=0):
        return CircleMap(closed)
    periodic = closed - d * zz
    periodic[-1] = periodic[0]
    spline = CubicSpline(zz, periodic, bc_type="periodic")
    grid = TWO_PI * np.arange(n + 1) / n
    vals = spline(grid % TWO_PI) + d * grid
    vals[-1] = vals[0] + TWO_PI * d
    return CircleMap(vals)


def lift_samples_open(z: np.ndarray, th: np.ndarray) -> np.ndarray:
    """Unwrap theta at the given nodes and close the loop back to z[0] + 2*pi."""
    steps = np.diff(np.append(th, th[0]))
    wrapped = steps - TWO_PI * np.round(steps / TWO_PI)
    bad = np.flatnonzero(np.abs(wrapped) >= np.pi / 2)
    if bad.size:
        raise AmbiguousLift(f"theta jumps by {steps[bad[0]]!r} after z = {z[bad[0]]!r}")
    return th[0] + np.concatenate([[0.0], np.cumsum(wrapped)])


def _theta_from_args(args, provenance: dict) -> CircleMap:
    n = args.grid
    if args.theta_csv:
        provenance["input"] = {"csv": str(args.theta_csv)}
        return load_theta_csv(args.theta_csv, n)
    if args.theta is None:
        raise ParseError("one of --theta or --theta-csv is required")
    provenance["input"] = {"expr": args.theta}
    expr = parse_theta(args.theta)
    return expr.sample(n)


def _volume_block(theta: CircleMap, order: int | None = None, rot: float | None = None,
                  table: ResidualTable | None = None) -> dict:
    w = int(theta.degree)
    if order:
        vol_t, vol_q = covering_volume(theta, ScrewData.standard(order, rot))
        if table is not None:
            table.add("covering", abs(vol_q * order - vol_t), 1e-10)
    else:
        vol_t, vol_q = volume_z(angle_form(theta)), None
    if table is not None:
        table.add("volume_identity", abs(vol_t - TWO_PI * w * FIBER_AREA), 1e-8)
    return {"vol_torus": vol_t, "vol_quotient": vol_q, "n_value": TWO_PI * w, "w": w}


def _decide_or_exit(theta: CircleMap, report: dict, tol: float) -> ReebDecision:
    dec = decide(theta, tol)
    report["decision"] = decision_dict(dec)
    return dec


def cmd_check(args, report, theta):
    dec = _decide_or_exit(theta, report, args.tol)
    write_curves(args.out / "curves.csv", theta)
    return EXIT_OK if dec.accepted else EXIT_NOT_REEB


def _synthesize(args, report, theta, table, screw=None) -> ReebCertificate | None:
    dec = _decide_or_exit(theta, report, args.tol)
    if not dec.accepted:
        write_curves(args.out / "curves.csv", theta)
        return None
    cert = synthesize_certificate(theta, args.delta, args.eta, screw=screw, decision_tol=args.tol)
    report["certificate"] = certificate_summary(cert)
    certificate_residuals(cert, table)
    phi = cert.phi.samples[:-1]
    a0 = ZOneForm.periodic(np.sin(phi), np.cos(phi), 0.0)
    table.add("gray_min_density", check_gray_segment(a0, cert.contact_form()), 0.0, "lower")
    report["provenance"]["perturbations"] = ["10*flat_tol*sin(z + 1)"] if cert.meta["perturbed"] else []
    write_curves(args.out / "curves.csv", theta, cert)
    return cert


def cmd_synthesize(args, report, theta):
    table = report["residuals"]
    cert = _synthesize(args, report, theta, table)
    if cert is None:
        return EXIT_NOT_REEB
    report["volume"] = _volume_block(theta, table=table)
    return EXIT_OK


def cmd_volume(args, report, theta):
    table = report["residuals"]
    report["volume"] = _volume_block(theta, args.order, args.rot, table)
    table.add("connection_independence", check_connection_volume_independence(theta), 1e-10)
    write_curves(args.out / "curves.csv", theta)
    return EXIT_OK


def cmd_straighten(args, report, theta):
    table = report["residuals"]
    cert = _synthesize(args, report, theta, table)
    if cert is None:
        return EXIT_NOT_REEB
    w = cert.winding
    for label, n in (("std_pullback_w", w), ("std_pullback_n_value", cert.n_value)):
        table.add(label, std_pullback_residual(n, 1000, args.seed), 1e-12)
    table.add("straightening", straightening_residual(cert, 1000, args.seed), 1e-6)
    z = theta.z
    table.add("phi_inverse_roundtrip",
              np.max(np.abs(phi_inverse(cert.phi, cert.phi.map.evaluate(z)) - z)), 1e-9)
    return EXIT_OK


def cmd_equivariant(args, report, theta):
    if not args.order:
        raise FlatReebError("equivariant needs --order")
    table = report["residuals"]
    screw = ScrewData.standard(args.order, args.rot)
    cert = _synthesize(args, report, theta, table, screw)
    if cert is None:
        return EXIT_NOT_REEB
    report["volume"] = _volume_block(theta, args.order, args.rot, table)
    return EXIT_OK


def cmd_examples(args, report, theta):
    table = report["residuals"]
    eps = 0.1
    _, rep_i = build_example_i(eps=eps)
    rep_ii = check_example_ii()
    table.add("example_i_min_alpha_X", rep_i["min_alpha_X"], eps - 1e-8, "lower")
    table.add("example_i_iX_dalpha", rep_i["sup_iX_dalpha"], 1e-10)
    table.add("example_i_min_factor", rep_i["min_factor"], 0.0, "lower")
    table.add("example_i_nondegeneracy", rep_i["min_nondegeneracy"], 0.0, "lower")
    table.add("example_i_proportionality", rep_i["proportionality_residual"], 1e-12)
    table.add("example_ii_min_inner", rep_ii["min_inner_XY"], 0.70711, "lower")
    table.add("example_ii_min_phi_prime", rep_ii["min_phi_prime"], 0.0, "lower")
    report["details"] = {"example_i": rep_i, "example_ii": rep_ii}
    write_curves(args.out / "curves.csv", None)
    return EXIT_OK


def cmd_identity31(args, report, theta):
    rng = np.random.default_rng(args.seed)
    worst = np.zeros(3)
    for _ in range(IDENTITY31_PAIRS):
        res = check_identity_31(TrigOneForm.random(rng), TrigOneForm.random(rng))
        worst = np.maximum(worst, res)
    table = report["residuals"]
    for name, val in zip(("identity31_pointwise", "identity31_integral",
                          "identity31_exact_term"), worst):
        table.add(name, val, 1e-10)
    report["details"] = {"pairs": IDENTITY31_PAIRS}
    write_curves(args.out / "curves.csv", None)
    return EXIT_OK


COMMANDS = {
    "check": (cmd_check, True),
    "synthesize": (cmd_synthesize, True),
    "volume": (cmd_volume, True),
    "straighten": (cmd_straighten, True),
    "equivariant": (cmd_equivariant, True),
    "examples": (cmd_examples, False),
    "identity31": (cmd_identity31, False),
}


class UsageError(FlatReebError):
    code = "usage"


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2, which would read as NotReeb
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--theta", help='lift expression, e.g. "z + 1.5*sin(z)"')
    src.add_argument("--theta-csv", type=Path, help="CSV with columns z,theta")
    common.add_argument("--grid", type=int, default=None, help="grid cells N")
    common.add_argument("--delta", type=float, default=DEFAULT_DELTA)
    common.add_argument("--eta", type=float, default=DEFAULT_ETA)
    common.add_argument("--tol", type=float, default=1e-7, help="borderline band around pi")
    common.add_argument("--out", type=Path, default=Path("."))
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--order", type=int, default=None, help="group order m")
    common.add_argument("--rot", type=float, default=0.0, help="screw rotation angle")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="flatreeb", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def _empty_report(command: str, args) -> dict:
    return {
        "status": "OK",
        "command": command,
        "decision": None,
        "certificate": None,
        "volume": None,
        "residuals": ResidualTable(),
        "provenance": {
            "version": __version__,
            "grid": args.grid,
            "seed": args.seed,
            "tolerances": {"decision": args.tol, "delta": args.delta, "eta": args.eta,
                           **TOLERANCES},
            "perturbations": [],
            "input": None,
        },
        "error": None,
    }


def _finish(report: dict, code: int) -> int:
    if report["error"] is not None:
        report["status"] = "FAILED"
        return EXIT_ERROR
    if not report["residuals"].ok:
        report["status"] = "FAILED"
        failed = [k for k, r in report["residuals"].items() if not r["ok"]]
        report["error"] = {"type": "ResidualFailure", "code": "RESIDUAL",
                           "message": "residuals out of tolerance: " + ", ".join(failed)}
        return EXIT_ERROR
    report["status"] = {EXIT_OK: "OK", EXIT_NOT_REEB: "NOT_REEB",
                        EXIT_BORDERLINE: "BORDERLINE"}[code]
    return code


def _usage_failure(argv: list[str] | None, exc: UsageError) -> int:
    """Serialize a command-line error; --out is recovered leniently if present."""
    argv = list(sys.argv[1:] if argv is None else argv)
    out = Path(".")
    for i, tok in enumerate(argv):
        if tok == "--out" and i + 1 < len(argv):
            out = Path(argv[i + 1])
        elif tok.startswith("--out="):
            out = Path(tok.split("=", 1)[1])
    ns = argparse.Namespace(grid=None, seed=0, tol=1e-7, delta=DEFAULT_DELTA, eta=DEFAULT_ETA)
    command = argv[0] if argv and argv[0] in COMMANDS else ""
    report = _empty_report(command, ns)
    report["error"] = {"type": type(exc).__name__, "code": exc.code, "message": str(exc)}
    code = _finish(report, EXIT_ERROR)
    print(str(exc), file=sys.stderr)
    out.mkdir(parents=True, exist_ok=True)
    _write_report(out, report)
    return code


def _write_report(out: Path, report: dict) -> None:
    report["residuals"] = dict(report["residuals"])
    validate_report(report)
    (out / "report.json").write_text(json.dumps(report, indent=2, allow_nan=False) + "\n")


def run(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        return _usage_failure(argv, exc)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    if args.grid is None:
        args.grid = EQUIVARIANT_GRID if args.command == "equivariant" else DEFAULT_GRID
    args.out.mkdir(parents=True, exist_ok=True)
    report = _empty_report(args.command, args)
    func, needs_theta = COMMANDS[args.command]
    code = EXIT_ERROR
    try:
        theta = _theta_from_args(args, report["provenance"]) if needs_theta else None
        code = func(args, report, theta)
    except Borderline as exc:
        report["decision"] = decision_dict(exc.decision)
        code = EXIT_BORDERLINE
    except CriterionFailed as exc:
        report["decision"] = decision_dict(exc.decision)
        code = EXIT_NOT_REEB
    except (FlatReebError, ValueError, OSError) as exc:
        log.debug("command failed", exc_info=True)
        report["error"] = {"type": type(exc).__name__,
                           "code": getattr(exc, "code", "ERROR"), "message": str(exc)}
    code = _finish(report, code)
    if not (args.out / "curves.csv").exists():
        write_curves(args.out / "curves.csv", None)
    _write_report(args.out, report)
    return code


def main() -> None:
    sys.exit(run())
