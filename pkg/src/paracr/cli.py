"""Command line front end.

Exit codes: 0 success (or admissible system), 2 inadmissible system or failed
suite, 1 usage or parse error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .eds import (
    classify_residuals,
    connection_curvature,
    flat_specialize,
    load_connection,
    load_system,
    variants,
    verify_fixture,
)
from .identity import IdentityConfig
from .invariants import InvariantReport, classify, report_from_json
from .jet import PdeSystem
from .monge import conic_fit, read_samples
from .parser import ParseError, parse
from .scenarios import DegenerateFunctionError, ExampleReport, flat_model, run_example_suite

REPORT_SCHEMA = "paracr-report/1"
EXIT_OK, EXIT_ERROR, EXIT_INADMISSIBLE = 0, 1, 2


@dataclass(frozen=True)
class Report:
    command: str
    G: str | None
    H: str | None
    seed: int
    samples: int
    invariants: InvariantReport | None = None
    example: ExampleReport | None = None

    @property
    def admissibility(self):
        if self.invariants is not None:
            return self.invariants.admissibility
        return self.example.admissibility if self.example else None

    def to_json(self) -> dict:
        return {
            "schema": REPORT_SCHEMA,
            "tool_version": __version__,
            "command": self.command,
            "input": {"G": self.G, "H": self.H},
            "seed": self.seed,
            "samples": self.samples,
            "invariants": None if self.invariants is None else self.invariants.to_json(),
            "example": None if self.example is None else self.example.to_json(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "Report":
        if data.get("schema") != REPORT_SCHEMA:
            raise ValueError(f"unsupported report schema {data.get('schema')!r}")
        return cls(
            command=data["command"],
            G=data["input"]["G"],
            H=data["input"]["H"],
            seed=data["seed"],
            samples=data["samples"],
            invariants=None if data["invariants"] is None else report_from_json(data["invariants"]),
            example=None if data["example"] is None else ExampleReport.from_json(data["example"]),
        )


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _default_seed() -> int:
    raw = os.environ.get("PARACR_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise SystemExit(f"PARACR_SEED must be an integer, got {raw!r}") from None


def _status(v: dict) -> str:
    return v["status"]


def render_text(report: Report) -> str:
    data = report.to_json()
    lines = [f"paracr {data['tool_version']}  {data['command']}  seed={data['seed']} samples={data['samples']}"]
    if report.G is not None:
        lines.append(f"G = {report.G}")
        lines.append(f"H = {report.H}")
    inv = data["invariants"]
    if inv:
        adm = inv["admissibility"]
        lines.append(
            "admissibility: G_r {} | G_pp {} | Delta H - D^3 G {} | in class: {}".format(
                _status(adm["levi_degenerate"]), _status(adm["two_nondegenerate"]), _status(adm["integrable"]), adm["in_class"]
            )
        )
        for key in ("W", "M", "N", "Z"):
            lines.append(f"{key} = {inv[key]['expr']}   [{_status(inv[key]['verdict'])}]")
        lines.append(f"flat: {inv['flags']['flat']}   contact projective pair: {inv['flags']['contact_projective_pair']}")
    ex = data["example"]
    if ex:
        lines.append(f"f = {ex['f']}")
        for key in ("N_zero", "chern_zero", "wunschmann", "wunschmann_vs_monge", "ode_solution", "tangent",
                    "contact_tangency", "geodesic_residual"):
            lines.append(f"  {key}: {_status(ex[key])}")
        lines.append("  pullback (displayed coordinates): " + ", ".join(_status(v) for v in ex["pullback_intermediate"]))
        lines.append("  pullback (after rescaling):       " + ", ".join(_status(v) for v in ex["pullback_match"]))
        lines.append(f"  rescaling block shape: {ex['trump_shape']}")
        lines.append(f"  passed: {ex['passed']}")
    return "\n".join(lines) + "\n"


def _emit(args, payload, text: str | None = None):
    if args.format == "json":
        sys.stdout.write(dumps(payload))
    else:
        sys.stdout.write(text if text is not None else dumps(payload))


def _cfg(args) -> IdentityConfig:
    return IdentityConfig(samples=args.samples, seed=args.seed)


def cmd_check(args) -> int:
    try:
        system = PdeSystem(parse(args.G), parse(args.H))
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    inv = classify(system, _cfg(args), require_admissible=False)
    report = Report("check", args.G, args.H, args.seed, args.samples, invariants=inv)
    _emit(args, report.to_json(), render_text(report))
    return EXIT_OK if inv.admissibility.in_class else EXIT_INADMISSIBLE


def cmd_suite(args) -> int:
    cfg = _cfg(args)
    if args.name == "flat":
        system = flat_model()
        inv = classify(system, cfg, require_admissible=False)
        report = Report("suite flat", "p^2/4", "0", args.seed, args.samples, invariants=inv)
        ok = inv.admissibility.in_class and inv.flat
    else:
        if args.f is None:
            print("suite example needs --f", file=sys.stderr)
            return EXIT_ERROR
        try:
            ex = run_example_suite(args.f, cfg)
        except ParseError as exc:
            print(f"parse error: {exc}", file=sys.stderr)
            return EXIT_ERROR
        except DegenerateFunctionError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_ERROR
        report = Report("suite example", None, None, args.seed, args.samples, example=ex)
        ok = ex.passed
    _emit(args, report.to_json(), render_text(report))
    return EXIT_OK if ok else EXIT_INADMISSIBLE


def cmd_monge_fit(args) -> int:
    try:
        samples = read_samples(Path(args.file).read_text())
        fit = conic_fit(samples)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    payload = {"schema": REPORT_SCHEMA, "tool_version": __version__, "command": "monge-fit", "fit": fit.to_json()}
    coeffs = [str(c) if fit.exact else f"{c:.6g}" for c in fit.coeffs]
    text = f"conic coefficients [G^2, 2pG, p^2, G, p, 1]: {', '.join(coeffs)}\nresidual: {fit.residual}  exact: {fit.exact}\n"
    _emit(args, payload, text)
    return EXIT_OK


def _default_battery() -> dict:
    """Flatness checks: sysendu and ode10 with every coefficient zeroed, and the connection curvature."""
    out = {}
    u = load_system("sysendu")
    flat_u = flat_specialize(u, u.coefficients)
    out["sysendu|flat d^2"] = classify_residuals(flat_u.d_squared_residuals())
    o = load_system("ode10")
    flat_o = flat_specialize(o, o.coefficients)
    out["ode10|flat d^2"] = classify_residuals(flat_o.d_squared_residuals())
    K = connection_curvature(load_connection(system=flat_o))
    out["conn_sp|flat curvature"] = {
        f"K[{i + 1},{j + 1}]": K[i][j].classify() for i in range(len(K)) for j in range(len(K))
    }
    return out


def cmd_eds_verify(args) -> int:
    if args.fixture is None:
        battery = _default_battery()
        ok = all(c == "zero" for group in battery.values() for c in group.values())
        payload = {"schema": REPORT_SCHEMA, "tool_version": __version__, "command": "eds-verify", "checks": battery, "passed": ok}
        lines = []
        for name, group in battery.items():
            bad = [k for k, c in group.items() if c != "zero"]
            lines.append(f"{name}: {'all zero' if not bad else 'nonzero at ' + ', '.join(bad)}")
        _emit(args, payload, "\n".join(lines) + "\n")
        return EXIT_OK if ok else EXIT_INADMISSIBLE
    try:
        names = [None] + variants(args.fixture) if args.variant == "all" else [args.variant]
        results = [verify_fixture(args.fixture, v, args.zero or ()) for v in names]
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    payload = {"schema": REPORT_SCHEMA, "tool_version": __version__, "command": "eds-verify", "results": results}
    lines = []
    for res in results:
        lines.append(f"{res['system']}  (zeroed: {', '.join(res['zeroed']) or 'none'})")
        for key, r in res["residuals"].items():
            lines.append(f"  d^2 {key}: {r['class']}")
    _emit(args, payload, "\n".join(lines) + "\n")
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    """Single-dash tokens other than ``-h`` are expressions such as ``-r^2/p``, never options."""

    def _parse_optional(self, arg_string):
        if arg_string.startswith("-") and not arg_string.startswith("--") and arg_string not in ("-", "-h"):
            return None
        return super()._parse_optional(arg_string)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="identity-testing seed (default: $PARACR_SEED or 0)")
    common.add_argument("--samples", type=int, default=32, help="random points per identity test")
    common.add_argument("--format", choices=("json", "text"), default="json")

    ap = _Parser(prog="paracr", description="Invariants of para-CR PDE pairs z_y = G, z_xxx = H.")
    ap.add_argument("--version", action="version", version=f"paracr {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="admissibility and invariants of (G, H)")
    p.add_argument("G")
    p.add_argument("H")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("suite", parents=[common], help="run the flat model or the z_y = f(z_x) example")
    p.add_argument("name", choices=("flat", "example"))
    p.add_argument("--f", default=None, help="profile f(p): an expression in p or an opaque name")
    p.set_defaults(func=cmd_suite)

    p = sub.add_parser("monge-fit", parents=[common], help="fit a conic to p,G samples")
    p.add_argument("file")
    p.set_defaults(func=cmd_monge_fit)

    p = sub.add_parser("eds-verify", parents=[common], help="d^2 residuals of structure-equation fixtures")
    p.add_argument("--fixture", default=None, help="fixture name or path (default: built-in flatness battery)")
    p.add_argument("--variant", default=None, help="fixture variant, or 'all'")
    p.add_argument("--zero", nargs="*", default=None, metavar="NAME", help="coefficients to set to zero")
    p.set_defaults(func=cmd_eds_verify)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code not in (0, None) else EXIT_OK
    if args.seed is None:
        args.seed = _default_seed()
    if args.samples < 1:
        print("--samples must be positive", file=sys.stderr)
        return EXIT_ERROR
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
