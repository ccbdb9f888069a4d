"""Command-line front end: ``qdist <command> [options]``.

Reports go to stdout as JSON (default), CSV or aligned text.  Errors go to
stderr as JSON ``{"schema": 1, "error": {"kind", "module", "message"}}`` with
exit code 2 for invalid input and 3 for numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Any, Callable, Optional, Sequence

import numpy as np

from . import audit as audit_mod
from . import fisher_rao as fr
from . import geodesy as geo
from . import hilbert_sphere as hs
from . import ho_manifold as hm
from . import qinfo as qi
from .constants import Constants
from .dist_core import SCHEMES, QuadratureSpec, gaussian_family, ho_eigenstate_family
from .errors import QDistError, ValidationError

SCHEMA_VERSION = 1


class UsageError(ValidationError):
    kind = "UsageError"


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def _float_token(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"+inf"' if x > 0 else '"-inf"'
    s = format(x, ".17g")
    return s if any(ch in s for ch in ".en") else s + ".0"


def _plain(obj):
    """Convert numpy scalars and arrays to Python containers."""
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


def dumps(obj) -> str:
    """JSON text with floats at 17 significant digits and non-finite floats as strings."""
    obj = _plain(obj)
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return json.dumps(obj)
    if isinstance(obj, float):
        return _float_token(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(k)}: {dumps(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, list):
        return "[" + ", ".join(dumps(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _cell(v) -> str:
    v = _plain(v)
    if isinstance(v, float):
        return _float_token(v).strip('"')
    if isinstance(v, (list, dict)):
        return dumps(v)
    return "" if v is None else str(v)


def _table(report: dict) -> tuple[list[str], list[list[str]]]:
    rows = report.get("rows")
    if rows:
        header = list(rows[0])
        return header, [[_cell(r.get(h)) for h in header] for r in rows]
    return ["key", "value"], [[k, _cell(v)] for k, v in report.items()]


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return dumps(report) + "\n"
    header, body = _table(report)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(body)
        return buf.getvalue()
    widths = [max(len(h), *(len(r[i]) for r in body)) if body else len(h) for i, h in enumerate(header)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(c.ljust(w) for c, w in zip(r, widths)) for r in body]
    if "rows" in report:
        lines += [f"{k}: {_cell(v)}" for k, v in report.items() if k != "rows"]
    return "\n".join(line.rstrip() for line in lines) + "\n"


def _complex_matrix(m) -> Optional[dict]:
    if m is None:
        return None
    m = np.asarray(m, dtype=complex)
    return {"re": m.real, "im": m.imag}


# ---------------------------------------------------------------------------
# Argument types
# ---------------------------------------------------------------------------


def _float_list(n: Optional[int] = None) -> Callable[[str], list[float]]:
    def parse(text: str) -> list[float]:
        try:
            vals = [float(t) for t in text.split(",")]
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
        if n is not None and len(vals) != n:
            raise argparse.ArgumentTypeError(f"expected {n} comma-separated numbers, got {text!r}")
        if not all(math.isfinite(v) for v in vals):
            raise argparse.ArgumentTypeError("values must be finite")
        return vals

    return parse


def _positive(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"expected a positive finite number, got {text!r}")
    return v


def _finite(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError("expected a finite number")
    return v


def _nonneg_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError("expected a non-negative integer")
    return v


def _family(text: str) -> tuple[str, int]:
    if text == "gauss":
        return "gauss", 0
    if text.startswith("ho:"):
        return "ho", _nonneg_int(text[3:])
    raise argparse.ArgumentTypeError("family must be 'gauss' or 'ho:<n>'")


def _mode(text: str) -> str:
    try:
        return hs._norm_mode(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _load_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from exc


def load_state(path: str) -> hs.AmplitudeState:
    """Amplitude state file ``{"labels": [...], "re": [...], "im": [...]}``."""
    data = _load_json(path)
    try:
        re = np.asarray(data["re"], dtype=float)
        im = np.asarray(data.get("im", np.zeros_like(re)), dtype=float)
        labels = data.get("labels", list(range(re.size)))
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise UsageError(f"malformed state file {path}: {exc}") from exc
    return hs.AmplitudeState(re + 1j * im, labels)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _spec(args, default: Optional[QuadratureSpec] = None) -> Optional[QuadratureSpec]:
    if args.quad_scheme is None and args.quad_nodes is None and args.abs_tol is None and args.rel_tol is None:
        return default
    base = default or QuadratureSpec(scheme=args.quad_scheme or "adaptive-interval")
    fields = dict(scheme=args.quad_scheme or base.scheme, abs_tol=args.abs_tol or base.abs_tol,
                  rel_tol=args.rel_tol or base.rel_tol, node_count=args.quad_nodes or base.node_count,
                  max_subdivisions=base.max_subdivisions)
    try:
        return QuadratureSpec(**fields)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def cmd_gauss_distance(args, constants) -> dict:
    t1, t2 = args.theta1, args.theta2
    closed = fr.gauss_distance_asinh(t1, t2)
    shot = geo.shoot_distance(geo.gaussian_fr_field(), t1, t2)
    out = {"theta1": t1, "theta2": t2, "closed_form": closed, "shooting": shot.length,
           "ratio": closed / shot.length if shot.length > 0 else float("nan"),
           "exact": fr.gauss_distance_exact(t1, t2), "endpoint_miss": shot.miss, "iterations": shot.iterations}
    if args.audit:
        rel = abs(closed - shot.length) / max(shot.length, 1e-300)
        out["relative_difference"] = rel
        out["status"] = audit_mod.PASS if rel <= 1e-6 else audit_mod.NOTE
    return out


def cmd_fr_metric(args, constants) -> dict:
    name, n = args.family
    family = gaussian_family() if name == "gauss" else ho_eigenstate_family(n, constants)
    g = fr.fr_metric(family, args.at, args.form, args.k, _spec(args))
    out = {"family": family.name, "param_names": list(family.param_names), "point": g.point,
           "form": args.form, "k": args.k, "components": g.components,
           "eigenvalues": g.eigenvalues, "signature": list(g.signature), "error": g.error}
    if name == "ho":
        m, w = args.at
        out["closed_form"] = hm.ho_metric_closed(n, m, w).components
        out["rank_one_closed_form"] = hm.eigenstate_fr_metric_closed(n, m, w).components
    return out


def cmd_ho_manifold(args, constants) -> dict:
    rows = [{"n": r.n, "a": r.a, "eta": r.eta, "signature_class": r.signature_class,
             "a_exact": str(r.a_exact), "eta_exact": str(r.eta_exact)}
            for r in hm.signature_report(args.n_max)]
    return {"reference_scales": list(hm.default_scales(constants)), "rows": rows}


def cmd_sphere_metric(args, constants) -> dict:
    state = load_state(args.state)
    if args.system == "free":
        basis = hs.FreeParticleCircle(args.mass, args.t, constants)
    else:
        basis = hs.HarmonicOscillator(args.mass, args.omega, args.t, constants)
    metric = hs.sphere_metric(basis, state, _spec(args), args.mode)
    out = {"system": basis.system, "time": args.t, "mode": metric.mode, "labels": state.labels,
           "g": _complex_matrix(metric.g), "g_mixed": _complex_matrix(metric.g_mixed), "error": metric.error}
    if args.truncation_check:
        out["truncation_change"] = hs.truncation_check(basis, state, args.truncation_check, _spec(args))
    return out


def cmd_rel_entropy(args, constants) -> dict:
    rho = qi.DensityMatrix.from_json(_load_json(args.rho))
    sigma = qi.DensityMatrix.from_json(_load_json(args.sigma))
    value = qi.relative_entropy(rho, sigma)
    out = {"s_rel": value, "finite": math.isfinite(value),
           "entropy_rho": qi.von_neumann_entropy(rho), "entropy_sigma": qi.von_neumann_entropy(sigma)}
    if math.isfinite(value):
        d = qi.relative_entropy_decomposed(rho, sigma)
        out["cross_term"] = d.cross_term
    return out


def cmd_thermal(args, constants) -> dict:
    H = qi.matrix_from_json(_load_json(args.H))
    model = qi.ThermalModel.from_hamiltonian(H, args.beta)
    out = {"beta": model.beta, "log_partition": model.log_partition, "energy": model.energy,
           "entropy": model.entropy, "free_energy": model.free_energy}
    if args.b is not None:
        rho_model = model.with_beta(args.b)
        out["b"] = args.b
        out["s_rel_same_hamiltonian"] = qi.two_thermal_relative_entropy(model, args.b)
        out["s_rel_mixed_form"] = qi.thermal_pair_relative_entropy(rho_model, model)
        out["s_rel_shortcut"] = qi.thermal_relative_entropy(qi.gibbs_state(rho_model), model)
        out["s_rel_direct"] = qi.relative_entropy(qi.gibbs_state(rho_model), qi.gibbs_state(model))
    if args.rho is not None:
        rho = qi.DensityMatrix.from_json(_load_json(args.rho))
        out["s_rel_rho_shortcut"] = qi.thermal_relative_entropy(rho, model)
        out["s_rel_rho_direct"] = qi.relative_entropy(rho, qi.gibbs_state(model))
    return out


def cmd_scalar_field(args, constants) -> dict:
    f = qi.FreeScalarField(args.V, constants)
    return {"V": args.V, "b": args.b, "beta": args.beta,
            "s_rel": f.relative_entropy(args.b, args.beta),
            "s_rel_from_states": f.relative_entropy_from_states(args.b, args.beta),
            "entropy_b": f.entropy(args.b), "entropy_beta": f.entropy(args.beta),
            "energy_b": f.energy(args.b), "energy_beta": f.energy(args.beta),
            "metric_coefficient": f.metric_coefficient}


def cmd_scalar_field_distance(args, constants) -> dict:
    f = qi.FreeScalarField(args.V, constants)
    numeric, err = f.distance_numeric(args.e1, args.e2)
    return {"V": args.V, "e1": args.e1, "e2": args.e2, "closed_form": f.distance(args.e1, args.e2),
            "numeric": numeric, "numeric_error": err}


def cmd_audit(args, constants) -> dict:
    rows = audit_mod.run_audit(args.seed)
    return {"rows": [r.as_dict() for r in rows], "summary": audit_mod.summary(rows),
            "self_consistency_failures": sum(r.kind == audit_mod.SELF and r.status != audit_mod.PASS for r in rows)}


def cmd_schema(args, constants) -> dict:
    return {"report_schema": REPORT_SCHEMA}


COMMANDS: dict[str, Callable] = {
    "gauss-distance": cmd_gauss_distance,
    "fr-metric": cmd_fr_metric,
    "ho-manifold": cmd_ho_manifold,
    "sphere-metric": cmd_sphere_metric,
    "rel-entropy": cmd_rel_entropy,
    "thermal": cmd_thermal,
    "scalar-field": cmd_scalar_field,
    "scalar-field-distance": cmd_scalar_field_distance,
    "audit": cmd_audit,
    "schema": cmd_schema,
}


# ---------------------------------------------------------------------------
# Schema
# ---------------------------------------------------------------------------

_number = {"oneOf": [{"type": "number"}, {"enum": ["+inf", "-inf", "nan"]}]}
_matrix = {"type": "array", "items": {"type": "array", "items": _number}}
_cmatrix = {"type": "object", "required": ["re", "im"], "properties": {"re": _matrix, "im": _matrix}}

_REQUIRED = {
    "gauss-distance": {"closed_form": _number, "shooting": _number, "ratio": _number, "exact": _number},
    "fr-metric": {"components": _matrix, "signature": {"type": "array", "items": {"type": "integer"}}},
    "ho-manifold": {"rows": {"type": "array", "items": {
        "type": "object", "required": ["n", "a", "eta", "signature_class"],
        "properties": {"n": {"type": "integer"}, "a": _number, "eta": _number,
                       "signature_class": {"enum": ["riemannian", "lorentzian", "negative-definite",
                                                    "degenerate"]}}}}},
    "sphere-metric": {"g": _cmatrix, "g_mixed": {"oneOf": [_cmatrix, {"type": "null"}]}},
    "rel-entropy": {"s_rel": _number, "finite": {"type": "boolean"}},
    "thermal": {"log_partition": _number, "energy": _number, "entropy": _number, "free_energy": _number},
    "scalar-field": {"s_rel": _number},
    "scalar-field-distance": {"closed_form": _number, "numeric": _number},
    "audit": {"rows": {"type": "array", "items": {
        "type": "object", "required": ["check", "kind", "value", "oracle", "status"],
        "properties": {"value": _number, "oracle": _number,
                       "status": {"enum": ["PASS", "NOTE", "DISCREPANCY"]},
                       "kind": {"enum": [audit_mod.CLOSED_FORM, audit_mod.SELF]}}}},
        "summary": {"type": "object"}},
    "schema": {"report_schema": {"type": "object"}},
}

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "qdist report",
    "type": "object",
    "required": ["schema", "command", "constants"],
    "properties": {
        "schema": {"const": SCHEMA_VERSION},
        "command": {"enum": sorted(COMMANDS)},
        "constants": {"type": "object", "required": ["hbar", "c", "k_B", "G"]},
    },
    "allOf": [
        {"if": {"properties": {"command": {"const": cmd}}},
         "then": {"required": sorted(props), "properties": props}}
        for cmd, props in _REQUIRED.items()
    ],
}

ERROR_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["schema", "error"],
    "properties": {
        "schema": {"const": SCHEMA_VERSION},
        "error": {"type": "object", "required": ["kind", "module", "message"],
                  "properties": {"kind": {"type": "string"}, "module": {"type": "string"},
                                 "message": {"type": "string"}}},
    },
}


# ---------------------------------------------------------------------------
# Parser and entry point
# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("output and numerics")
    g.add_argument("--format", choices=("json", "csv", "pretty"), default="json")
    g.add_argument("--constants", metavar="FILE",
                   help="JSON file overriding hbar, c, k_B, G (default: $QDIST_CONSTANTS, else natural units)")
    g.add_argument("--seed", type=_nonneg_int, default=0, help="seed for randomized checks")
    g.add_argument("--quad-scheme", choices=SCHEMES)
    g.add_argument("--quad-nodes", type=_nonneg_int)
    g.add_argument("--abs-tol", type=_positive)
    g.add_argument("--rel-tol", type=_positive)

    parser = _Parser(prog="qdist", description="Information-geometric and entropic distances.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gauss-distance", parents=[common], help="normal-family distance, closed form vs shooting")
    p.add_argument("--theta1", type=_float_list(2), required=True, metavar="SIGMA,MU")
    p.add_argument("--theta2", type=_float_list(2), required=True, metavar="SIGMA,MU")
    p.add_argument("--audit", action="store_true", help="add relative difference and NOTE/PASS status")

    p = sub.add_parser("fr-metric", parents=[common], help="Fisher-Rao metric by quadrature")
    p.add_argument("--family", type=_family, required=True, metavar="{gauss,ho:N}")
    p.add_argument("--at", type=_float_list(2), required=True, metavar="P1,P2",
                   help="(sigma, mu) for gauss, (m, omega) for ho")
    p.add_argument("--form", choices=("gradient", "hessian"), default="gradient")
    p.add_argument("--k", type=_positive, default=1.0)

    p = sub.add_parser("ho-manifold", parents=[common], help="oscillator parameter-manifold signature table")
    p.add_argument("--n-max", type=_nonneg_int, required=True)

    p = sub.add_parser("sphere-metric", parents=[common], help="metric on the amplitude sphere")
    p.add_argument("--system", choices=("free", "ho"), required=True)
    p.add_argument("--state", required=True, metavar="FILE", help='{"labels": [...], "re": [...], "im": [...]}')
    p.add_argument("--t", type=_finite, default=0.0)
    p.add_argument("--mass", type=_positive, default=1.0)
    p.add_argument("--omega", type=_positive, default=1.0)
    p.add_argument("--mode", type=_mode, default="full", metavar="{full,diagonal}")
    p.add_argument("--truncation-check", type=_nonneg_int, default=0, metavar="EXTRA",
                   help="also report the change when EXTRA empty modes are added")

    p = sub.add_parser("rel-entropy", parents=[common], help="quantum relative entropy")
    p.add_argument("--rho", required=True, metavar="FILE")
    p.add_argument("--sigma", required=True, metavar="FILE")

    p = sub.add_parser("thermal", parents=[common], help="Gibbs state quantities and thermal relative entropies")
    p.add_argument("--H", required=True, metavar="FILE")
    p.add_argument("--beta", type=_positive, required=True)
    p.add_argument("--b", type=_positive, help="inverse temperature of the first state")
    p.add_argument("--rho", metavar="FILE", help="arbitrary state compared with the Gibbs state")

    p = sub.add_parser("scalar-field", parents=[common], help="thermal scalar-field relative entropy")
    p.add_argument("--V", type=_positive, default=1.0)
    p.add_argument("--b", type=_positive, required=True)
    p.add_argument("--beta", type=_positive, required=True)

    p = sub.add_parser("scalar-field-distance", parents=[common], help="thermal scalar-field distance")
    p.add_argument("--V", type=_positive, default=1.0)
    p.add_argument("--e1", type=_positive, required=True)
    p.add_argument("--e2", type=_positive, required=True)

    sub.add_parser("audit", parents=[common], help="closed forms vs oracles")
    sub.add_parser("schema", parents=[common], help="print the report JSON schema")
    return parser


def _origin(exc: BaseException) -> str:
    module = "qdist.cli"
    tb = exc.__traceback__
    while tb is not None:
        name = tb.tb_frame.f_globals.get("__name__", "")
        if name.startswith("qdist") and name != "qdist.errors":
            module = name
        tb = tb.tb_next
    return module


def _constants(args) -> Constants:
    try:
        if args.constants:
            return Constants.from_mapping(_load_json(args.constants))
        return Constants.from_env()
    except UsageError:
        raise
    except (OSError, ValueError, TypeError) as exc:
        raise UsageError(f"invalid constants: {exc}") from exc


def run(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        constants = _constants(args)
        body = COMMANDS[args.command](args, constants)
        report = {"schema": SCHEMA_VERSION, "command": args.command, "constants": constants.as_dict(), **body}
        stdout.write(render(report, args.format))
        if args.command == "audit":
            return 1 if report["self_consistency_failures"] else 0
        return 0
    except QDistError as exc:
        err = {"schema": SCHEMA_VERSION, "error": {"kind": exc.kind, "module": _origin(exc), "message": str(exc)}}
        stderr.write(dumps(err) + "\n")
        return exc.exit_code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
