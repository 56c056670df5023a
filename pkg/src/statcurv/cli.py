"""Command-line front end.

Every subcommand prints one JSON document on stdout. Exit status: 0 on
success, 2 on usage or parse errors, 3 on numerical failure, 4 when the
geometry is degenerate (the report is still printed).
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import logging
import math
import sys
from typing import Any, Callable

import numpy as np

from . import __version__
from . import expr as ex
from .beta import (BetaPoint, DIRECTIONS, beta_asymptote, beta_comparison_report,
                   beta_curvature)
from .expfam import ExpFamilySpec, ef_curvature, ef_flatness_criteria, ef_metric_field
from .geometry import (DegenerateMetricError, FunctionMetric, SymbolicMetric,
                       scalar_curvature)
from .locscale import (BUILTIN_NAMES, Generatrix, GeneratrixError, builtin,
                       ls_coefficients, ls_curvature, ls_metric_at, ls_metric_field)
from .quad import QuadratureError, SupportSpec
from .report import DEGENERATE, classify

log = logging.getLogger("statcurv")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3
EXIT_DEGENERATE = 4

TOOL = "statcurv"
COMPARE_POINTS = ((0.5, 0.5), (1.0, 1.0), (2.0, 3.0), (0.5, 4.0), (10.0, 10.0))


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------

def _number(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    text = format(x, ".17g")
    # keep floats distinguishable from integers after a round trip
    return text if any(ch in text for ch in ".en") else text + ".0"


def to_json(obj: Any, indent: int = 2, _level: int = 0) -> str:
    """Deterministic JSON: sorted keys, floats with 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{_string(str(k))}: {to_json(obj[k], indent, _level + 1)}"
                 for k in sorted(obj, key=str)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, np.floating, np.integer)) and not isinstance(v, bool)
               for v in obj):
            return "[" + ", ".join(to_json(v, indent, _level + 1) for v in obj) + "]"
        items = [pad + to_json(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if isinstance(obj, np.ndarray):
        return to_json(obj.tolist(), indent, _level)
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _number(float(obj))
    if obj is None:
        return "null"
    return _string(str(obj))


def _string(s: str) -> str:
    return json.dumps(s)


def _document(command: str, inputs: dict, result: dict) -> dict:
    return {"tool": TOOL, "version": __version__, "command": command,
            "input": inputs, **result}


def _curvature_fields(s: float) -> dict:
    out = {"curvature": s}
    if math.isinf(s):
        out["curvature_flag"] = "-inf" if s < 0 else "+inf"
    elif math.isnan(s):
        out["curvature_flag"] = "undefined"
    return out


# ---------------------------------------------------------------------------
# Argument helpers
# ---------------------------------------------------------------------------

def _pair(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected two comma-separated numbers, got {text!r}")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number pair: {text!r}") from None


def _floats(text: str) -> list[float]:
    try:
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated number list: {text!r}") from None


def parse_axis(text: str, log_scale: bool = False) -> np.ndarray:
    """``lo:hi:steps`` (optionally ``:log``) to grid values."""
    parts = text.split(":")
    if len(parts) == 4 and parts[3] == "log":
        log_scale = True
        parts = parts[:3]
    if len(parts) != 3:
        raise UsageError(f"grid axis must be lo:hi:steps[:log], got {text!r}")
    try:
        lo, hi, steps = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise UsageError(f"bad grid axis {text!r}") from None
    if steps < 1:
        raise UsageError("grid needs at least one step")
    if log_scale:
        if lo <= 0 or hi <= 0:
            raise UsageError("log-scaled axis needs positive bounds")
        return np.logspace(math.log10(lo), math.log10(hi), steps)
    return np.linspace(lo, hi, steps)


def _grid(spec: str) -> list[tuple[float, float]]:
    axes = spec.split(",")
    if len(axes) != 2:
        raise UsageError(f"grid must be two comma-separated axes, got {spec!r}")
    return list(itertools.product(parse_axis(axes[0]), parse_axis(axes[1])))


def _add_generatrix_options(p: argparse.ArgumentParser, required: bool = True):
    src = p.add_mutually_exclusive_group(required=required)
    src.add_argument("--generatrix", choices=BUILTIN_NAMES, help="built-in generatrix")
    src.add_argument("--density-expr", help="density formula in x")
    p.add_argument("--support", help='interval list, e.g. "(-inf,0),(0,inf)"')
    p.add_argument("--breakpoints", type=_floats, default=[],
                   help="comma list of points where the density is not smooth")
    p.add_argument("--derivative-expr", help="override the symbolic derivative")
    p.add_argument("--normalize", action="store_true",
                   help="divide the density by its integral")


def _generatrix(args) -> Generatrix:
    if args.generatrix:
        return builtin(args.generatrix)
    if not args.support:
        raise UsageError("--density-expr requires --support")
    return Generatrix.from_text(args.density_expr, args.support, args.breakpoints,
                                derivative=args.derivative_expr, normalize=args.normalize)


def _endpoint(v: float):
    return v if math.isfinite(v) else ("inf" if v > 0 else "-inf")


def _generatrix_input(args, g: Generatrix) -> dict:
    return {
        "family": "location-scale",
        "generatrix": g.name,
        "density": str(g.density),
        "support": [[_endpoint(v) for v in iv] for iv in g.support.intervals],
        "breakpoints": list(g.support.breakpoints),
        "normalize": bool(getattr(args, "normalize", False)),
    }


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_locscale(args) -> tuple[dict, int]:
    g = _generatrix(args)
    coeffs = ls_coefficients(g)
    rep = ls_curvature(coeffs)
    result = {
        "coefficients": coeffs.to_dict(),
        "normalization": g.normalization,
        "mass": g.mass,
        "metric_unit_scale": ls_metric_at(coeffs, 0.0, 1.0),
        "classification": rep.classification,
        "pipeline": rep.pipeline,
        **_curvature_fields(rep.curvature),
    }
    if not rep.singular:
        result["ricci_check"] = scalar_curvature(ls_metric_field(coeffs), (0.0, 1.0))
    code = EXIT_DEGENERATE if rep.singular else EXIT_OK
    return _document("locscale", _generatrix_input(args, g), result), code


def cmd_expfam(args) -> tuple[dict, int]:
    spec = ExpFamilySpec.parse(args.psi_expr)
    theta = args.theta
    inputs = {"family": "exponential", "psi": args.psi_expr, "theta": list(theta)}
    result: dict = {}
    code = EXIT_OK
    try:
        rep = ef_curvature(spec, theta)
        result.update(rep.details)
        result.update({"classification": rep.classification, "pipeline": rep.pipeline,
                       **_curvature_fields(rep.curvature)})
        result["ricci_check"] = scalar_curvature(ef_metric_field(spec), theta)
    except DegenerateMetricError as err:
        result.update({"classification": DEGENERATE, "pipeline": "exponential-family",
                       "metric": err.g.tolist(), "curvature": None})
        code = EXIT_DEGENERATE
    if args.flatness_grid:
        inputs["flatness_grid"] = args.flatness_grid
        result["flatness"] = ef_flatness_criteria(spec, _grid(args.flatness_grid)).to_dict()
    return _document("expfam", inputs, result), code


def cmd_beta(args) -> tuple[dict, int]:
    if args.asymptote:
        est = beta_asymptote(args.asymptote)
        return _document("beta", {"family": "beta", "asymptote": args.asymptote},
                         {"asymptote": est.to_dict(), "pipeline": "beta-ricci"}), EXIT_OK
    if args.compare:
        rows = beta_comparison_report(COMPARE_POINTS)
        return _document("beta", {"family": "beta", "compare": [list(p) for p in COMPARE_POINTS]},
                         {"comparison": rows, "pipeline": "beta-ricci"}), EXIT_OK
    if args.alpha is None or args.beta is None:
        raise UsageError("beta needs --alpha and --beta, --asymptote, or --compare")
    p = BetaPoint(args.alpha, args.beta)
    rep = beta_curvature(p)
    result = {**rep.details, "classification": rep.classification, "pipeline": rep.pipeline,
              **_curvature_fields(rep.curvature)}
    result.pop("alpha"), result.pop("beta")
    code = EXIT_DEGENERATE if rep.singular else EXIT_OK
    return _document("beta", {"family": "beta", "alpha": p.alpha, "beta": p.beta}, result), code


def _metric_field(args):
    m = SymbolicMetric.parse(args.g11, args.g12, args.g22)
    if args.derivatives == "fd":
        def components(a, b):
            g = m.metric((a, b))
            return g[0, 0], g[0, 1], g[1, 1]
        return FunctionMetric(components)
    return m


def cmd_metric(args) -> tuple[dict, int]:
    m = _metric_field(args)
    inputs = {"family": "metric", "g11": args.g11, "g12": args.g12, "g22": args.g22,
              "theta": list(args.theta), "derivatives": args.derivatives}
    g = m.metric(args.theta)
    result: dict = {"metric": g, "det_g": float(g[0, 0] * g[1, 1] - g[0, 1] ** 2),
                    "pipeline": "ricci"}
    try:
        s = scalar_curvature(m, args.theta)
    except DegenerateMetricError:
        result.update({"classification": DEGENERATE, "curvature": None})
        return _document("metric", inputs, result), EXIT_DEGENERATE
    result.update({"classification": classify(s), **_curvature_fields(s)})
    return _document("metric", inputs, result), EXIT_OK


# ---------------------------------------------------------------------------
# Sweep
# ---------------------------------------------------------------------------

def _sweep_evaluator(args) -> tuple[Callable[[float, float], tuple[float, str, float]], dict]:
    family = args.family
    if family == "beta":
        def point(a, b):
            rep = beta_curvature(BetaPoint(a, b))
            return rep.curvature, rep.classification, rep.details["det_g"]
        return point, {"family": "beta"}

    if family == "locscale":
        g = _generatrix(args)
        coeffs = ls_coefficients(g)
        closed = ls_curvature(coeffs)
        field = ls_metric_field(coeffs)

        def point(l, s):
            gm = ls_metric_at(coeffs, l, s)
            det = float(gm[0, 0] * gm[1, 1] - gm[0, 1] ** 2)
            if closed.singular:
                return closed.curvature, closed.classification, det
            k = scalar_curvature(field, (l, s))
            return k, classify(k), det
        return point, _generatrix_input(args, g)

    if family == "expfam":
        if not args.psi_expr:
            raise UsageError("expfam sweep needs --psi-expr")
        spec = ExpFamilySpec.parse(args.psi_expr)

        def point(t1, t2):
            rep = ef_curvature(spec, (t1, t2))
            return rep.curvature, rep.classification, rep.details["det_g"]
        return point, {"family": "exponential", "psi": args.psi_expr}

    if not (args.g11 and args.g12 and args.g22):
        raise UsageError("metric sweep needs --g11, --g12 and --g22")
    m = _metric_field(args)

    def point(t1, t2):
        gm = m.metric((t1, t2))
        det = float(gm[0, 0] * gm[1, 1] - gm[0, 1] ** 2)
        k = scalar_curvature(m, (t1, t2))
        return k, classify(k), det
    return point, {"family": "metric", "g11": args.g11, "g12": args.g12, "g22": args.g22}


def _cell(x: float) -> str:
    return "" if x is None or not math.isfinite(x) else _number(x)


def cmd_sweep(args) -> tuple[dict, int]:
    p1 = parse_axis(args.p1, args.log)
    p2 = parse_axis(args.p2, args.log)
    point, inputs = _sweep_evaluator(args)
    inputs.update({"p1": args.p1, "p2": args.p2, "log": bool(args.log), "output": args.output})
    rows = []
    for a, b in itertools.product(p1, p2):
        try:
            s, cls, det = point(float(a), float(b))
        except DegenerateMetricError as err:
            s, cls = math.nan, DEGENERATE
            det = float(err.g[0, 0] * err.g[1, 1] - err.g[0, 1] ** 2)
        except (ArithmeticError, ex.EvaluationError, ValueError) as err:
            log.warning("sweep point (%r, %r) failed: %s", a, b, err)
            s, cls, det = math.nan, "error", math.nan
        rows.append((float(a), float(b), s, cls, det))
    try:
        with open(args.output, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["param1", "param2", "S", "classification", "det_g"])
            for a, b, s, cls, det in rows:
                w.writerow([_cell(a), _cell(b), _cell(s), cls, _cell(det)])
    except OSError as err:
        raise UsageError(f"cannot write {args.output}: {err}") from None
    counts: dict[str, int] = {}
    for row in rows:
        counts[row[3]] = counts.get(row[3], 0) + 1
    finite = [r[2] for r in rows if math.isfinite(r[2])]
    result = {"rows": len(rows), "classification_counts": counts,
              "curvature_min": min(finite) if finite else None,
              "curvature_max": max(finite) if finite else None}
    return _document("sweep", inputs, result), EXIT_OK


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=TOOL, description="Fisher metrics and scalar curvature of two-parameter families.")
    parser.add_argument("--version", action="version", version=f"{TOOL} {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log details to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("locscale", help="location-scale family of a generatrix")
    _add_generatrix_options(p)
    p.set_defaults(func=cmd_locscale)

    p = sub.add_parser("expfam", help="exponential family given its log-partition psi(t1,t2)")
    p.add_argument("--psi-expr", required=True)
    p.add_argument("--theta", type=_pair, required=True, help="t1,t2")
    p.add_argument("--flatness-grid", help="t1 and t2 axes: lo:hi:n,lo:hi:n")
    p.set_defaults(func=cmd_expfam)

    p = sub.add_parser("beta", help="Beta family manifold")
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--asymptote", choices=tuple(DIRECTIONS))
    p.add_argument("--compare", action="store_true",
                   help="printed closed form against the Ricci pipeline")
    p.set_defaults(func=cmd_beta)

    p = sub.add_parser("metric", help="arbitrary metric g(t1,t2) through the Ricci pipeline")
    p.add_argument("--g11", required=True)
    p.add_argument("--g12", required=True)
    p.add_argument("--g22", required=True)
    p.add_argument("--theta", type=_pair, required=True, help="t1,t2")
    p.add_argument("--derivatives", choices=("symbolic", "fd"), default="symbolic")
    p.set_defaults(func=cmd_metric)

    p = sub.add_parser("sweep", help="curvature over a parameter grid, written as CSV")
    p.add_argument("--family", choices=("beta", "locscale", "expfam", "metric"), required=True)
    p.add_argument("--p1", required=True, help="lo:hi:steps[:log]")
    p.add_argument("--p2", required=True, help="lo:hi:steps[:log]")
    p.add_argument("--log", action="store_true", help="log-spaced axes")
    p.add_argument("--output", required=True)
    _add_generatrix_options(p, required=False)
    p.add_argument("--psi-expr")
    p.add_argument("--g11")
    p.add_argument("--g12")
    p.add_argument("--g22")
    p.add_argument("--derivatives", choices=("symbolic", "fd"), default="symbolic")
    p.set_defaults(func=cmd_sweep)
    return parser


def _value_options(parser: argparse.ArgumentParser) -> set[str]:
    names = set()
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            for sub in action.choices.values():
                names |= _value_options(sub)
        elif action.option_strings and action.nargs is None and action.const is None:
            names.update(action.option_strings)
    return names


def _attach_dash_values(argv: list[str], options: set[str]) -> list[str]:
    """Join ``--opt -1,2`` into ``--opt=-1,2`` so values may start with a dash."""
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in options and i + 1 < len(argv) and argv[i + 1].startswith("-") \
                and argv[i + 1] not in options:
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def run(argv: list[str] | None = None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    args = parser.parse_args(_attach_dash_values(argv, _value_options(parser)))
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        stream=sys.stderr, format="%(levelname)s: %(message)s")
    if args.command == "sweep" and args.family == "locscale" and not (
            args.generatrix or args.density_expr):
        parser.error("locscale sweep needs --generatrix or --density-expr")
    try:
        doc, code = args.func(args)
    except ex.ParseError as err:
        print(f"{TOOL}: cannot parse expression: {err}", file=sys.stderr)
        return EXIT_USAGE
    except (UsageError, GeneratrixError) as err:
        print(f"{TOOL}: {err}", file=sys.stderr)
        return EXIT_USAGE
    except QuadratureError as err:
        print(f"{TOOL}: quadrature failed: {err}", file=sys.stderr)
        return EXIT_NUMERICAL
    except DegenerateMetricError as err:
        print(f"{TOOL}: {err}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (ex.EvaluationError, ArithmeticError) as err:
        print(f"{TOOL}: numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as err:
        print(f"{TOOL}: {err}", file=sys.stderr)
        return EXIT_USAGE
    stdout.write(to_json(doc) + "\n")
    return code


def main(argv: list[str] | None = None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
