"""The Beta manifold: trigamma metric, curvature through the Ricci pipeline,
and numerical limits of the curvature at the edges of the parameter space.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .geometry import FunctionMetric, is_degenerate, scalar_curvature
from .report import CurvatureReport, classify
from .specfun import polygamma

__all__ = ["BetaPoint", "beta_metric", "beta_metric_field", "beta_curvature",
           "printed_curvature", "beta_asymptote", "AsymptoteEstimate",
           "beta_comparison_report", "DIRECTIONS"]

log = logging.getLogger(__name__)

PIPELINE = "beta-ricci"

# (alpha, beta) as functions of the sequence parameter t = 10^k
DIRECTIONS = {
    "both-large": (lambda t: t, lambda t: t),
    "both-small": (lambda t: 1.0 / t, lambda t: 1.0 / t),
    "mixed": (lambda t: t, lambda t: 1.0 / t),
    "mixed-swapped": (lambda t: 1.0 / t, lambda t: t),
}
SEQUENCE = (1e1, 1e2, 1e3, 1e4)
# below this the tail differences are at the noise floor of the pipeline
_FLAT_TAIL = 1e-9


@dataclass(frozen=True)
class BetaPoint:
    alpha: float
    beta: float

    def __post_init__(self):
        for name in ("alpha", "beta"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be a finite positive number, got {v!r}")


def _components(a: float, b: float):
    t = polygamma(1, a + b)
    return polygamma(1, a) - t, -t, polygamma(1, b) - t


def _jacobian(a: float, b: float):
    t = polygamma(2, a + b)
    return [[[polygamma(2, a) - t, -t], [-t, -t]],
            [[-t, -t], [-t, polygamma(2, b) - t]]]


def _relative_step(t: float) -> float:
    return 1e-3 * abs(t)


def beta_metric_field() -> FunctionMetric:
    """Metric field over (alpha, beta) with tetragamma first derivatives.

    Christoffel derivatives use a 5-point stencil with a step proportional
    to the parameter, since useful parameters span 1e-4 .. 1e4.
    """
    return FunctionMetric(_components, _jacobian, step=_relative_step, stencil=5)


def beta_metric(p: BetaPoint) -> np.ndarray:
    g11, g12, g22 = _components(p.alpha, p.beta)
    return np.array([[g11, g12], [g12, g22]])


def printed_curvature(p: BetaPoint) -> float:
    """The closed form as printed, evaluated verbatim for comparison only."""
    a, b = p.alpha, p.beta
    s = a + b
    t1a, t1b, t1s = polygamma(1, a), polygamma(1, b), polygamma(1, s)
    t2a, t2b, t2s = polygamma(2, a), polygamma(2, b), polygamma(2, s)
    num = t2a * t2b * t1s - t1a * t2b * t2s - t2a * t1b * t2s
    den = 4.0 * (t1a * t1s + t1b * t1s - t1a * t1b)
    return num / den


_FIELD = beta_metric_field()


def beta_curvature(p: BetaPoint) -> CurvatureReport:
    g = beta_metric(p)
    det = float(g[0, 0] * g[1, 1] - g[0, 1] ** 2)
    details = {
        "alpha": p.alpha,
        "beta": p.beta,
        "metric": g.tolist(),
        "det_g": det,
        "printed_form": printed_curvature(p),
    }
    if is_degenerate(g):
        return CurvatureReport(math.nan, "degenerate", PIPELINE, details)
    s = scalar_curvature(_FIELD, (p.alpha, p.beta))
    return CurvatureReport(s, classify(s), PIPELINE, details)


@dataclass(frozen=True)
class AsymptoteEstimate:
    direction: str
    limit: float
    points: list[tuple[float, float]]
    values: list[float]
    monotone: bool
    extrapolated: bool
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "direction": self.direction,
            "limit": self.limit,
            "points": [list(p) for p in self.points],
            "values": self.values,
            "monotone": self.monotone,
            "extrapolated": self.extrapolated,
            "notes": self.notes,
        }


def _extrapolate(values: Sequence[float]) -> tuple[float, bool, bool, list[str]]:
    """Aitken extrapolation from the last three terms of a geometric-rate tail."""
    notes = []
    diffs = np.diff(values)
    monotone = bool(np.all(diffs >= 0) or np.all(diffs <= 0))
    if not monotone:
        notes.append("tail is not monotone; reporting the last value")
    last = values[-1]
    d1, d2 = values[-2] - values[-3], values[-1] - values[-2]
    if abs(d2) <= _FLAT_TAIL:
        return last, monotone, False, notes
    if not monotone or d1 == 0:
        return last, monotone, False, notes
    r = d2 / d1
    if not 0.0 < r < 1.0:
        notes.append(f"tail ratio {r:.3g} outside (0, 1); reporting the last value")
        return last, monotone, False, notes
    return last + d2 * r / (1.0 - r), monotone, True, notes


def beta_asymptote(direction: str, sequence: Iterable[float] = SEQUENCE) -> AsymptoteEstimate:
    """Curvature limit along ``direction`` (see ``DIRECTIONS``)."""
    try:
        fa, fb = DIRECTIONS[direction]
    except KeyError:
        raise ValueError(
            f"unknown direction {direction!r}; choose from {', '.join(DIRECTIONS)}") from None
    ts = list(sequence)
    if len(ts) < 3:
        raise ValueError("need at least three sequence points")
    points = [(fa(t), fb(t)) for t in ts]
    values = [beta_curvature(BetaPoint(a, b)).curvature for a, b in points]
    limit, monotone, extrapolated, notes = _extrapolate(values)
    for note in notes:
        log.warning("beta asymptote %s: %s", direction, note)
    return AsymptoteEstimate(direction, limit, points, values, monotone, extrapolated, notes)


def beta_comparison_report(points: Iterable[tuple[float, float]]) -> list[dict]:
    """Ricci-pipeline curvature next to the printed closed form.

    Each row also carries ``printed / ricci`` and ``det g``; the two agree
    wherever the printed form is off by exactly one factor of the metric
    determinant.
    """
    rows = []
    for a, b in points:
        rep = beta_curvature(BetaPoint(a, b))
        ricci, printed = rep.curvature, rep.details["printed_form"]
        row = {
            "alpha": float(a),
            "beta": float(b),
            "ricci": ricci,
            "printed": printed,
            "difference": printed - ricci,
            "ratio": printed / ricci if ricci else math.nan,
            "det_g": rep.details["det_g"],
        }
        log.info("beta (%g, %g): ricci=%.12g printed=%.12g ratio=%.12g det_g=%.12g",
                 a, b, ricci, printed, row["ratio"], row["det_g"])
        rows.append(row)
    return rows
