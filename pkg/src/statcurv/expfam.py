"""Two-parameter exponential families: Hessian metric of the log-partition
function psi, the determinant curvature formula, and grid checks of the
three structural flatness criteria.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import permutations
from typing import Iterable, Sequence

import numpy as np

from . import expr as ex
from .geometry import SymbolicMetric, is_degenerate, DegenerateMetricError
from .report import CurvatureReport, classify

__all__ = ["ExpFamilySpec", "ef_metric", "ef_metric_jet", "ef_curvature",
           "ef_metric_field", "ef_flatness_criteria", "FlatnessReport",
           "ZERO_TOL", "PROPORTIONAL_TOL"]

PIPELINE = "exponential-family"
ZERO_TOL = 1e-10
PROPORTIONAL_TOL = 1e-8

# metric entries in the row order of the numerator determinant
ENTRIES = ("g11", "g12", "g22")
_INDEX = {"g11": (0, 0), "g12": (0, 1), "g22": (1, 1)}


@dataclass(frozen=True)
class ExpFamilySpec:
    """log-partition function psi(t1, t2); h and k are descriptive only."""

    psi: ex.Expr
    names: tuple[str, str] = ("t1", "t2")
    h: str | None = None
    k: str | None = None

    def __post_init__(self):
        extra = ex.variables(self.psi) - set(self.names)
        if extra:
            raise ex.UnboundVariableError(sorted(extra)[0])
        d = {n: ex.differentiate(self.psi, n) for n in self.names}
        a, b = self.names
        second = {
            "g11": ex.differentiate(d[a], a),
            "g12": ex.differentiate(d[a], b),
            "g22": ex.differentiate(d[b], b),
        }
        third = {(e, n): ex.differentiate(second[e], n) for e in ENTRIES for n in self.names}
        object.__setattr__(self, "_second", second)
        object.__setattr__(self, "_third", third)

    @classmethod
    def parse(cls, psi: str, names=("t1", "t2"), h=None, k=None) -> "ExpFamilySpec":
        return cls(ex.parse(psi), tuple(names), h, k)

    def _env(self, theta):
        return {self.names[0]: float(theta[0]), self.names[1]: float(theta[1])}


def ef_metric(spec: ExpFamilySpec, theta: Sequence[float]) -> np.ndarray:
    """The Hessian of psi at theta."""
    env = spec._env(theta)
    g11, g12, g22 = (ex.evaluate(spec._second[e], env) for e in ENTRIES)
    return np.array([[g11, g12], [g12, g22]])


def ef_metric_jet(spec: ExpFamilySpec, theta: Sequence[float]):
    """(g, dg) with ``dg[l, i, j] = d g_ij / d theta_l`` from third derivatives of psi.

    psi itself is evaluated first so that points outside its domain raise
    even when the derivatives happen to be defined there.
    """
    env = spec._env(theta)
    ex.evaluate(spec.psi, env)
    g = ef_metric(spec, theta)
    dg = np.empty((2, 2, 2))
    for l, n in enumerate(spec.names):
        v11, v12, v22 = (ex.evaluate(spec._third[(e, n)], env) for e in ENTRIES)
        dg[l] = [[v11, v12], [v12, v22]]
    return g, dg


def ef_metric_field(spec: ExpFamilySpec) -> SymbolicMetric:
    """The Hessian metric as a symbolic field, for the Ricci pipeline."""
    s = spec._second
    return SymbolicMetric(s["g11"], s["g12"], s["g22"], spec.names)


def _determinant_curvature(g: np.ndarray, dg: np.ndarray) -> float:
    # rows (g_ij, d2 g_ij, d1 g_ij) for g11, g12, g22
    rows = [[g[i, j], dg[1, i, j], dg[0, i, j]] for i, j in (_INDEX[e] for e in ENTRIES)]
    det3 = float(np.linalg.det(np.array(rows)))
    det2 = g[0, 0] * g[1, 1] - g[0, 1] ** 2
    return det3 / (4.0 * det2 * det2)


def ef_curvature(spec: ExpFamilySpec, theta: Sequence[float]) -> CurvatureReport:
    g, dg = ef_metric_jet(spec, theta)
    if is_degenerate(g):
        raise DegenerateMetricError(theta, g)
    s = _determinant_curvature(g, dg)
    eig = np.linalg.eigvalsh(g)
    details = {
        "theta": [float(t) for t in theta],
        "metric": g.tolist(),
        "det_g": float(g[0, 0] * g[1, 1] - g[0, 1] ** 2),
        "positive_definite": bool(eig.min() > 0),
    }
    return CurvatureReport(s, classify(s), PIPELINE, details)


@dataclass(frozen=True)
class FlatnessReport:
    vanishing_entry: list[str]
    proportional_pairs: list[dict]
    single_parameter: list[str]
    max_abs_curvature: float
    points: int

    @property
    def criteria(self) -> dict[str, bool]:
        return {
            "vanishing_entry": bool(self.vanishing_entry),
            "proportional_entries": bool(self.proportional_pairs),
            "single_parameter": bool(self.single_parameter),
        }

    @property
    def any_holds(self) -> bool:
        return any(self.criteria.values())

    def to_dict(self) -> dict:
        return {
            "criteria": self.criteria,
            "vanishing_entry": self.vanishing_entry,
            "proportional_entries": self.proportional_pairs,
            "single_parameter": self.single_parameter,
            "max_abs_curvature": self.max_abs_curvature,
            "points": self.points,
        }


def ef_flatness_criteria(spec: ExpFamilySpec, grid: Iterable[Sequence[float]]) -> FlatnessReport:
    """Check the three flatness criteria on every grid point.

    1. some metric entry vanishes on the whole grid;
    2. two entries are proportional with one constant across the grid
       (least-squares fit, max residual <= 1e-8 (1 + max|entry|));
    3. no entry varies with one of the two parameters.
    """
    points = [tuple(map(float, p)) for p in grid]
    if not points:
        raise ValueError("flatness grid is empty")
    jets = [ef_metric_jet(spec, p) for p in points]
    values = {e: np.array([g[_INDEX[e]] for g, _ in jets]) for e in ENTRIES}
    scale = 1.0 + max(float(np.max(np.abs(v))) for v in values.values())

    vanishing = [e for e in ENTRIES if np.max(np.abs(values[e])) <= ZERO_TOL * scale]

    proportional = []
    for e1, e2 in permutations(ENTRIES, 2):
        if e1 in vanishing or e2 in vanishing:
            continue
        a, b = values[e1], values[e2]
        lam = float(np.dot(a, b) / np.dot(b, b))
        residual = float(np.max(np.abs(a - lam * b)))
        if residual <= PROPORTIONAL_TOL * scale:
            proportional.append({"entry": e1, "other": e2, "factor": lam,
                                 "residual": residual})

    single = []
    for l, name in enumerate(spec.names):
        other = spec.names[1 - l]
        dmax = max(float(np.max(np.abs(dg[l]))) for _, dg in jets)
        if dmax <= ZERO_TOL * scale:
            single.append(other)

    curvatures = []
    for g, dg in jets:
        if is_degenerate(g):
            curvatures.append(math.inf)
        else:
            curvatures.append(abs(_determinant_curvature(g, dg)))
    return FlatnessReport(vanishing, proportional, single, float(max(curvatures)), len(points))
