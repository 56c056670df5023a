"""Curvature reports shared by the three pipelines."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

__all__ = ["CurvatureReport", "classify", "CLASS_TOL",
           "HYPERBOLIC", "FLAT", "SPHERICAL", "DEGENERATE", "FLAT_SINGULAR"]

CLASS_TOL = 1e-8

HYPERBOLIC = "hyperbolic"
FLAT = "flat"
SPHERICAL = "spherical"
DEGENERATE = "degenerate"
# rank-1 metric with a^2 = 0; a degenerate point, not a flat manifold
FLAT_SINGULAR = "flat-singular"

SINGULAR = (DEGENERATE, FLAT_SINGULAR)


def classify(curvature: float, tol: float = CLASS_TOL) -> str:
    if not math.isfinite(curvature):
        return DEGENERATE
    if curvature < -tol:
        return HYPERBOLIC
    if curvature > tol:
        return SPHERICAL
    return FLAT


@dataclass(frozen=True)
class CurvatureReport:
    curvature: float
    classification: str
    pipeline: str
    details: dict[str, Any] = field(default_factory=dict)

    @property
    def singular(self) -> bool:
        return self.classification in SINGULAR

    def to_dict(self) -> dict[str, Any]:
        return {
            "curvature": self.curvature,
            "classification": self.classification,
            "pipeline": self.pipeline,
            **self.details,
        }
