"""Location-scale families: Fisher coefficients of a generatrix and the
closed-form curvature -a2 / (a2*b2 - c^2).

For the family p(x | l, s) = p((x - l)/s) / s the metric is
(1/s^2) [[a2, c], [c, b2]] with

    a2 = int p'^2 / p
    b2 = int (p + x p')^2 / p
    c  = int p' (p + x p') / p

taken over the positive support of p only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import expr as ex
from .geometry import SymbolicMetric
from .quad import (DEFAULT_ABS_TOL, DEFAULT_REL_TOL, QuadResult, SupportSpec,
                   integrate)
from .report import (CurvatureReport, DEGENERATE, FLAT_SINGULAR, classify)

__all__ = [
    "Generatrix", "GeneratrixError", "LSCoefficients",
    "ls_coefficients", "ls_metric_at", "ls_metric_field", "ls_curvature",
    "family_density", "builtin", "BUILTIN_NAMES", "truncated_reciprocal",
    "A_TOL", "DEG_TOL", "NORMALIZATION_TOL",
]

A_TOL = 1e-10
DEG_TOL = 1e-8
NORMALIZATION_TOL = 1e-6

PIPELINE = "location-scale"


class GeneratrixError(ValueError):
    pass


@dataclass(frozen=True)
class Generatrix:
    """A base density in ``x`` with its support.

    Construction checks non-negativity at sample points of the support and
    that the density integrates to one. ``normalization`` records the
    constant the source density was divided by (1.0 if it was used as given).
    """

    density: ex.Expr
    support: SupportSpec
    derivative: ex.Expr | None = None
    name: str = "custom"
    normalization: float = 1.0
    mass: float = field(default=math.nan, compare=False)

    def __post_init__(self):
        extra = ex.variables(self.density) - {"x"}
        if extra:
            raise GeneratrixError(f"density may only use the variable x, found {sorted(extra)}")
        if self.derivative is None:
            object.__setattr__(self, "derivative", ex.differentiate(self.density, "x"))
        p = self.pdf
        xs = self.support.sample_points()
        vals = p(xs)
        finite = np.isfinite(vals)
        if (vals[finite] < 0).any():
            k = int(np.argmax(finite & (vals < 0)))
            raise GeneratrixError(f"density is negative at x = {xs[k]!r}")
        mass = integrate(p, self.support).value
        object.__setattr__(self, "mass", mass)
        if abs(mass - 1.0) > NORMALIZATION_TOL:
            raise GeneratrixError(
                f"density integrates to {mass!r}, not 1; pass normalize=True to rescale")

    @classmethod
    def from_text(cls, density: str, support: SupportSpec | str, breakpoints=(),
                  derivative: str | None = None, normalize: bool = False,
                  name: str = "custom") -> "Generatrix":
        if isinstance(support, str):
            support = SupportSpec.parse(support, breakpoints)
        elif breakpoints:
            support = SupportSpec(support.intervals, tuple(breakpoints))
        e = ex.parse(density)
        extra = ex.variables(e) - {"x"}
        if extra:
            raise GeneratrixError(f"density may only use the variable x, found {sorted(extra)}")
        d = ex.parse(derivative) if derivative is not None else None
        k = 1.0
        if normalize:
            f = ex.compile_numpy(e, ["x"])
            k = integrate(f, support).value
            if not k > 0:
                raise GeneratrixError(f"density has non-positive total mass {k!r}")
            e = ex.div(e, ex.const(k))
            if d is not None:
                d = ex.div(d, ex.const(k))
        return cls(e, support, d, name=name, normalization=k)

    @property
    def pdf(self):
        return ex.compile_numpy(self.density, ["x"])

    @property
    def dpdf(self):
        return ex.compile_numpy(self.derivative, ["x"])


_BUILTINS = {
    "gaussian": ("exp(-x^2)/sqrt(pi)", "(-inf,inf)", ()),
    "cauchy": ("1/(pi*(1+x^2))", "(-inf,inf)", ()),
    "exponential": ("exp(-x)", "(0,inf)", ()),
    "laplace": ("(1/2)*exp(-abs(x))", "(-inf,inf)", (0.0,)),
}
BUILTIN_NAMES = tuple(_BUILTINS)


def builtin(name: str) -> Generatrix:
    try:
        density, support, bps = _BUILTINS[name]
    except KeyError:
        raise GeneratrixError(
            f"unknown generatrix {name!r}; choose from {', '.join(BUILTIN_NAMES)}") from None
    return Generatrix.from_text(density, support, bps, name=name)


def truncated_reciprocal(alpha: float = 3.0, eps: float = 1.0) -> Generatrix:
    """p(x) = 1/(K (alpha - x)) on [alpha - 2 eps, alpha - eps]; a rank-1 metric."""
    support = SupportSpec(((alpha - 2 * eps, alpha - eps),))
    return Generatrix.from_text(f"1/({alpha!r} - x)", support, normalize=True,
                                name="truncated-reciprocal")


@dataclass(frozen=True)
class LSCoefficients:
    a2: float
    b2: float
    c: float
    a2_error: float = 0.0
    b2_error: float = 0.0
    c_error: float = 0.0

    @property
    def gram(self) -> float:
        """a2*b2 - c^2, non-negative by Cauchy-Schwarz."""
        return self.a2 * self.b2 - self.c * self.c

    def to_dict(self) -> dict:
        return {"a2": self.a2, "b2": self.b2, "c": self.c,
                "a2_error": self.a2_error, "b2_error": self.b2_error,
                "c_error": self.c_error, "gram": self.gram}


def ls_coefficients(g: Generatrix, abs_tol: float = DEFAULT_ABS_TOL,
                    rel_tol: float = DEFAULT_REL_TOL) -> LSCoefficients:
    p, dp = g.pdf, g.dpdf

    def parts(x):
        px = p(x)
        pos = px > 0
        safe = np.where(pos, px, 1.0)
        d = np.where(pos, dp(x), 0.0)
        return pos, safe, d, px + x * d

    def fa(x):
        pos, safe, d, _ = parts(x)
        return np.where(pos, d * d / safe, 0.0)

    def fb(x):
        pos, safe, _, q = parts(x)
        return np.where(pos, q * q / safe, 0.0)

    def fc(x):
        pos, safe, d, q = parts(x)
        return np.where(pos, d * q / safe, 0.0)

    ra: QuadResult = integrate(fa, g.support, abs_tol, rel_tol)
    rb = integrate(fb, g.support, abs_tol, rel_tol)
    rc = integrate(fc, g.support, abs_tol, rel_tol)
    return LSCoefficients(ra.value, rb.value, rc.value,
                          ra.error_estimate, rb.error_estimate, rc.error_estimate)


def ls_metric_at(coeffs: LSCoefficients, l: float, s: float) -> np.ndarray:
    if not s > 0:
        raise ValueError(f"scale must be positive, got {s!r}")
    return np.array([[coeffs.a2, coeffs.c], [coeffs.c, coeffs.b2]]) / (s * s)


def ls_metric_field(coeffs: LSCoefficients, names=("t1", "t2")) -> SymbolicMetric:
    """The metric as a symbolic field of (location, scale)."""
    s2 = ex.power(ex.var(names[1]), ex.const(2.0))
    return SymbolicMetric(ex.div(ex.const(coeffs.a2), s2),
                          ex.div(ex.const(coeffs.c), s2),
                          ex.div(ex.const(coeffs.b2), s2), names)


def family_density(g: Generatrix, l: float | str = "l", s: float | str = "s") -> ex.Expr:
    """p((x - l)/s) / s as an expression; l and s may stay symbolic."""
    loc = ex.var(l) if isinstance(l, str) else ex.const(l)
    scale = ex.var(s) if isinstance(s, str) else ex.const(s)
    u = ex.Binary("div", ex.Binary("sub", ex.var("x"), loc), scale)
    return ex.Binary("div", ex.substitute(g.density, {"x": u}), scale)


def ls_curvature(coeffs: LSCoefficients, a_tol: float = A_TOL,
                 deg_tol: float = DEG_TOL) -> CurvatureReport:
    details = {"coefficients": coeffs.to_dict()}
    if not all(map(math.isfinite, (coeffs.a2, coeffs.b2, coeffs.c))):
        raise ValueError("coefficients must be finite")
    if coeffs.a2 <= a_tol:
        return CurvatureReport(math.nan, FLAT_SINGULAR, PIPELINE, details)
    gram = coeffs.gram
    if gram <= deg_tol * coeffs.a2 * coeffs.b2:
        return CurvatureReport(-math.inf, DEGENERATE, PIPELINE, details)
    s = -coeffs.a2 / gram
    return CurvatureReport(s, classify(s), PIPELINE, details)
