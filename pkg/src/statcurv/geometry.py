"""Christoffel symbols, Ricci contraction and scalar curvature of 2-D metrics.

Index convention: ``dg[l, i, j] = d g_ij / d theta_l`` and
``gamma[i, j, k] = Gamma^i_{jk}``.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from . import expr as ex

__all__ = [
    "DegenerateMetricError", "MetricField", "SymbolicMetric", "FunctionMetric",
    "christoffel", "christoffel_from_jet", "scalar_curvature", "is_degenerate",
    "DEGENERACY_TOL",
]

DEGENERACY_TOL = 1e-12
DIM = 2


class DegenerateMetricError(ArithmeticError):
    def __init__(self, theta, g):
        self.theta = tuple(float(t) for t in theta)
        self.g = np.asarray(g, dtype=float)
        super().__init__(f"metric is degenerate at theta={self.theta}: {self.g.tolist()}")


def is_degenerate(g: np.ndarray, tol: float = DEGENERACY_TOL) -> bool:
    """True when det g is within roundoff of zero.

    The noise floor of ``g11*g22 - g12^2`` scales with the two products,
    not with the overall size of g, so anisotropic metrics are not
    misreported.
    """
    g11, g12, g22 = g[0, 0], g[0, 1], g[1, 1]
    det = g11 * g22 - g12 * g12
    if not np.isfinite(det):
        return True
    return abs(det) <= tol * (abs(g11 * g22) + g12 * g12)


def _inverse(g: np.ndarray) -> np.ndarray:
    det = g[0, 0] * g[1, 1] - g[0, 1] * g[1, 0]
    return np.array([[g[1, 1], -g[0, 1]], [-g[1, 0], g[0, 0]]]) / det


def _step(t: float) -> float:
    return 1e-5 * (1.0 + abs(t))


class MetricField:
    """A symmetric 2x2 metric g(theta) with access to its derivatives.

    Subclasses supply ``metric``; ``first_derivatives`` and
    ``christoffel_derivatives`` fall back to 3- or 5-point central
    differences with step ``step(theta_l)``.
    """

    def __init__(self, step: Callable[[float], float] | None = None, stencil: int = 3):
        if stencil not in (3, 5):
            raise ValueError("stencil must be 3 or 5 points")
        self.step = step or _step
        self.stencil = stencil

    def _difference(self, fn: Callable[[np.ndarray], np.ndarray], theta: np.ndarray, l: int):
        h = self.step(theta[l])
        e = np.zeros(DIM)
        e[l] = h
        if self.stencil == 3:
            return (fn(theta + e) - fn(theta - e)) / (2 * h)
        return (-fn(theta + 2 * e) + 8 * fn(theta + e)
                - 8 * fn(theta - e) + fn(theta - 2 * e)) / (12 * h)

    def metric(self, theta: Sequence[float]) -> np.ndarray:
        raise NotImplementedError

    def first_derivatives(self, theta: Sequence[float]) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        return np.array([self._difference(self.metric, theta, l) for l in range(DIM)])

    def christoffel_derivatives(self, theta: Sequence[float]) -> np.ndarray:
        """``dgamma[l, i, j, k] = d Gamma^i_{jk} / d theta_l`` by central differences."""
        theta = np.asarray(theta, dtype=float)
        gam = lambda t: christoffel(self, t)  # noqa: E731
        return np.array([self._difference(gam, theta, l) for l in range(DIM)])


class FunctionMetric(MetricField):
    """Metric given by a callable ``components(t1, t2) -> (g11, g12, g22)``.

    ``jacobian(t1, t2)``, when given, returns the first derivatives as an
    array shaped like ``dg[l, i, j]``; otherwise they are differenced.
    """

    def __init__(self, components: Callable, jacobian: Callable | None = None,
                 step: Callable[[float], float] | None = None, stencil: int = 3):
        super().__init__(step, stencil)
        self.components = components
        self.jacobian = jacobian

    def metric(self, theta):
        g11, g12, g22 = self.components(float(theta[0]), float(theta[1]))
        return np.array([[g11, g12], [g12, g22]], dtype=float)

    def first_derivatives(self, theta):
        if self.jacobian is None:
            return super().first_derivatives(theta)
        return np.asarray(self.jacobian(float(theta[0]), float(theta[1])), dtype=float)


class SymbolicMetric(MetricField):
    """Metric whose entries are expressions in two named coordinates.

    All derivatives, including the second derivatives needed for the
    Christoffel derivatives, are taken symbolically.
    """

    def __init__(self, g11, g12, g22, names: tuple[str, str] = ("t1", "t2")):
        super().__init__()
        self.names = tuple(names)
        entries = [e if isinstance(e, ex.Expr) else ex.parse(str(e)) for e in (g11, g12, g22)]
        self.entries = tuple(entries)
        extra = set().union(*(ex.variables(e) for e in entries)) - set(self.names)
        if extra:
            raise ex.UnboundVariableError(sorted(extra)[0])
        self._d1 = [[ex.differentiate(e, n) for e in entries] for n in self.names]
        self._d2 = [[[ex.differentiate(d, m) for d in row] for m in self.names]
                    for row in self._d1]

    @classmethod
    def parse(cls, g11: str, g12: str, g22: str, names=("t1", "t2")) -> "SymbolicMetric":
        return cls(ex.parse(g11), ex.parse(g12), ex.parse(g22), names)

    def _env(self, theta):
        return {self.names[0]: float(theta[0]), self.names[1]: float(theta[1])}

    @staticmethod
    def _sym(vals):
        a, b, c = vals
        return np.array([[a, b], [b, c]], dtype=float)

    def metric(self, theta):
        env = self._env(theta)
        return self._sym([ex.evaluate(e, env) for e in self.entries])

    def first_derivatives(self, theta):
        env = self._env(theta)
        return np.array([self._sym([ex.evaluate(e, env) for e in row]) for row in self._d1])

    def second_derivatives(self, theta) -> np.ndarray:
        """``ddg[l, m, i, j] = d^2 g_ij / d theta_l d theta_m``."""
        env = self._env(theta)
        return np.array([[self._sym([ex.evaluate(e, env) for e in row]) for row in block]
                         for block in self._d2])

    def christoffel_derivatives(self, theta):
        g = self.metric(theta)
        _check(theta, g)
        return _christoffel_derivatives_from_jet(
            g, self.first_derivatives(theta), self.second_derivatives(theta))


def _check(theta, g):
    if is_degenerate(g):
        raise DegenerateMetricError(theta, g)


def christoffel_from_jet(g: np.ndarray, dg: np.ndarray) -> np.ndarray:
    """Gamma^i_{jk} = 1/2 g^{il} (d_k g_lj + d_j g_lk - d_l g_jk)."""
    ginv = _inverse(g)
    # lowered[l, j, k] = d_k g_lj + d_j g_lk - d_l g_jk
    lowered = (np.einsum("klj->ljk", dg) + np.einsum("jlk->ljk", dg) - dg)
    return 0.5 * np.einsum("il,ljk->ijk", ginv, lowered)


def _christoffel_derivatives_from_jet(g, dg, ddg):
    ginv = _inverse(g)
    lowered = np.einsum("klj->ljk", dg) + np.einsum("jlk->ljk", dg) - dg
    # d_m lowered[l, j, k]
    dlowered = (np.einsum("mklj->mljk", ddg) + np.einsum("mjlk->mljk", ddg)
                - ddg)
    # d_m g^{-1} = -g^{-1} (d_m g) g^{-1}
    dginv = -np.einsum("ia,mab,bl->mil", ginv, dg, ginv)
    return 0.5 * (np.einsum("mil,ljk->mijk", dginv, lowered)
                  + np.einsum("il,mljk->mijk", ginv, dlowered))


def christoffel(m: MetricField, theta: Sequence[float]) -> np.ndarray:
    """The Christoffel symbols of the second kind at ``theta``, shape (2, 2, 2)."""
    g = m.metric(theta)
    _check(theta, g)
    return christoffel_from_jet(g, m.first_derivatives(theta))


def scalar_curvature(m: MetricField, theta: Sequence[float]) -> float:
    """S = S_R / 2 where S_R is the contracted Ricci tensor.

    S_R = g^{mn} (G^l_{mn,l} - G^l_{ml,n} + G^s_{mn} G^l_{ls} - G^s_{ml} G^l_{ns}).
    """
    theta = np.asarray(theta, dtype=float)
    g = m.metric(theta)
    _check(theta, g)
    gam = christoffel_from_jet(g, m.first_derivatives(theta))
    dgam = m.christoffel_derivatives(theta)
    # dgam[l, i, j, k] = d_l Gamma^i_jk
    term1 = np.einsum("llmn->mn", dgam)          # G^l_{mn,l}
    term2 = np.einsum("nlml->mn", dgam)          # G^l_{ml,n}
    term3 = np.einsum("smn,lls->mn", gam, gam)   # G^s_{mn} G^l_{ls}
    term4 = np.einsum("sml,lns->mn", gam, gam)   # G^s_{ml} G^l_{ns}
    ricci = term1 - term2 + term3 - term4
    s_r = float(np.einsum("mn,mn->", _inverse(g), ricci))
    return s_r / DIM
