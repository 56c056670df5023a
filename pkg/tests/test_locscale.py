import math

import numpy as np
import pytest

from oracles import gaussian_mixture
from statcurv import expr as ex
from statcurv.geometry import FunctionMetric, scalar_curvature
from statcurv.locscale import (BUILTIN_NAMES, Generatrix, GeneratrixError, LSCoefficients,
                               builtin, family_density, ls_coefficients, ls_curvature,
                               ls_metric_at, ls_metric_field, truncated_reciprocal)
from statcurv.quad import SupportSpec, integrate

# (a2, b2, c) per built-in; the Cauchy a2 and all exponential/Gaussian values
# agree with tests/oracles.mp_coefficient to 1e-15
EXPECTED = {
    "gaussian": (2.0, 2.0, 0.0, -0.5),
    "cauchy": (0.5, 0.5, 0.0, -2.0),
    "exponential": (1.0, 1.0, 0.0, -1.0),
    "laplace": (1.0, 1.0, 0.0, -1.0),
}

# frozen from oracles.mp_coefficient("1/(mp.log(2)*(3-x))", 1, 2, ...)
TRUNCATED = (0.5410106403333613, 4.869095763000251, 1.6230319210000839)


@pytest.fixture(scope="module")
def coefficients():
    return {name: ls_coefficients(builtin(name)) for name in BUILTIN_NAMES}


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_builtin_coefficients(coefficients, name):
    a2, b2, c, s = EXPECTED[name]
    co = coefficients[name]
    assert (co.a2, co.b2, co.c) == pytest.approx((a2, b2, c), abs=1e-7)
    rep = ls_curvature(co)
    assert rep.curvature == pytest.approx(s, abs=1e-8)
    assert rep.classification == "hyperbolic"


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_closed_form_matches_ricci_pipeline(coefficients, name):
    co = coefficients[name]
    closed = ls_curvature(co).curvature

    def components(a, b):
        g = ls_metric_at(co, a, b)
        return g[0, 0], g[0, 1], g[1, 1]

    for l, s in [(0.0, 1.0), (-1.0, 0.5), (2.0, 3.0), (0.3, 0.1), (-5.0, 10.0)]:
        assert scalar_curvature(ls_metric_field(co), (l, s)) == pytest.approx(closed, abs=1e-6)
        assert scalar_curvature(FunctionMetric(components), (l, s)) == pytest.approx(closed, abs=1e-6)


def _fisher_by_scores(g: Generatrix, l: float, s: float) -> np.ndarray:
    """E[score score^T] for p((x-l)/s)/s, integrated directly in x."""
    dens = family_density(g)
    logp = ex.Unary("log", dens)
    scores = [ex.compile_numpy(ex.differentiate(logp, v), ["x", "l", "s"]) for v in ("l", "s")]
    p = ex.compile_numpy(dens, ["x", "l", "s"])
    support = SupportSpec(tuple((l + s * a, l + s * b) for a, b in g.support.intervals),
                          tuple(l + s * q for q in g.support.breakpoints))

    def product(i, j):
        def f(x):
            px = p(x, l, s)
            # p underflows in the tails, where the score is 0/0
            with np.errstate(invalid="ignore"):
                return np.where(px > 0, scores[i](x, l, s) * scores[j](x, l, s) * px, 0.0)
        return f

    return np.array([[integrate(product(i, j), support).value for j in range(2)]
                     for i in range(2)])


@pytest.mark.parametrize("name", BUILTIN_NAMES)
@pytest.mark.parametrize("l, s", [(0.0, 1.0), (1.5, 0.5), (-2.0, 3.0)])
def test_metric_matches_fisher_definition(coefficients, name, l, s):
    np.testing.assert_allclose(ls_metric_at(coefficients[name], l, s),
                               _fisher_by_scores(builtin(name), l, s), atol=1e-7)


def test_metric_at_examples():
    co = LSCoefficients(2.0, 2.0, 0.0)
    np.testing.assert_array_equal(ls_metric_at(co, 0.0, 1.0), [[2, 0], [0, 2]])
    np.testing.assert_array_equal(ls_metric_at(co, 5.0, 2.0), [[0.5, 0], [0, 0.5]])
    with pytest.raises(ValueError):
        ls_metric_at(LSCoefficients(1.0, 1.0, 0.0), -1.0, 0.0)


def test_curvature_from_coefficients():
    assert ls_curvature(LSCoefficients(2, 2, 0)).curvature == -0.5
    assert ls_curvature(LSCoefficients(0.5, 0.5, 0)).curvature == -2.0


def test_truncated_reciprocal_is_degenerate():
    g = truncated_reciprocal(3.0, 1.0)
    assert g.normalization == pytest.approx(math.log(2), rel=1e-12)
    co = ls_coefficients(g)
    assert (co.a2, co.b2, co.c) == pytest.approx(TRUNCATED, rel=1e-9)
    assert abs(co.gram) <= 1e-6 * co.a2 * co.b2
    rep = ls_curvature(co)
    assert rep.classification == "degenerate" and rep.singular


def test_flat_singular_flag():
    rep = ls_curvature(LSCoefficients(0.0, 1.0, 0.0))
    assert rep.classification == "flat-singular" and math.isnan(rep.curvature)


def test_unnormalized_density_rejected_unless_asked():
    with pytest.raises(GeneratrixError):
        Generatrix.from_text("exp(-x^2)", "(-inf,inf)")
    g = Generatrix.from_text("exp(-x^2)", "(-inf,inf)", normalize=True)
    assert g.normalization == pytest.approx(math.sqrt(math.pi), rel=1e-12)


def test_negative_density_rejected():
    with pytest.raises(GeneratrixError):
        Generatrix.from_text("x", "(-1,1)", normalize=True)


def test_only_x_allowed():
    with pytest.raises(GeneratrixError):
        Generatrix.from_text("exp(-y^2)", "(-inf,inf)", normalize=True)


def test_user_derivative_is_used():
    g = Generatrix.from_text("exp(-x)", "(0,inf)", derivative="-exp(-x)")
    assert ls_coefficients(g).a2 == pytest.approx(1.0, abs=1e-9)


def test_mixture_negativity_and_cauchy_schwarz():
    rng = np.random.default_rng(7)
    for _ in range(10):
        g = Generatrix.from_text(gaussian_mixture(rng), "(-inf,inf)", normalize=True)
        co = ls_coefficients(g)
        assert co.gram > 0
        assert ls_curvature(co).curvature < 0


def test_even_generatrices_have_zero_c(coefficients):
    for name in ("gaussian", "cauchy", "laplace"):
        assert abs(coefficients[name].c) <= 1e-7
    rng = np.random.default_rng(8)
    for _ in range(5):
        g = Generatrix.from_text(gaussian_mixture(rng, symmetric=True), "(-inf,inf)",
                                 normalize=True)
        assert abs(ls_coefficients(g).c) <= 1e-7
