import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import christoffel_mp
from statcurv import expr as ex
from statcurv.geometry import (DegenerateMetricError, FunctionMetric, SymbolicMetric,
                               christoffel, is_degenerate, scalar_curvature)

GAUSSIAN = ("1/t2", "0", "1/(2*t2^2)")


def gaussian_symbolic():
    return SymbolicMetric.parse(*GAUSSIAN)


def gaussian_function():
    return FunctionMetric(lambda a, b: (1 / b, 0.0, 1 / (2 * b * b)))


def poincare(k):
    return SymbolicMetric.parse(f"{k!r}/t2^2", "0", f"{k!r}/t2^2")


# -- Christoffel symbols -----------------------------------------------------

def test_identity_metric_has_no_christoffels():
    m = SymbolicMetric.parse("1", "0", "1")
    assert np.all(christoffel(m, (0.3, -2.0)) == 0)


@pytest.mark.parametrize("k", [0.5, 1.0, 2.0])
def test_poincare_christoffels(k):
    gam = christoffel(poincare(k), (0.0, 1.0))
    expected = np.zeros((2, 2, 2))
    expected[0, 0, 1] = expected[0, 1, 0] = -1.0
    expected[1, 0, 0] = 1.0
    expected[1, 1, 1] = -1.0
    np.testing.assert_allclose(gam, expected, atol=1e-15)


# frozen from tests/oracles.christoffel_mp (mpmath derivatives of the metric)
GAUSSIAN_GAMMA = {
    (0.0, 1.0): [[[0.0, -0.5], [-0.5, 0.0]], [[1.0, 0.0], [0.0, -1.0]]],
    (0.7, 2.5): [[[0.0, -0.2], [-0.2, 0.0]], [[1.0, 0.0], [0.0, -0.4]]],
}


@pytest.mark.parametrize("theta", list(GAUSSIAN_GAMMA))
def test_gaussian_christoffels(theta):
    np.testing.assert_allclose(christoffel(gaussian_symbolic(), theta),
                               GAUSSIAN_GAMMA[theta], atol=1e-14)
    np.testing.assert_allclose(christoffel(gaussian_function(), theta),
                               GAUSSIAN_GAMMA[theta], atol=1e-8)


def test_christoffel_against_live_oracle():
    m = SymbolicMetric.parse("2 + atan(t1)", "t1*t2/5", "1 + t2^2 + exp(t1)")

    def comps(a, b):
        return 2 + mp.atan(a), a * b / 5, 1 + b * b + mp.exp(a)

    theta = (0.4, -0.8)
    np.testing.assert_allclose(christoffel(m, theta), christoffel_mp(comps, theta), atol=1e-13)


# -- scalar curvature --------------------------------------------------------

@pytest.mark.parametrize("theta", [(0.0, 1.0), (-3.0, 0.2), (5.0, 7.5)])
def test_gaussian_curvature(theta):
    assert scalar_curvature(gaussian_symbolic(), theta) == pytest.approx(-0.5, abs=1e-12)
    assert scalar_curvature(gaussian_function(), theta) == pytest.approx(-0.5, abs=1e-6)


def test_identity_is_flat():
    assert scalar_curvature(SymbolicMetric.parse("1", "0", "1"), (1.0, 2.0)) == 0.0


@pytest.mark.parametrize("b2", [0.5, 1.0, 2.0, 3.7])
def test_poincare_curvature(b2):
    assert scalar_curvature(poincare(b2), (0.3, 1.7)) == pytest.approx(-1 / b2, rel=1e-12)


@pytest.mark.parametrize("theta", [(0.0, 1.0), (1.0, 0.5), (-2.0, 3.0)])
@pytest.mark.parametrize("k", [0.25, 3.0, 10.0])
def test_conformal_scaling(theta, k):
    base = scalar_curvature(poincare(1.0), theta)
    assert scalar_curvature(poincare(k), theta) == pytest.approx(base / k, abs=1e-8)


@pytest.mark.parametrize("theta", [(0.0, 0.0), (0.3, -1.2), (2.0, 1.0)])
def test_unit_sphere_stereographic(theta):
    m = SymbolicMetric.parse("4/(1 + t1^2 + t2^2)^2", "0", "4/(1 + t1^2 + t2^2)^2")
    assert scalar_curvature(m, theta) == pytest.approx(1.0, rel=1e-12)


@pytest.mark.parametrize("a2, b2, c", [(2.0, 2.0, 0.0), (0.5, 0.5, 0.0), (1.0, 3.0, 0.8),
                                       (0.4, 2.5, -0.6)])
def test_location_scale_grid_constancy(a2, b2, c):
    m = SymbolicMetric.parse(f"{a2!r}/t2^2", f"{c!r}/t2^2", f"{b2!r}/t2^2")
    expected = -a2 / (a2 * b2 - c * c)
    for t1 in np.linspace(-2, 2, 5):
        for t2 in np.linspace(0.5, 4, 5):
            assert scalar_curvature(m, (t1, t2)) == pytest.approx(expected, abs=1e-6)


smooth_metrics = st.tuples(st.floats(0.5, 2.0), st.floats(-0.4, 0.4), st.floats(0.5, 2.0),
                           st.floats(-0.5, 0.5), st.floats(-0.5, 0.5))


@settings(max_examples=25)
@given(smooth_metrics, st.floats(-1, 1), st.floats(-1, 1))
def test_finite_difference_agrees_with_symbolic(params, t1, t2):
    a, b, c, p, q = params
    sym = SymbolicMetric.parse(f"{a!r}*exp({p!r}*t1 + t2^2/4)", f"{b!r}*atan(t1*t2)",
                               f"{c!r}*exp({q!r}*t2) + t1^2/4")

    def comps(x, y):
        g = sym.metric((x, y))
        return g[0, 0], g[0, 1], g[1, 1]

    for stencil in (3, 5):
        fd = FunctionMetric(comps, stencil=stencil)
        exact = scalar_curvature(sym, (t1, t2))
        assert scalar_curvature(fd, (t1, t2)) == pytest.approx(exact, rel=1e-5, abs=1e-7)


# -- degeneracy --------------------------------------------------------------

def test_degenerate_metric_raises():
    m = SymbolicMetric.parse("1", "1", "1")
    with pytest.raises(DegenerateMetricError) as info:
        scalar_curvature(m, (0.0, 0.0))
    assert info.value.theta == (0.0, 0.0)


def test_degeneracy_is_scale_invariant():
    g = np.array([[1.0, 0.9999], [0.9999, 1.0]])
    for s in (1e-8, 1.0, 1e8):
        assert not is_degenerate(s * g)
    assert is_degenerate(np.array([[2.0, 2.0], [2.0, 2.0]]))
    assert is_degenerate(np.array([[np.nan, 0.0], [0.0, 1.0]]))


def test_unknown_variable_rejected():
    with pytest.raises(ex.UnboundVariableError):
        SymbolicMetric.parse("x", "0", "1")
