import itertools

import numpy as np
import pytest

from oracles import convex_psi, flat_psi
from statcurv import expr as ex
from statcurv.expfam import (ExpFamilySpec, ef_curvature, ef_flatness_criteria, ef_metric,
                             ef_metric_field)
from statcurv.geometry import DegenerateMetricError, scalar_curvature

NORMAL_PSI = "t1^2/(4*t2) - 0.5*log(t2) + 0.5*log(pi)"
GRID4 = list(itertools.product(np.linspace(-1, 1, 4), np.linspace(-1, 1, 4)))
POSITIVE_GRID = list(itertools.product(np.linspace(-1, 1, 4), np.linspace(0.5, 2, 4)))


@pytest.mark.parametrize("psi, theta, expected", [
    (NORMAL_PSI, (0.0, 1.0), [[0.5, 0.0], [0.0, 0.5]]),
    ("t1^2 + t2^2", (0.4, -3.0), [[2.0, 0.0], [0.0, 2.0]]),
    ("exp(t1) + exp(t2)", (0.0, 0.0), [[1.0, 0.0], [0.0, 1.0]]),
])
def test_metric_examples(psi, theta, expected):
    np.testing.assert_allclose(ef_metric(ExpFamilySpec.parse(psi), theta), expected, atol=1e-15)


@pytest.mark.parametrize("theta", [(1.0, 0.5), (-2.0, 3.0), (0.0, 1.0)])
def test_normal_family_curvature(theta):
    rep = ef_curvature(ExpFamilySpec.parse(NORMAL_PSI), theta)
    assert rep.curvature == pytest.approx(-0.5, abs=1e-12)
    assert rep.classification == "hyperbolic"


def test_quadratic_is_flat():
    rep = ef_curvature(ExpFamilySpec.parse("t1^2 + t2^2"), (3.0, -1.0))
    assert rep.curvature == 0.0 and rep.classification == "flat"


def test_quartic_matches_ricci():
    spec = ExpFamilySpec.parse("t1^4 + t1*t2 + t2^4")
    s = ef_curvature(spec, (1.0, 1.0)).curvature
    assert s == pytest.approx(scalar_curvature(ef_metric_field(spec), (1.0, 1.0)), abs=1e-6)
    # independent value frozen from the Ricci pipeline with symbolic derivatives
    assert s == pytest.approx(0.0070419091398, abs=1e-12)


def test_random_convex_psi_formula_matches_ricci():
    rng = np.random.default_rng(3)
    points = [(-1.0, -1.0), (-0.5, 0.5), (0.0, 0.0), (0.5, -0.5), (1.0, 1.0)]
    for _ in range(20):
        spec = ExpFamilySpec.parse(convex_psi(rng))
        field = ef_metric_field(spec)
        for theta in points:
            rep = ef_curvature(spec, theta)
            assert rep.details["positive_definite"]
            assert rep.curvature == pytest.approx(scalar_curvature(field, theta), abs=1e-6)


def test_degenerate_hessian():
    with pytest.raises(DegenerateMetricError):
        ef_curvature(ExpFamilySpec.parse("(t1 + t2)^2"), (0.3, 0.2))


def test_domain_error_propagates():
    with pytest.raises(ex.DomainError):
        ef_curvature(ExpFamilySpec.parse(NORMAL_PSI), (1.0, -1.0))


def test_unknown_variable():
    with pytest.raises(ex.UnboundVariableError):
        ExpFamilySpec.parse("t1^2 + y")


# -- flatness criteria -------------------------------------------------------

def test_constant_hessian_criteria():
    rep = ef_flatness_criteria(ExpFamilySpec.parse("t1^2 + t1*t2"), GRID4)
    assert rep.vanishing_entry == ["g22"]
    assert rep.criteria["vanishing_entry"] and rep.criteria["single_parameter"]
    assert rep.max_abs_curvature <= 1e-8


def test_separable_exponentials():
    rep = ef_flatness_criteria(ExpFamilySpec.parse("exp(t1) + exp(t2)"), GRID4)
    assert rep.vanishing_entry == ["g12"]
    assert rep.max_abs_curvature <= 1e-8


def test_normal_family_meets_no_criterion():
    rep = ef_flatness_criteria(ExpFamilySpec.parse(NORMAL_PSI), POSITIVE_GRID)
    assert not rep.any_holds
    assert rep.max_abs_curvature == pytest.approx(0.5, abs=1e-9)


@pytest.mark.parametrize("criterion, key", [(1, "vanishing_entry"), (2, "proportional_entries"),
                                            (3, "single_parameter")])
def test_constructed_flat_families(criterion, key):
    rng = np.random.default_rng(100 + criterion)
    for _ in range(10):
        rep = ef_flatness_criteria(ExpFamilySpec.parse(flat_psi(rng, criterion)), GRID4)
        assert rep.criteria[key]
        assert rep.max_abs_curvature <= 1e-6


def test_soundness_on_random_psi():
    # whenever a criterion is reported, the grid curvature must vanish
    rng = np.random.default_rng(11)
    cases = [convex_psi(rng) for _ in range(5)] + [flat_psi(rng, k) for k in (1, 2, 3)]
    for psi in cases:
        rep = ef_flatness_criteria(ExpFamilySpec.parse(psi), GRID4)
        if rep.any_holds:
            assert rep.max_abs_curvature <= 1e-6


def test_empty_grid():
    with pytest.raises(ValueError):
        ef_flatness_criteria(ExpFamilySpec.parse("t1^2 + t2^2"), [])
