import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import binomial_se, numpy_pairs, radial_lambda
from tailmix import copula, dist
from tailmix.copula import CopulaFamily
from tailmix.dist import INF, DomainError

GAUSS = CopulaFamily.gaussian()
FAMILIES = [GAUSS, CopulaFamily.student_t(1), CopulaFamily.student_t(3), CopulaFamily.student_t(5),
            CopulaFamily.student_t(30)]


# -- family -------------------------------------------------------------------------

def test_family_parse_and_str():
    assert CopulaFamily.parse("gauss") == GAUSS
    assert CopulaFamily.parse("t:5") == CopulaFamily.student_t(5)
    assert str(CopulaFamily.student_t(2.5)) == "t:2.5"
    assert str(GAUSS) == "gauss" and GAUSS.is_gaussian and GAUSS.kind == "gaussian"
    with pytest.raises(ValueError):
        CopulaFamily.parse("clayton:2")


def test_family_validation():
    with pytest.raises(ValueError):
        CopulaFamily.student_t(INF)
    with pytest.raises(ValueError):
        CopulaFamily.student_t(-1)


def test_infinite_dof_compares_greater():
    assert INF > 1e300


# -- limiting coefficient --------------------------------------------------------------

def test_limiting_lambda_spot_checks():
    for nu in (1, 2, 5, 30, 400):
        assert copula.limiting_lambda(1.0, CopulaFamily.student_t(nu)) == 1.0
    # 2 t_2(-sqrt 2) from the closed-form t_2 CDF
    x = -math.sqrt(2)
    t2 = 0.5 + x / (2 * math.sqrt(2) * math.sqrt(1 + x * x / 2))
    assert copula.limiting_lambda(0.0, CopulaFamily.student_t(1)) == pytest.approx(2 * t2, abs=1e-5)
    assert copula.limiting_lambda(0.0, CopulaFamily.student_t(1)) == pytest.approx(0.29289, abs=1e-5)
    assert copula.limiting_lambda(0.5, GAUSS) == 0.0
    assert copula.limiting_lambda(1.0, GAUSS) == 1.0
    assert copula.limiting_lambda(-1.0, CopulaFamily.student_t(4)) == 0.0


def test_limiting_lambda_monotone():
    rho = np.linspace(-1, 1, 201)
    nus = [1, 2, 3, 5, 10, 30, 100]
    table = np.array([copula.limiting_lambda(rho, CopulaFamily.student_t(nu)) for nu in nus])
    assert np.all(np.diff(table, axis=1) >= 0)   # in rho
    assert np.all(np.diff(table, axis=0) <= 0)   # in nu
    assert np.all((table >= 0) & (table <= 1))


# -- diagonal and penultimate coefficient ------------------------------------------------

@pytest.mark.parametrize("family", FAMILIES, ids=str)
def test_frechet_boundaries(family):
    for u in (0.3, 0.5, 0.7, 1e-6):
        assert copula.diagonal(u, 1.0, family) == pytest.approx(u, rel=1e-15)
        assert copula.diagonal(u, -1.0, family) == pytest.approx(max(2 * u - 1, 0), abs=1e-15)


def test_independence_diagonal():
    assert copula.diagonal(0.01, 0.0, GAUSS) == pytest.approx(1e-4, rel=1e-12)
    for u in (0.4, 1e-3, 1e-9):
        assert copula.penultimate_lambda(u, 0.0, GAUSS) == pytest.approx(u, rel=1e-11)


@pytest.mark.parametrize("family", FAMILIES, ids=str)
def test_lambda_at_one(family):
    assert copula.penultimate_lambda(1.0, 0.3, family) == 1.0


def test_domain_errors():
    with pytest.raises(DomainError):
        copula.penultimate_lambda(0.0, 0.5, GAUSS)
    with pytest.raises(DomainError):
        copula.penultimate_lambda(1.5, 0.5, GAUSS)
    with pytest.raises(DomainError):
        copula.penultimate_lambda(0.1, 1.5, GAUSS)


@pytest.mark.parametrize("nu", [INF, 2.0, 5.0, 30.0])
@pytest.mark.parametrize("u", [0.3, 1e-2, 1e-6, 1e-10])
def test_matches_radial_oracle(u, nu):
    fam = CopulaFamily(nu)
    rhos = np.array([-0.9, 0.0, 0.5, 0.99])
    got = copula.penultimate_lambda(u, rhos, fam)
    ref = np.array([radial_lambda(u, r, nu) for r in rhos])
    # relative to the value, with an absolute floor for the vanishing ones
    assert np.all(np.abs(got - ref) <= 1e-9 * ref + 1e-15), (got, ref)


def test_vectorized_matches_scalar():
    fam = CopulaFamily.student_t(4)
    rhos = np.array([-0.5, 0.2, 0.7])
    vec = copula.penultimate_lambda(1e-4, rhos, fam)
    assert vec == pytest.approx([copula.penultimate_lambda(1e-4, r, fam) for r in rhos], rel=1e-12)


@given(st.sampled_from(FAMILIES), st.floats(1e-12, 1.0), st.floats(-1.0, 1.0))
@settings(max_examples=40, deadline=None)
def test_lambda_in_unit_interval(family, u, rho):
    val = copula.penultimate_lambda(u, rho, family)
    assert 0.0 <= val <= 1.0


def test_lambda_increasing_in_rho():
    for family in (GAUSS, CopulaFamily.student_t(3)):
        vals = copula.penultimate_lambda(1e-3, np.linspace(-0.99, 0.99, 100), family)
        assert np.all(np.diff(vals) > 0)


@pytest.mark.parametrize("nu", [1.0, 2.0, 3.0, 5.0])
@pytest.mark.parametrize("rho", [0.0, 0.5, 0.9])
def test_converges_to_limit(nu, rho):
    fam = CopulaFamily.student_t(nu)
    assert abs(copula.penultimate_lambda(1e-10, rho, fam) - copula.limiting_lambda(rho, fam)) <= 5e-2


def test_copula_cdf_pass_through():
    fam = CopulaFamily.student_t(3)
    assert copula.copula_cdf(0.2, 0.2, 0.4, fam) == pytest.approx(copula.diagonal(0.2, 0.4, fam), rel=1e-12)
    assert copula.copula_cdf(0.3, 0.999999999, 0.4, fam) == pytest.approx(0.3, abs=1e-8)


# -- convexity in rho ----------------------------------------------------------------------

def _second_differences(u, rho, family):
    return np.diff(copula.penultimate_lambda(u, rho, family), 2)


@pytest.mark.parametrize("family", [GAUSS, CopulaFamily.student_t(3), CopulaFamily.student_t(5)], ids=str)
@pytest.mark.parametrize("u", [0.5, 0.1, 0.01, 1e-4])
def test_convex_on_nonnegative_correlations(u, family):
    rho = np.round(np.linspace(0.0, 1.0, 101), 12)
    assert _second_differences(u, rho, family).min() >= -1e-8


@pytest.mark.parametrize("family", [GAUSS, CopulaFamily.student_t(3)], ids=str)
def test_convex_on_full_range_for_small_u(family):
    rho = np.round(np.linspace(-0.99, 0.99, 199), 12)
    assert _second_differences(1e-4, rho, family).min() >= -1e-8


# -- Monte Carlo oracle -----------------------------------------------------------------------

@pytest.mark.slow
def test_penultimate_matches_monte_carlo():
    u, rho, nu = 0.01, 0.5, 5.0
    rng = np.random.default_rng(7)
    q = dist.t_quantile(u, nu)
    n, chunk = 10_000_000, 2_000_000
    below = both = 0
    for _ in range(n // chunk):
        x, y = numpy_pairs(chunk, rho, nu, rng)
        hit = x <= q
        below += int(hit.sum())
        both += int((hit & (y <= q)).sum())
    lam_mc = both / below
    lam = copula.penultimate_lambda(u, rho, CopulaFamily.student_t(nu))
    assert abs(lam - lam_mc) <= 3 * binomial_se(lam, below)
