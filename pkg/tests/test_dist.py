import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from oracles import binomial_se, mp_t_cdf, mp_t_quantile, numpy_pairs
from tailmix import dist
from tailmix.copula import CopulaFamily
from tailmix.dist import INF, DomainError

finite_x = st.floats(-30, 30, allow_nan=False)
dofs = st.sampled_from([1.0, 2.0, 3.5, 5.0, 10.0, 30.0, INF])


# -- normal ----------------------------------------------------------------------

def test_normal_cdf_median():
    assert dist.normal_cdf(0.0) == 0.5


def test_normal_cdf_at_eight():
    assert dist.normal_cdf(8.0) == pytest.approx(1 - 6.22096e-16, abs=1e-20)
    assert 1 - float(mp.ncdf(8)) == pytest.approx(6.22096e-16, rel=1e-5)


def test_normal_cdf_absolute_accuracy():
    xs = np.linspace(-8, 8, 161)
    ref = np.array([float(mp.ncdf(x)) for x in xs])
    assert np.max(np.abs(dist.normal_cdf(xs) - ref)) <= 1e-14


def test_normal_cdf_far_tail_relative():
    xs = -np.linspace(8, 37, 30)
    ref = np.array([float(mp.ncdf(x)) for x in xs])
    assert np.max(np.abs(dist.normal_cdf(xs) / ref - 1)) <= 1e-10


@given(finite_x)
def test_normal_cdf_symmetry(x):
    assert dist.normal_cdf(-x) == pytest.approx(1 - dist.normal_cdf(x), abs=2e-16)


@pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
def test_normal_cdf_rejects_non_finite(bad):
    with pytest.raises(DomainError):
        dist.normal_cdf(bad)


@pytest.mark.parametrize("p, expected, tol", [(0.5, 0.0, 0.0), (0.975, 1.95996, 1e-4), (1e-10, -6.3613, 1e-3)])
def test_normal_quantile_examples(p, expected, tol):
    assert dist.normal_quantile(p) == pytest.approx(expected, abs=tol)
    assert dist.normal_quantile(p) == pytest.approx(float(mp_t_quantile(p, INF)), abs=1e-12)


@pytest.mark.parametrize("bad", [0.0, 1.0, -0.1, 1.5, math.nan])
def test_normal_quantile_domain(bad):
    with pytest.raises(DomainError):
        dist.normal_quantile(bad)


def test_normal_round_trip_log_grid():
    p = np.logspace(-12, np.log10(0.5), 200)
    p = np.concatenate([p, 1 - p])
    assert np.max(np.abs(dist.normal_cdf(dist.normal_quantile(p)) - p)) <= 1e-12


# -- Student t -------------------------------------------------------------------

@given(dofs)
def test_t_cdf_median(nu):
    assert dist.t_cdf(0.0, nu) == 0.5


def test_t2_closed_form():
    x = -math.sqrt(2)
    closed = 0.5 + x / (2 * math.sqrt(2) * math.sqrt(1 + x * x / 2))
    assert dist.t_cdf(x, 2) == pytest.approx(0.14645, abs=1e-5)
    assert dist.t_cdf(x, 2) == pytest.approx(closed, rel=1e-14)


@given(st.floats(-1e6, 1e6, allow_nan=False))
def test_cauchy_closed_form(x):
    # 1/2 + atan(x)/pi, evaluated without cancellation for large negative x
    exact = float(mp.mpf(1) / 2 + mp.atan(x) / mp.pi)
    assert dist.t_cdf(x, 1) == pytest.approx(exact, rel=1e-12, abs=1e-300)


@pytest.mark.parametrize("nu", [1.0, 2.5, 5.0, 30.0, 400.0])
def test_t_cdf_relative_accuracy(nu):
    xs = np.concatenate([-np.logspace(-2, 6, 40), np.linspace(0.1, 50, 10)])
    ref = np.array([float(mp_t_cdf(x, nu)) for x in xs])
    got = dist.t_cdf(xs, nu)
    live = ref > 1e-300  # below that both underflow to zero
    assert np.all(got[~live] < 1e-290)
    assert np.max(np.abs(got[live] / ref[live] - 1)) <= 1e-12


def test_t_cdf_gaussian_limit():
    xs = np.linspace(-6, 6, 241)
    assert np.max(np.abs(dist.t_cdf(xs, 1e6) - dist.normal_cdf(xs))) <= 1e-5
    assert np.array_equal(dist.t_cdf(xs, INF), dist.normal_cdf(xs))


@given(dofs, finite_x, finite_x)
def test_t_cdf_monotone(nu, a, b):
    lo, hi = min(a, b), max(a, b)
    assert dist.t_cdf(lo, nu) <= dist.t_cdf(hi, nu)


def test_t_quantile_examples():
    assert dist.t_quantile(0.5, 7) == 0.0
    assert dist.t_quantile(0.25, 1) == pytest.approx(-1.0, rel=1e-14)
    v = dist.t_quantile(1e-6, 5)
    assert float(mp_t_cdf(v, 5)) == pytest.approx(1e-6, rel=1e-8)
    assert v == pytest.approx(float(mp_t_quantile(1e-6, 5)), rel=1e-12)


@pytest.mark.parametrize("nu", [1.0, 2.0, 3.5, 5.0, 30.0, 400.0, 1e6])
def test_t_round_trip_log_grid(nu):
    p = np.logspace(-12, np.log10(0.5), 200)
    lower = dist.t_cdf(dist.t_quantile(p, nu), nu)
    assert np.max(np.abs(lower / p - 1)) <= 1e-11
    upper = dist.t_cdf(dist.t_quantile(1 - p, nu), nu)
    assert np.max(np.abs(upper - (1 - p))) <= 1e-11


def test_t_quantile_deep_tail_for_large_dof():
    # tails far below 1e-12 are reached inside the orthant quadrature
    p = np.logspace(-40, -13, 28)
    for nu in (50.0, 400.0):
        x = dist.t_quantile(p, nu)
        assert np.all(np.isfinite(x))
        ref = np.array([float(mp_t_cdf(v, nu)) for v in x])
        assert np.max(np.abs(ref / p - 1)) <= 1e-10


@pytest.mark.parametrize("bad", [0.0, 1.0, 2.0])
def test_t_quantile_domain(bad):
    with pytest.raises(DomainError):
        dist.t_quantile(bad, 3)


@pytest.mark.parametrize("nu", [0.0, -1.0, math.nan])
def test_invalid_dof(nu):
    with pytest.raises(DomainError):
        dist.t_cdf(0.5, nu)


# -- chi-square ---------------------------------------------------------------------

def test_chi_square_examples():
    assert dist.chi_square_cdf(0.0, 3) == 0.0
    assert dist.chi_square_cdf(2 * math.log(2), 2) == pytest.approx(0.5, rel=1e-14)
    assert dist.chi_square_cdf(1.386, 2) == pytest.approx(0.5, abs=1e-3)


@given(st.floats(0, 200))
def test_chi_square_two_dof_is_exponential(x):
    assert dist.chi_square_cdf(x, 2) == pytest.approx(-math.expm1(-x / 2), rel=1e-12, abs=1e-300)


def test_chi_square_small_argument_relative():
    for nu in (1.0, 5.0, 10.0):
        for x in (1e-8, 1e-3, 0.08):
            ref = mp.gammainc(mp.mpf(nu) / 2, 0, mp.mpf(x) / 2, regularized=True)
            assert dist.chi_square_cdf(x, nu) == pytest.approx(float(ref), rel=1e-12)


def test_chi_square_domain():
    with pytest.raises(DomainError):
        dist.chi_square_cdf(-1.0, 2)
    with pytest.raises(DomainError):
        dist.chi_square_cdf(1.0, INF)
    assert dist.chi_square_cdf(dist.chi_square_quantile(0.3, 4), 4) == pytest.approx(0.3, rel=1e-13)


# -- bivariate ------------------------------------------------------------------------

def test_bv_independent_median():
    assert dist.bv_elliptical_cdf(0, 0, 0) == pytest.approx(0.25, abs=1e-15)


@pytest.mark.parametrize("nu", [INF, 1.0, 4.0, 30.0])
@pytest.mark.parametrize("rho", [-0.95, -0.5, 0.0, 0.3, 0.8, 0.999])
def test_bv_median_orthant_formula(rho, nu):
    exact = 0.25 + math.asin(rho) / (2 * math.pi)
    assert dist.bv_elliptical_cdf(0.0, 0.0, rho, nu) == pytest.approx(exact, abs=1e-12)


@pytest.mark.parametrize("x, y, rho", [(-1.0, 0.5, 0.3), (1.2, 2.0, -0.6), (-3.0, -2.5, 0.9), (0.7, -0.4, 0.5)])
def test_bv_gaussian_matches_scipy(x, y, rho):
    ref = stats.multivariate_normal(mean=[0, 0], cov=[[1, rho], [rho, 1]]).cdf([x, y])
    assert dist.bv_elliptical_cdf(x, y, rho) == pytest.approx(ref, abs=1e-8)


def test_bv_deep_tail_relative_to_mpmath():
    # Gaussian diagonal orthant at about 1e-10 marginal probability
    x = dist.normal_quantile(1e-10)
    rho = 0.5
    inner = lambda s: mp.npdf(s) * mp.ncdf((x - rho * s) / mp.sqrt(1 - rho * rho))
    ref = float(mp.quad(inner, [-mp.inf, x - 5, x]))
    assert dist.bv_elliptical_cdf(x, x, rho) == pytest.approx(ref, rel=1e-9)


@given(dofs, st.floats(-5, 5), st.floats(-0.99, 0.99))
@settings(max_examples=25, deadline=None)
def test_bv_infinite_limit_is_marginal(nu, x, rho):
    assert dist.bv_elliptical_cdf(x, INF, rho, nu) == pytest.approx(dist.t_cdf(x, nu), abs=1e-10)
    assert dist.bv_elliptical_cdf(INF, x, rho, nu) == pytest.approx(dist.t_cdf(x, nu), abs=1e-10)
    assert dist.bv_elliptical_cdf(-INF, x, rho, nu) == 0.0


@given(dofs, st.floats(-4, 4), st.floats(-4, 4), st.floats(0.01, 1.0), st.floats(-0.98, 0.98))
@settings(max_examples=30, deadline=None)
def test_bv_monotone(nu, x, y, step, rho):
    base = dist.bv_elliptical_cdf(x, y, rho, nu)
    assert dist.bv_elliptical_cdf(x + step, y, rho, nu) >= base - 1e-13
    assert dist.bv_elliptical_cdf(x, y + step, rho, nu) >= base - 1e-13
    assert dist.bv_elliptical_cdf(x, y, min(rho + step, 0.99), nu) >= base - 1e-13


def test_bv_domain():
    with pytest.raises(DomainError):
        dist.bv_elliptical_cdf(0, 0, 1.0)
    with pytest.raises(DomainError):
        dist.bv_elliptical_cdf(math.nan, 0, 0.2)


@pytest.mark.slow
def test_bv_matches_monte_carlo():
    """20 random orthants against 1e7-draw NumPy samples, 3 binomial s.e."""
    pick = np.random.default_rng(20240601)
    n, chunk = 10_000_000, 2_000_000
    for _ in range(20):
        nu = float(pick.choice([1.0, 3.0, 5.0, 12.0, INF]))
        rho = float(pick.uniform(-0.9, 0.95))
        x, y = (float(v) for v in pick.uniform(-2.5, 1.5, size=2))
        rng = np.random.default_rng(pick.integers(2**32))
        hits = 0
        for _ in range(n // chunk):
            a, b = numpy_pairs(chunk, rho, nu, rng)
            hits += int(np.count_nonzero((a <= x) & (b <= y)))
        p_mc = hits / n
        p = dist.bv_elliptical_cdf(x, y, rho, nu)
        assert abs(p - p_mc) <= 3 * binomial_se(p, n), (x, y, rho, nu, p, p_mc)


# -- bivariate t density ---------------------------------------------------------------

@pytest.mark.parametrize("nu", [1.0, 5.0, 30.0])
@pytest.mark.parametrize("rho", [0.0, 0.6, -0.3])
def test_bv_t_density_at_origin(nu, rho):
    assert dist.bv_t_log_density(0.0, 0.0, rho, nu) == pytest.approx(
        -math.log(2 * math.pi * math.sqrt(1 - rho * rho)), rel=1e-14)


def test_bv_t_density_integrates_to_one():
    nu, rho = 5.0, 0.6
    # outside [-1000, 1000]^2 the t(5) mass is of order 1e-14
    f = lambda y, x: math.exp(dist.bv_t_log_density(x, y, rho, nu))
    total, _ = integrate.dblquad(f, -1e3, 1e3, -1e3, 1e3, epsabs=1e-10, epsrel=1e-10)
    assert total == pytest.approx(1.0, abs=1e-6)


def test_bv_t_density_marginal():
    nu, rho, x = 4.0, -0.4, 1.3
    f = lambda y: math.exp(dist.bv_t_log_density(x, y, rho, nu))
    marg, _ = integrate.quad(f, -np.inf, np.inf, epsabs=1e-13)
    assert marg == pytest.approx(stats.t.pdf(x, nu), rel=1e-9)


@given(finite_x, finite_x, st.floats(-0.99, 0.99), st.floats(1, 50))
def test_bv_t_density_exchangeable(x, y, rho, nu):
    assert dist.bv_t_log_density(x, y, rho, nu) == pytest.approx(dist.bv_t_log_density(y, x, rho, nu), rel=1e-14)


def test_bv_t_density_domain():
    with pytest.raises(DomainError):
        dist.bv_t_log_density(0, 0, 1.0, 3)
    with pytest.raises(DomainError):
        dist.bv_t_log_density(0, 0, 0.2, INF)


def test_bv_cdf_accepts_family():
    assert dist.bv_elliptical_cdf(-1.0, -0.5, 0.3, CopulaFamily.student_t(4)) == \
        dist.bv_elliptical_cdf(-1.0, -0.5, 0.3, 4.0)
    assert dist.bv_elliptical_cdf(0.0, 0.0, 0.5, CopulaFamily.gaussian()) == pytest.approx(1 / 3, abs=1e-12)
