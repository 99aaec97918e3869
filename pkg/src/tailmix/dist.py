"""Normal, Student-t and chi-square distribution primitives.

Univariate functions go through :mod:`scipy.special` (the Student-t CDF and
the regularized incomplete beta and gamma functions and their inverses), so
lower-tail probabilities keep full relative precision far below 1e-12.  Degrees of freedom are plain floats;
``INF`` (``math.inf``) selects the Gaussian limit exactly.

Bivariate orthant probabilities are one-dimensional integrals of the
conditional distribution of ``Y`` given ``X``.  Writing ``X = F^{-1}(p e^{-t})``
turns ``P(X <= x, Y <= y)`` into ``p * int_0^inf P(Y <= y | X) e^{-t} dt``,
an integrand that is smooth in ``t`` for both families and whose size is set
by ``p = F(x)``.  That keeps relative accuracy deep in the joint tail.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special
from scipy.integrate import quad_vec

INF = math.inf

# e^{-40} ~ 4e-18: truncation error of the exponential substitution,
# relative to the marginal probability p.
_T_MAX = 40.0
_EPSABS = 1e-16
_EPSREL = 1e-13


class DomainError(ValueError):
    """Argument outside the domain of a distribution function."""


def check_dof(nu) -> float:
    """Validate a degrees-of-freedom value; ``INF`` means Gaussian."""
    nu = float(nu)
    if math.isnan(nu) or nu <= 0:
        raise DomainError(f"degrees of freedom must be positive, got {nu}")
    return nu


def _check_finite(x, name="x"):
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise DomainError(f"{name} must be finite")
    return x


def _check_open_unit(p, name="p"):
    p = np.asarray(p, dtype=float)
    if not np.all((p > 0) & (p < 1)):
        raise DomainError(f"{name} must lie strictly between 0 and 1")
    return p


def _scalar(a):
    return float(a) if np.ndim(a) == 0 else a


# -- univariate, unchecked array kernels ------------------------------------

def _t_cdf(x, nu):
    x = np.asarray(x, dtype=float)
    if math.isinf(nu):
        return special.ndtr(x)
    # stdtr picks I_w(nu/2, 1/2) or its complement by argument, so both tails
    # keep full relative precision
    return special.stdtr(nu, x)


def _t_quantile(p, nu):
    p = np.asarray(p, dtype=float)
    if math.isinf(nu):
        return special.ndtri(p)
    shape = p.shape
    p = p.ravel()
    tail = np.minimum(p, 1.0 - p)
    b = special.betaincinv(0.5 * nu, 0.5, 2.0 * tail)
    # x^2 = nu (1 - b) / b.  When b > 1/2 (the centre, or any tail once nu
    # is large) c = 1 - b comes from the complementary inverse instead, so
    # neither 1 - b nor 1 - 2 tail is ever formed.
    with np.errstate(divide="ignore", over="ignore"):
        x = np.sqrt(nu * ((1.0 - b) / b))
        central = b > 0.5
        if np.any(central):
            c = special.betainccinv(0.5, 0.5 * nu, 2.0 * tail[central])
            x[central] = np.sqrt(nu * (c / (1.0 - c)))
    return np.where(p < 0.5, -x, x).reshape(shape)


def t_log_pdf(x, nu):
    """Log density of the standard Student-t (Gaussian when ``nu`` is INF)."""
    x = np.asarray(x, dtype=float)
    if math.isinf(nu):
        return -0.5 * x * x - 0.5 * math.log(2 * math.pi)
    const = (special.gammaln(0.5 * (nu + 1)) - special.gammaln(0.5 * nu)
             - 0.5 * math.log(nu * math.pi))
    return const - 0.5 * (nu + 1) * np.log1p(x * x / nu)


# -- public univariate API --------------------------------------------------

def normal_cdf(x):
    """Standard normal distribution function.

    Raises
    ------
    DomainError
        If any element of `x` is not finite.
    """
    return _scalar(special.ndtr(_check_finite(x)))


def normal_quantile(p):
    """Inverse of :func:`normal_cdf` on ``(0, 1)``."""
    return _scalar(special.ndtri(_check_open_unit(p)))


def t_cdf(x, nu):
    """Student-t distribution function with `nu` degrees of freedom.

    Equal to ``I_{nu/(nu+x^2)}(nu/2, 1/2) / 2`` in the lower tail and
    evaluated with relative precision there, even for tiny probabilities.
    ``nu = INF`` gives :func:`normal_cdf`.
    """
    return _scalar(_t_cdf(_check_finite(x), check_dof(nu)))


def t_quantile(p, nu):
    """Quantile function of the Student-t distribution.

    Inverts the incomplete beta function directly rather than iterating on
    the distribution function, so it stays accurate for ``p`` down to the
    smallest normal doubles (for ``nu >= 1``).
    """
    return _scalar(_t_quantile(_check_open_unit(p), check_dof(nu)))


def chi_square_cdf(x, nu):
    """Chi-square distribution function, ``P(nu/2, x/2)``."""
    x = _check_finite(x)
    if np.any(x < 0):
        raise DomainError("chi-square argument must be nonnegative")
    nu = check_dof(nu)
    if math.isinf(nu):
        raise DomainError("chi-square needs finite degrees of freedom")
    return _scalar(special.gammainc(0.5 * nu, 0.5 * x))


def chi_square_quantile(p, nu):
    """Quantile function of the chi-square distribution."""
    p = _check_open_unit(p)
    return _scalar(2.0 * special.gammaincinv(0.5 * check_dof(nu), p))


# -- bivariate ---------------------------------------------------------------

def conditional_cdf(y, s, rho, nu):
    """``P(Y <= y | X = s)`` for the standardized bivariate normal or t.

    Given ``X = s`` the bivariate t has ``Y`` distributed as ``rho s`` plus a
    t with ``nu + 1`` degrees of freedom scaled by
    ``sqrt((1 - rho^2)(nu + s^2)/(nu + 1))``.  Arguments broadcast; ``s``
    may be huge (heavy-tailed quantiles), so it is normalized first.
    """
    rho = np.asarray(rho, dtype=float)
    c = np.sqrt((1.0 - rho) * (1.0 + rho))
    if math.isinf(nu):
        return special.ndtr((y - rho * s) / c)
    s = np.asarray(s, dtype=float)
    m = np.maximum(np.abs(s), 1.0)
    a = (y / m - rho * (s / m)) / (c * np.sqrt((nu / (m * m) + (s / m) ** 2) / (nu + 1.0)))
    return _t_cdf(a, nu + 1.0)


def orthant_ratio(p, y, rho, nu):
    """``P(X <= F^{-1}(p), Y <= y) / p`` by adaptive quadrature.

    Vectorized over `rho`; the quantile ``F^{-1}(p e^{-t})`` is shared by all
    correlations at each abscissa.
    """
    rho = np.atleast_1d(np.asarray(rho, dtype=float))

    def integrand(t):
        e = math.exp(-t)
        s = float(_t_quantile(p * e, nu))
        return conditional_cdf(y, s, rho, nu) * e

    val, _ = quad_vec(integrand, 0.0, _T_MAX, epsabs=_EPSABS, epsrel=_EPSREL,
                      norm="max", limit=20000)
    return np.clip(val, 0.0, 1.0)


def bv_elliptical_cdf(x, y, rho, nu=INF):
    """Bivariate standard normal (``nu = INF``) or t distribution function.

    Parameters
    ----------
    x, y : float
        Upper limits; ``+-inf`` are accepted.
    rho : float
        Correlation in ``(-1, 1)``.
    nu : float or CopulaFamily
        Degrees of freedom, or a family carrying them.

    Returns
    -------
    float
        ``P(X <= x, Y <= y)``, absolute error below 1e-12.
    """
    nu = check_dof(getattr(nu, "nu", nu))
    x, y = float(x), float(y)
    if math.isnan(x) or math.isnan(y):
        raise DomainError("x and y must not be NaN")
    rho = float(rho)
    if not -1.0 < rho < 1.0:
        raise DomainError(f"correlation must lie in (-1, 1), got {rho}")
    if x == -INF or y == -INF:
        return 0.0
    if x == INF:
        return float(_t_cdf(y, nu))
    if y == INF:
        return float(_t_cdf(x, nu))
    if x > y:
        x, y = y, x
    if x > 0.0:
        # both limits positive: reflect through the origin
        upper = bv_elliptical_cdf(-x, -y, rho, nu)
        return float(_t_cdf(x, nu) + _t_cdf(y, nu) - 1.0 + upper)
    p = float(_t_cdf(x, nu))
    if p == 0.0:
        return 0.0
    return float(p * orthant_ratio(p, y, rho, nu)[0])


def bv_t_log_density(x, y, rho, nu):
    """Log density of the standardized bivariate t with correlation `rho`."""
    nu = check_dof(nu)
    if math.isinf(nu):
        raise DomainError("bivariate t density needs finite degrees of freedom")
    rho = np.asarray(rho, dtype=float)
    if np.any(np.abs(rho) >= 1):
        raise DomainError("correlation must lie in (-1, 1)")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    det = (1.0 - rho) * (1.0 + rho)
    q = (x * x - 2.0 * rho * x * y + y * y) / det
    const = special.gammaln(0.5 * nu + 1.0) - special.gammaln(0.5 * nu) - math.log(nu * math.pi)
    return _scalar(const - 0.5 * np.log(det) - (0.5 * nu + 1.0) * np.log1p(q / nu))
